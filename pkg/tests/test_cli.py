import json

import pytest
from click.testing import CliRunner

from vacalc.cli import main
from vacalc.manifest import bundled_manifests

BUNDLED = {p.stem: str(p) for p in bundled_manifests()}


def va(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env)


def test_ope_text_and_json():
    r = va("ope", "-p", "vinfty3", "--a", "T0", "--b", "T0")
    assert r.exit_code == 0 and r.output.strip() == "pole 4: one"
    r = va("--format", "json", "ope", "-p", "virasoro", "--a", "L", "--b", "L")
    assert json.loads(r.output)["poles"] == {"4": "(1/2*c)*one", "2": "2*NO(L)", "1": "NO(d^1(L))"}


def test_nprod_and_negative_index():
    r = va("nprod", "-p", "virasoro", "--param", "1/2", "-n", "3", "--a", "L", "--b", "L")
    assert r.output.strip() == "1/4*one"
    r = va("nprod", "-p", "virasoro", "-n", "-1", "--a", "L", "--b", "L")
    assert r.output.strip() == "NO(L, L)"


def test_reduce_success_and_failure():
    r = va("reduce", "-p", "vinfty3", "--target", "2*NO(T0, T0) - d^2(T0)", "--gens", "T0", "--weight", "4")
    assert r.exit_code == 0
    assert "residual: 0" in r.output
    r = va("reduce", "-p", "vinfty3", "--target", "W_4_0", "--gens", "W_0_0", "--maxdeg", "2")
    assert r.exit_code == 1 and "NOT IN SPAN" in r.output
    r = va("reduce", "-p", "vinfty3", "--target", "T0", "--gens", "T0", "--weight", "3")
    assert r.exit_code == 2


def test_char():
    r = va("char", "--weights", "2", "--truncate", "6")
    assert r.output.strip() == "1 + q^2 + q^3 + 2q^4 + 2q^5 + 4q^6"
    r = va("--format", "json", "char", "--weights", "2", "--truncate", "13", "--sym3", "--compare",
           "prod (q^2;q) (q^4;q) (q^6;q)^2 (q^8;q)^2 (q^9;q) (q^10;q)^2 (q^11;q) (q^12;q)^3")
    assert json.loads(r.output)["first_difference"] == 12
    r = va("char", "--weights", "1", "--truncate", "4", "--compare", "1 + q + 2q^2 + 3q^3 + 5q^4")
    assert "equal through q^4" in r.output
    assert va("char", "--weights", "0", "--truncate", "3").exit_code == 2
    assert va("char", "--weights", "2", "--truncate", "3", "--compare", "1 + + q").exit_code == 2


def test_singular_exit_codes():
    r = va("singular", "-p", "virasoro", "--param", "1/2", "--vector", "v1")
    assert r.exit_code == 0 and r.output.strip() == "PASS weight 6"
    r = va("singular", "-p", "virasoro", "--param", "1/3", "--vector", "v1")
    assert r.exit_code == 1 and r.output.startswith("FAIL")


def test_consistency():
    r = va("consistency", "-p", "g2prin", "--param", "-3")
    assert r.exit_code == 0 and r.output.startswith("PASS")
    r = va("consistency", "-p", "virasoro", "--max-weight", "4")
    assert r.exit_code == 0


@pytest.mark.parametrize("args", [
    ("ope", "-p", "e8", "--a", "L", "--b", "L"),
    ("ope", "-p", "virasoro", "--a", "NO(L", "--b", "L"),
    ("ope", "-p", "virasoro", "--a", "X", "--b", "L"),
    ("nprod", "-p", "virasoro", "--a", "L", "--b", "L"),
    ("--format", "xml", "manifests"),
    ("run", "/nonexistent.json"),
])
def test_usage_errors_exit_2(args):
    assert va(*args).exit_code == 2


def test_run_manifests_exit_codes(tmp_path):
    assert va("--threads", "4", "run", BUNDLED["ising"]).exit_code == 0
    r = va("run", BUNDLED["negative-control"])
    assert r.exit_code == 1 and "residual:" in r.output
    assert va("run", BUNDLED["verbatim-forms"]).exit_code == 1
    bad = tmp_path / "dup.json"
    bad.write_text(json.dumps({"checks": [{"id": "a", "kind": "skew"}, {"id": "a", "kind": "skew"}]}))
    assert va("run", str(bad)).exit_code == 2


def test_run_only_and_json():
    r = va("--format", "json", "run", BUNDLED["ising"], "--only", "coupling")
    data = json.loads(r.output)
    assert data["passed"] == 1 and data["checks"][0]["id"] == "coupling"


def test_text_and_json_carry_same_numbers():
    t = va("nprod", "-p", "g2sub", "--param", "-16/5", "-n", "3", "--a", "L1", "--b", "L1").output.strip()
    j = json.loads(va("--format", "json", "nprod", "-p", "g2sub", "--param", "-16/5", "-n", "3",
                      "--a", "L1", "--b", "L1").output)
    assert j["product"] == t == "-11/5*one"


def test_manifests_listing():
    r = va("manifests")
    assert sorted(r.output.split()) == sorted(BUNDLED.values())


def test_cache_dir_written_and_reused(tmp_path):
    env = {"VA_CACHE_DIR": str(tmp_path)}
    args = ("nprod", "-p", "g2prin", "--param", "-67/21", "-n", "0", "--a", "W", "--b", "NO(W, W)")
    first = va(*args, env=env)
    files = list(tmp_path.glob("*.pkl"))
    assert first.exit_code == 0 and len(files) == 1
    second = va(*args, env=env)
    assert second.output == first.output
    (tmp_path / files[0].name).write_bytes(b"garbage")
    assert va(*args, env=env).output == first.output
