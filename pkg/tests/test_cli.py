import json
import subprocess
import sys

import pytest

from jacobibv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_jacobi_presets(capsys):
    for preset in ("contact:1", "contact:2", "gcs:1", "gcs:2:1,0,0,1", "const:0,1;-1,0"):
        code, out = run(capsys, "check-jacobi", "--preset", preset)
        assert code == 0, out
        assert "status=pass" in out


def test_modular_prints_computed_values(capsys):
    code, out = run(capsys, "modular", "--preset", "contact:1")
    assert code == 0
    assert "divE=0" in out
    assert "V=@z" in out
    assert "V_class='-2*@z + (0) d_t'" in out


def test_verify_deterministic(capsys):
    args = ("verify", "bv-square", "--preset", "contact:1", "--trials", "100", "--seed", "7")
    code, first = run(capsys, *args)
    assert code == 0
    _, second = run(capsys, *args)
    assert first == second


def test_json_records(capsys):
    code, out = run(capsys, "verify", "d-omega", "studi", "--preset", "omega:enriched", "--trials", "3", "--json")
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert [r["name"] for r in records] == ["d-omega", "studi"]
    for r in records:
        assert set(r) == {"name", "status", "residual_pretty", "seed", "trial"}
        assert r["status"] == "pass"


def test_failure_reports_residual(capsys):
    code, out = run(capsys, "check-omega-poisson", "--preset", "omega:plane-neg")
    assert code == 1
    assert "status=fail" in out and "@x1^@x2" in out


def test_studi_jacobi_failure_exit_code(capsys):
    code, out = run(capsys, "verify", "studi-jacobi", "--preset", "omega:enriched", "--trials", "20")
    assert code == 1
    assert "trial=" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("check-jacobi", "--preset", "nope:1"),
        ("check-jacobi", "--preset", "contact:0"),
        ("verify", "no-such-suite"),
        ("verify", "studi", "--preset", "omega:plane"),
        ("check-omega-poisson", "--preset", "contact:1"),
        ("betti", "--preset", "contact:1"),
        ("bv", "--preset", "contact:1"),
        ("bv", "--preset", "contact:1", "--first", "dq^"),
        ("check-jacobi", "--file", "/nonexistent/file.jac"),
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, _ = run(capsys, *argv)
    assert code == 2


def test_bv_and_sigma_inputs(capsys):
    code, out = run(capsys, "bv", "--preset", "contact:1", "--first", "p*dq")
    assert code == 0 and "first=-1" in out
    code, out = run(capsys, "sigma", "--preset", "contact:1", "--first", "q*z")
    assert code == 0 and "second=-q" in out


def test_duality_and_betti(capsys):
    code, out = run(capsys, "duality", "--preset", "const:0,1;-1,0", "--max-degree", "2")
    assert code == 0
    code, out = run(capsys, "betti", "--preset", "const:0,1;-1,0", "--operator", "sigma", "--max-degree", "1")
    assert code == 0 and "1, 4, 5, 2" in out


def test_elw_commands(capsys):
    code, out = run(capsys, "elw", "--preset", "contact:1")
    assert code == 0
    code, out = run(capsys, "elw", "--preset", "omega:plane")
    assert code == 1  # the displayed closed forms differ from the derived section when E != 0


def test_counterexample(capsys):
    code, out = run(capsys, "counterexample-nonstrong", "--preset", "contact:1")
    assert code == 0 and "dq" in out


def test_file_input(tmp_path, capsys):
    path = tmp_path / "plane.jac"
    path.write_text("chart dim=2 coords=x,y\nkind omega-poisson\nbivector Q = @x^@y\nvector E = x*@x\nform2 Om = dx^dy\n")
    code, out = run(capsys, "check-omega-poisson", "--file", str(path))
    assert code == 0, out
    path.write_text("chart dim=2 coords=x,y\nbivector L = dx^dy\n")
    code, out = run(capsys, "check-jacobi", "--file", str(path))
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "jacobibv", "check-jacobi", "--preset", "contact:1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
