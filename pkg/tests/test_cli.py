import subprocess
import sys

import pytest

from supercompact.cli import main

from conftest import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestExitCodes:
    def test_group_check_pass(self, capsys):
        code, out, _ = run(capsys, "group-check", "--group", DATA / "z4.grp")
        assert code == 0
        assert "order: 4" in out and "normal subgroups: 3" in out and "resolution kernel orders: 2 2" in out

    def test_group_check_non_associative(self, capsys):
        code, out, _ = run(capsys, "group-check", "--group", DATA / "sub3.grp")
        assert code == 1 and "violated: associativity" in out

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "group-check", "--group", DATA / "nope.grp")
        assert code == 2 and "input error" in err

    def test_malformed(self, capsys, tmp_path):
        bad = tmp_path / "bad.sb"
        bad.write_text("arc 0 1/4\nwobble\n")
        code, _, err = run(capsys, "verify-binary", "--subbase", bad)
        assert code == 2 and "bad.sb:2:" in err

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as e:
            main(["group-check", "--group", str(DATA / "z4.grp"), "--frobnicate"])
        assert e.value.code == 2

    def test_verify_binary(self, capsys):
        code, out, _ = run(capsys, "verify-binary", "--subbase", DATA / "short_arcs8.sb")
        assert code == 0 and "binary: pass" in out
        code, out, _ = run(capsys, "verify-binary", "--subbase", DATA / "bad_arcs.sb")
        assert code == 1
        for line in ("arc 0 2/5", "arc 7/20 2/5", "arc 7/10 2/5"):
            assert line in out

    def test_budget_exceeded(self, capsys):
        code, _, err = run(capsys, "verify-binary", "--subbase", DATA / "short_arcs8.sb", "--budget", "1")
        assert code == 1 and "budget" in err

    def test_criterion(self, capsys):
        code, out, _ = run(capsys, "criterion", "--subbase", DATA / "short_arcs8.sb", "--resolution", "8")
        assert code == 0 and "criterion: pass" in out
        code, out, _ = run(capsys, "criterion", "--subbase", DATA / "bad_arcs.sb")
        assert code == 1 and "intersection closed: FAIL" in out
        code, out, _ = run(capsys, "criterion", "--subbase", DATA / "bad_arcs.sb", "--close")
        assert code == 1 and "criterion: FAIL" in out

    def test_decompose(self, capsys):
        code, out, _ = run(capsys, "decompose", "--pres", DATA / "torus2_mod_diag.pres", "--grid", "8")
        assert code == 0
        assert "step 0: FiniteKernel(2)" in out and "step 2: ProductBySimple(T)" in out
        assert "witness checks (denominator 8):" in out and "FAIL" not in out

    def test_sequence(self, capsys):
        code, out, _ = run(capsys, "sequence", "--sequence", DATA / "solenoid2.seq")
        assert code == 0 and "stages: 3" in out
        code, out, _ = run(capsys, "sequence", "--pres", DATA / "z4.pres")
        assert code == 0 and "valid: pass" in out

    def test_solenoid(self, capsys):
        code, out, _ = run(capsys, "solenoid", "--n", "3", "--depth", "2")
        assert code == 0 and "composite kernel order: 9" in out
        code, _, _ = run(capsys, "solenoid", "--n", "1")
        assert code == 2

    def test_semidirect(self, capsys):
        code, out, _ = run(capsys, "semidirect-probe", "--samples", "200")
        assert code == 0 and "normal closure of one flip: 18" in out
        code, out, _ = run(capsys, "semidirect-probe", "--samples", "10", "--grid", "8")
        assert code == 0 and "index-2" in out

    def test_extend_and_output(self, capsys, tmp_path):
        target = tmp_path / "z4.sb"
        code, out, _ = run(capsys, "extend", "--sequence", DATA / "z2_z4.seq", "--output", target)
        assert code == 0 and "result: pass" in out
        code, out, _ = run(capsys, "verify-binary", "--subbase", target)
        assert code == 0

    def test_mills(self, capsys):
        code, out, _ = run(capsys, "mills", "--group", DATA / "z4.grp")
        assert code == 0 and out.count("case: LocalHomeo") == 2


class TestDeterminism:
    def test_byte_identical(self, capsys):
        args = ["semidirect-probe", "--samples", "300", "--seed", "7"]
        first = run(capsys, *args)
        second = run(capsys, *args)
        assert first == second

    def test_seed_changes_nothing_on_pass(self, capsys):
        a = run(capsys, "semidirect-probe", "--samples", "50", "--seed", "1")[1]
        b = run(capsys, "semidirect-probe", "--samples", "50", "--seed", "2")[1]
        assert a.splitlines()[1:] == b.splitlines()[1:]

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "supercompact", "group-check", "--group", str(DATA / "z2.grp")],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and "order: 2" in proc.stdout
