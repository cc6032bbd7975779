import csv
import io
import subprocess
import sys

import pytest

from qcstab import cli, critical
from qcstab.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, ConfigError, RunConfig, main, parse_range
from qcstab.errors import BracketError, QCError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestParseRange:
    def test_inclusive_colon_range(self):
        assert parse_range("2:7:0.25") == [2 + 0.25 * i for i in range(21)]
        assert parse_range("3:8:1") == [3.0, 4.0, 5.0, 6.0, 7.0, 8.0]

    def test_lists_and_scalars(self):
        assert parse_range("2, 3.5,5") == [2.0, 3.5, 5.0]
        assert parse_range("4") == [4.0]

    @pytest.mark.parametrize("bad", ["2:7", "7:2:1", "2:7:0", "a,b", "2:x:1"])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            parse_range(bad)


class TestValidate:
    def test_defaults(self):
        params, pots = RunConfig("table-cerr").validate()
        assert (params.n_half, params.k_interface) == (40, 10) and pots == []

    @pytest.mark.parametrize("kw", [
        {"command": "bogus"},
        {"command": "sweep", "n_half": 9, "k_interface": 10},
        {"command": "sweep", "alpha_range": []},
        {"command": "sweep", "alpha_range": [0.5]},
        {"command": "table-cerr", "potentials": ["morse:beta=1"]},
        {"command": "critical-strains", "potentials": ["lj", "morse:alpha=3"]},
        {"command": "verify", "groups": ["nope"]},
        {"command": "sweep", "alpha_range": [3.0], "jobs": 0},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            RunConfig(**kw).validate()


class TestTableCerr:
    def test_default_table(self, capsys):
        code, out, _ = run(capsys, "table-cerr")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "potential,c_err"
        rows = table(out)
        assert [r["potential"] for r in rows] == [f"morse:alpha={a}" for a in range(2, 8)] + ["lj"]
        assert float(rows[0]["c_err"]) == pytest.approx(1.0877, abs=1e-3)
        assert float(rows[-1]["c_err"]) == pytest.approx(0.0635, abs=1e-3)

    def test_single_potential(self, capsys):
        code, out, _ = run(capsys, "table-cerr", "--potential", "morse:alpha=5")
        assert code == EXIT_OK and len(table(out)) == 1

    def test_solver_error_sets_exit_code(self, capsys, monkeypatch):
        def boom(p):
            raise QCError("forced")

        monkeypatch.setattr(cli, "c_err", boom)
        code, out, err = run(capsys, "table-cerr", "--potential", "lj")
        assert code == EXIT_SOLVER
        assert table(out)[0]["c_err"] == "nan" and "forced" in err


class TestCriticalStrains:
    def test_all_kinds(self, capsys):
        code, out, _ = run(capsys, "critical-strains", "--potential", "morse:alpha=5", "--n", "16", "--k", "4")
        assert code == EXIT_OK
        rows = table(out)
        assert [r["kind"] for r in rows] == ["F0", "Fc_star", "Fa_star", "Ftilde_qce", "Fqce_star", "Fqce_at_yF"]
        v = {r["kind"]: float(r["value"]) for r in rows}
        assert v["F0"] < v["Ftilde_qce"] < v["Fqce_at_yF"] < v["Fa_star"]

    def test_requires_potential(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["critical-strains"])
        assert info.value.code == EXIT_CONFIG


class TestSweep:
    ARGS = ("sweep", "--alpha", "3,5", "--n", "16", "--k", "4")

    def test_byte_identical_runs(self, capsys):
        first = run(capsys, *self.ARGS)
        second = run(capsys, *self.ARGS)
        assert first[0] == EXIT_OK and first[1] == second[1]
        assert first[1].splitlines()[0] == ",".join(critical.SWEEP_COLUMNS)

    def test_jobs_do_not_change_output(self, capsys):
        assert run(capsys, *self.ARGS, "--jobs", "2")[1] == run(capsys, *self.ARGS)[1]

    def test_bad_chain_is_config_error(self, capsys):
        code, out, err = run(capsys, "sweep", "--n", "9", "--k", "10")
        assert code == EXIT_CONFIG and out == "" and "chain size" in err

    def test_failed_row_exit_code(self, capsys, monkeypatch):
        def boom(alpha, params):
            raise BracketError("forced")

        monkeypatch.setattr(critical, "sweep_row", boom)
        code, out, err = run(capsys, *self.ARGS)
        assert code == EXIT_SOLVER
        assert len(table(out)) == 2 and "BracketError: forced" in err

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "sweep.csv"
        code, out, _ = run(capsys, *self.ARGS, "--out", str(path))
        assert code == EXIT_OK and out == ""
        assert path.read_text() == run(capsys, *self.ARGS)[1]

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run(capsys, *self.ARGS, "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == EXIT_CONFIG and "cannot write" in err


class TestLemmaScaling:
    def test_slope_reported(self, capsys):
        code, out, err = run(capsys, "lemma-scaling", "--n", "16", "--k", "4")
        assert code == EXIT_OK
        assert len(table(out)) == 6
        slope = float(err.split("slope")[1].split(",")[0])
        assert 0.9 <= slope <= 1.1


class TestVerify:
    def test_all_pass(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert all(line.startswith("PASS") for line in lines[:-1])
        assert lines[-1].endswith("checks passed")

    def test_group_filter(self, capsys):
        _, out, _ = run(capsys, "verify", "--group", "mu", "--group", "ghost")
        body = out.splitlines()[:-1]
        assert body and all(("[mu]" in line) or ("[ghost]" in line) for line in body)

    def test_seed_determinism(self, capsys):
        a = run(capsys, "verify", "--group", "fd", "--seed", "7")[1]
        b = run(capsys, "verify", "--group", "fd", "--seed", "7")[1]
        assert a == b

    def test_failure_exit_code(self, capsys, monkeypatch):
        from qcstab import verify

        monkeypatch.setattr(verify, "run", lambda groups, seed: [verify.Check("mu", "forced", False, "x")])
        code, out, _ = run(capsys, "verify")
        assert code == EXIT_VERIFY and "0/1" in out

    def test_unknown_group(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["verify", "--group", "nope"])
        assert info.value.code == EXIT_CONFIG


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qcstab", "table-cerr", "--potential", "lj"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("potential,c_err\nlj,0.063")
