import json
import os

import pytest
from gmpy2 import mpq

from latline.cli import fmt, main, parse_line, parse_real
from latline.exactnum import BigFloat, Rational, Surd


class TestParsing:
    def test_rational(self):
        assert parse_real("7") == Rational(7)
        assert parse_real("-3/5") == Rational(-3, 5)

    def test_named_surds(self):
        assert parse_real("sqrt2") == Surd(0, 1, 2)
        assert parse_real("phi") == Surd(mpq(1, 2), mpq(1, 2), 5)

    def test_surd_forms(self):
        assert parse_real("1/2+1/2*sqrt(5)") == Surd(mpq(1, 2), mpq(1, 2), 5)
        assert parse_real("2-sqrt(2)") == Surd(2, -1, 2)
        assert parse_real("3/4*sqrt(7)") == Surd(0, mpq(3, 4), 7)

    def test_decimal_becomes_bigfloat(self, capsys):
        v = parse_real("0.125")
        assert isinstance(v, BigFloat)
        assert "big float" in capsys.readouterr().err

    def test_line(self):
        a, b = parse_line("sqrt2,sqrt3")
        assert a == Surd(0, 1, 2) and b == Surd(0, 1, 3)

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_real("sqrt(-1)")
        with pytest.raises(ValueError):
            parse_real("banana")

    def test_fmt_30_digits(self):
        s = fmt(Rational(1, 3))
        assert s.startswith("0.3333333333333333333333333333")


class TestExitCodes:
    def test_invalid_subcommand_is_2(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_invalid_flag_is_2(self, capsys):
        assert main(["scan", "--line", "sqrt2,sqrt3", "--beta", "1/7", "--no-such-flag"]) == 2

    def test_bad_precision_is_2(self, capsys):
        assert main(["scan", "--line", "sqrt2,sqrt3", "--beta", "1/7", "--precision-bits", "8"]) == 2

    def test_budget_error_is_1(self, tmp_path, capsys):
        code = main(
            [
                "bohr", "--line", "sqrt2,sqrt3", "--q-ladder", "512",
                "--budget-cells", "100", "--out", str(tmp_path),
            ]
        )
        assert code == 1


class TestRuns:
    def test_scan_writes_csv_and_manifest(self, tmp_path, capsys):
        code = main(
            [
                "scan", "--line", "sqrt2,sqrt3", "--beta", "3/64*sqrt(7)",
                "--nmax", "5000", "--out", str(tmp_path), "--check",
            ]
        )
        assert code == 0
        csv_text = (tmp_path / "scan.csv").read_bytes()
        assert csv_text.startswith(b"n,value\r\n")
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["subcommand"] == "scan"
        assert manifest["precision_bits"] == 192
        assert "scan.csv" in manifest["outputs"]

    def test_replay_is_byte_identical(self, tmp_path, capsys):
        args = [
            "scan", "--line", "sqrt2,sqrt3", "--beta", "5/64*sqrt(7)",
            "--nmax", "3000",
        ]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / "scan.csv").read_bytes() == (
            tmp_path / "b" / "scan.csv"
        ).read_bytes()

    def test_append_only_no_clobber(self, tmp_path, capsys):
        args = [
            "scan", "--line", "sqrt2,sqrt3", "--beta", "1/7", "--nmax", "100",
            "--out", str(tmp_path),
        ]
        assert main(args) == 0
        assert main(args) == 0
        names = sorted(os.listdir(tmp_path))
        assert "scan.csv" in names and "scan-2.csv" in names
        assert "manifest.json" in names and "manifest-2.json" in names

    def test_bohr_check_mode(self, tmp_path, capsys):
        code = main(
            [
                "bohr", "--line", "sqrt2,sqrt3", "--q-ladder", "64",
                "--delta", "qpow:-0.5", "--out", str(tmp_path), "--check",
            ]
        )
        assert code == 0
        text = (tmp_path / "bohr.csv").read_text()
        assert text.splitlines()[0] == "Q,delta,count_B,count_P,l1l2l3,contained"

    def test_equidist_check(self, tmp_path, capsys):
        code = main(
            [
                "equidist", "--line", "sqrt2,sqrt3", "--t", "4", "--s", "10",
                "--thetas", "1/5,3/10", "--samples", "200",
                "--out", str(tmp_path), "--check",
            ]
        )
        assert code == 0

    def test_reduce_check(self, tmp_path, capsys):
        code = main(["reduce", "--trials", "25", "--out", str(tmp_path), "--check"])
        assert code == 0

    def test_loglaw_small(self, tmp_path, capsys):
        code = main(
            [
                "loglaw", "--line", "sqrt2,sqrt3", "--x", "11/64*sqrt(7)",
                "--logR", "6", "--nscan", "20000", "--out", str(tmp_path), "--check",
            ]
        )
        assert code == 0
        header = (tmp_path / "loglaw.csv").read_text().splitlines()[0]
        assert header == "norm_t,ratio,exact"

    def test_bstar_small_grid(self, tmp_path, capsys):
        code = main(
            [
                "bstar", "--line", "sqrt2,sqrt3", "--grid", "2/5,9/20,28",
                "--T1", "25", "--max-centers", "64", "--out", str(tmp_path),
                "--check",
            ]
        )
        assert code == 0
        text = (tmp_path / "bstar.csv").read_text()
        assert text.splitlines()[0] == "t,s,kappa,fraction,measure"
