"""
Tests for the ov-approx command line.
"""

import json

import pytest

from ovapprox.cli import (BENCH_COLUMNS, EXIT_INPUT, EXIT_OK, EXIT_RESOURCE, build_parser,
                          main)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


class TestGenAndCount:
    """Test cases for gen followed by the counting commands"""

    def generate(self, capsys, tmp_path, *extra):
        code, out = run(capsys, "gen", "--n", 24, "--d", 8, "--seed", 3,
                        "--out", tmp_path / "inst", *extra)
        assert code == EXIT_OK
        return json.loads(out)

    def test_gen_writes_files(self, capsys, tmp_path):
        """Test one text file per family plus a JSON sidecar"""
        sidecar = self.generate(capsys, tmp_path, "--families", 3)
        assert sidecar["families"] == 3
        assert len(sidecar["files"]) == 3
        assert (tmp_path / "inst.2.txt").read_text().startswith("8 24\n")
        assert json.loads((tmp_path / "inst.json").read_text())["seed"] == 3

    def test_count_ov_with_oracle(self, capsys, tmp_path):
        """Test the estimate lies within its bound of the exact count"""
        self.generate(capsys, tmp_path)
        code, out = run(capsys, "count-ov", tmp_path / "inst.0.txt", tmp_path / "inst.1.txt",
                        "--eps", "1/10", "--oracle", "--no-timing")
        document = json.loads(out)
        assert code == EXIT_OK
        assert document["oracle"]["within_bound"] is True
        assert document["result"]["error_bound"] == "288/5"
        assert document["config"]["eps"] == "1/10"
        assert document["wall_time_ms"] is None

    def test_count_kov(self, capsys, tmp_path):
        """Test k = 3 families"""
        self.generate(capsys, tmp_path, "--families", 3)
        files = [tmp_path / f"inst.{i}.txt" for i in range(3)]
        code, out = run(capsys, "count-kov", *files, "--eps", "1/10", "--oracle")
        document = json.loads(out)
        assert code == EXIT_OK
        assert document["result"]["arity"] == 3
        assert document["oracle"]["within_bound"] is True

    def test_count_sparse_ov(self, capsys, tmp_path):
        """Test sparse families from the sparse model"""
        self.generate(capsys, tmp_path, "--model", "sparse", "--sparse-bound", 3)
        code, out = run(capsys, "count-sparse-ov", tmp_path / "inst.0.txt",
                        tmp_path / "inst.1.txt", "--eps", "1/10", "--oracle")
        assert code == EXIT_OK
        assert json.loads(out)["oracle"]["within_bound"] is True

    def test_dense_cap_exit_code(self, capsys, tmp_path):
        """Test exceeding the dense cap exits with the resource code"""
        self.generate(capsys, tmp_path)
        code, _ = run(capsys, "count-ov", tmp_path / "inst.0.txt", tmp_path / "inst.1.txt",
                      "--eps", "1/10", "--backend", "dense", "--dense-cap", 4)
        assert code == EXIT_RESOURCE

    def test_bad_eps_exit_code(self, capsys, tmp_path):
        """Test eps outside (0, 1) exits with the input code"""
        self.generate(capsys, tmp_path)
        code, _ = run(capsys, "count-ov", tmp_path / "inst.0.txt", tmp_path / "inst.1.txt",
                      "--eps", "3/2")
        assert code == EXIT_INPUT


class TestInputErrors:
    """Test cases for unreadable or malformed inputs"""

    def test_missing_file(self, capsys, tmp_path):
        """Test a missing dataset exits with the input code"""
        code, out = run(capsys, "count-ov", tmp_path / "a.txt", tmp_path / "b.txt",
                        "--eps", "1/10")
        assert code == EXIT_INPUT
        assert out == ""

    def test_malformed_file(self, capsys, tmp_path):
        """Test a malformed dataset exits with the input code"""
        path = tmp_path / "a.txt"
        path.write_text("3 2\n101\n")
        code, _ = run(capsys, "count-ov", path, path, "--eps", "1/10")
        assert code == EXIT_INPUT

    def test_wrong_input_count(self, capsys, tmp_path):
        """Test count-ov needs exactly two families"""
        path = tmp_path / "a.txt"
        path.write_text("3 1\n101\n")
        code, _ = run(capsys, "count-ov", path, "--eps", "1/10")
        assert code == EXIT_INPUT

    def test_unknown_command(self):
        """Test argparse rejects an unknown command"""
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(["count-everything"])
        assert excinfo.value.code == 2


class TestOtherCommands:
    """Test cases for verify-poly, calibrate, bench, decide-ov and maxip"""

    def test_verify_poly(self, capsys, tmp_path):
        """Test a certified polynomial is reported and saved"""
        out_path = tmp_path / "q.json"
        code, out = run(capsys, "verify-poly", "--d", 16, "--eps", "1/10", "--out", out_path,
                        "--no-timing")
        document = json.loads(out)
        assert code == EXIT_OK
        assert document["certified"] is True
        assert json.loads(out_path.read_text())["d"] == 16

    def test_verify_poly_degree_cap(self, capsys):
        """Test the degree cap flag exits with the resource code"""
        code, _ = run(capsys, "verify-poly", "--d", 64, "--eps", "1/100", "--degree-cap", 2)
        assert code == EXIT_RESOURCE

    def test_calibrate_csv(self, capsys):
        """Test one CSV row per (eps, tau)"""
        code, out = run(capsys, "calibrate", "--eps", "1/2", "--tau", "1,2", "--d", 8,
                        "--trials", 1000)
        lines = out.strip().splitlines()
        assert code == EXIT_OK
        assert lines[0] == "eps,tau,d,k"
        assert [line.split(",")[:3] for line in lines[1:]] == [["1/2", "1", "8"], ["1/2", "2", "8"]]

    def test_bench_csv(self, capsys):
        """Test the bench header and an empty ms column without timing"""
        code, out = run(capsys, "bench", "--n", "8", "--d", "6", "--eps", "1/10", "--no-timing")
        lines = out.strip().splitlines()
        assert code == EXIT_OK
        assert lines[0] == ",".join(BENCH_COLUMNS)
        assert lines[1].startswith("8,6,1/10,")
        assert lines[1].endswith(",")

    def test_decide_ov_thread_invariant_output(self, capsys, tmp_path):
        """Test decide-ov output is byte-identical across thread counts"""
        prefix = tmp_path / "inst"
        run(capsys, "gen", "--model", "planted-orthogonal", "--n", 8, "--d", 10,
            "--seed", 4, "--out", prefix)
        files = [tmp_path / "inst.0.txt", tmp_path / "inst.1.txt"]
        flags = ["--L", 6, "--group-size", 1, "--reps", 40, "--no-timing", "--oracle"]
        code_one, one = run(capsys, "decide-ov", *files, *flags, "--threads", 1)
        code_two, two = run(capsys, "decide-ov", *files, *flags, "--threads", 2)
        assert code_one == code_two == EXIT_OK
        assert one == two
        document = json.loads(one)
        assert document["oracle"]["exact_answer"] is True
        assert document["T"] == 40

    def test_maxip_with_oracle(self, capsys, tmp_path):
        """Test the reported bracket holds the exact maximum"""
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("6 2\n111000\n000111\n")
        b.write_text("6 2\n110000\n000011\n")
        code, out = run(capsys, "maxip", a, b, "--oracle", "--seed", 8)
        document = json.loads(out)
        assert code == EXIT_OK
        assert document["exact_max"] == 2
        assert document["within_bracket"] is True


class TestThreadInvariance:
    """Test cases for output stability across worker counts"""

    THREADS = (1, 2, 8)

    def outputs(self, capsys, *argv):
        results = [run(capsys, *argv, "--threads", t, "--no-timing", "--seed", 8)
                   for t in self.THREADS]
        assert all(code == EXIT_OK for code, _ in results)
        return [out for _, out in results]

    def generate(self, capsys, tmp_path, *extra):
        code, _ = run(capsys, "gen", "--n", 24, "--d", 8, "--seed", 5,
                      "--out", tmp_path / "inst", *extra)
        assert code == EXIT_OK
        return tmp_path / "inst"

    def test_count_ov(self, capsys, tmp_path):
        """Test count-ov is byte-identical for 1, 2 and 8 threads"""
        prefix = self.generate(capsys, tmp_path)
        one, two, eight = self.outputs(capsys, "count-ov", f"{prefix}.0.txt", f"{prefix}.1.txt",
                                       "--eps", "1/20", "--oracle")
        assert one == two == eight
        assert json.loads(one)["oracle"]["within_bound"] is True

    def test_count_kov(self, capsys, tmp_path):
        """Test count-kov is byte-identical for 1, 2 and 8 threads"""
        prefix = self.generate(capsys, tmp_path, "--families", 3)
        files = [f"{prefix}.{i}.txt" for i in range(3)]
        one, two, eight = self.outputs(capsys, "count-kov", *files, "--eps", "1/10")
        assert one == two == eight
        assert json.loads(one)["result"]["arity"] == 3

    def test_count_sparse_ov(self, capsys, tmp_path):
        """Test count-sparse-ov is byte-identical for 1, 2 and 8 threads"""
        prefix = self.generate(capsys, tmp_path, "--model", "sparse", "--sparse-bound", 3)
        one, two, eight = self.outputs(capsys, "count-sparse-ov", f"{prefix}.0.txt",
                                       f"{prefix}.1.txt", "--eps", "1/10")
        assert one == two == eight

    @pytest.mark.slow
    def test_maxip(self, capsys, tmp_path):
        """Test maxip is byte-identical for 1, 2 and 8 threads"""
        code, _ = run(capsys, "gen", "--n", 8, "--d", 8, "--seed", 6, "--out", tmp_path / "ip")
        assert code == EXIT_OK
        one, two, eight = self.outputs(capsys, "maxip", tmp_path / "ip.0.txt",
                                       tmp_path / "ip.1.txt", "--oracle")
        assert one == two == eight
        document = json.loads(one)
        assert document["seed"] == 8
        assert "exact_max" in document

    def test_calibrate(self, capsys):
        """Test the calibration table is byte-identical for 1, 2 and 8 threads"""
        one, two, eight = self.outputs(capsys, "calibrate", "--eps", "1/2", "--tau", "1,2",
                                       "--d", 8, "--trials", 1000)
        assert one == two == eight
        assert one.startswith("eps,tau,d,k\n")
