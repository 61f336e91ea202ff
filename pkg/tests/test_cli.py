"""Command-line surface: echo headers, formats, exit codes, precedence."""

import json

import pytest

from farey import cli, verify


def run(capsys, argv):
    rc = cli.main(argv)
    out = capsys.readouterr().out
    return rc, out


class TestEcho:
    def test_csv_starts_with_config(self, capsys):
        rc, out = run(capsys, ["stern-brocot", "--level", "2"])
        assert rc == 0
        assert out.startswith("# config: command=stern-brocot")

    def test_json_config_first(self, capsys):
        rc, out = run(capsys, ["stern-brocot", "--level", "2", "--format", "json"])
        doc = json.loads(out)
        assert list(doc)[0] == "config"
        assert doc["config"]["command"] == "stern-brocot"
        assert doc["config"]["mesh_size"] == "auto"

    def test_global_flags_accepted_both_sides(self, capsys):
        rc1, out1 = run(capsys, ["--format", "json", "stern-brocot", "--level", "2"])
        rc2, out2 = run(capsys, ["stern-brocot", "--level", "2", "--format", "json"])
        assert rc1 == rc2 == 0
        assert out1 == out2


class TestSumlevel:
    def test_first_five_exact(self, capsys):
        rc, out = run(capsys, ["sumlevel", "--n", "1..5", "--method", "sb"])
        assert rc == 0
        rows = [line.split(",") for line in out.splitlines()[2:]]
        assert [r[1] for r in rows] == ["1/2", "1/3", "3/10", "39/140", "1129/4290"]

    def test_cf_and_preimage_row_identical(self, capsys):
        _, out_cf = run(capsys, ["sumlevel", "--n", "2", "--method", "cf"])
        _, out_pre = run(capsys, ["sumlevel", "--n", "2", "--method", "preimage"])
        row = lambda s: s.splitlines()[2].split(",")[:2]
        assert row(out_cf) == row(out_pre)

    def test_multi_method_agreement_column(self, capsys):
        rc, out = run(capsys, ["sumlevel", "--n", "2..4", "--method", "cf,preimage,transfer"])
        lines = out.splitlines()
        assert lines[1] == "n,lambda,method,agree"
        assert all(line.endswith(",yes") for line in lines[2:])

    def test_transfer_method_monotone(self, capsys):
        rc, out = run(capsys, ["sumlevel", "--u", "7/10", "--n", "1..20", "--method", "transfer"])
        vals = [float(line.split(",")[1]) for line in out.splitlines()[2:]]
        assert len(vals) == 20
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_emit_set(self, capsys):
        rc, out = run(capsys, ["sumlevel", "--n", "3", "--method", "sb", "--emit", "set"])
        lines = out.splitlines()
        assert lines[1].startswith("# total: lambda=3/10")
        assert lines[3:] == ["1/4,2/5", "3/5,3/4"]

    def test_unknown_method(self, capsys):
        rc, _ = run(capsys, ["sumlevel", "--n", "2", "--method", "bogus"])
        assert rc == 3


class TestPreimage:
    def test_measure_row(self, capsys):
        rc, out = run(capsys, ["preimage", "--alpha", "1/2", "--beta", "1", "--depth", "4"])
        lines = out.splitlines()
        assert lines[1] == "depth,lambda,mu,interval_count"
        depth, lam, mu, count = lines[2].split(",")
        assert (depth, lam, count) == ("4", "1129/4290", "16")

    def test_float_mode(self, capsys):
        rc, out = run(capsys, ["preimage", "--alpha", "1/2", "--beta", "1", "--depth", "6", "--mode", "float"])
        lam = float(out.splitlines()[2].split(",")[1])
        assert abs(lam - 0.24189476479317376) < 1e-15


class TestTransfer:
    def test_lambda_table_small_rel_err(self, capsys):
        rc, out = run(capsys, ["transfer", "--u", "1/2", "--n", "6"])
        lines = out.splitlines()
        assert lines[1] == "n,lambda_grid,lambda_exact,rel_err"
        for line in lines[2:]:
            assert float(line.split(",")[3]) <= 1e-6

    def test_gridfn_rows_match_mesh(self, capsys):
        rc, out = run(capsys, ["transfer", "--u", "1/2", "--n", "3", "--emit", "gridfn",
                               "--mesh-size", "512"])
        lines = out.splitlines()
        assert lines[1] == "x,value"
        assert len(lines) - 2 == 511


class TestAsympt:
    def test_partial_law_json(self, capsys):
        rc, out = run(capsys, ["asympt", "--law", "partial", "--u", "1/2",
                               "--grid", "100,1000", "--mesh-size", "4096"])
        doc = json.loads(out)
        assert rc == 0
        assert doc["law"] == "partial"
        assert doc["verdict"] == "bounded"
        assert doc["config"]["mesh_size"] == 4096
        assert {"n_or_sigma", "value", "error", "scaled_error"} <= set(doc["points"][0])

    def test_pointwise_needs_interval(self, capsys):
        rc, _ = run(capsys, ["asympt", "--law", "pointwise", "--grid", "100,1000"])
        assert rc == 3

    def test_bad_grid(self, capsys):
        rc, _ = run(capsys, ["asympt", "--law", "partial", "--grid", "10,abc"])
        assert rc == 3

    def test_non_integer_n_grid(self, capsys):
        rc, _ = run(capsys, ["asympt", "--law", "partial", "--grid", "10.5,100"])
        assert rc == 3


class TestVerifyCommand:
    def test_exit_zero_on_pass(self, capsys, monkeypatch):
        monkeypatch.setitem(
            verify.SUITES, "oracles",
            lambda context=None: [verify.CheckResult("stub", True, "ok")],
        )
        rc, out = run(capsys, ["verify", "--suite", "oracles"])
        assert rc == 0
        assert json.loads(out)["failures"] == 0

    def test_exit_two_on_failure(self, capsys, monkeypatch):
        monkeypatch.setitem(
            verify.SUITES, "oracles",
            lambda context=None: [verify.CheckResult("stub", False, "boom")],
        )
        rc, out = run(capsys, ["verify", "--suite", "oracles"])
        assert rc == 2
        doc = json.loads(out)
        assert doc["failures"] == 1
        assert doc["checks"][0]["status"] == "fail"

    def test_unknown_suite_is_config_error(self, capsys):
        rc, _ = run(capsys, ["verify", "--suite", "bogus"])
        assert rc == 3


class TestConfigPlumbing:
    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out.csv"
        rc, out = run(capsys, ["stern-brocot", "--level", "2", "--output", str(path)])
        assert rc == 0
        assert out == ""
        body = path.read_text()
        assert body.startswith("# config: ")
        assert f"output={path}" in body.splitlines()[0]

    def test_config_file_sets_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "farey.cfg"
        cfg.write_text("format=json\nprecision=128\n")
        rc, out = run(capsys, ["stern-brocot", "--level", "2", "--config", str(cfg)])
        doc = json.loads(out)
        assert doc["config"]["precision"] == 128

    def test_flag_beats_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "farey.cfg"
        cfg.write_text("format=json\n")
        rc, out = run(capsys, ["stern-brocot", "--level", "2",
                               "--config", str(cfg), "--format", "csv"])
        assert out.startswith("# config: ")

    def test_env_threads(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.ENV_THREADS, "4")
        rc, out = run(capsys, ["stern-brocot", "--level", "2", "--format", "json"])
        assert json.loads(out)["config"]["threads"] == 4

    def test_flag_beats_env_threads(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.ENV_THREADS, "4")
        rc, out = run(capsys, ["stern-brocot", "--level", "2", "--format", "json",
                               "--threads", "2"])
        assert json.loads(out)["config"]["threads"] == 2

    def test_bad_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "farey.cfg"
        cfg.write_text("not a key value line\n")
        rc, _ = run(capsys, ["stern-brocot", "--level", "2", "--config", str(cfg)])
        assert rc == 3

    def test_bad_rational_flag(self, capsys):
        rc, _ = run(capsys, ["sumlevel", "--n", "2", "--u", "0.7"])
        assert rc == 3

    def test_capacity_maps_to_config_exit(self, capsys):
        rc, _ = run(capsys, ["transfer", "--u", "1/2", "--n", "2000000"])
        assert rc == 3


class TestDeterminism:
    def test_repeat_runs_identical(self, capsys):
        argv = ["sumlevel", "--n", "1..8", "--method", "sb,cf", "--format", "json"]
        _, first = run(capsys, argv)
        _, second = run(capsys, argv)
        assert first == second
