import json
import math

import pytest
from hypothesis import given, strategies as st

from alphamod.cli import RunConfig, main, run
from alphamod.evolve import load_snapshot
from alphamod.reporting import format_value
from alphamod.schemas import COMMAND_SCHEMAS, ConfigError, resolve_config


def read_summary(path):
    with open(path) as fh:
        return json.load(fh)


class TestResolveConfig:
    def test_defaults_fill_every_leaf(self):
        cfg = resolve_config("norm", {})
        assert cfg["grid"] == {"d": 1, "n": 1024, "L": pytest.approx(16 * math.pi)}
        assert cfg["s"] == 0.0 and cfg["alpha"] == 0.0
        assert cfg["field"]["kind"] == "gaussian"

    def test_none_matches_empty(self):
        assert resolve_config("evolve", None) == resolve_config("evolve", {})

    def test_partial_override_keeps_other_defaults(self):
        cfg = resolve_config("norm", {"s": 0.7})
        assert cfg["s"] == 0.7
        assert cfg["alpha"] == 0.0

    def test_unknown_command(self):
        with pytest.raises(ConfigError, match="unknown command"):
            resolve_config("transmogrify", {})

    def test_error_carries_the_failing_path(self):
        with pytest.raises(ConfigError, match="config invalid at s"):
            resolve_config("inflate", {"s": "bogus"})

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="config invalid"):
            resolve_config("norm", {"bogus": 1})

    def test_every_command_has_a_schema(self):
        assert sorted(COMMAND_SCHEMAS) == [
            "bilinear", "construct", "decompose", "evolve", "glassey",
            "inflate", "norm", "picard", "strichartz"]


class TestDecomposeCommand:
    def test_writes_all_artifacts_and_passes(self, tmp_path, capsys):
        code = run("decompose", RunConfig("decompose", out_dir=tmp_path))
        assert code == 0
        out = capsys.readouterr().out
        assert "[PASS] dyadic_residual" in out
        assert "[PASS] alpha_residual_0.8" in out
        for suffix in (".csv", ".json", ".png"):
            assert (tmp_path / f"decompose{suffix}").exists()
        header = (tmp_path / "decompose.csv").read_text().splitlines()[0]
        assert header == "family,alpha,pieces,residual"
        summary = read_summary(tmp_path / "decompose.json")
        assert summary["command"] == "decompose"
        assert summary["pass"] is True
        assert summary["config"]["alphas"] == [0.0, 0.3, 0.5, 0.8]

    def test_gnuplot_script_on_request(self, tmp_path):
        rc = RunConfig("decompose", out_dir=tmp_path, emit_gnuplot=True)
        assert run("decompose", rc) == 0
        script = (tmp_path / "decompose.gp").read_text()
        assert 'plot "decompose.csv"' in script
        assert "skip 1" in script


class TestNormCommand:
    def test_zero_field_reports_all_zero(self, tmp_path):
        rc = RunConfig("norm", {"field": {"kind": "zero"}}, out_dir=tmp_path)
        assert run("norm", rc) == 0
        metrics = read_summary(tmp_path / "norm.json")["metrics"]
        assert metrics["l2"] == 0.0
        assert metrics["modulation_sharp"] == 0.0
        assert metrics["besov"] == 0.0

    def test_gaussian_default_metrics_positive(self, tmp_path):
        assert run("norm", RunConfig("norm", out_dir=tmp_path)) == 0
        metrics = read_summary(tmp_path / "norm.json")["metrics"]
        assert metrics["l2"] > 0.0
        assert metrics["modulation_sharp"] >= metrics["l2"] * 0.9


class TestEvolveCommand:
    def test_free_flow_conserves_mass_exactly(self, tmp_path):
        cfg = {"lam": 0.0, "t_end": 0.05, "dt": 1e-3}
        assert run("evolve", RunConfig("evolve", cfg, out_dir=tmp_path)) == 0
        summary = read_summary(tmp_path / "evolve.json")
        assert summary["metrics"]["mass_drift"] <= 1e-12
        final, t = load_snapshot(tmp_path / "evolve_final.amodfld")
        assert t == pytest.approx(0.05, rel=1e-12)
        assert final.l2() > 0.0

    def test_impossible_tolerance_exits_one_but_writes_files(self, tmp_path,
                                                             capsys):
        cfg = {"t_end": 0.02, "dt": 1e-3, "mass_tolerance": 1e-30}
        code = run("evolve", RunConfig("evolve", cfg, out_dir=tmp_path))
        assert code == 1
        assert "[FAIL] mass_conserved" in capsys.readouterr().out
        assert (tmp_path / "evolve.csv").exists()
        assert read_summary(tmp_path / "evolve.json")["pass"] is False


class TestPicardCommand:
    def test_large_data_expected_to_fail_contracts_exit_zero(self, tmp_path):
        cfg = {"field": {"kind": "gaussian", "amplitude": 10.0},
               "expect": "fail"}
        assert run("picard", RunConfig("picard", cfg, out_dir=tmp_path)) == 0
        summary = read_summary(tmp_path / "picard.json")
        assert summary["metrics"]["converged"] is False
        assert summary["pass"] is True


class TestExitCodes:
    def test_invalid_config_exits_two_without_files(self, tmp_path, capsys):
        rc = RunConfig("norm", {"s": "bogus"}, out_dir=tmp_path)
        assert run("norm", rc) == 2
        assert "config error" in capsys.readouterr().err
        assert not (tmp_path / "norm.csv").exists()

    def test_unknown_command_exits_two(self, tmp_path):
        assert run("transmogrify", RunConfig("transmogrify",
                                             out_dir=tmp_path)) == 2

    def test_runtime_failure_exits_three(self, tmp_path, capsys):
        cfg = {"field": {"kind": "fourier_bump", "center": 2000.0,
                         "width": 1.0}}
        rc = RunConfig("norm", cfg, out_dir=tmp_path)
        assert run("norm", rc) == 3
        assert "internal error" in capsys.readouterr().err


class TestDeterminism:
    CFG = {"N_values": [8, 16, 32, 64],
           "grid": {"d": 1, "n": 4096, "L": 8 * math.pi}}

    def test_repeated_runs_are_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("inflate", RunConfig("inflate", dict(self.CFG),
                                        out_dir=a)) == 0
        assert run("inflate", RunConfig("inflate", dict(self.CFG),
                                        out_dir=b, jobs=2)) == 0
        assert (a / "inflate.csv").read_bytes() == (b / "inflate.csv").read_bytes()
        assert (a / "inflate.json").read_bytes() == (b / "inflate.json").read_bytes()


class TestMain:
    def test_defaults_run(self, tmp_path):
        assert main(["decompose", "--out", str(tmp_path)]) == 0

    def test_config_file_round_trip(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"field": {"kind": "zero"}}))
        assert main(["norm", "--config", str(cfg_path),
                     "--out", str(tmp_path)]) == 0

    def test_unreadable_config_exits_two(self, tmp_path, capsys):
        assert main(["norm", "--config", str(tmp_path / "missing.json"),
                     "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_malformed_json_exits_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["norm", "--config", str(bad),
                     "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err


class TestFormatValue:
    def test_sentinels(self):
        assert format_value(None) == ""
        assert format_value(True) == "1"
        assert format_value(False) == "0"
        assert format_value(42) == "42"

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_floats_round_trip(self, x):
        assert float(format_value(x)) == x
