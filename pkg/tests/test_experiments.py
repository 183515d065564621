"""Experiment orchestration: config validation, determinism, CLI, GFSF."""

import json

import numpy as np
import pytest
import yaml

from nlheat.cli import main
from nlheat.experiments import (ConfigError, ExperimentConfig,
                                _inflation_trial, run_inflation,
                                run_perturbed_inflation, run_tables)
from nlheat.field import SpectralField, TorusGrid
from nlheat.gfsf import read_field, write_field
from nlheat.sampling import VarianceProfile, sample_real_gfs, stream


def tiny_doc(**extra):
    doc = {
        "kind": "inflate", "seed": 77, "grid": {"dim": 1},
        "profile": {"kind": "white"},
        "nonlinearity": {"preset": "antisym2"},
        "experiment": {"radii": [8, 16], "trials": 3, "log_exponent": 3},
    }
    doc.update(extra)
    return doc


class TestConfig:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(tiny_doc()))
        cfg = ExperimentConfig.from_yaml(p)
        assert cfg.seed == 77
        assert cfg.radii() == [8, 16]

    def test_seed_mandatory(self):
        doc = tiny_doc()
        del doc["seed"]
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(doc)

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            ExperimentConfig.from_dict(tiny_doc(trails=3))

    def test_unknown_nested_key(self):
        doc = tiny_doc()
        doc["profile"]["gama"] = 1.0
        with pytest.raises(ConfigError, match="profile"):
            ExperimentConfig.from_dict(doc)
        doc = tiny_doc()
        doc["experiment"]["trial"] = 7
        with pytest.raises(ConfigError, match="experiment"):
            ExperimentConfig.from_dict(doc)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(tiny_doc(kind="explode"))

    def test_profile_dispatch(self):
        cfg = ExperimentConfig.from_dict(tiny_doc(
            profile={"kind": "powerlog", "log_theta": -1.0, "loglog_eta": -1.0}))
        prof = cfg.profile_for(16)
        assert prof.kind == "powerlog"
        assert prof.gamma == 0.0    # 1 - d for d = 1

    def test_empty_radii_rejected(self):
        doc = tiny_doc()
        doc["experiment"]["radii"] = []
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(doc).radii()

    def test_horizon(self):
        import math
        cfg = ExperimentConfig.from_dict(tiny_doc())
        assert cfg.horizon(16) == pytest.approx(math.log(16) ** -3)


class TestInflation:
    def test_trial_replay_identical(self):
        cfg = ExperimentConfig.from_dict(tiny_doc())
        a = _inflation_trial((cfg, 16, 1, None, 1.0))
        b = _inflation_trial((cfg, 16, 1, None, 1.0))
        assert a == b

    def test_thread_count_invariance(self):
        cfg1 = ExperimentConfig.from_dict(tiny_doc())
        cfg2 = ExperimentConfig.from_dict(tiny_doc(threads=2))
        r1 = run_inflation(cfg1)
        r2 = run_inflation(cfg2)
        assert r1["records"] == r2["records"]

    def test_control_arm_shares_X(self):
        # both arms of a trial consume identical X streams
        cfg = ExperimentConfig.from_dict(tiny_doc())
        rec = _inflation_trial((cfg, 8, 0, None, 1.0))
        grid = TorusGrid(1, 17)
        X1 = sample_real_gfs(VarianceProfile.white(8), grid, stream(77, 0, 0))
        X2 = sample_real_gfs(VarianceProfile.white(8), grid, stream(77, 0, 0))
        assert np.array_equal(X1.coeffs, X2.coeffs)
        assert rec["x_checksum"] > 0

    def test_missing_witness_rejected(self, monkeypatch):
        # no preset is symmetric, so fake one to exercise the gate
        from nlheat.nonlinearity import NonlinearitySpec
        cfg = ExperimentConfig.from_dict(tiny_doc())
        sym = NonlinearitySpec.from_parts(1, 2)
        monkeypatch.setattr(ExperimentConfig, "nonlinearity_spec",
                            lambda self: sym)
        with pytest.raises(ConfigError, match="witness"):
            run_inflation(cfg)

    def test_summary_covers_radii(self):
        summary = run_inflation(ExperimentConfig.from_dict(tiny_doc()))
        assert set(summary["per_radius"]) == {8, 16}

    def test_perturb_zero_base_matches_inflation(self):
        doc = tiny_doc(kind="perturb")
        doc["experiment"]["epsilon"] = 1.0
        doc["experiment"]["base"] = "zero"
        pert = run_perturbed_inflation(ExperimentConfig.from_dict(doc))
        plain = run_inflation(ExperimentConfig.from_dict(tiny_doc()))
        for ra, rb in zip(pert["records"], plain["records"]):
            assert ra["adversarial"] == rb["adversarial"]

    def test_perturb_scaling(self):
        doc = tiny_doc(kind="perturb")
        doc["experiment"]["epsilon"] = 0.5
        half = run_perturbed_inflation(ExperimentConfig.from_dict(doc))
        for N in half["radii"]:
            assert half["per_radius"][N]["distance_median"] > 0


class TestTables:
    def base_doc(self):
        return {
            "kind": "tables", "seed": 5, "grid": {"dim": 1},
            "profile": {"kind": "white"},
            "nonlinearity": {"preset": "antisym2"},
            "experiment": {"radii": [8, 16], "trials": 4,
                           "t_min": 1e-3, "t_max": 1e-1},
        }

    def test_deterministic_output(self, tmp_path):
        cfg = ExperimentConfig.from_dict(self.base_doc())
        run_tables(cfg, tmp_path / "a")
        run_tables(cfg, tmp_path / "b")
        for name in ("ez_bounds.csv", "it_bounds.csv", "moments.csv",
                     "partition.csv", "flags.csv"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes(), name

    def test_growing_profile_trips_upper_flag(self, tmp_path):
        doc = self.base_doc()
        doc["profile"] = {"kind": "power", "gamma": 2.0}
        res = run_tables(ExperimentConfig.from_dict(doc), tmp_path / "bad")
        assert not res["flags"]["ez_bounds"]


class TestCli:
    def test_identities_exit_zero(self, capsys):
        assert main(["identities", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "pass" in out and "FAIL" not in out

    def test_missing_config_is_usage_error(self, capsys):
        assert main(["inflate"]) == 2

    def test_bad_config_is_usage_error(self, tmp_path, capsys):
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(tiny_doc(bogus=1)))
        assert main(["inflate", "--config", str(p)]) == 2

    def test_inflate_smoke(self, tmp_path, capsys):
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(tiny_doc()))
        code = main(["inflate", "--config", str(p), "--out", str(tmp_path / "o")])
        assert code in (0, 1)
        records = (tmp_path / "o" / "records.jsonl").read_text().splitlines()
        assert len(records) == 6
        rec = json.loads(records[0])
        assert rec["seed"] == 77
        assert (tmp_path / "o" / "inflation.csv").exists()

    def test_sample_writes_field(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(tiny_doc(kind="sample")))
        assert main(["sample", "--config", str(p),
                     "--out", str(tmp_path / "s")]) == 0
        f = read_field(tmp_path / "s" / "sample.gfsf")
        assert f.components == 2
        assert f.grid.modes_per_axis == 17

    def test_seed_override(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(tiny_doc(kind="sample")))
        main(["sample", "--config", str(p), "--seed", "123",
              "--out", str(tmp_path / "a")])
        main(["sample", "--config", str(p), "--seed", "124",
              "--out", str(tmp_path / "b")])
        fa = read_field(tmp_path / "a" / "sample.gfsf")
        fb = read_field(tmp_path / "b" / "sample.gfsf")
        assert not np.array_equal(fa.coeffs, fb.coeffs)


class TestGfsf:
    def test_round_trip(self, tmp_path):
        grid = TorusGrid(2, 9)
        X = sample_real_gfs(VarianceProfile.white(4), grid, stream(1, 0))
        path = tmp_path / "x.gfsf"
        write_field(path, X)
        back = read_field(path)
        assert np.array_equal(back.coeffs, X.coeffs)
        assert back.grid.dim == 2
        meta = json.loads((tmp_path / "x.gfsf.json").read_text())
        assert meta["modes_per_axis"] == 9

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(ValueError):
            read_field(path)
