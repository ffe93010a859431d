"""Tests for config parsing and schema validation."""

import json

import pytest

from foldbilliards import config as cf
from foldbilliards.errors import ConfigError


def scan_config(**extra_params):
    raw = {
        "experiment": "curvature-scan",
        "table": {"kind": "disk"},
        "model": {"kind": "euclidean"},
        "parameters": {"lambdas": [0.5, 0.2], "kappa": 0.0},
    }
    raw["parameters"].update(extra_params)
    return raw


class TestValidate:
    def test_minimal_scan_config(self):
        cfg = cf.validate_config(scan_config())
        assert cfg.experiment == "curvature-scan"
        assert cfg.table.name == "disk"
        assert cfg.model.kind == "euclidean"
        assert cfg.model.dim == 3
        assert cfg.seed == 0
        assert cfg.workers == 1

    def test_unknown_experiment(self):
        raw = scan_config()
        raw["experiment"] = "bogus"
        with pytest.raises(ConfigError, match="experiment"):
            cf.validate_config(raw)

    def test_unknown_parameter_key_names_the_path(self):
        with pytest.raises(ConfigError, match=r"parameters\.bogus"):
            cf.validate_config(scan_config(bogus=1))

    def test_missing_required_key(self):
        raw = scan_config()
        del raw["parameters"]["kappa"]
        with pytest.raises(ConfigError, match="kappa"):
            cf.validate_config(raw)

    def test_unknown_table_kind(self):
        raw = scan_config()
        raw["table"] = {"kind": "triangle"}
        with pytest.raises(ConfigError, match="table"):
            cf.validate_config(raw)

    def test_model_dimension_must_extend_table(self):
        raw = scan_config()
        raw["model"] = {"kind": "euclidean", "dim": 5}
        with pytest.raises(ConfigError, match="dim"):
            cf.validate_config(raw)

    def test_tolerances_must_be_positive(self):
        raw = {
            "experiment": "fold-convergence",
            "table": {"kind": "disk"},
            "model": {"kind": "euclidean"},
            "parameters": {"lambdas": [0.5, 0.25], "T": 0.5, "dt": 1e-3,
                           "tol_conv": -0.1},
        }
        with pytest.raises(ConfigError, match="tol_conv"):
            cf.validate_config(raw)

    def test_convergence_lambdas_must_decrease(self):
        raw = {
            "experiment": "fold-convergence",
            "table": {"kind": "disk"},
            "model": {"kind": "euclidean"},
            "parameters": {"lambdas": [0.25, 0.5], "T": 0.5, "dt": 1e-3},
        }
        with pytest.raises(ConfigError, match="decreasing"):
            cf.validate_config(raw)

    def test_negative_dt_rejected(self):
        raw = {
            "experiment": "trajectory",
            "table": {"kind": "half-space"},
            "model": {"kind": "euclidean"},
            "parameters": {"target": "billiard", "x0": [1, 0], "v0": [-1, 0],
                           "T": 1.0, "dt": -0.001},
        }
        with pytest.raises(ConfigError, match=r"parameters\.dt"):
            cf.validate_config(raw)

    def test_fold_geodesic_trajectory_needs_lambda_and_ambient_data(self):
        raw = {
            "experiment": "trajectory",
            "table": {"kind": "disk"},
            "model": {"kind": "euclidean"},
            "parameters": {"target": "fold-geodesic", "x0": [0, 0, 1],
                           "v0": [1, 0, 0], "T": 1.0, "dt": 0.001},
        }
        with pytest.raises(ConfigError, match="lam"):
            cf.validate_config(raw)
        raw["parameters"]["lam"] = 1.0
        cfg = cf.validate_config(raw)
        assert cfg.parameters["lam"] == 1.0
        # billiard targets reject the fold thickness
        raw["parameters"]["target"] = "billiard"
        raw["parameters"]["x0"] = [1, 0]
        raw["parameters"]["v0"] = [-1, 0]
        with pytest.raises(ConfigError, match="lam"):
            cf.validate_config(raw)

    def test_builtin_curve_kinds_are_validated(self):
        raw = {
            "experiment": "quasigeodesic-check",
            "table": {"kind": "disk"},
            "model": {"kind": "euclidean"},
            "parameters": {"curve": {"kind": "spiral"}, "dt": 0.001},
        }
        with pytest.raises(ConfigError, match="curve"):
            cf.validate_config(raw)

    def test_polynomial_table_from_config(self):
        raw = {
            "experiment": "curvature-scan",
            "table": {
                "kind": "polynomial",
                "n": 2,
                "terms": [{"exponents": [0, 1], "coefficient": -1.0}],
                "region": {"center": [0.0, 0.0], "radius": 5.0},
                "p0": [0.0, 0.0],
                "name": "mirror-halfplane",
            },
            "model": {"kind": "euclidean"},
            "parameters": {"lambdas": [0.5], "kappa": 0.0},
        }
        cfg = cf.validate_config(raw)
        assert cfg.table.name == "mirror-halfplane"
        assert cfg.table.f([0.0, -1.0]) == pytest.approx(1.0)

    def test_non_dict_input_rejected(self):
        with pytest.raises(ConfigError):
            cf.validate_config([1, 2, 3])


class TestLoad:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(scan_config()))
        cfg = cf.load_config(p)
        assert cfg.experiment == "curvature-scan"

    def test_malformed_json_reports_location(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text('{"experiment": "curvature-scan"')
        with pytest.raises(ConfigError, match=r"broken\.json:1:"):
            cf.load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            cf.load_config(tmp_path / "nope.json")

    def test_shipped_configs_all_validate(self):
        import importlib.resources as res
        pkg = res.files("foldbilliards") / "configs"
        names = sorted(p.name for p in pkg.iterdir() if p.name.endswith(".json"))
        assert len(names) == 12
        for name in names:
            cfg = cf.load_config(str(pkg / name))
            assert cfg.experiment in cf.EXPERIMENTS
