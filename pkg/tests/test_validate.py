"""Tests for validation checks and run reports."""

import json

import numpy as np

from mrmap.model.flow import run_flow
from mrmap.model.params import FlowTrajectory
from mrmap.validate.checks import validate_dataset, validate_params, validate_trajectory
from mrmap.validate.reports import build_run_report, relative_error_stats, save_report
from tests.builders import random_datum, random_params


class TestValidateParams:
    def test_valid(self, rng):
        assert validate_params(random_params(rng)) == []

    def test_negative_weight(self, rng):
        params = random_params(rng)
        params.layer_w[1, 2] = -0.5
        problems = validate_params(params)
        assert len(problems) == 1 and "nonnegative" in problems[0]

    def test_non_finite(self, rng):
        params = random_params(rng)
        params.r[0] = np.inf
        assert any("r contains non-finite" in p for p in validate_params(params))


class TestValidateTrajectory:
    def test_forward_pass_is_valid(self, rng):
        params = random_params(rng)
        traj = run_flow(params, random_datum(rng, rng.standard_normal(2)))
        assert validate_trajectory(params, traj) == []

    def test_wrong_shape(self, rng):
        params = random_params(rng)
        problems = validate_trajectory(params, FlowTrajectory(u=np.zeros((3, 4))))
        assert len(problems) == 1 and "shape" in problems[0]

    def test_broken_recurrence(self, rng):
        params = random_params(rng)
        traj = run_flow(params, random_datum(rng, rng.standard_normal(2)))
        traj.u[2] += 1.0
        assert any("recurrence" in p for p in validate_trajectory(params, traj))

    def test_initializer_jump(self, rng):
        params = random_params(rng, ell=1)
        u = np.zeros((2, 4))
        u[1, 0] = 2.0
        problems = validate_trajectory(params, FlowTrajectory(u=u))
        assert any("initializer" in p for p in problems)

    def test_non_finite(self, rng):
        params = random_params(rng)
        u = np.zeros((4, 4))
        u[3, 1] = np.nan
        assert validate_trajectory(params, FlowTrajectory(u=u)) == ["trajectory contains non-finite entries"]


class TestValidateDataset:
    def test_valid(self, rng):
        assert validate_dataset(rng.standard_normal((5, 3)), p=3) == []

    def test_problems(self):
        assert validate_dataset(np.zeros((0, 3)))
        assert validate_dataset(np.zeros(3))
        X = np.zeros((2, 3))
        X[0, 0] = np.nan
        assert validate_dataset(X) == ["dataset contains non-finite entries"]
        assert "p=4" in validate_dataset(np.zeros((2, 3)), p=4)[0]


class TestReports:
    def test_relative_error_stats(self):
        stats = relative_error_stats([0.1, 0.3])
        assert stats["count"] == 2
        assert abs(stats["mean"] - 0.2) < 1e-15 and abs(stats["std"] - 0.1) < 1e-15

    def test_empty_stats(self):
        stats = relative_error_stats([])
        assert stats["count"] == 0 and np.isnan(stats["mean"])

    def test_report_ok_flag(self):
        assert build_run_report("mixture", ["points.csv"])["ok"] is True
        report = build_run_report("recover", [], problems=["w < 0"], warnings=["slow"])
        assert report["ok"] is False
        assert report["warnings"] == ["slow"]

    def test_save_report(self, tmp_path):
        report = build_run_report("gauss1d", ["estimates.csv"], summary={"slope": -0.5})
        path = tmp_path / "report.json"
        save_report(report, path)
        assert json.loads(path.read_text(encoding="utf-8")) == report
