"""Tests for checkpoints, CSV tables and SVG plots."""

import json

import numpy as np
import pytest

from mrmap.io.checkpoint import (
    CheckpointError,
    CheckpointVersionError,
    load_checkpoint,
    save_checkpoint,
)
from mrmap.io.plots import Series, panels_svg, scatter_svg
from mrmap.io.tables import load_dataset, read_csv, save_dataset, write_csv
from mrmap.model.flow import run_flow
from mrmap.model.params import PotentialParams
from tests.builders import generator, random_datum, random_params


class TestCheckpoint:
    def test_byte_identical_resave(self, tmp_path, rng):
        params = random_params(rng)
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        save_checkpoint(first, params, config={"model": {"q": 4}}, metrics=[{"epoch": 1, "total": 0.5}])
        loaded = load_checkpoint(first)
        save_checkpoint(second, loaded.params, config=loaded.config, metrics=loaded.metrics)
        assert first.read_bytes() == second.read_bytes()
        assert loaded.config == {"model": {"q": 4}}
        assert loaded.params.hyperparameters() == params.hyperparameters()

    def test_reload_gives_identical_flow(self, tmp_path):
        rng = generator(61)
        params = PotentialParams.initialize(4, 128, 5, rng, w_init=0.05, beta=0.1, cg_iters=8)
        params = params.with_learnables({"layer_b": 0.1 * rng.standard_normal((5, 128))})
        path = tmp_path / "model.json"
        save_checkpoint(path, params)
        loaded = load_checkpoint(path).params
        datum = random_datum(rng, rng.standard_normal(4), fraction=0.5)
        assert np.array_equal(run_flow(params, datum).u, run_flow(loaded, datum).u)

    def test_version_mismatch(self, tmp_path, rng):
        path = tmp_path / "model.json"
        save_checkpoint(path, random_params(rng))
        data = json.loads(path.read_text(encoding="utf-8"))
        data["version"] = 99
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(CheckpointVersionError):
            load_checkpoint(path)

    def test_corrupt_files(self, tmp_path, rng):
        path = tmp_path / "model.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)
        save_checkpoint(path, random_params(rng))
        data = json.loads(path.read_text(encoding="utf-8"))
        data["params"]["r"] = data["params"]["r"][:-1]
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.json")


class TestTables:
    def test_lf_newlines_and_comment(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["n", "value", "flag"], [[1, 0.5, True]], comment="mrmap test v1")
        raw = path.read_bytes()
        assert b"\r\n" not in raw
        assert raw == b"# mrmap test v1\nn,value,flag\n1,0.5,1\n"
        assert read_csv(path) == (["n", "value", "flag"], [["1", "0.5", "1"]])

    def test_row_width_checked(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "t.csv", ["a", "b"], [[1]])

    def test_dataset_round_trip(self, tmp_path, rng):
        X = rng.standard_normal((7, 3))
        path = tmp_path / "train.csv"
        save_dataset(path, X, metadata={"kind": "mixture"})
        back, meta = load_dataset(path)
        assert np.array_equal(back, X)
        assert meta == {"n": 7, "p": 3, "kind": "mixture"}

    def test_dataset_without_sidecar(self, tmp_path):
        path = tmp_path / "plain.csv"
        write_csv(path, ["x0", "x1"], [[1.0, 2.0]])
        X, meta = load_dataset(path)
        assert X.tolist() == [[1.0, 2.0]] and meta == {}

    def test_empty_dataset(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(path, ["x0"], [])
        with pytest.raises(ValueError):
            load_dataset(path)


class TestPlots:
    def test_deterministic_svg(self, tmp_path):
        pts = generator(62).standard_normal((2, 30))
        series = [Series(pts, "truth", color="black"), Series(pts + 1.0, "recovered", values=np.arange(30.0))]
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        scatter_svg(a, series, title="points")
        scatter_svg(b, series, title="points")
        assert a.read_bytes() == b.read_bytes()
        assert b"<svg" in a.read_bytes()

    def test_panels(self, tmp_path):
        pts = generator(63).standard_normal((2, 10))
        path = tmp_path / "panels.svg"
        panels_svg(path, [("data", [Series(pts, "x")]), ("map", [Series(pts, "x_hat")])])
        assert path.stat().st_size > 0

    def test_rejects_bad_points(self, tmp_path):
        with pytest.raises(ValueError):
            scatter_svg(tmp_path / "bad.svg", [Series(np.zeros((3, 4)), "x")])
        with pytest.raises(ValueError):
            panels_svg(tmp_path / "none.svg", [])
