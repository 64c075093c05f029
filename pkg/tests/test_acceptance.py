"""End-to-end runs over 200 smooth and 200 noise textures (64x64)."""
import json
import time

import numpy as np
import pytest

from app.schemas.svm_schemas import TrainerConfig
from app.services import evaluation
from app.services.svm import decision_values
from app.storage.feature_store import read_feature_store
from app.storage.model_store import ModelBundle, load_model, save_model

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("pipeline")


def run_pipeline(run_cli, manifest, folder, *extract_flags):
    folder.mkdir(parents=True, exist_ok=True)
    store, model, report = folder / "features.csv", folder / "model.json", folder / "report.json"
    assert run_cli("extract", manifest, "--out", store, "--no-resize", *extract_flags)[0] == 0
    assert run_cli("train", store, "--model-out", model, "--kernel", "gaussian",
                   "--validation", "split70", "--report", report)[0] == 0
    return store, model, report


class TestTexturePipeline:
    def test_ltridp_separates_textures_and_beats_lbp(self, texture_dataset, workdir, run_cli):
        started = time.perf_counter()
        _, _, ltridp_report = run_pipeline(run_cli, texture_dataset, workdir / "ltridp")
        elapsed = time.perf_counter() - started
        _, _, lbp_report = run_pipeline(run_cli, texture_dataset, workdir / "lbp", "--descriptor", "lbp")
        ltridp = json.loads(ltridp_report.read_text())
        lbp = json.loads(lbp_report.read_text())
        assert ltridp["n_samples"] == 120
        assert ltridp["accuracy"] >= 0.95
        assert ltridp["accuracy"] >= lbp["accuracy"]
        assert elapsed < 180.0

    def test_repeat_runs_are_byte_identical(self, texture_dataset, workdir, run_cli):
        first = run_pipeline(run_cli, texture_dataset, workdir / "first")
        second = run_pipeline(run_cli, texture_dataset, workdir / "second")
        for a, b in zip(first, second):
            assert a.read_bytes() == b.read_bytes()

    def test_feature_dimensions(self, texture_dataset, workdir, run_cli):
        compat, default = workdir / "compat.csv", workdir / "default.csv"
        assert run_cli("extract", texture_dataset, "--out", compat, "--compat150")[0] == 0
        assert run_cli("extract", texture_dataset, "--out", default, "--jobs", "4")[0] == 0
        assert read_feature_store(compat).X.shape == (400, 150)
        assert read_feature_store(default).X.shape == (400, 768)

    def test_reloaded_model_matches_memory(self, texture_dataset, workdir, run_cli):
        store_path = workdir / "roundtrip.csv"
        assert run_cli("extract", texture_dataset, "--out", store_path, "--no-resize")[0] == 0
        store = read_feature_store(store_path)
        X, y = store.X, store.y
        train_idx, _ = evaluation.split_70_30(y, seed=42)
        model = evaluation.train_with_config(X[train_idx], y[train_idx], TrainerConfig(), seed=42)

        path = workdir / "roundtrip.json"
        save_model(ModelBundle(model=model, bins=store.header.bins, preprocessing=store.header.preprocessing), path)
        reloaded = load_model(path).model
        assert np.array_equal(decision_values(reloaded, X), decision_values(model, X))

        cli_model = workdir / "cli.json"
        assert run_cli("train", store_path, "--model-out", cli_model)[0] == 0
        assert np.array_equal(decision_values(load_model(cli_model).model, X), decision_values(model, X))
