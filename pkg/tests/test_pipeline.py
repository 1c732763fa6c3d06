"""PCA, one-vs-rest training, classification, and the experiment runner."""

import numpy as np
import pytest

from ridgekernels.activations import COSINE
from ridgekernels.dataset import Dataset, iris_path, load_csv, standardize
from ridgekernels.kernels import ThetaParams
from ridgekernels.krr import FittedModel
from ridgekernels.optim import OptimConfig, pack_theta
from ridgekernels.pipeline import (
    OneVsRestRidgeClassifier,
    OvrModel,
    accuracy,
    classify,
    classify_batch,
    pca,
    pipeline_from_text,
    pipeline_to_text,
    render_markdown_table,
    run_experiment,
    scores_matrix,
    train_ovr,
    TrainedPipeline,
)


@pytest.fixture(scope="module")
def iris_std():
    ds, stats = standardize(load_csv(iris_path()))
    return ds


def constant_score_model(values, d=4):
    """OvR model whose class scores are constants, for decision-rule tests."""
    models = []
    for v in values:
        theta = ThetaParams(c=[1.0], w=[np.zeros(d)], b=[0.0], activation=COSINE)
        models.append(
            FittedModel(theta=theta, support=np.zeros((1, d)), a=np.array([v]), lam=1.0)
        )
    return OvrModel(
        models=tuple(models),
        class_names=tuple(f"c{i + 1}" for i in range(len(values))),
        statuses=("converged",) * len(values),
        losses=(0.0,) * len(values),
    )


class TestPca:
    def test_iris_two_components_explain_9581(self, iris_std):
        result = pca(iris_std.X, 2)
        assert float(result.explained_ratio.sum()) == pytest.approx(0.9581, abs=0.002)

    def test_collinear_data_has_rank_one(self):
        t = np.linspace(-1, 1, 30)
        X = np.column_stack([t, 2 * t, -t])
        result = pca(X - X.mean(axis=0), 1)
        assert result.explained_ratio[0] == pytest.approx(1.0, abs=1e-12)

    def test_full_rank_ratios_sum_to_one(self, iris_std):
        result = pca(iris_std.X, 4)
        assert float(result.explained_ratio.sum()) == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(result.explained_ratio) <= 1e-12)

    def test_components_orthonormal(self, iris_std):
        comp = pca(iris_std.X, 4).components
        assert np.max(np.abs(comp @ comp.T - np.eye(4))) <= 1e-10

    def test_projection_contracts_distances(self, iris_std):
        rng = np.random.default_rng(0)
        result = pca(iris_std.X, 2)
        proj = result.project(iris_std.X)
        for _ in range(200):
            i, j = rng.integers(0, len(proj), size=2)
            before = np.linalg.norm(iris_std.X[i] - iris_std.X[j])
            after = np.linalg.norm(proj[i] - proj[j])
            assert after <= before + 1e-12

    def test_k_validation(self, iris_std):
        with pytest.raises(ValueError):
            pca(iris_std.X, 0)
        with pytest.raises(ValueError):
            pca(iris_std.X, 5)


class TestClassifyRules:
    def test_argmax(self):
        model = constant_score_model([0.9, 0.1, 0.2])
        assert classify(model, np.zeros(4)) == 1
        model = constant_score_model([0.1, 0.9, 0.2])
        assert classify(model, np.zeros(4)) == 2

    def test_tie_goes_to_smallest_index(self):
        model = constant_score_model([0.5, 0.5, 0.1])
        assert classify(model, np.zeros(4)) == 1

    def test_argmax_invariant_under_monotone_transforms(self, iris_std):
        rng = np.random.default_rng(1)
        model = train_ovr(iris_std, seeds=[0], config=OptimConfig(max_iters=5))
        scores = scores_matrix(model, iris_std.X)
        base = np.argmax(scores, axis=1)
        for _ in range(10):
            a = float(rng.uniform(0.5, 3.0))
            b = float(rng.normal())
            transformed = np.argmax(a * scores + b, axis=1)
            assert np.array_equal(base, transformed)
            monotone = np.argmax(np.tanh(scores) * 2.0, axis=1)
            assert np.array_equal(base, monotone)


class TestAccuracy:
    def test_always_first_class_on_iris(self, iris_std):
        model = constant_score_model([1.0, 0.0, 0.0])
        assert accuracy(model, iris_std) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_memorizes_separable_toy_set(self):
        ds = Dataset(
            X=[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]],
            labels=[1, 2, 3],
            feature_names=("f1", "f2"),
            class_names=("a", "b", "c"),
        )
        ds_std, _ = standardize(ds)
        model = train_ovr(ds_std, lam=0.001, seeds=range(5),
                          config=OptimConfig(max_iters=20))
        assert accuracy(model, ds_std) == 1.0


class TestTrainOvr:
    def test_iris_three_models_twelve_parameters(self, iris_std):
        model = train_ovr(iris_std, seeds=[0], config=OptimConfig(max_iters=3))
        assert model.n_classes == 3
        for fitted in model.models:
            assert pack_theta(fitted.theta).shape == (12,)

    def test_single_class_dataset(self):
        ds = Dataset(X=np.random.default_rng(2).normal(size=(8, 2)), labels=[1] * 8,
                     feature_names=("f1", "f2"), class_names=("only",))
        model = train_ovr(ds, seeds=[0], config=OptimConfig(max_iters=3))
        assert model.n_classes == 1

    def test_neumann_failures_recorded_but_model_emitted(self, iris_std):
        model = train_ovr(
            iris_std, loss_mode="neumann", seeds=[0],
            config=OptimConfig(loss_mode="neumann", neumann_order=5, max_iters=5),
        )
        assert model.n_classes == 3
        assert any(s == "no_progress" for s in model.statuses)
        # scores still computable at the unoptimized parameters
        assert scores_matrix(model, iris_std.X).shape == (150, 3)


class TestSerialization:
    def test_roundtrip_is_exact(self, iris_std):
        model = train_ovr(iris_std, seeds=[0], config=OptimConfig(max_iters=3))
        stats = standardize(load_csv(iris_path()))[1]
        pipe = TrainedPipeline(stats=stats, ovr=model)
        text = pipeline_to_text(pipe)
        back = pipeline_from_text(text)
        assert pipeline_to_text(back) == text
        assert np.array_equal(back.stats.mean, stats.mean)
        for m1, m2 in zip(back.ovr.models, model.models):
            assert np.array_equal(m1.a, m2.a)
        raw = load_csv(iris_path())
        assert np.array_equal(back.predict_labels(raw.X), classify_batch(model, iris_std.X))


class TestExperiment:
    def test_deterministic_markdown(self, iris_std):
        ds = load_csv(iris_path())
        kwargs = dict(
            seeds=[0, 1], combos=(("qr", "cos"),),
            config_overrides={"max_iters": 3},
        )
        rows1 = run_experiment(ds, **kwargs)
        rows2 = run_experiment(ds, **kwargs)
        assert render_markdown_table(rows1) == render_markdown_table(rows2)

    def test_row_statistics(self, iris_std):
        ds = load_csv(iris_path())
        rows = run_experiment(
            ds, seeds=[0, 1, 2], combos=(("qr", "cos"),),
            config_overrides={"max_iters": 3},
        )
        row = rows[0]
        assert len(row.accuracies) == 3
        assert row.best == max(row.accuracies)
        assert 0.0 <= row.median <= 1.0
        text = render_markdown_table(rows)
        assert "| Method | Function | Accuracy |" in text
        assert "QR closed form" in text


class TestOneVsRestEstimator:
    def test_fit_predict_iris_subset(self, iris_std):
        X = iris_std.X[::5]
        y = np.array(["a", "b", "c"])[(iris_std.labels[::5] - 1)]
        est = OneVsRestRidgeClassifier(n_starts=2, max_iters=10, random_state=0)
        est.fit(X, y)
        pred = est.predict(X)
        assert set(pred) <= {"a", "b", "c"}
        assert est.score(X, y) > 0.6
        assert est.decision_function(X).shape == (len(X), 3)

    def test_clone_protocol(self):
        from sklearn.base import clone

        est = OneVsRestRidgeClassifier(n_terms=3, solver="neumann", neumann_order=7)
        params = clone(est).get_params()
        assert params["n_terms"] == 3
        assert params["solver"] == "neumann"
        assert params["neumann_order"] == 7
