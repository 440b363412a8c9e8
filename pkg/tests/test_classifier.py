"""Feed-forward classifier: gradients, training behavior, snapshots."""

import numpy as np
import pytest

from privacy_profiles.classifier import (
    NetworkModel,
    TrainConfig,
    gradient_check,
    init_model,
    load_model,
    predict_label,
    predict_scores,
    save_model,
    snapshot_digest,
    train,
)
from privacy_profiles.errors import (
    DivergenceError,
    ParameterError,
    TrainingDataError,
)


def separable_blobs(n_per_class=30, seed=0):
    """Three linearly separable one-hot-ish binary blobs."""
    rng = np.random.default_rng(seed)
    protos = np.eye(3).repeat(4, axis=1)  # (3, 12) disjoint support
    rows, labels = [], []
    for c in range(3):
        for _ in range(n_per_class):
            row = protos[c].copy()
            flip = rng.random(12) < 0.05
            row[flip] = 1 - row[flip]
            rows.append(row)
            labels.append(c)
    return np.array(rows), np.array(labels)


# ---------------------------------------------------------------------------
# gradient oracle
# ---------------------------------------------------------------------------


class TestGradients:
    def test_analytic_matches_finite_differences(self):
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(25):
            width = int(rng.integers(2, 7))
            hidden = int(rng.integers(2, 9))
            classes = int(rng.integers(2, 5))
            cfg = TrainConfig(hidden_width=hidden, seed=int(rng.integers(10**6)))
            model = init_model(width, classes, cfg)
            # move off the init point so b1/b2 gradients are nontrivial
            model.b1 += rng.normal(scale=0.3, size=hidden)
            model.b2 += rng.normal(scale=0.3, size=classes)
            x = rng.random(width)
            label = int(rng.integers(classes))
            worst = max(worst, gradient_check(model, x, label))
        # central differences with eps=1e-5 bottom out around 1e-6
        assert worst < 1e-5

    def test_prediction_rows_are_distributions(self):
        x, y = separable_blobs()
        model = train(x, y, TrainConfig(epochs=5, seed=0))
        scores = predict_scores(model, x)
        assert scores.shape == (len(x), 3)
        np.testing.assert_allclose(scores.sum(axis=1), 1.0, atol=1e-12)
        assert (scores >= 0).all()


# ---------------------------------------------------------------------------
# training behavior
# ---------------------------------------------------------------------------


class TestTraining:
    def test_learns_separable_data(self):
        x, y = separable_blobs()
        model = train(x, y, TrainConfig(epochs=120, seed=0))
        pred = np.array([predict_label(model, row) for row in x])
        assert (pred == y).mean() >= 0.99

    def test_loss_history_starts_before_training_and_descends(self):
        x, y = separable_blobs()
        cfg = TrainConfig(epochs=60, seed=0)
        model = train(x, y, cfg)
        assert len(model.loss_history) == cfg.epochs + 1
        assert model.loss_history[-1] < model.loss_history[0]

    def test_deterministic_given_seed(self):
        x, y = separable_blobs()
        a = train(x, y, TrainConfig(epochs=8, seed=5))
        b = train(x, y, TrainConfig(epochs=8, seed=5))
        np.testing.assert_array_equal(a.w1, b.w1)
        np.testing.assert_array_equal(a.w2, b.w2)
        assert a.loss_history == b.loss_history

    def test_seed_changes_model(self):
        x, y = separable_blobs()
        a = train(x, y, TrainConfig(epochs=3, seed=0))
        b = train(x, y, TrainConfig(epochs=3, seed=1))
        assert not np.array_equal(a.w1, b.w1)

    def test_absent_class_rejected(self):
        x = np.zeros((4, 3))
        y = np.array([0, 0, 1, 1])
        with pytest.raises(TrainingDataError, match="class 2"):
            train(x, y, TrainConfig(epochs=1), n_classes=3)

    def test_empty_and_nonfinite_rejected(self):
        with pytest.raises(TrainingDataError):
            train(np.zeros((0, 3)), np.zeros(0, dtype=int), TrainConfig(epochs=1))
        bad = np.array([[np.nan, 0.0]])
        with pytest.raises(TrainingDataError):
            train(bad, np.array([0]), TrainConfig(epochs=1), n_classes=2)

    def test_labels_out_of_range_rejected(self):
        x = np.zeros((2, 2))
        with pytest.raises(TrainingDataError):
            train(x, np.array([0, 5]), TrainConfig(epochs=1), n_classes=2)

    def test_divergence_detected(self):
        # identical inputs with conflicting labels and an absurd step size
        # force the weights to overflow; the non-finite loss must be caught
        x = np.ones((8, 4))
        y = np.array([0] * 5 + [1] * 3)
        with pytest.raises(DivergenceError), np.errstate(over="ignore"):
            train(x, y, TrainConfig(learning_rate=1e307, epochs=50, seed=0, hidden_width=8))

    def test_config_domain(self):
        with pytest.raises(ParameterError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ParameterError):
            TrainConfig(epochs=0)
        with pytest.raises(ParameterError):
            TrainConfig(hidden_width=0)

    def test_init_bounds_follow_fan_in(self):
        cfg = TrainConfig(hidden_width=16, seed=3)
        model = init_model(25, 4, cfg)
        assert np.abs(model.w1).max() <= 1.0 / 5.0
        assert np.abs(model.w2).max() <= 1.0 / 4.0
        assert (model.b1 == 0).all() and (model.b2 == 0).all()

    def test_single_example_prediction_matches_batch(self):
        x, y = separable_blobs(n_per_class=5)
        model = train(x, y, TrainConfig(epochs=5, seed=0))
        batch = predict_scores(model, x[:3])
        for i in range(3):
            np.testing.assert_allclose(predict_scores(model, x[i]), batch[i])


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------


class TestSnapshots:
    def test_roundtrip_reproduces_predictions_bitwise(self, tmp_path):
        x, y = separable_blobs(n_per_class=8)
        model = train(
            x, y, TrainConfig(epochs=10, seed=2), feature_aliases=[f"q{i}" for i in range(12)]
        )
        path = tmp_path / "model.json"
        digest = save_model(model, path)
        back = load_model(path)
        np.testing.assert_array_equal(predict_scores(back, x), predict_scores(model, x))
        assert back.feature_aliases == model.feature_aliases
        assert back.config == model.config
        assert snapshot_digest(path) == digest

    def test_snapshot_bytes_deterministic(self, tmp_path):
        x, y = separable_blobs(n_per_class=8)
        model = train(x, y, TrainConfig(epochs=4, seed=2))
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        assert save_model(model, p1) == save_model(model, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_model_shape_properties(self):
        model = init_model(7, 3, TrainConfig(hidden_width=5))
        assert model.input_width == 7
        assert model.hidden_width == 5
        assert model.kappa == 3
