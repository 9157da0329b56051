import json
import math

import numpy as np
import pytest

from newsrec.features import SCHEMA_VERSION, FeatureVector, LabeledExample
from newsrec.gbdt import (GbdtError, TrainConfig, TreeEnsemble, load, save, train,
                          train_arrays)


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def auc_oracle(y, scores):
    """Rank-statistic AUC: P(score_pos > score_neg) with tie credit 0.5."""
    pos = [s for s, label in zip(scores, y) if label == 1]
    neg = [s for s, label in zip(scores, y) if label == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def examples_from(X, y):
    return [LabeledExample(FeatureVector(np.asarray(row, dtype=float)), int(label),
                           f"u{i}", f"a{i}", float(i))
            for i, (row, label) in enumerate(zip(X, y))]


def separable_dataset(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = (X[:, 0] > 0).astype(int)
    return X, y


class TestTrain:
    def test_constant_model_on_balanced_labels(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 1, 0, 1])
        model = train_arrays(X, y, TrainConfig(n_trees=1, max_depth=0))
        assert model.base_score == pytest.approx(0.0)
        for x in ([-5.0], [0.5], [100.0]):
            assert model.predict_matrix(np.array([x]))[0] == pytest.approx(0.5)

    def test_base_score_is_log_odds(self):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
        model = train_arrays(X, y, TrainConfig(n_trees=1, max_depth=0))
        assert model.base_score == pytest.approx(math.log(0.3 / 0.7))

    def test_depth0_leaf_matches_newton_step(self):
        # base pinned to 0 so p_hat = 0.5 for every example
        X = np.arange(40, dtype=float).reshape(-1, 1)
        y = np.array([1] * 30 + [0] * 10)
        lam = 1.0
        cfg = TrainConfig(n_trees=1, max_depth=0, learning_rate=1.0, l2_reg=lam)
        model = train_arrays(X, y, cfg, base_score=0.0)
        g = 0.5 - y
        expected = -g.sum() / (0.25 * len(y) + lam)  # analytic oracle
        leaf = model.trees[0].weight[0]
        assert leaf == pytest.approx(expected, abs=1e-9)

    def test_threshold_separable_perfect_accuracy(self):
        rng = np.random.default_rng(1)
        x = np.concatenate([rng.uniform(-2, -0.1, 50), rng.uniform(0.1, 2, 50)])
        y = (x > 0).astype(int)
        X = x.reshape(-1, 1)
        model = train_arrays(X, y, TrainConfig(n_trees=5, max_depth=1, learning_rate=0.5))
        pred = (model.predict_matrix(X) >= 0.5).astype(int)
        assert (pred == y).all()

    def test_monotone_training_loss(self):
        X, y = separable_dataset(seed=3)
        model = train_arrays(X, y, TrainConfig(n_trees=40, max_depth=3))
        losses = model.train_losses
        assert all(losses[i + 1] <= losses[i] + 1e-9 for i in range(len(losses) - 1))

    def test_separable_auc(self):
        X, y = separable_dataset(n=200, seed=5)
        model = train_arrays(X, y, TrainConfig(n_trees=30, max_depth=3))
        scores = model.predict_matrix(X)
        assert auc_oracle(y, scores) >= 0.95

    def test_determinism(self):
        X, y = separable_dataset(n=80, seed=7)
        m1 = train_arrays(X, y, TrainConfig(n_trees=10, max_depth=2))
        m2 = train_arrays(X, y, TrainConfig(n_trees=10, max_depth=2))
        assert json.dumps([t.to_dict() for t in m1.trees]) == \
               json.dumps([t.to_dict() for t in m2.trees])

    def test_tie_break_prefers_lowest_feature(self):
        x = np.array([-1.0, -0.5, 0.5, 1.0])
        X = np.column_stack([x, x])  # identical columns, identical gains
        y = (x > 0).astype(int)
        model = train_arrays(X, y, TrainConfig(n_trees=1, max_depth=1,
                                               min_child_weight=0.0))
        assert model.trees[0].feature[0] == 0

    def test_single_class_rejected(self):
        X = np.zeros((4, 2))
        with pytest.raises(GbdtError, match="positive"):
            train_arrays(X, np.ones(4), TrainConfig())

    def test_width_mismatch_rejected(self):
        exs = examples_from([[1.0], [0.0]], [1, 0])
        exs += examples_from([[1.0, 2.0]], [1])
        with pytest.raises(GbdtError, match="width"):
            train(exs, TrainConfig())

    def test_config_validation(self):
        with pytest.raises(GbdtError):
            TrainConfig(n_trees=0)
        with pytest.raises(GbdtError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(GbdtError):
            TrainConfig(max_depth=-1)

    def test_train_from_labeled_examples(self):
        X, y = separable_dataset(n=60, seed=11)
        model = train(examples_from(X, y), TrainConfig(n_trees=5, max_depth=2))
        assert model.schema_version == SCHEMA_VERSION
        assert model.n_features == 3


class TestPredict:
    def test_empty_tree_list_is_sigmoid_base(self):
        model = TreeEnsemble(trees=[], learning_rate=0.1, base_score=0.7,
                             schema_version=1, n_features=2)
        assert model.predict_matrix(np.zeros((1, 2)))[0] == pytest.approx(sigmoid(0.7))

    def test_single_leaf_closed_form(self):
        from newsrec.gbdt import Tree
        tree = Tree([-1], [0.0], [-1], [-1], [1.3])
        model = TreeEnsemble(trees=[tree], learning_rate=1.0, base_score=0.0,
                             schema_version=1, n_features=2)
        assert model.predict_matrix(np.zeros((1, 2)))[0] == pytest.approx(sigmoid(1.3))

    def test_output_strictly_inside_unit_interval(self):
        X, y = separable_dataset(n=100, seed=13)
        model = train_arrays(X, y, TrainConfig(n_trees=60, max_depth=3, learning_rate=1.0))
        p = model.predict_matrix(X)
        assert (p > 0.0).all() and (p < 1.0).all()

    def test_width_checked(self):
        model = TreeEnsemble(trees=[], learning_rate=0.1, base_score=0.0,
                             schema_version=1, n_features=3)
        with pytest.raises(GbdtError, match="width"):
            model.predict_matrix(np.zeros((1, 2)))


class TestSaveLoad:
    def test_roundtrip_bit_identical_scores(self, tmp_path):
        X, y = separable_dataset(n=120, seed=17)
        model = train_arrays(X, y, TrainConfig(n_trees=12, max_depth=3))
        save(model, tmp_path / "m.json")
        again = load(tmp_path / "m.json")
        probe = np.random.default_rng(0).normal(size=(100, 3))
        assert np.array_equal(model.predict_matrix(probe), again.predict_matrix(probe))
        assert not again.schema_mismatch

    def test_corrupted_file_structured_error(self, tmp_path):
        (tmp_path / "bad.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(GbdtError, match="cannot load"):
            load(tmp_path / "bad.json")
        (tmp_path / "partial.json").write_text('{"format": 1}', encoding="utf-8")
        with pytest.raises(GbdtError, match="cannot load"):
            load(tmp_path / "partial.json")

    def test_schema_mismatch_sets_warning_flag(self, tmp_path):
        X, y = separable_dataset(n=40, seed=19)
        model = train_arrays(X, y, TrainConfig(n_trees=2, max_depth=1),
                             schema_version=99)
        save(model, tmp_path / "m.json")
        again = load(tmp_path / "m.json", current_schema_version=SCHEMA_VERSION)
        assert again.schema_mismatch
        assert again.schema_version == 99
