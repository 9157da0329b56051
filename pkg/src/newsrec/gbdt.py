"""Gradient-boosted regression trees with a logistic link.

Second-order (Newton) boosting on logistic loss: per round, with p the
current prediction, gradient g = p - y and hessian h = p(1-p); a leaf's
weight is -sum(g) / (sum(h) + lambda) and splits maximize the standard
second-order gain

    0.5 * [ GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda) ]

found by exact greedy search over sorted unique feature values (midpoint
thresholds, `x < threshold` routes left). Ties in gain resolve to the
lowest feature index, then the lowest threshold, so training is fully
deterministic. The raw score is base_score (log-odds of the positive rate)
plus learning_rate times the sum of routed leaf weights; predictions are
its sigmoid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .features import SCHEMA_VERSION, FeatureVector, LabeledExample


class GbdtError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_child_weight: float = 1.0
    l2_reg: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise GbdtError("n_trees must be >= 1")
        if self.max_depth < 0:
            raise GbdtError("max_depth must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise GbdtError("learning_rate must be in (0, 1]")
        if self.l2_reg < 0 or self.min_child_weight < 0:
            raise GbdtError("regularizers must be >= 0")


class Tree:
    """One regression tree in flat-array form (node 0 is the root).

    Leaves keep feature = -1 and carry their weight; internal nodes route
    `x[feature] < threshold` to `left`, else `right`.
    """

    def __init__(self, feature, threshold, left, right, weight):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.weight = np.asarray(weight, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        def rec(i: int) -> int:
            if self.feature[i] < 0:
                return 0
            return 1 + max(rec(self.left[i]), rec(self.right[i]))
        return rec(0)

    def route_matrix(self, X: np.ndarray) -> np.ndarray:
        """Leaf weights for every row of X."""
        idx = np.zeros(len(X), dtype=np.int32)
        while True:
            internal = self.feature[idx] >= 0
            if not internal.any():
                return self.weight[idx]
            rows = np.nonzero(internal)[0]
            f = self.feature[idx[rows]]
            go_left = X[rows, f] < self.threshold[idx[rows]]
            idx[rows] = np.where(go_left, self.left[idx[rows]], self.right[idx[rows]])

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "weight": self.weight.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Tree":
        return cls(obj["feature"], obj["threshold"], obj["left"], obj["right"],
                   obj["weight"])


@dataclass
class TreeEnsemble:
    trees: list[Tree]
    learning_rate: float
    base_score: float
    schema_version: int
    n_features: int
    train_losses: list[float] = field(default_factory=list)
    schema_mismatch: bool = False

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise GbdtError(f"feature width {X.shape} does not match model "
                            f"({self.n_features})")
        out = np.full(len(X), self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.route_matrix(X)
        return out

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.raw_scores(X))

    def predict(self, fv: FeatureVector) -> float:
        return float(self.predict_matrix(fv.values.reshape(1, -1))[0])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -35.0, 35.0)))


def _logloss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1 - 1e-12)
    return float(-(y * np.log(p) + (1 - y) * np.log(1 - p)).mean())


class _TreeBuilder:
    def __init__(self, X: np.ndarray, order: np.ndarray, cfg: TrainConfig):
        self.X = X
        self.order = order  # (n, F) per-feature presorted row indices
        self.cfg = cfg
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.weight: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.weight.append(0.0)
        return len(self.feature) - 1

    def _best_split(self, mask: np.ndarray, g: np.ndarray, h: np.ndarray):
        lam = self.cfg.l2_reg
        g_tot = g[mask].sum()
        h_tot = h[mask].sum()
        parent = g_tot * g_tot / (h_tot + lam)
        best = (0.0, -1, 0.0)  # (gain, feature, threshold); strict > keeps ties low
        for f in range(self.X.shape[1]):
            rows = self.order[:, f]
            rows = rows[mask[rows]]
            vals = self.X[rows, f]
            if vals[0] == vals[-1]:
                continue
            gl = np.cumsum(g[rows])[:-1]
            hl = np.cumsum(h[rows])[:-1]
            boundary = vals[:-1] < vals[1:]
            valid = (boundary
                     & (hl >= self.cfg.min_child_weight)
                     & (h_tot - hl >= self.cfg.min_child_weight))
            if not valid.any():
                continue
            gr = g_tot - gl
            hr = h_tot - hl
            gain = np.where(
                valid,
                0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent),
                -np.inf,
            )
            i = int(np.argmax(gain))  # first max: lowest threshold wins ties
            if gain[i] > best[0]:
                best = (float(gain[i]), f, float((vals[i] + vals[i + 1]) / 2.0))
        return best

    def build(self, g: np.ndarray, h: np.ndarray) -> tuple[Tree, np.ndarray]:
        """Grow one tree; returns it plus per-row leaf weights."""
        contrib = np.zeros(len(g))
        root_mask = np.ones(len(g), dtype=bool)
        stack = [(self._new_node(), root_mask, 0)]
        while stack:
            node, mask, depth = stack.pop()
            if depth < self.cfg.max_depth:
                gain, f, thr = self._best_split(mask, g, h)
                if f >= 0 and gain > 0.0:
                    self.feature[node] = f
                    self.threshold[node] = thr
                    left_mask = mask & (self.X[:, f] < thr)
                    right_mask = mask & ~left_mask
                    self.left[node] = self._new_node()
                    self.right[node] = self._new_node()
                    stack.append((self.right[node], right_mask, depth + 1))
                    stack.append((self.left[node], left_mask, depth + 1))
                    continue
            w = -g[mask].sum() / (h[mask].sum() + self.cfg.l2_reg)
            self.weight[node] = w
            contrib[mask] = w
        tree = Tree(self.feature, self.threshold, self.left, self.right, self.weight)
        return tree, contrib


def train_arrays(X: np.ndarray, y: np.ndarray, cfg: TrainConfig,
                 schema_version: int = SCHEMA_VERSION,
                 base_score: Optional[float] = None) -> TreeEnsemble:
    """Fit an ensemble on a raw (n, F) matrix with {0,1} labels.

    base_score defaults to the log-odds of the positive rate; pass an
    explicit value to pin the starting margin (useful for analytic checks).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise GbdtError("X must be (n, F) with matching labels")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise GbdtError("training requires at least one positive and one negative")
    if not np.isfinite(X).all():
        raise GbdtError("features contain NaN or infinity")

    rate = n_pos / len(y)
    base = math.log(rate / (1.0 - rate)) if base_score is None else float(base_score)
    margins = np.full(len(y), base)
    order = np.argsort(X, axis=0, kind="stable")

    ensemble = TreeEnsemble(trees=[], learning_rate=cfg.learning_rate,
                            base_score=base, schema_version=schema_version,
                            n_features=X.shape[1])
    prev = _logloss(y, _sigmoid(margins))
    ensemble.train_losses.append(prev)
    for _ in range(cfg.n_trees):
        p = _sigmoid(margins)
        g = p - y
        h = p * (1.0 - p)
        tree, contrib = _TreeBuilder(X, order, cfg).build(g, h)
        margins += cfg.learning_rate * contrib
        loss = _logloss(y, _sigmoid(margins))
        if loss > prev + 1e-9:
            raise GbdtError(f"training loss increased ({prev} -> {loss})")
        prev = loss
        ensemble.train_losses.append(loss)
        ensemble.trees.append(tree)
    return ensemble


def train(examples: Sequence[LabeledExample], cfg: TrainConfig) -> TreeEnsemble:
    if not examples:
        raise GbdtError("no training examples")
    widths = {len(ex.features.values) for ex in examples}
    if len(widths) != 1:
        raise GbdtError(f"non-uniform feature widths: {sorted(widths)}")
    versions = {ex.features.schema_version for ex in examples}
    if len(versions) != 1:
        raise GbdtError(f"mixed schema versions: {sorted(versions)}")
    X = np.stack([ex.features.values for ex in examples])
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    return train_arrays(X, y, cfg, schema_version=versions.pop())


MODEL_FORMAT = 1


def save(model: TreeEnsemble, path: str | Path) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "schema_version": model.schema_version,
        "n_features": model.n_features,
        "learning_rate": model.learning_rate,
        "base_score": model.base_score,
        "trees": [t.to_dict() for t in model.trees],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load(path: str | Path, current_schema_version: int = SCHEMA_VERSION) -> TreeEnsemble:
    """Load a saved ensemble. A schema_version different from the running
    feature schema sets `schema_mismatch` instead of failing."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload["format"] != MODEL_FORMAT:
            raise GbdtError(f"unsupported model format {payload['format']!r}")
        model = TreeEnsemble(
            trees=[Tree.from_dict(t) for t in payload["trees"]],
            learning_rate=float(payload["learning_rate"]),
            base_score=float(payload["base_score"]),
            schema_version=int(payload["schema_version"]),
            n_features=int(payload["n_features"]),
        )
    except GbdtError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise GbdtError(f"cannot load model from {path}: {exc}") from exc
    if model.schema_version != current_schema_version:
        model.schema_mismatch = True
    return model
