"""The two batch learners and their fixed tuning grids.

Each retraining round picks one grid member by accuracy on a holdout
slice (the most recent fifth of the training set, so validation data
looks like what comes next), then refits the winner on everything.
Grids are deliberately tiny and never change between rounds; with the
seed fixed the whole procedure is deterministic.
"""

from __future__ import annotations

import warnings
from collections import Counter
from typing import Sequence

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.exceptions import ConvergenceWarning
from sklearn.neural_network import MLPClassifier

LEARNERS = ("rf", "mlp")

GRIDS: dict[str, tuple[dict, ...]] = {
    "rf": (
        {"n_estimators": 60, "max_depth": None},
        {"n_estimators": 120, "max_depth": 12},
    ),
    "mlp": (
        {"hidden_layer_sizes": (32,)},
        {"hidden_layer_sizes": (64,)},
    ),
}


class ConstantModel:
    """Degenerate predictor for single-class training sets."""

    def __init__(self, label: str):
        self.label = label

    def predict(self, X) -> np.ndarray:
        return np.full(len(X), self.label, dtype=object)


def make_estimator(learner: str, params: dict, seed: int):
    if learner == "rf":
        return RandomForestClassifier(random_state=seed, n_jobs=1, **params)
    if learner == "mlp":
        # max_iter is part of the fixed training budget; runs that stop
        # there are still valid grid members, so the warning is noise
        return MLPClassifier(random_state=seed, max_iter=300, **params)
    raise ValueError(f"unknown learner {learner!r}; expected one of {LEARNERS}")


def majority_label(labels: Sequence[str]) -> str | None:
    """Most frequent label, ties broken lexicographically; None if empty."""
    if not labels:
        return None
    counts = Counter(labels)
    return min(counts, key=lambda lab: (-counts[lab], lab))


def _fit(model, X, y):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        model.fit(X, y)
    return model


def fit_best(learner: str, X: np.ndarray, y: Sequence[str], seed: int):
    """Grid-select on a recency holdout, refit on all rows.

    Returns (model, params_used). Falls back to a constant predictor
    when the training set holds a single class, which the classifiers
    cannot represent.
    """
    y = list(y)
    if len(set(y)) < 2:
        label = majority_label(y)
        return ConstantModel(label), {"constant": label}
    grid = GRIDS[learner]
    cut = len(y) - max(1, len(y) // 5)
    best_params = grid[0]
    if cut >= 1 and len(set(y[:cut])) >= 2:
        best_score = -1.0
        for params in grid:
            probe = _fit(make_estimator(learner, params, seed), X[:cut], y[:cut])
            score = float(np.mean(probe.predict(X[cut:]) == np.asarray(y[cut:], dtype=object)))
            if score > best_score:
                best_score = score
                best_params = params
    model = _fit(make_estimator(learner, best_params, seed), X, y)
    return model, dict(best_params)
