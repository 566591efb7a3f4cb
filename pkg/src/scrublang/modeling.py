"""Predictive modeling harness: lexicon scoring, ridge regression with LOOCV,
the four-cell cross-platform evaluation matrix, weight-times-frequency feature
importance, and NMF embedding reduction.

All fits are deterministic.  Ridge standardization statistics are computed on
the training fold only (the leakage-safe default); a whole-matrix mode exists
because the exact leave-one-out hat-matrix shortcut requires a fixed design.
Binary outcomes are modeled as +/-1 regression targets with sign-threshold
accuracy, ties broken toward the majority class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .stats import DegenerateDataError, bootstrap_corr_diff, pearson_r

CELL_ORDER = ("fb_fb", "fb_sms", "sms_sms", "sms_fb")
CELL_LABELS = {
    "fb_fb": "train facebook / test facebook",
    "fb_sms": "train facebook / test sms",
    "sms_sms": "train sms / test sms",
    "sms_fb": "train sms / test facebook",
}

QUADRANT_LABELS = {
    "A": "positive weight, more frequent on facebook",
    "B": "positive weight, more frequent on sms",
    "C": "negative weight, more frequent on facebook",
    "D": "negative weight, more frequent on sms",
}


@dataclass(frozen=True)
class LexiconModel:
    """Linear model over relative term/category frequencies."""

    weights: dict[str, float]
    intercept: float = 0.0
    outcome: str = ""

    def score(self, features: Mapping[str, float]) -> float:
        return apply_lexicon(self, features)


def apply_lexicon(model: LexiconModel, features: Mapping[str, float]) -> float:
    """Dot product of model weights with relative frequencies plus intercept.

    Features absent from the model (and model terms absent from the features)
    contribute zero.
    """
    total = model.intercept
    if len(model.weights) <= len(features):
        for feat, w in model.weights.items():
            freq = features.get(feat)
            if freq is not None:
                total += w * freq
    else:
        for feat, freq in features.items():
            w = model.weights.get(feat)
            if w is not None:
                total += w * freq
    return float(total)


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")


def ridge_solve(
    X: np.ndarray, y: np.ndarray, alpha: float = 1.0, standardize: bool = True
) -> tuple[np.ndarray, float]:
    """L2-regularized least squares; returns (weights, intercept).

    With ``standardize`` (the default) columns of X are z-scored, y is
    centered, the penalized normal equations are solved in standardized space,
    and the solution is mapped back (intercept from the means).  Zero-variance
    columns get weight 0.  With ``standardize=False`` the raw normal equations
    ``(X'X + aI) w = X'y`` are solved with no intercept.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-d with rows aligned to y")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    _check_finite("X", X)
    _check_finite("y", y)
    n, p = X.shape
    if not standardize:
        return _ridge_weights(X, y, alpha), 0.0
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    live = sigma > 0
    Z = np.zeros_like(X)
    Z[:, live] = (X[:, live] - mu[live]) / sigma[live]
    ybar = y.mean()
    w_std = _ridge_weights(Z, y - ybar, alpha)
    w = np.zeros(p)
    w[live] = w_std[live] / sigma[live]
    intercept = float(ybar - w @ mu)
    return w, intercept


def _ridge_weights(X: np.ndarray, y: np.ndarray, alpha: float) -> np.ndarray:
    """Solve (X'X + aI) w = X'y, via the dual when features outnumber rows.

    The dual form X'(XX' + aI)^-1 y is algebraically identical and turns a
    p x p solve into an n x n solve.
    """
    n, p = X.shape
    if p <= n:
        return np.linalg.solve(X.T @ X + alpha * np.eye(p), X.T @ y)
    return X.T @ np.linalg.solve(X @ X.T + alpha * np.eye(n), y)


def ridge_fit(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float = 1.0,
    feature_names: Sequence[str] | None = None,
    outcome: str = "",
    standardize: bool = True,
) -> LexiconModel:
    """Fit ridge regression and package it as a :class:`LexiconModel`."""
    w, intercept = ridge_solve(X, y, alpha, standardize=standardize)
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(len(w))]
    if len(feature_names) != len(w):
        raise ValueError("feature_names length must match X columns")
    return LexiconModel(
        weights={name: float(wj) for name, wj in zip(feature_names, w)},
        intercept=intercept,
        outcome=outcome,
    )


# -- leave-one-out cross-validation -------------------------------------


def loocv_folds(n: int) -> Iterable[tuple[np.ndarray, int]]:
    """(train indices, held-out index) pairs; train never contains the holdout."""
    idx = np.arange(n)
    for i in range(n):
        yield idx[idx != i], i


def _augmented_design(X: np.ndarray, standardize: str) -> np.ndarray:
    if standardize == "global":
        mu = X.mean(axis=0)
        sigma = X.std(axis=0)
        sigma[sigma == 0] = 1.0
        X = (X - mu) / sigma
    elif standardize != "none":
        raise ValueError("fixed-design paths support standardize='global' or 'none'")
    return np.column_stack([np.ones(X.shape[0]), X])


def loocv_predictions_naive(
    X: np.ndarray, y: np.ndarray, alpha: float = 1.0, standardize: str = "fold"
) -> np.ndarray:
    """Per-user LOOCV predictions by explicit refits.

    ``standardize="fold"`` recomputes standardization statistics on each
    training fold (no leakage).  ``"global"`` / ``"none"`` use one fixed
    design with an unpenalized intercept column, which is the estimator the
    hat-matrix shortcut reproduces exactly.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n < 3:
        raise ValueError("need n >= 3 for leave-one-out evaluation")
    preds = np.empty(n)
    if standardize == "fold":
        for train, i in loocv_folds(n):
            w, b = ridge_solve(X[train], y[train], alpha, standardize=True)
            preds[i] = X[i] @ w + b
        return preds
    D = _augmented_design(X, standardize)
    P = alpha * np.eye(D.shape[1])
    P[0, 0] = 0.0  # intercept unpenalized
    for train, i in loocv_folds(n):
        Dt = D[train]
        beta = np.linalg.solve(Dt.T @ Dt + P, Dt.T @ y[train])
        preds[i] = D[i] @ beta
    return preds


def loocv_predictions_hat(
    X: np.ndarray, y: np.ndarray, alpha: float = 1.0, standardize: str = "global"
) -> np.ndarray:
    """LOOCV predictions via the hat-matrix identity, no refits.

    For penalized least squares on a fixed design, removing row i gives
    ``pred_i = (fitted_i - h_ii * y_i) / (1 - h_ii)`` exactly, where ``h_ii``
    is the i-th leverage of the ridge hat matrix.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 3:
        raise ValueError("need n >= 3 for leave-one-out evaluation")
    D = _augmented_design(X, standardize)
    P = alpha * np.eye(D.shape[1])
    P[0, 0] = 0.0
    A = np.linalg.solve(D.T @ D + P, D.T)
    H = D @ A
    h = np.diag(H)
    if np.any(h >= 1.0):
        raise DegenerateDataError("leverage of 1: a point determines its own fit")
    fitted = H @ y
    return (fitted - h * y) / (1.0 - h)


def sign_accuracy(predictions: np.ndarray, y: np.ndarray) -> float:
    """Fraction of correct signs for +/-1 targets; prediction ties go to the
    majority class of y."""
    y = np.asarray(y, dtype=float)
    majority = 1.0 if np.sum(y > 0) >= np.sum(y < 0) else -1.0
    signs = np.where(predictions > 0, 1.0, np.where(predictions < 0, -1.0, majority))
    return float(np.mean(signs == y))


def loocv_evaluate(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float = 1.0,
    metric: str = "pearson_r",
    shortcut: bool = False,
    standardize: str | None = None,
) -> float:
    """LOOCV metric (``"pearson_r"`` or ``"accuracy"``) for ridge predictions.

    ``shortcut=True`` switches to the exact hat-matrix identity, which
    requires a fixed design (``standardize`` defaults to ``"global"`` there,
    ``"fold"`` otherwise).
    """
    if standardize is None:
        standardize = "global" if shortcut else "fold"
    if shortcut:
        preds = loocv_predictions_hat(X, y, alpha, standardize=standardize)
    else:
        preds = loocv_predictions_naive(X, y, alpha, standardize=standardize)
    if metric == "pearson_r":
        return pearson_r(preds, y)
    if metric == "accuracy":
        return sign_accuracy(preds, np.asarray(y, dtype=float))
    raise ValueError(f"unknown metric {metric!r}")


# -- four-cell cross-platform evaluation ---------------------------------


@dataclass(frozen=True)
class CellResult:
    metric: str
    value: float
    n: int

    def to_dict(self) -> dict:
        return {"metric": self.metric, "value": self.value, "n": self.n}


@dataclass
class OutcomeEval:
    outcome: str
    kind: str  # "continuous" or "binary"
    cells: dict[str, CellResult] = field(default_factory=dict)
    bootstrap: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "kind": self.kind,
            "cells": {k: v.to_dict() for k, v in self.cells.items()},
            "bootstrap": self.bootstrap,
        }


@dataclass
class EvalReport:
    """Per-outcome, per-train/test-cell evaluation with bootstrap comparisons."""

    outcomes: dict[str, OutcomeEval]
    alpha: float
    seed: int
    bootstrap_iterations: int
    cross_fit: str
    cell_labels: dict[str, str] = field(default_factory=lambda: dict(CELL_LABELS))

    def to_dict(self) -> dict:
        return {
            "outcomes": {k: v.to_dict() for k, v in sorted(self.outcomes.items())},
            "alpha": self.alpha,
            "seed": self.seed,
            "bootstrap_iterations": self.bootstrap_iterations,
            "cross_fit": self.cross_fit,
            "cell_labels": self.cell_labels,
        }


def _feature_matrix(
    vectors: Mapping[str, Mapping[str, float]], users: Sequence[str], features: Sequence[str]
) -> np.ndarray:
    M = np.zeros((len(users), len(features)))
    index = {f: j for j, f in enumerate(features)}
    for i, u in enumerate(users):
        for feat, freq in vectors[u].items():
            j = index.get(feat)
            if j is not None:
                M[i, j] = freq
    return M


def bootstrap_accuracy_diff(
    preds_a: np.ndarray,
    preds_b: np.ndarray,
    y: np.ndarray,
    iterations: int,
    seed: int,
) -> dict:
    """Null-centered bootstrap on the sign-accuracy difference (binary outcomes)."""
    n = y.size
    obs = sign_accuracy(preds_a, y) - sign_accuracy(preds_b, y)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(iterations, n))
    majority = 1.0 if np.sum(y > 0) >= np.sum(y < 0) else -1.0
    sa = np.where(preds_a[idx] > 0, 1.0, np.where(preds_a[idx] < 0, -1.0, majority))
    sb = np.where(preds_b[idx] > 0, 1.0, np.where(preds_b[idx] < 0, -1.0, majority))
    deltas = np.mean(sa == y[idx], axis=1) - np.mean(sb == y[idx], axis=1)
    extreme = int(np.sum(np.abs(deltas - obs) >= abs(obs)))
    p = min(1.0, (1 + extreme) / (iterations + 1))
    return {"delta": float(obs), "p_value": float(p), "skipped": 0}


def cross_domain_matrix(
    features_fb: Mapping[str, Mapping[str, float]],
    features_sms: Mapping[str, Mapping[str, float]],
    outcomes: Mapping[str, Mapping[str, float | None]],
    alpha: float = 1.0,
    binary_outcomes: frozenset[str] = frozenset({"gender"}),
    feature_names: Sequence[str] | None = None,
    bootstrap_iterations: int = 10_000,
    seed: int = 0,
    cross_fit: str = "holdout",
) -> EvalReport:
    """Fill the four train/test cells per outcome for one shared user set.

    Every cell holds out the evaluated user: in-domain cells are classic
    LOOCV, and with ``cross_fit="holdout"`` (the default) cross-domain cells
    likewise train on the source platform minus the user being predicted, so
    a user never influences their own estimate.  ``cross_fit="full"`` instead
    trains cross-domain models once on the entire source platform.

    Bootstrap comparisons pair the Facebook-text-based estimates against the
    SMS-text-based ones, in-domain (fb_fb vs sms_sms) and cross-domain
    (sms_fb vs fb_sms).
    """
    if cross_fit not in ("holdout", "full"):
        raise ValueError("cross_fit must be 'holdout' or 'full'")
    fb_users = set(features_fb)
    sms_users = set(features_sms)
    if fb_users != sms_users:
        missing = sorted(fb_users ^ sms_users)
        raise ValueError(f"user sets differ between platforms; unmatched ids: {missing}")
    users = sorted(fb_users)
    unknown = sorted(u for u in users if u not in outcomes)
    if unknown:
        raise ValueError(f"users missing from outcomes: {unknown}")

    if feature_names is None:
        names: set[str] = set()
        for vec in list(features_fb.values()) + list(features_sms.values()):
            names.update(vec)
        feature_names = sorted(names)

    X_fb = _feature_matrix(features_fb, users, feature_names)
    X_sms = _feature_matrix(features_sms, users, feature_names)
    X = {"fb": X_fb, "sms": X_sms}

    outcome_names = sorted({name for u in users for name in outcomes[u]})
    report = EvalReport(
        outcomes={},
        alpha=alpha,
        seed=seed,
        bootstrap_iterations=bootstrap_iterations,
        cross_fit=cross_fit,
    )

    for name in outcome_names:
        raw = [outcomes[u].get(name) for u in users]
        keep = [i for i, v in enumerate(raw) if v is not None and np.isfinite(v)]
        if len(keep) < 3:
            continue
        y = np.array([float(raw[i]) for i in keep])
        kind = "binary" if name in binary_outcomes else "continuous"
        metric = "accuracy" if kind == "binary" else "pearson_r"

        preds: dict[str, np.ndarray] = {}
        for cell in CELL_ORDER:
            train_plat, test_plat = cell.split("_")
            Xtr = X[train_plat][keep]
            Xte = X[test_plat][keep]
            n = len(keep)
            cell_preds = np.empty(n)
            if cross_fit == "full" and train_plat != test_plat:
                w, b = ridge_solve(Xtr, y, alpha, standardize=True)
                cell_preds = Xte @ w + b
            else:
                for train, i in loocv_folds(n):
                    w, b = ridge_solve(Xtr[train], y[train], alpha, standardize=True)
                    cell_preds[i] = Xte[i] @ w + b
            preds[cell] = cell_preds

        ev = OutcomeEval(outcome=name, kind=kind)
        for cell in CELL_ORDER:
            if metric == "pearson_r":
                try:
                    value = pearson_r(preds[cell], y)
                except DegenerateDataError:
                    value = float("nan")
            else:
                value = sign_accuracy(preds[cell], y)
            ev.cells[cell] = CellResult(metric=metric, value=value, n=len(keep))

        for comp, (cell_a, cell_b) in {
            "in_domain": ("fb_fb", "sms_sms"),
            "cross_domain": ("sms_fb", "fb_sms"),
        }.items():
            try:
                if metric == "pearson_r":
                    res = bootstrap_corr_diff(
                        preds[cell_a], preds[cell_b], y, bootstrap_iterations, seed=seed
                    )
                    ev.bootstrap[comp] = {
                        "facebook_side": cell_a,
                        "sms_side": cell_b,
                        "delta": res.delta_r,
                        "p_value": res.p_value,
                        "skipped": res.skipped,
                    }
                else:
                    ev.bootstrap[comp] = {
                        "facebook_side": cell_a,
                        "sms_side": cell_b,
                        **bootstrap_accuracy_diff(
                            preds[cell_a], preds[cell_b], y, bootstrap_iterations, seed
                        ),
                    }
            except DegenerateDataError:
                ev.bootstrap[comp] = {
                    "facebook_side": cell_a,
                    "sms_side": cell_b,
                    "delta": None,
                    "p_value": None,
                    "skipped": bootstrap_iterations,
                }
        report.outcomes[name] = ev
    return report


# -- feature importance (weight x frequency difference) ------------------


@dataclass(frozen=True)
class ImportanceRow:
    feature: str
    importance: float
    weight: float
    freq_diff: float
    quadrant: str | None

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "importance": self.importance,
            "weight": self.weight,
            "freq_diff": self.freq_diff,
            "quadrant": self.quadrant,
        }


def feature_importance(
    model: LexiconModel,
    freq_fb: Mapping[str, float],
    freq_sms: Mapping[str, float],
) -> list[ImportanceRow]:
    """Rank features by weight times cross-platform frequency difference.

    ``importance = weight * (freq_facebook - freq_sms)``, computed over the
    model's features with corpus-level mean relative frequencies.  Quadrants
    follow the sign pair (weight, frequency difference): A/B positive weight,
    C/D negative; A/C more frequent on Facebook, B/D on SMS.
    """
    rows = []
    for feat, w in model.weights.items():
        diff = float(freq_fb.get(feat, 0.0)) - float(freq_sms.get(feat, 0.0))
        if w > 0:
            quadrant = "A" if diff > 0 else "B" if diff < 0 else None
        elif w < 0:
            quadrant = "C" if diff > 0 else "D" if diff < 0 else None
        else:
            quadrant = None
        rows.append(
            ImportanceRow(
                feature=feat,
                importance=float(w * diff),
                weight=float(w),
                freq_diff=diff,
                quadrant=quadrant,
            )
        )
    rows.sort(key=lambda r: (-r.importance, r.feature))
    return rows


# -- non-negative matrix factorization ------------------------------------


@dataclass
class NMFResult:
    W: np.ndarray
    H: np.ndarray
    objectives: list[float]
    column_shifts: np.ndarray

    @property
    def reconstruction_error(self) -> float:
        return self.objectives[-1]


def nmf_reduce(
    E: np.ndarray, k: int, iterations: int = 200, seed: int = 0
) -> NMFResult:
    """Frobenius-norm NMF by multiplicative updates: ``E ~ W @ H``.

    Columns containing negative entries are shifted up by their minimum first
    (the shifts are returned).  The objective ``||E - WH||_F`` is recorded
    after every iteration and is non-increasing.  Deterministic given ``seed``.
    """
    V = np.asarray(E, dtype=float)
    if V.ndim != 2:
        raise ValueError("E must be a 2-d matrix")
    _check_finite("E", V)
    n, d = V.shape
    if not (1 <= k <= min(n, d)):
        raise ValueError(f"k={k} out of range for a {n}x{d} matrix")
    mins = V.min(axis=0)
    shifts = np.where(mins < 0, -mins, 0.0)
    V = V + shifts

    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(V.mean(), np.finfo(float).tiny) / k)
    W = scale * rng.uniform(0.1, 1.0, size=(n, k))
    H = scale * rng.uniform(0.1, 1.0, size=(k, d))

    eps = 1e-12
    objectives = [float(np.linalg.norm(V - W @ H))]
    for _ in range(iterations):
        W = W * (V @ H.T) / np.maximum(W @ (H @ H.T), eps)
        H = H * (W.T @ V) / np.maximum((W.T @ W) @ H, eps)
        objectives.append(float(np.linalg.norm(V - W @ H)))
    return NMFResult(W=W, H=H, objectives=objectives, column_shifts=shifts)
