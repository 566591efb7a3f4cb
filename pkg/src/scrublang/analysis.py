"""Cross-platform language comparison: per-n-gram effect sizes, per-category
paired tests, FDR flags, word-cloud data, and corpus summary statistics.

Users must appear on both platforms to enter the paired comparisons.  The
per-n-gram p comes from a univariate logistic regression of the platform
indicator on the n-gram frequency; features that separate the platforms
perfectly (or keep the logistic fit from converging) fall back to the paired
t-test p and are flagged as such.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .features import (
    DEFAULT_MIN_GROUP_FRACTION,
    DictionarySpec,
    UserCorpus,
    group_frequency_filter,
)
from .stats import (
    DegenerateDataError,
    bh_fdr,
    cohens_d_paired,
    paired_t_test,
    univariate_logistic_p,
)


class InsufficientUsersError(ValueError):
    pass


@dataclass(frozen=True)
class NgramDiff:
    ngram: str
    cohens_d: float
    p_value: float
    q_significant: bool
    freq_facebook: float
    freq_sms: float
    degenerate: bool = False
    p_fallback: str | None = None  # "paired_t" when the logistic fit was unusable

    def to_dict(self) -> dict:
        return {
            "ngram": self.ngram,
            "cohens_d": self.cohens_d,
            "p_value": self.p_value,
            "q_significant": self.q_significant,
            "freq_facebook": self.freq_facebook,
            "freq_sms": self.freq_sms,
            "degenerate": self.degenerate,
            "p_fallback": self.p_fallback,
        }


@dataclass(frozen=True)
class CategoryDiff:
    category: str
    t_statistic: float
    p_value: float
    q_significant: bool
    mean_facebook: float
    mean_sms: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "t_statistic": self.t_statistic,
            "p_value": self.p_value,
            "q_significant": self.q_significant,
            "mean_facebook": self.mean_facebook,
            "mean_sms": self.mean_sms,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class CloudDatum:
    """One word-cloud token: size scales with |d|, darkness with frequency."""

    ngram: str
    cohens_d: float
    frequency: float
    side: str
    size: float
    darkness: float

    def to_dict(self) -> dict:
        return {
            "ngram": self.ngram,
            "cohens_d": self.cohens_d,
            "frequency": self.frequency,
            "side": self.side,
            "size": self.size,
            "darkness": self.darkness,
        }


def shared_users(corpora: Mapping[tuple[str, str], UserCorpus]) -> list[str]:
    fb = {u for (u, plat) in corpora if plat == "facebook"}
    sms = {u for (u, plat) in corpora if plat == "sms"}
    return sorted(fb & sms)


def _paired_vectors(
    corpora: Mapping[tuple[str, str], UserCorpus],
    users: list[str],
    orders: Iterable[int],
) -> tuple[dict[str, dict[str, float]], dict[str, dict[str, float]]]:
    fb = {u: corpora[(u, "facebook")].ngram_features(orders) for u in users}
    sms = {u: corpora[(u, "sms")].ngram_features(orders) for u in users}
    return fb, sms


def diff_ngrams(
    corpora: Mapping[tuple[str, str], UserCorpus],
    alpha: float = 0.05,
    min_group_fraction: float = DEFAULT_MIN_GROUP_FRACTION,
    orders: Iterable[int] = (1, 2, 3),
) -> list[NgramDiff]:
    """Per-n-gram Cohen's d (positive = more Facebook) with FDR-flagged p.

    N-grams must be used by at least ``min_group_fraction`` of the shared
    users (on either platform) to be tested.
    """
    users = shared_users(corpora)
    if len(users) < 2:
        raise InsufficientUsersError(
            f"need >= 2 users present on both platforms, have {len(users)}"
        )
    fb_vecs, sms_vecs = _paired_vectors(corpora, users, orders)
    combined = {
        u: {**sms_vecs[u], **fb_vecs[u]} for u in users
    }  # feature "used by" a user if present on either platform
    features = group_frequency_filter(combined, min_group_fraction)

    labels = np.r_[np.ones(len(users)), np.zeros(len(users))]
    rows: list[tuple[str, float, float, float, float, bool, str | None]] = []
    for feat in features:
        x = np.array([fb_vecs[u].get(feat, 0.0) for u in users])
        y = np.array([sms_vecs[u].get(feat, 0.0) for u in users])
        degenerate = False
        fallback: str | None = None
        try:
            d = cohens_d_paired(x, y)
        except DegenerateDataError:
            d, degenerate = float("nan"), True
        if degenerate:
            p = 1.0
        else:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error", RuntimeWarning)
                    p = univariate_logistic_p(np.r_[x, y], labels)
            except (RuntimeWarning, RuntimeError, DegenerateDataError):
                # separated or non-converging feature: use the paired test
                try:
                    _, p = paired_t_test(x, y)
                    fallback = "paired_t"
                except DegenerateDataError:
                    p, degenerate = 1.0, True
        rows.append((feat, d, p, float(x.mean()), float(y.mean()), degenerate, fallback))

    flags = bh_fdr([r[2] for r in rows], alpha) if rows else []
    return [
        NgramDiff(
            ngram=feat,
            cohens_d=d,
            p_value=p,
            q_significant=flag and not degenerate,
            freq_facebook=fx,
            freq_sms=fy,
            degenerate=degenerate,
            p_fallback=fallback,
        )
        for (feat, d, p, fx, fy, degenerate, fallback), flag in zip(rows, flags)
    ]


def diff_categories(
    corpora: Mapping[tuple[str, str], UserCorpus],
    spec: DictionarySpec,
    alpha: float = 0.05,
) -> list[CategoryDiff]:
    """Paired t-test per dictionary category (positive t = more Facebook)."""
    users = shared_users(corpora)
    if len(users) < 2:
        raise InsufficientUsersError(
            f"need >= 2 users present on both platforms, have {len(users)}"
        )
    fb = {u: corpora[(u, "facebook")].dictionary_features(spec) for u in users}
    sms = {u: corpora[(u, "sms")].dictionary_features(spec) for u in users}

    rows = []
    for cat in sorted(spec.categories):
        x = np.array([fb[u][cat] for u in users])
        y = np.array([sms[u][cat] for u in users])
        try:
            t, p = paired_t_test(x, y)
            degenerate = False
        except DegenerateDataError:
            t, p, degenerate = float("nan"), 1.0, True
        rows.append((cat, t, p, float(x.mean()), float(y.mean()), degenerate))

    flags = bh_fdr([r[2] for r in rows], alpha) if rows else []
    return [
        CategoryDiff(
            category=cat,
            t_statistic=t,
            p_value=p,
            q_significant=flag and not degenerate,
            mean_facebook=mx,
            mean_sms=my,
            degenerate=degenerate,
        )
        for (cat, t, p, mx, my, degenerate), flag in zip(rows, flags)
    ]


def cloud_data(diffs: list[NgramDiff]) -> list[CloudDatum]:
    """Word-cloud records for exactly the FDR-significant n-grams.

    ``size`` is |d| normalized to the largest significant effect; ``darkness``
    is the n-gram's frequency on its own side normalized within that side.
    Rendering is left to external plotting tools.
    """
    significant = [r for r in diffs if r.q_significant and np.isfinite(r.cohens_d)]
    if not significant:
        return []
    max_d = max(abs(r.cohens_d) for r in significant) or 1.0
    side_max: dict[str, float] = {"facebook": 0.0, "sms": 0.0}
    sided = []
    for r in significant:
        side = "facebook" if r.cohens_d > 0 else "sms"
        freq = r.freq_facebook if side == "facebook" else r.freq_sms
        sided.append((r, side, freq))
        side_max[side] = max(side_max[side], freq)
    return [
        CloudDatum(
            ngram=r.ngram,
            cohens_d=r.cohens_d,
            frequency=freq,
            side=side,
            size=abs(r.cohens_d) / max_d,
            darkness=freq / side_max[side] if side_max[side] > 0 else 0.0,
        )
        for r, side, freq in sided
    ]


def summary_stats(corpora: Mapping[tuple[str, str], UserCorpus]) -> dict[str, dict]:
    """Per-platform median/mean/SD of per-user word and post counts.

    SD uses the n-1 convention; with a single user it is undefined and
    reported as 0 with ``sd_defined: false``.
    """

    def _stats(values: list[int]) -> dict:
        arr = np.asarray(values, dtype=float)
        defined = arr.size > 1
        return {
            "median": float(np.median(arr)),
            "mean": float(arr.mean()),
            "sd": float(arr.std(ddof=1)) if defined else 0.0,
            "sd_defined": defined,
        }

    out: dict[str, dict] = {}
    platforms = sorted({plat for (_, plat) in corpora})
    for plat in platforms:
        words = []
        posts = []
        for (user, p), corpus in sorted(corpora.items()):
            if p != plat:
                continue
            words.append(corpus.word_count())
            posts.append(len(corpus.documents))
        if words:
            out[plat] = {"n_users": len(words), "words": _stats(words), "posts": _stats(posts)}
    return out
