"""Estimators of weighted (p) and unweighted (psi) relative effects."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grouped import GroupedData
from .ranking import pseudo_ranks, ranks

WEIGHTED_P = "weighted_p"
UNWEIGHTED_PSI = "unweighted_psi"


@dataclass(frozen=True)
class EffectVector:
    kind: str
    values: np.ndarray
    group_sizes: np.ndarray
    N: int
    labels: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "values": [float(v) for v in self.values],
            "group_sizes": [int(n) for n in self.group_sizes],
            "N": int(self.N),
            "labels": list(self.labels),
        }


@dataclass(frozen=True)
class PairwiseEffectMatrix:
    """``w[r, i]`` estimates ``P(X_r < X_i) + P(X_r = X_i) / 2``."""

    w: np.ndarray
    labels: tuple[str, ...] = ()

    def weighted(self, weights) -> np.ndarray:
        """Effects against a weighted mean distribution: ``W' weights``."""
        return self.w.T @ np.asarray(weights, dtype=float)


def estimate_p(data: GroupedData) -> EffectVector:
    """Weighted relative effects ``(mean rank_i - 1/2) / N``."""
    means = ranks(data).group_means()
    return EffectVector(WEIGHTED_P, (means - 0.5) / data.N, data.sizes, data.N, tuple(data.labels))


def estimate_psi(data: GroupedData) -> EffectVector:
    """Unweighted relative effects ``(mean pseudo-rank_i - 1/2) / N``."""
    means = pseudo_ranks(data).group_means()
    return EffectVector(UNWEIGHTED_PSI, (means - 0.5) / data.N, data.sizes, data.N, tuple(data.labels))


def estimate(data: GroupedData, kind: str) -> EffectVector:
    if kind == WEIGHTED_P:
        return estimate_p(data)
    if kind == UNWEIGHTED_PSI:
        return estimate_psi(data)
    raise ValueError(f"unknown effect kind {kind!r}")


def pairwise_count_mean(x_r: np.ndarray, x_i: np.ndarray) -> float:
    """(1 / (n_r n_i)) sum_l sum_k c(x_i[k] - x_r[l])."""
    diff = np.subtract.outer(x_i, x_r)
    return float(((np.sign(diff) + 1.0) * 0.5).mean())


def estimate_pairwise(data: GroupedData) -> PairwiseEffectMatrix:
    d = data.d
    w = np.full((d, d), 0.5)
    vals = data.values
    for r in range(d):
        for i in range(r + 1, d):
            w[r, i] = pairwise_count_mean(vals[r], vals[i])
            w[i, r] = 1.0 - w[r, i]
    return PairwiseEffectMatrix(w, tuple(data.labels))
