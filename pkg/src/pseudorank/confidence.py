"""Intervals for unweighted (psi) and weighted (p) relative effects.

The variance of each estimated effect comes from its empirical influence
decomposition.  For target group ``i`` and mean distribution
``M = sum_r lam_r F_r`` (``lam_r = 1/d`` for psi, ``n_r/N`` for p), the
observation ``X_rl`` carries

    u_rl = [r == i] * M_hat(X_il) / n_i + lam_r * (1 - F_hat_i(X_rl)) / n_r

and ``Var(estimate_i) = sum_r n_r * s_r^2(u)`` with ``s_r^2`` the sample
variance of the influences inside group ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .effects import UNWEIGHTED_PSI, WEIGHTED_P
from .grouped import GroupedData
from .ranking import _counts_below, pseudo_ranks, ranks
from .special import norm_ppf

PSI_CI = "psi_ci"
P_INTERVAL = "p_interval"

P_INTERVAL_NOTE = (
    "Weighted effects change with the sample-size allocation, so these are "
    "descriptive intervals; they are not confidence intervals for a fixed model "
    "quantity unless all groups have the same size."
)


@dataclass(frozen=True)
class InfluenceComponents:
    """Centered influences of every observation on one target effect."""

    target: int
    kind: str
    influences: tuple[np.ndarray, ...]
    group_variances: np.ndarray
    variance: float

    @property
    def sigma_sq(self) -> float:
        """Asymptotic variance on the sqrt(N) scale."""
        return sum(u.size for u in self.influences) * self.variance


@dataclass
class IntervalReport:
    kind: str
    level: float
    labels: list[str]
    lower: list[float]
    estimate: list[float]
    upper: list[float]
    std_error: list[float]
    method: str = "wald"
    note: str = ""
    group_sizes: list[int] = field(default_factory=list)

    def rows(self):
        return list(zip(self.labels, self.lower, self.estimate, self.upper))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "level": self.level, "method": self.method,
            "labels": list(self.labels), "lower": list(self.lower),
            "estimate": list(self.estimate), "upper": list(self.upper),
            "std_error": list(self.std_error), "note": self.note,
            "group_sizes": list(self.group_sizes),
        }


def _setup(data: GroupedData, kind: str):
    N, d = data.N, data.d
    sizes = data.sizes
    if kind == UNWEIGHTED_PSI:
        scores = pseudo_ranks(data)
        lam = np.full(d, 1.0 / d)
    elif kind == WEIGHTED_P:
        scores = ranks(data)
        lam = sizes / N
    else:
        raise ValueError(f"unknown effect kind {kind!r}")
    mean_cdf = [(s - 0.5) / N for s in scores.values]
    pooled = data.pooled()
    # ecdf[i] holds the normalized ECDF of group i at every pooled observation
    ecdf = np.array([_counts_below(np.sort(g.values), pooled) / g.n for g in data.groups])
    return scores, lam, mean_cdf, ecdf


def _influence(data, target, lam, mean_cdf, ecdf, kind) -> InfluenceComponents:
    sizes = data.sizes
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    parts = []
    variances = np.empty(data.d)
    for r in range(data.d):
        u = lam[r] * (1.0 - ecdf[target, bounds[r]:bounds[r + 1]]) / sizes[r]
        if r == target:
            u = u + mean_cdf[target] / sizes[target]
        u = u - u.mean()
        parts.append(u)
        variances[r] = u.var(ddof=1)
    return InfluenceComponents(target, kind, tuple(parts), variances, float(np.sum(sizes * variances)))


def influence_components(data: GroupedData, target: int, kind: str = UNWEIGHTED_PSI) -> InfluenceComponents:
    if np.any(data.sizes < 2):
        raise ValueError("every group needs at least 2 observations")
    _, lam, mean_cdf, ecdf = _setup(data, kind)
    return _influence(data, target, lam, mean_cdf, ecdf, kind)


def _intervals(data: GroupedData, level: float, kind: str, method: str) -> IntervalReport:
    if not 0.5 < level < 1.0:
        raise ValueError(f"level must lie in (0.5, 1), got {level}")
    if method not in ("wald", "logit"):
        raise ValueError(f"method must be 'wald' or 'logit', got {method!r}")
    if np.any(data.sizes < 2):
        raise ValueError("every group needs at least 2 observations for an interval")
    scores, lam, mean_cdf, ecdf = _setup(data, kind)
    N = data.N
    z = norm_ppf(0.5 + level / 2.0)
    est = (scores.group_means() - 0.5) / N
    lower, upper, se_all = [], [], []
    for i in range(data.d):
        se = math.sqrt(_influence(data, i, lam, mean_cdf, ecdf, kind).variance)
        e = float(est[i])
        if method == "logit" and 0.0 < e < 1.0:
            center = math.log(e / (1.0 - e))
            half = z * se / (e * (1.0 - e))
            lo = 1.0 / (1.0 + math.exp(-(center - half)))
            hi = 1.0 / (1.0 + math.exp(-(center + half)))
        else:
            lo, hi = e - z * se, e + z * se
        lower.append(min(max(lo, 0.0), e))
        upper.append(max(min(hi, 1.0), e))
        se_all.append(se)
    return IntervalReport(
        PSI_CI if kind == UNWEIGHTED_PSI else P_INTERVAL, level, list(data.labels),
        lower, [float(e) for e in est], upper, se_all, method,
        "" if kind == UNWEIGHTED_PSI else P_INTERVAL_NOTE,
        [int(n) for n in data.sizes],
    )


def ci_psi(data: GroupedData, level: float = 0.95, method: str = "wald") -> IntervalReport:
    """Confidence intervals for the unweighted relative effects."""
    return _intervals(data, level, UNWEIGHTED_PSI, method)


def interval_p(data: GroupedData, level: float = 0.95, method: str = "wald") -> IntervalReport:
    """Descriptive intervals for the weighted relative effects."""
    return _intervals(data, level, WEIGHTED_P, method)
