"""Kruskal-Wallis, Hettmansperger-Norton trend and 2x2 contrast tests.

Every rank test runs on either ordinary mid-ranks or pseudo-ranks; the
pseudo-rank variant is the same statistic with the scores swapped.  The
parametric cell-mean F test is provided as a baseline comparator.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .grouped import GroupedData
from .ranking import ORDINARY, rank_with
from .special import chi2_sf, f_sf, norm_cdf, norm_sf, t_sf

KRUSKAL_WALLIS = "kruskal_wallis"
HN_TREND = "hn_trend"
CONTRAST = "contrast"
ANOVA = "anova"

TWO_SIDED = "two_sided"
INCREASING = "increasing"
DECREASING = "decreasing"
SIDES = (TWO_SIDED, INCREASING, DECREASING)

NAMED_CONTRASTS = {
    "A": (1.0, 1.0, -1.0, -1.0),
    "B": (1.0, -1.0, 1.0, -1.0),
    "AB": (1.0, -1.0, -1.0, 1.0),
}


@dataclass
class TestReport:
    """Outcome of one test.

    ``df`` is ``math.inf`` for normal-reference statistics; ``df2`` is the
    denominator df of F-referenced statistics.  A degenerate report (zero
    variance) carries statistic 0 and p-value 1.
    """

    __test__ = False  # keep pytest from collecting this class

    method: str
    ranking: str
    statistic: float
    df: float
    p_value: float
    degenerate: bool = False
    side: str = TWO_SIDED
    contrast_used: list[float] | None = None
    numerator: float | None = None
    statistic_sq: float | None = None
    df2: float | None = None
    N: int = 0
    group_sizes: list[int] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("df", "df2"):
            if out[key] is not None and math.isinf(out[key]):
                out[key] = None
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "TestReport":
        obj = dict(obj)
        if obj.get("df") is None:
            obj["df"] = math.inf
        return cls(**obj)


@dataclass(frozen=True)
class VarianceEstimate:
    """Variance components of a linear (pseudo-)rank statistic.

    ``per_group`` holds the within-group sample variances of the scores
    (rank units); ``S0_sq`` is ``sum c_i^2 S_i^2 / n_i``; ``sigma0_sq`` is
    the same on the relative-effect scale multiplied by ``N``.
    """

    per_group: tuple[float, ...]
    S0_sq: float
    sigma0_sq: float
    f_hat: float


def resolve_contrast(contrast) -> tuple[float, ...]:
    if isinstance(contrast, str):
        key = contrast.strip().upper()
        if key not in NAMED_CONTRASTS:
            raise ValueError(f"unknown contrast {contrast!r}; use A, B, AB or four numbers")
        return NAMED_CONTRASTS[key]
    vec = tuple(float(c) for c in contrast)
    if not all(math.isfinite(c) for c in vec):
        raise ValueError("contrast entries must be finite")
    return vec


def variance_components(scores, weights: Sequence[float]) -> VarianceEstimate:
    """Welch-type variance of ``sum_i weights_i * mean(scores_i)``."""
    sizes = scores.sizes
    if np.any(sizes < 2):
        raise ValueError("every group needs at least 2 observations for a variance estimate")
    N = scores.N
    S2 = scores.group_variances()
    w2 = np.asarray(weights, dtype=float) ** 2
    parts = w2 * S2 / sizes
    S0_sq = float(parts.sum())
    denom = float(np.sum(parts ** 2 / (sizes - 1)))
    f_hat = S0_sq ** 2 / denom if denom > 0 else math.inf
    return VarianceEstimate(tuple(float(s) for s in S2), S0_sq, S0_sq / N, f_hat)


def _degenerate(method, ranking, df, data, **kw) -> TestReport:
    return TestReport(method, ranking, 0.0, df, 1.0, degenerate=True,
                      N=data.N, group_sizes=[int(n) for n in data.sizes], **kw)


def kruskal_wallis(data: GroupedData, ranking: str = ORDINARY) -> TestReport:
    """Tie-corrected Kruskal-Wallis H on ranks or pseudo-ranks.

    H = (N - 1) sum_i n_i (mean_i - m)^2 / sum_ik (R_ik - m)^2, where m is the
    grand mean of the scores in use; for mid-ranks m = (N + 1) / 2.  Referred
    to chi-square with d - 1 df.
    """
    N, d = data.N, data.d
    if N < d + 1:
        raise ValueError(f"Kruskal-Wallis needs N >= d + 1 (N={N}, d={d})")
    scores = rank_with(data, ranking)
    flat = scores.flat()
    center = math.fsum(flat) / N
    total_ss = math.fsum((flat - center) ** 2)
    df = float(d - 1)
    if total_ss == 0.0:
        return _degenerate(KRUSKAL_WALLIS, ranking, df, data)
    between = math.fsum(data.sizes * (scores.group_means() - center) ** 2)
    H = (N - 1) * between / total_ss
    return TestReport(KRUSKAL_WALLIS, ranking, H, df, chi2_sf(H, df),
                      N=N, group_sizes=[int(n) for n in data.sizes],
                      details={"center": center})


def _side_p(z: float, side: str) -> float:
    if side == TWO_SIDED:
        return min(1.0, 2.0 * norm_sf(abs(z)))
    if side == INCREASING:
        return norm_sf(z)
    if side == DECREASING:
        return norm_cdf(z)
    raise ValueError(f"side must be one of {SIDES}, got {side!r}")


def hn_trend(data: GroupedData, trend: Sequence[float], ranking: str = ORDINARY,
             side: str = TWO_SIDED) -> TestReport:
    """Hettmansperger-Norton type trend test for a conjectured pattern.

    The numerator is ``c' T_d e`` with ``e`` the estimated (weighted or
    unweighted) effect vector; it is studentized with the within-group
    score variances and referred to the standard normal.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    c = np.asarray(trend, dtype=float)
    if c.shape != (data.d,) or not np.all(np.isfinite(c)):
        raise ValueError(f"trend vector must hold {data.d} finite numbers")
    c_star = c - c.mean()
    scores = rank_with(data, ranking)
    N = data.N
    effects = (scores.group_means() - 0.5) / N
    numerator = float(c_star @ effects)
    var = variance_components(scores, c_star)
    sigma = math.sqrt(var.sigma0_sq)  # sd of sqrt(N) c'T e on the effect scale
    common = dict(side=side, contrast_used=[float(x) for x in c], numerator=numerator,
                  details={"variance": asdict(var)})
    if sigma == 0.0:
        return _degenerate(HN_TREND, ranking, math.inf, data, **common)
    z = math.sqrt(N) * numerator / sigma
    return TestReport(HN_TREND, ranking, z, math.inf, _side_p(z, side),
                      N=N, group_sizes=[int(n) for n in data.sizes], **common)


def contrast_test(data: GroupedData, contrast="AB", ranking: str = ORDINARY) -> TestReport:
    """Rank statistic ``L_N(c) = sqrt(N) c' p_hat / sigma0_hat`` for a 2x2 layout.

    Groups are reordered to (11, 12, 21, 22) from their factor labels.  The
    null distribution is approximated by t with Satterthwaite-type df.
    """
    cells = data.as_2x2()
    c = np.asarray(resolve_contrast(contrast))
    if c.shape != (4,):
        raise ValueError("a 2x2 contrast needs exactly four entries")
    if np.any(cells.sizes < 2):
        raise ValueError("every cell needs at least 2 observations")
    scores = rank_with(cells, ranking)
    N = cells.N
    effects = (scores.group_means() - 0.5) / N
    numerator = float(c @ effects)
    var = variance_components(scores, c)
    sigma0 = math.sqrt(var.sigma0_sq)
    common = dict(contrast_used=[float(x) for x in c], numerator=numerator,
                  details={"variance": asdict(var), "labels": cells.labels})
    if sigma0 == 0.0:
        return _degenerate(CONTRAST, ranking, var.f_hat, cells, **common)
    T = math.sqrt(N) * numerator
    L = T / sigma0
    p = min(1.0, 2.0 * t_sf(abs(L), var.f_hat))
    return TestReport(CONTRAST, ranking, L, var.f_hat, p, statistic_sq=L * L,
                      N=N, group_sizes=[int(n) for n in cells.sizes], **common)


def anova_2x2(data: GroupedData, contrast="AB") -> TestReport:
    """Cell-means F test of one contrast with pooled within-cell variance."""
    cells = data.as_2x2()
    c = np.asarray(resolve_contrast(contrast))
    sizes = cells.sizes
    if np.any(sizes < 2):
        raise ValueError("every cell needs at least 2 observations")
    N = cells.N
    means = np.array([g.values.mean() for g in cells.groups])
    ss_within = math.fsum(float(((g.values - g.values.mean()) ** 2).sum()) for g in cells.groups)
    df2 = float(N - 4)
    pooled = ss_within / df2
    numerator = float(c @ means)
    common = dict(contrast_used=[float(x) for x in c], numerator=numerator, df2=df2,
                  details={"pooled_variance": pooled, "cell_means": means.tolist()})
    if pooled == 0.0:
        return _degenerate(ANOVA, "none", 1.0, cells, **common)
    F = numerator ** 2 / (pooled * float(np.sum(c ** 2 / sizes)))
    return TestReport(ANOVA, "none", F, 1.0, f_sf(F, 1.0, df2),
                      N=N, group_sizes=[int(n) for n in sizes], **common)


def run_test(data: GroupedData, method: str, ranking: str = ORDINARY, trend=None,
             contrast="AB", side: str = TWO_SIDED) -> TestReport:
    if method in (KRUSKAL_WALLIS, "kw"):
        return kruskal_wallis(data, ranking)
    if method in (HN_TREND, "hn"):
        if trend is None:
            trend = list(range(1, data.d + 1))
        return hn_trend(data, trend, ranking, side)
    if method == CONTRAST:
        return contrast_test(data, contrast, ranking)
    if method == ANOVA:
        return anova_2x2(data, contrast)
    raise ValueError(f"unknown test method {method!r}")
