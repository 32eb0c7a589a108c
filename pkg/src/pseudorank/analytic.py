"""Population-level effects and non-centralities for fully specified models.

Discrete distributions whose probabilities are given exactly (ints, strings
such as ``"1/6"`` or :class:`fractions.Fraction`) are handled in rational
arithmetic, so results like ``w = 7/12`` come out as exact fractions.
Anything involving a normal distribution is evaluated in floating point.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

from .special import norm_cdf

Number = Union[Fraction, float]


def _as_number(x) -> Number:
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return float(x)


def is_exact(x) -> bool:
    return isinstance(x, Fraction)


@dataclass(frozen=True)
class DiscreteSpec:
    """Finite discrete distribution on a strictly increasing support."""

    support: tuple
    probs: tuple

    def __post_init__(self):
        support = tuple(_as_number(s) for s in self.support)
        probs = tuple(_as_number(p) for p in self.probs)
        if len(support) != len(probs) or not support:
            raise ValueError("support and probs must be non-empty and of equal length")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError("support must be strictly increasing")
        if any(p < 0 for p in probs):
            raise ValueError("probabilities must be non-negative")
        total = sum(probs)
        if abs(float(total) - 1.0) > 1e-12 or (all(map(is_exact, probs)) and total != 1):
            raise ValueError(f"probabilities must sum to 1, got {total}")
        if not all(map(is_exact, probs)):
            probs = tuple(float(p) for p in probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, support: Sequence) -> "DiscreteSpec":
        k = len(support)
        return cls(tuple(sorted(support)), tuple(Fraction(1, k) for _ in range(k)))

    @property
    def exact(self) -> bool:
        return all(map(is_exact, self.probs))

    def to_dict(self) -> dict:
        def enc(v):
            if is_exact(v):
                return str(v) if v.denominator != 1 else v.numerator
            return v

        return {"type": "discrete", "support": [enc(s) for s in self.support],
                "probs": [enc(p) for p in self.probs]}


@dataclass(frozen=True)
class NormalSpec:
    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not self.sigma > 0 or not math.isfinite(self.mu):
            raise ValueError("normal spec needs finite mu and sigma > 0")

    def to_dict(self) -> dict:
        return {"type": "normal", "mu": self.mu, "sigma": self.sigma}


DistributionSpec = Union[DiscreteSpec, NormalSpec]


def spec_from_dict(obj: dict) -> DistributionSpec:
    kind = obj.get("type")
    if kind == "discrete":
        return DiscreteSpec(tuple(obj["support"]), tuple(obj["probs"]))
    if kind == "normal":
        return NormalSpec(obj["mu"], obj["sigma"])
    raise ValueError(f"unknown distribution type {kind!r}")


def _raw_w(f_r: DistributionSpec, f_i: DistributionSpec) -> Number:
    if isinstance(f_r, DiscreteSpec) and isinstance(f_i, DiscreteSpec):
        exact = f_r.exact and f_i.exact
        zero = Fraction(0) if exact else 0.0
        # above[k] = P(X_i >= support_i[k]); supports are strictly increasing
        above = list(itertools.accumulate(reversed(f_i.probs), initial=zero))[::-1]
        total = zero
        for a, pa in zip(f_r.support, f_r.probs):
            k = bisect.bisect_left(f_i.support, a)
            if k < len(f_i.support) and f_i.support[k] == a:
                total += pa * (above[k + 1] + f_i.probs[k] / 2)
            else:
                total += pa * above[k]
        return total
    if isinstance(f_r, NormalSpec) and isinstance(f_i, NormalSpec):
        return norm_cdf((f_i.mu - f_r.mu) / math.hypot(f_r.sigma, f_i.sigma))
    if isinstance(f_r, DiscreteSpec):
        # P(a < X_i) for each support point a of F_r; ties have probability 0
        return math.fsum(float(pa) * norm_cdf((f_i.mu - float(a)) / f_i.sigma)
                         for a, pa in zip(f_r.support, f_r.probs))
    return math.fsum(float(pb) * norm_cdf((float(b) - f_r.mu) / f_r.sigma)
                     for b, pb in zip(f_i.support, f_i.probs))


def exact_w(f_r: DistributionSpec, f_i: DistributionSpec) -> Number:
    """Pairwise effect ``P(X_r < X_i) + P(X_r = X_i) / 2``.

    In floating point the smaller of the two directions is evaluated and the
    other is obtained as its complement, so ``exact_w(F, G) + exact_w(G, F)``
    is exactly one.
    """
    a = _raw_w(f_r, f_i)
    if is_exact(a):
        return a
    b = _raw_w(f_i, f_r)
    if a == b:
        return 0.5
    return a if a < b else 1.0 - b


def w_matrix(specs: Sequence[DistributionSpec]) -> list[list[Number]]:
    """``W[r][i] = exact_w(specs[r], specs[i])``."""
    d = len(specs)
    W = [[Fraction(1, 2)] * d for _ in range(d)]
    for r in range(d):
        for i in range(r + 1, d):
            W[r][i] = exact_w(specs[r], specs[i])
            W[i][r] = 1 - W[r][i]
    return W


def _weights(alloc: Sequence) -> list[Number]:
    n = [_as_number(x) for x in alloc]
    if any(x <= 0 for x in n):
        raise ValueError("allocation entries must be positive")
    total = sum(n)
    return [x / total for x in n]


def exact_effects(specs: Sequence[DistributionSpec], alloc: Sequence) -> tuple[list[Number], list[Number]]:
    """Weighted effects ``p = W' n/N`` and unweighted effects ``psi = W' 1/d``."""
    d = len(specs)
    if d < 2:
        raise ValueError("need at least two distributions")
    if len(alloc) != d:
        raise ValueError(f"allocation has {len(alloc)} entries for {d} distributions")
    W = w_matrix(specs)
    lam = _weights(alloc)
    p = [sum(W[r][i] * lam[r] for r in range(d)) for i in range(d)]
    psi = [sum(W[r][i] for r in range(d)) / d for i in range(d)]
    return p, psi


def contrast_of_effects(W: Sequence[Sequence[Number]], lam: Sequence[Number], c: Sequence[Number]) -> Number:
    """``c' W' lam`` evaluated from the upper triangle of ``W`` only.

    Each pairwise effect enters once (its mirror is ``1 - w``), so models
    whose interaction cancels structurally give an exact zero.
    """
    d = len(lam)
    terms = [lam[i] * c[i] / 2 for i in range(d)]
    for r in range(d):
        for i in range(r + 1, d):
            terms.append((lam[r] * c[i] - lam[i] * c[r]) * W[r][i])
            terms.append(lam[i] * c[r])
    if all(map(is_exact, terms)):
        return sum(terms, Fraction(0))
    return math.fsum(float(t) for t in terms)


def centered_quadratic(v: Sequence[Number]) -> Number:
    """``v' T_d v`` with the centering matrix ``T_d = I - J/d``."""
    mean = sum(v) / len(v)
    return sum((x - mean) ** 2 for x in v)


def centered_linear(c: Sequence[Number], v: Sequence[Number]) -> Number:
    """``c' T_d v``."""
    mean = sum(v) / len(v)
    return sum(ci * (x - mean) for ci, x in zip(c, v))


def linear(c: Sequence[Number], v: Sequence[Number]) -> Number:
    return sum(ci * x for ci, x in zip(c, v))


@dataclass
class NonCentralityReport:
    p: list
    psi: list
    c_p: Number
    c_psi: Number
    c_hn: Number | None = None
    c_hn_psi: Number | None = None
    c_contrast_p: Number | None = None
    c_contrast_psi: Number | None = None
    c_contrast_mu: Number | None = None
    N: int | None = None
    sqrtN_scaled: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self, exact: bool = False) -> dict:
        def enc(v):
            if v is None:
                return None
            if isinstance(v, list):
                return [enc(x) for x in v]
            if exact and is_exact(v):
                return str(v)
            return float(v)

        out = {k: enc(getattr(self, k)) for k in (
            "p", "psi", "c_p", "c_psi", "c_hn", "c_hn_psi",
            "c_contrast_p", "c_contrast_psi", "c_contrast_mu", "sqrtN_scaled")}
        out["N"] = self.N
        out["notes"] = list(self.notes)
        return out


def _check_len(name: str, vec, d: int) -> list[Number]:
    vec = [_as_number(x) for x in vec]
    if len(vec) != d:
        raise ValueError(f"{name} vector has length {len(vec)}, expected {d}")
    return vec


def noncentralities(
    specs: Sequence[DistributionSpec],
    alloc: Sequence,
    trend: Sequence | None = None,
    contrast: Sequence | None = None,
    N: int | None = None,
) -> NonCentralityReport:
    """Non-centralities of the KW, trend and contrast statistics.

    ``sqrtN_scaled`` is ``sqrt(N)`` times the contrast non-centrality when a
    contrast is given, else times the trend non-centrality; it needs ``N``.
    """
    d = len(specs)
    p, psi = exact_effects(specs, alloc)
    report = NonCentralityReport(p=p, psi=psi, c_p=centered_quadratic(p), c_psi=centered_quadratic(psi), N=N)
    scalar = None
    if trend is not None:
        trend = _check_len("trend", trend, d)
        report.c_hn = centered_linear(trend, p)
        report.c_hn_psi = centered_linear(trend, psi)
        scalar = report.c_hn
    if contrast is not None:
        contrast = _check_len("contrast", contrast, d)
        W = w_matrix(specs)
        report.c_contrast_p = contrast_of_effects(W, _weights(alloc), contrast)
        report.c_contrast_psi = contrast_of_effects(W, [Fraction(1, d)] * d, contrast)
        if all(isinstance(s, NormalSpec) for s in specs):
            report.c_contrast_mu = linear(contrast, [s.mu for s in specs])
        else:
            report.notes.append("c_contrast_mu omitted: not all distributions are normal")
        scalar = report.c_contrast_p
    if N is not None and scalar is not None:
        report.sqrtN_scaled = math.sqrt(N) * float(scalar)
    return report


@dataclass(frozen=True)
class SubgroupRow:
    n11: int
    n12: int
    n21: int
    n22: int
    c_mu: float | None
    c_psi: float
    c_p: float
    sqrtN_c_p: float

    @property
    def N(self) -> int:
        return self.n11 + self.n12 + self.n21 + self.n22

    def to_dict(self) -> dict:
        return {"n11": self.n11, "n12": self.n12, "n21": self.n21, "n22": self.n22,
                "N": self.N, "c_mu": self.c_mu, "c_psi": self.c_psi,
                "c_p": self.c_p, "sqrtN_c_p": self.sqrtN_c_p}


def subgroup_table(
    specs: Sequence[DistributionSpec],
    fixed_sizes: tuple[int, int],
    growing_sizes: Sequence[int],
    contrast: Sequence = (1, -1, -1, 1),
) -> list[SubgroupRow]:
    """Interaction non-centralities as the (1, .) stratum grows.

    ``specs`` are ordered (F11, F12, F21, F22); cells 21 and 22 keep the
    ``fixed_sizes`` while ``n11 = n12`` run through ``growing_sizes``.
    """
    if len(specs) != 4:
        raise ValueError("the sub-group table needs four cell distributions")
    n21, n22 = fixed_sizes
    rows = []
    for g in growing_sizes:
        rep = noncentralities(specs, (g, g, n21, n22), contrast=contrast, N=2 * g + n21 + n22)
        rows.append(SubgroupRow(
            int(g), int(g), int(n21), int(n22),
            None if rep.c_contrast_mu is None else float(rep.c_contrast_mu),
            float(rep.c_contrast_psi), float(rep.c_contrast_p), float(rep.sqrtN_scaled),
        ))
    return rows


# ---------------------------------------------------------------------------
# bundled models
# ---------------------------------------------------------------------------

DICE_FACES = (
    (9, 16, 17, 20, 21, 22),
    (13, 14, 15, 18, 19, 26),
    (10, 11, 12, 23, 24, 25),
)


def tricky_dice() -> list[DiscreteSpec]:
    """Three non-transitive dice with ``w21 = w13 = w32 = 7/12``."""
    return [DiscreteSpec.uniform(f) for f in DICE_FACES]


def normal_2x2(means=(10.0, 9.0, 9.0, 8.0), sigma: float = 0.4) -> list[NormalSpec]:
    """Homoscedastic normal cells ordered (11, 12, 21, 22)."""
    return [NormalSpec(m, sigma) for m in means]
