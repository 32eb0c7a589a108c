"""Distribution functions for the normal, Student-t, chi-square and F families.

The t, chi-square and F functions are built on the regularized incomplete
beta and gamma functions, evaluated with modified Lentz continued fractions.
Quantiles are found by Brent's method on a bracket around a normal-theory
starting guess; the standard normal quantile uses a rational approximation
polished by one Halley step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAXITER = 20000

NORMAL = "normal"
T = "t"
CHI_SQUARE = "chi_square"
F = "f"
FAMILIES = (NORMAL, T, CHI_SQUARE, F)


@dataclass(frozen=True)
class DistributionFunctionSpec:
    """A distribution family plus its degrees of freedom.

    ``df`` is used by ``t`` and ``chi_square``; ``f`` uses ``df`` for the
    numerator and ``df2`` for the denominator.
    """

    family: str
    df: float | None = None
    df2: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family in (T, CHI_SQUARE, F):
            if self.df is None or not self.df > 0:
                raise ValueError(f"{self.family} needs df > 0, got {self.df}")
        if self.family == F and (self.df2 is None or not self.df2 > 0):
            raise ValueError(f"f needs df2 > 0, got {self.df2}")


# ---------------------------------------------------------------------------
# incomplete gamma / beta
# ---------------------------------------------------------------------------


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by its power series, valid for x < a + 1
    ap = a
    total = delta = 1.0 / a
    for _ in range(_MAXITER):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # Q(a, x) by Lentz's continued fraction, valid for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc(a: float, x: float) -> tuple[float, float]:
    """Regularized lower and upper incomplete gamma functions ``(P, Q)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    if x < a + 1.0:
        p = _gamma_series(a, x)
        return p, 1.0 - p
    q = _gamma_cf(a, x)
    return 1.0 - q, q


def _beta_cf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAXITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def betainc(a: float, b: float, x: float, y: float | None = None) -> tuple[float, float]:
    """Regularized incomplete beta ``I_x(a, b)`` and its complement.

    ``y`` may be passed as an accurately computed ``1 - x`` to avoid
    cancellation when ``x`` is close to one.
    """
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0, 1.0
    if y <= 0.0:
        return 1.0, 0.0
    log_front = (
        a * math.log(x) + b * math.log(y)
        + math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        lower = front * _beta_cf(a, b, x) / a
        return lower, 1.0 - lower
    upper = front * _beta_cf(b, a, y) / b
    return 1.0 - upper, upper


# ---------------------------------------------------------------------------
# normal
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


# Acklam's rational approximation, relative error below 1.2e-9
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425

_erfc = np.frompyfunc(math.erfc, 1, 1)


def _acklam(q: np.ndarray) -> np.ndarray:
    x = np.empty_like(q)
    low = q < _P_LOW
    high = q > 1.0 - _P_LOW
    mid = ~(low | high)

    r = np.sqrt(-2.0 * np.log(q[low]))
    x[low] = ((((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5])
              / ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0))
    r = np.sqrt(-2.0 * np.log1p(-q[high]))
    x[high] = -((((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5])
                / ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0))
    s = q[mid] - 0.5
    r = s * s
    x[mid] = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s
              / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    return x


def norm_ppf(q):
    """Standard normal quantile; accepts a scalar or an array of levels in (0, 1)."""
    arr = np.asarray(q, dtype=float)
    if np.any((arr <= 0.0) | (arr >= 1.0)) or np.any(np.isnan(arr)):
        raise ValueError("quantile level must lie strictly inside (0, 1)")
    flat = arr.reshape(-1)
    # work in the lower tail, where 1 - q is exact for q >= 1/2 and the cdf keeps full precision
    upper = flat > 0.5
    p = np.where(upper, 1.0 - flat, flat)
    x = _acklam(p)
    # one Halley step against the erfc-based cdf
    e = 0.5 * _erfc(-x / _SQRT2).astype(float) - p
    u = e * math.sqrt(2.0 * math.pi) * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    x = np.where(upper, -x, x).reshape(arr.shape)
    return float(x) if x.ndim == 0 else x


# ---------------------------------------------------------------------------
# t, chi-square, F
# ---------------------------------------------------------------------------


def t_cdf(x: float, df: float) -> float:
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    x2 = x * x
    # tail = P(T > |x|) = I_{df/(df+x^2)}(df/2, 1/2) / 2
    lower, _ = betainc(0.5 * df, 0.5, df / (df + x2), x2 / (df + x2))
    tail = 0.5 * lower
    return 1.0 - tail if x > 0 else tail


def t_sf(x: float, df: float) -> float:
    return t_cdf(-x, df)


def chi2_cdf(x: float, df: float) -> float:
    return gammainc(0.5 * df, 0.5 * x)[0]


def chi2_sf(x: float, df: float) -> float:
    return gammainc(0.5 * df, 0.5 * x)[1]


def f_cdf(x: float, df1: float, df2: float) -> float:
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    denom = df1 * x + df2
    return betainc(0.5 * df1, 0.5 * df2, df1 * x / denom, df2 / denom)[0]


def f_sf(x: float, df1: float, df2: float) -> float:
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    denom = df1 * x + df2
    return betainc(0.5 * df1, 0.5 * df2, df1 * x / denom, df2 / denom)[1]


def cdf(spec: DistributionFunctionSpec, x: float) -> float:
    if spec.family == NORMAL:
        return norm_cdf(x)
    if spec.family == T:
        return t_cdf(x, spec.df)
    if spec.family == CHI_SQUARE:
        return chi2_cdf(x, spec.df)
    return f_cdf(x, spec.df, spec.df2)


def sf(spec: DistributionFunctionSpec, x: float) -> float:
    if spec.family == NORMAL:
        return norm_sf(x)
    if spec.family == T:
        return t_sf(x, spec.df)
    if spec.family == CHI_SQUARE:
        return chi2_sf(x, spec.df)
    return f_sf(x, spec.df, spec.df2)


def _brent(f, a: float, b: float, fa: float, fb: float, xtol: float) -> float:
    c, fc = b, fb
    d = e = b - a
    for _ in range(500):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * xtol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)
    return b


def quantile(spec: DistributionFunctionSpec, q: float) -> float:
    """Inverse of :func:`cdf`; ``q`` must lie strictly inside (0, 1)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie strictly inside (0, 1), got {q}")
    if spec.family == NORMAL:
        return norm_ppf(q)
    if spec.family == T and q == 0.5:
        return 0.0

    def g(x):
        return cdf(spec, x) - q

    if spec.family == T:
        guess = norm_ppf(q)
        lo, hi = min(guess, -1.0), max(guess, 1.0)
        while g(lo) > 0:
            lo *= 2.0
        while g(hi) < 0:
            hi *= 2.0
    else:
        lo, hi = 0.0, max(1.0, 2.0 * spec.df if spec.family == CHI_SQUARE else 2.0)
        while g(hi) < 0:
            lo, hi = hi, hi * 2.0
    glo, ghi = g(lo), g(hi)
    scale = max(abs(lo), abs(hi), 1e-300)
    return _brent(g, lo, hi, glo, ghi, xtol=1e-15 * scale)
