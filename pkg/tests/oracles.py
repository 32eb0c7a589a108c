"""Definition-level oracles in exact rational arithmetic.

Every function works on plain nested lists of numbers and uses only the
count function, so it shares no code with the package.
"""

from fractions import Fraction as Fr


def c(u):
    if u < 0:
        return Fr(0)
    if u > 0:
        return Fr(1)
    return Fr(1, 2)


def _fr(groups):
    return [[Fr(x) for x in g] for g in groups]


def ranks(groups):
    groups = _fr(groups)
    pooled = [x for g in groups for x in g]
    return [[Fr(1, 2) + sum(c(x - y) for y in pooled) for x in g] for g in groups]


def pseudo_ranks(groups):
    groups = _fr(groups)
    N, d = sum(map(len, groups)), len(groups)
    return [[Fr(1, 2) + Fr(N, d) * sum(sum(c(x - y) for y in h) / len(h) for h in groups) for x in g]
            for g in groups]


def w(a, b):
    """P(A < B) + P(A = B) / 2 for the empirical distributions of a and b."""
    a, b = _fr([a])[0], _fr([b])[0]
    return sum(c(y - x) for x in a for y in b) / (len(a) * len(b))


def p_effects(groups):
    """p_i = integral of H_hat dF_hat_i with H_hat the pooled normalized ECDF."""
    groups = _fr(groups)
    pooled = [x for g in groups for x in g]
    N = len(pooled)
    H = lambda x: sum(c(x - y) for y in pooled) / N  # noqa: E731
    return [sum(H(x) for x in g) / len(g) for g in groups]


def psi_effects(groups):
    groups = _fr(groups)
    d = len(groups)
    G = lambda x: sum(sum(c(x - y) for y in h) / len(h) for h in groups) / d  # noqa: E731
    return [sum(G(x) for x in g) / len(g) for g in groups]


def _mean(v):
    return sum(v) / len(v)


def _var(v):
    m = _mean(v)
    return sum((x - m) ** 2 for x in v) / (len(v) - 1)


def kw_statistic(groups, pseudo=False):
    R = pseudo_ranks(groups) if pseudo else ranks(groups)
    flat = [r for g in R for r in g]
    N = len(flat)
    m = _mean(flat)
    between = sum(len(g) * (_mean(g) - m) ** 2 for g in R)
    total = sum((r - m) ** 2 for r in flat)
    return (N - 1) * between / total


def welch_linear(groups, weights, pseudo=False):
    """Squared studentized linear rank statistic and its Satterthwaite df.

    Returns ``(num, L_sq, f)`` with ``num = sum w_i (mean score_i - 1/2) / N``.
    """
    R = pseudo_ranks(groups) if pseudo else ranks(groups)
    N = sum(map(len, R))
    weights = [Fr(x) for x in weights]
    lin = sum(wi * _mean(g) for wi, g in zip(weights, R))
    parts = [wi ** 2 * _var(g) / len(g) for wi, g in zip(weights, R)]
    S0 = sum(parts)
    f = S0 ** 2 / sum(p ** 2 / (len(g) - 1) for p, g in zip(parts, R))
    num = sum(wi * (_mean(g) - Fr(1, 2)) for wi, g in zip(weights, R)) / N
    return num, lin ** 2 / S0, f
