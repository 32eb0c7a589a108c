"""Mid-ranks and pseudo-ranks.

Both are built on the count function ``c(u) = 0, 1/2, 1`` for ``u <, =, > 0``:

    rank(x)        = 1/2 + sum_r sum_l c(x - X_rl)
    pseudo_rank(x) = 1/2 + (N/d) sum_r (1/n_r) sum_l c(x - X_rl)

Ties are exact floating point equality.  The production paths are sort
based; :func:`ranks_bruteforce` and :func:`pseudo_ranks_bruteforce` keep the
quadratic double loop around as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grouped import GroupedData

ORDINARY = "ordinary"
PSEUDO = "pseudo"
RANKINGS = (ORDINARY, PSEUDO)


def count(u: float) -> float:
    if u < 0:
        return 0.0
    if u > 0:
        return 1.0
    return 0.5


@dataclass(frozen=True)
class RankAssignment:
    """Per-group (pseudo-)rank arrays aligned with ``GroupedData.groups``."""

    kind: str
    values: tuple[np.ndarray, ...]

    @property
    def sizes(self) -> np.ndarray:
        return np.array([v.size for v in self.values], dtype=np.int64)

    @property
    def N(self) -> int:
        return int(self.sizes.sum())

    def group_means(self) -> np.ndarray:
        return np.array([v.mean() for v in self.values])

    def group_variances(self) -> np.ndarray:
        """Within-group sample variances (denominator ``n_i - 1``)."""
        return np.array([v.var(ddof=1) if v.size > 1 else np.nan for v in self.values])

    def flat(self) -> np.ndarray:
        return np.concatenate(self.values)

    def entries(self):
        """Yield ``(group_index, within_group_index, rank)`` triples."""
        for i, v in enumerate(self.values):
            for k, r in enumerate(v):
                yield i, k, float(r)


def _split(flat: np.ndarray, sizes: np.ndarray) -> tuple[np.ndarray, ...]:
    return tuple(np.split(flat, np.cumsum(sizes)[:-1]))


def _counts_below(sorted_values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sum_l c(x - v_l) for every x, given the v_l sorted."""
    left = np.searchsorted(sorted_values, x, side="left")
    right = np.searchsorted(sorted_values, x, side="right")
    return 0.5 * (left + right)


def ranks(data: GroupedData) -> RankAssignment:
    """Mid-ranks of all observations in the pooled sample."""
    pooled = data.pooled()
    uniq, inverse, counts = np.unique(pooled, return_inverse=True, return_counts=True)
    below = np.cumsum(counts) - counts
    midrank = below + 0.5 * (counts + 1)
    return RankAssignment(ORDINARY, _split(midrank[inverse], data.sizes))


def pseudo_ranks(data: GroupedData) -> RankAssignment:
    """Pseudo-ranks: mid-ranks taken against the unweighted mean of the group ECDFs."""
    pooled = data.pooled()
    N, d = data.N, data.d
    acc = np.full_like(pooled, 0.5)
    for g in data.groups:
        # weight is exactly 1.0 when n_r = N/d, so balanced data reproduce mid-ranks bit for bit
        acc += _counts_below(np.sort(g.values), pooled) * (N / (d * g.n))
    return RankAssignment(PSEUDO, _split(acc, data.sizes))


def rank_with(data: GroupedData, ranking: str) -> RankAssignment:
    if ranking == ORDINARY:
        return ranks(data)
    if ranking == PSEUDO:
        return pseudo_ranks(data)
    raise ValueError(f"ranking must be one of {RANKINGS}, got {ranking!r}")


def ranks_bruteforce(data: GroupedData) -> RankAssignment:
    """Definition-level double loop over the count function."""
    pooled = data.pooled()
    out = [0.5 + sum(count(x - y) for y in pooled) for x in pooled]
    return RankAssignment(ORDINARY, _split(np.array(out), data.sizes))


def pseudo_ranks_bruteforce(data: GroupedData) -> RankAssignment:
    pooled = data.pooled()
    N, d = data.N, data.d
    out = []
    for x in pooled:
        s = 0.0
        for g in data.groups:
            s += sum(count(x - y) for y in g.values) / g.n
        out.append(0.5 + N / d * s)
    return RankAssignment(PSEUDO, _split(np.array(out), data.sizes))


def check_rank_properties(data: GroupedData, transform=None, atol: float = 1e-12) -> dict[str, bool]:
    """Evaluate the deterministic rank/pseudo-rank properties on one dataset.

    Returns a mapping from property name to whether it holds.  ``transform``
    is a strictly increasing function used for the invariance check; when
    omitted, ``exp`` of the standardized data is used.
    """
    R = ranks(data)
    P = pseudo_ranks(data)
    x = data.pooled()
    r = R.flat()
    p = P.flat()
    N, d = data.N, data.d
    sizes = data.sizes
    n_of = np.repeat(sizes, sizes)

    order = np.argsort(x, kind="stable")
    xs, rs, ps = x[order], r[order], p[order]
    step = np.diff(xs)
    strict = step > 0
    tied = step == 0
    result = {
        "order_preserved": bool(np.all(np.diff(rs)[strict] > 0) and np.all(np.diff(ps)[strict] > 0)),
        "ties_equal": bool(np.all(np.diff(rs)[tied] == 0) and np.all(np.diff(ps)[tied] == 0)),
        "mean_identity": bool(
            abs(r.mean() - (N + 1) / 2) <= atol
            and abs(P.group_means().mean() - (N + 1) / 2) <= atol
        ),
    }

    if transform is None:
        scale = x.std() or 1.0

        def transform(v):
            return np.exp((v - x.mean()) / scale)

    moved = data.transform(transform)
    result["monotone_invariant"] = bool(
        np.array_equal(ranks(moved).flat(), r) and np.array_equal(pseudo_ranks(moved).flat(), p)
    )
    result["rank_bounds"] = bool(np.all(r >= 1) and np.all(r <= N))
    lo = 0.5 + N / (2 * d * n_of)
    hi = N + 0.5 - N / (2 * d * n_of)
    slack = atol
    result["pseudo_rank_bounds"] = bool(
        np.all(lo >= (d + 1) / (2 * d) - slack)
        and np.all(p >= lo - slack)
        and np.all(p <= hi + slack)
        and np.all(hi <= N + (d - 1) / (2 * d) + slack)
    )
    if data.is_balanced():
        result["equal_size_coincidence"] = bool(np.max(np.abs(r - p)) <= slack)
    else:
        result["equal_size_coincidence"] = True
    return result
