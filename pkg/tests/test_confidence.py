import math

import numpy as np
import pytest

from pseudorank.analytic import exact_effects, normal_2x2
from pseudorank.confidence import (
    P_INTERVAL_NOTE, ci_psi, influence_components, interval_p,
)
from pseudorank.effects import estimate_psi
from pseudorank.grouped import GroupedData
from pseudorank.simulate import sample

import oracles


def loop_variance(groups, target, weighted=False):
    """Influence variance written out observation by observation."""
    d = len(groups)
    N = sum(map(len, groups))
    lam = [len(g) / N if weighted else 1 / d for g in groups]

    def F(i, x):
        return float(sum(oracles.c(x - y) for y in groups[i])) / len(groups[i])

    def M(x):
        return sum(l * F(r, x) for r, l in enumerate(lam))

    total = 0.0
    for r, g in enumerate(groups):
        u = [lam[r] * (1 - F(target, x)) / len(g) + (M(x) / len(g) if r == target else 0.0) for x in g]
        total += len(g) * np.var(u, ddof=1)
    return total


@pytest.mark.parametrize("seed", range(6))
def test_variance_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    groups = [rng.integers(0, 6, size=int(rng.integers(2, 9))).tolist() for _ in range(int(rng.integers(2, 5)))]
    data = GroupedData.from_lists(groups)
    for i in range(len(groups)):
        assert influence_components(data, i).variance == pytest.approx(loop_variance(groups, i), rel=1e-12, abs=1e-15)
        assert influence_components(data, i, "weighted_p").variance == pytest.approx(
            loop_variance(groups, i, weighted=True), rel=1e-12, abs=1e-15)


def test_influences_centered():
    rng = np.random.default_rng(1)
    data = GroupedData.from_lists([rng.normal(size=n) for n in (5, 8, 3)])
    comp = influence_components(data, 1)
    assert all(abs(u.sum()) <= 1e-12 for u in comp.influences)
    assert comp.sigma_sq == pytest.approx(data.N * comp.variance)


def test_variance_close_to_jackknife():
    rng = np.random.default_rng(2)
    groups = [rng.normal(m, 1, size=n) for m, n in zip((0, 0.5, 1), (30, 45, 25))]
    data = GroupedData.from_lists(groups)
    for i in range(3):
        pieces = 0.0
        for r, g in enumerate(groups):
            loo = []
            for k in range(len(g)):
                gg = list(groups)
                gg[r] = np.delete(g, k)
                loo.append(estimate_psi(GroupedData.from_lists(gg)).values[i])
            loo = np.array(loo)
            pieces += (len(g) - 1) / len(g) * np.sum((loo - loo.mean()) ** 2)
        assert influence_components(data, i).variance == pytest.approx(pieces, rel=0.15)


def test_identical_samples_cover_half():
    rng = np.random.default_rng(3)
    x = rng.normal(size=400)
    data = GroupedData.from_lists([x[:200], x[200:]])
    rep = ci_psi(data, 0.95)
    for lo, est, hi in zip(rep.lower, rep.estimate, rep.upper):
        assert lo <= 0.5 <= hi
        assert abs(est - 0.5) < 0.1


def test_constant_groups_zero_width():
    rep = ci_psi(GroupedData.from_lists([[1, 1, 1], [5, 5]]), 0.9)
    assert rep.lower == rep.estimate == rep.upper
    assert rep.estimate == [0.25, 0.75]


def test_ordering_and_clipping():
    rng = np.random.default_rng(4)
    for _ in range(50):
        groups = [rng.integers(0, 4, size=int(rng.integers(2, 6))) * rng.integers(1, 3) for _ in range(3)]
        data = GroupedData.from_lists(groups)
        for fn in (ci_psi, interval_p):
            for method in ("wald", "logit"):
                rep = fn(data, 0.99, method)
                for lo, est, hi in zip(rep.lower, rep.estimate, rep.upper):
                    assert 0.0 <= lo <= est <= hi <= 1.0


def test_balanced_identity_and_note():
    rng = np.random.default_rng(5)
    data = GroupedData.from_lists([rng.normal(size=10) for _ in range(4)])
    a, b = ci_psi(data), interval_p(data)
    assert (a.lower, a.estimate, a.upper) == (b.lower, b.estimate, b.upper)
    assert a.note == "" and b.note == P_INTERVAL_NOTE and a.kind == "psi_ci" and b.kind == "p_interval"


@pytest.mark.parametrize("level", [0.5, 1.0, 0.3, 1.2])
def test_level_validation(level):
    with pytest.raises(ValueError):
        ci_psi(GroupedData.from_lists([[1, 2], [3, 4]]), level)


def test_singletons_rejected():
    with pytest.raises(ValueError):
        interval_p(GroupedData.from_lists([[1], [3, 4]]))
    with pytest.raises(ValueError):
        ci_psi(GroupedData.from_lists([[1, 2], [3, 4]]), 0.95, "probit")


def _model_data(alloc, seed):
    rng = np.random.default_rng(seed)
    return GroupedData.from_2x2([sample(s, n, rng) for s, n in zip(normal_2x2(), alloc)])


def test_scale_of_balanced_and_unbalanced_intervals():
    psi_est, width, p_est = [], [], []
    for seed in range(40):
        rep = ci_psi(_model_data((25,) * 4, seed))
        psi_est.append(rep.estimate[0])
        width.append(rep.upper[0] - rep.lower[0])
        p_est.append(interval_p(_model_data((10, 20, 20, 50), seed)).estimate[0])
    assert np.mean(psi_est) == pytest.approx(0.856, abs=0.01)
    assert 0.02 < np.mean(width) < 0.06
    assert np.mean(p_est) == pytest.approx(0.934, abs=0.01)


def test_width_shrinks_like_root_n():
    ratios = []
    for seed in range(30):
        small = ci_psi(_model_data((40,) * 4, seed))
        large = ci_psi(_model_data((160,) * 4, 1000 + seed))
        ratios.append([(s_hi - s_lo) / (l_hi - l_lo) for s_lo, s_hi, l_lo, l_hi in
                       zip(small.lower, small.upper, large.lower, large.upper)])
    mean_ratio = np.mean(ratios, axis=0)
    assert np.all(np.abs(mean_ratio / 2.0 - 1.0) < 0.15)


def test_targets_for_coverage():
    p, psi = exact_effects(normal_2x2(), (25,) * 4)
    assert p == psi
    assert float(psi[0]) == pytest.approx(0.855674, abs=1e-6)
    assert math.isclose(float(psi[1]), 0.5)
