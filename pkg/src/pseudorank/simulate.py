"""Seeded Monte Carlo engine for rejection rates, trend signs and coverage.

Replication ``k`` of a plan with seed ``s`` draws all of its data from
``numpy.random.default_rng(SeedSequence([s, k]))``.  Replications never share
a stream, so the merged result is the same whether they run in one process
or are spread over a pool.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analytic import DiscreteSpec, DistributionSpec, NormalSpec, exact_effects, spec_from_dict
from .confidence import ci_psi, interval_p
from .grouped import GroupedData
from .ranking import ORDINARY, RANKINGS
from .rank_tests import ANOVA, CONTRAST, HN_TREND, KRUSKAL_WALLIS, SIDES, TWO_SIDED, run_test
from .special import norm_ppf

REJECTION_RATE = "rejection_rate"
SIGN_FREQUENCY = "sign_frequency"
COVERAGE = "coverage"
METRICS = (REJECTION_RATE, SIGN_FREQUENCY, COVERAGE)

CI_PSI = "ci_psi"
INTERVAL_P = "interval_p"
TEST_METHODS = (KRUSKAL_WALLIS, HN_TREND, CONTRAST, ANOVA)
INTERVAL_METHODS = (CI_PSI, INTERVAL_P)
FACTORIAL_METHODS = (CONTRAST, ANOVA)

_ALIASES = {"kw": KRUSKAL_WALLIS, "hn": HN_TREND}
_U53 = float(2 ** 53)


def uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniforms on the open grid ``(k + 1/2) / 2^53``; never exactly 0 or 1."""
    return (rng.integers(0, 2 ** 53, size=n, dtype=np.int64) + 0.5) / _U53


def sample(spec: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` values by inverting the distribution function at uniforms."""
    if n < 1:
        raise ValueError("sample size must be at least 1")
    u = uniforms(rng, n)
    if isinstance(spec, NormalSpec):
        return spec.mu + spec.sigma * np.atleast_1d(norm_ppf(u))
    if isinstance(spec, DiscreteSpec):
        cum = np.cumsum([float(p) for p in spec.probs])
        idx = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
        return np.array([float(s) for s in spec.support])[idx]
    raise TypeError(f"cannot sample from {type(spec).__name__}")


@dataclass(frozen=True)
class SimulationPlan:
    specs: tuple
    alloc: tuple
    method: str = KRUSKAL_WALLIS
    ranking: str = ORDINARY
    alpha: float = 0.05
    reps: int = 1000
    seed: int = 0
    metric: str = REJECTION_RATE
    trend: tuple | None = None
    contrast: object = "AB"
    side: str = TWO_SIDED
    level: float = 0.95
    keep_replications: bool = False
    name: str = ""

    def __post_init__(self):
        method = _ALIASES.get(self.method, self.method)
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "alloc", tuple(int(n) for n in self.alloc))
        if self.trend is not None:
            object.__setattr__(self, "trend", tuple(float(c) for c in self.trend))
        if not isinstance(self.contrast, str):
            object.__setattr__(self, "contrast", tuple(float(c) for c in self.contrast))
        if len(self.specs) < 2 or len(self.specs) != len(self.alloc):
            raise ValueError("need at least two specs and one sample size per spec")
        if any(n < 1 for n in self.alloc):
            raise ValueError("sample sizes must be positive")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.ranking not in RANKINGS:
            raise ValueError(f"ranking must be one of {RANKINGS}")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        if self.metric == COVERAGE:
            if method not in INTERVAL_METHODS:
                raise ValueError(f"coverage needs method {CI_PSI} or {INTERVAL_P}")
        elif method not in TEST_METHODS:
            raise ValueError(f"method must be one of {TEST_METHODS}")
        if method in FACTORIAL_METHODS and len(self.specs) != 4:
            raise ValueError(f"{method} needs four cells ordered 11, 12, 21, 22")
        if self.metric == SIGN_FREQUENCY and method == KRUSKAL_WALLIS:
            raise ValueError("sign frequency needs a signed statistic (hn_trend, contrast, anova)")

    @classmethod
    def from_dict(cls, obj: dict) -> "SimulationPlan":
        obj = dict(obj)
        obj.pop("description", None)
        obj["specs"] = tuple(spec_from_dict(s) for s in obj["specs"])
        return cls(**obj)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "specs": [s.to_dict() for s in self.specs],
            "alloc": list(self.alloc),
            "method": self.method,
            "ranking": self.ranking,
            "alpha": self.alpha,
            "reps": self.reps,
            "seed": self.seed,
            "metric": self.metric,
            "trend": None if self.trend is None else list(self.trend),
            "contrast": self.contrast if isinstance(self.contrast, str) else list(self.contrast),
            "side": self.side,
            "level": self.level,
            "keep_replications": self.keep_replications,
        }

    def replace(self, **changes) -> "SimulationPlan":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return SimulationPlan(**fields)


@dataclass
class SimulationResult:
    metric: str
    value: object
    mc_se: object
    reps: int
    seed: int
    n_degenerate: int
    n_effective: int
    plan: dict
    details: dict = field(default_factory=dict)
    replications: list | None = None

    def to_dict(self) -> dict:
        out = {
            "metric": self.metric, "value": self.value, "mc_se": self.mc_se,
            "reps": self.reps, "seed": self.seed, "n_degenerate": self.n_degenerate,
            "n_effective": self.n_effective, "details": self.details, "plan": self.plan,
        }
        if self.replications is not None:
            out["replications"] = self.replications
        return out

    def csv_rows(self) -> list[list]:
        header = ["metric", "group", "value", "mc_se", "reps", "n_effective", "n_degenerate", "seed"]
        if isinstance(self.value, list):
            labels = self.details.get("labels", [str(i + 1) for i in range(len(self.value))])
            body = [[self.metric, g, v, s, self.reps, self.n_effective, self.n_degenerate, self.seed]
                    for g, v, s in zip(labels, self.value, self.mc_se)]
        else:
            body = [[self.metric, "", self.value, self.mc_se, self.reps, self.n_effective,
                     self.n_degenerate, self.seed]]
        return [header] + body


def _draw(plan: SimulationPlan, rep: int) -> GroupedData:
    rng = np.random.default_rng(np.random.SeedSequence([plan.seed, rep]))
    values = [sample(s, n, rng) for s, n in zip(plan.specs, plan.alloc)]
    if len(values) == 4:
        return GroupedData.from_2x2(values, ("1", "2"), ("1", "2"))
    return GroupedData.from_lists(values)


def _targets(plan: SimulationPlan) -> list[float]:
    p, psi = exact_effects(plan.specs, plan.alloc)
    return [float(v) for v in (psi if plan.method == CI_PSI else p)]


def replicate(plan: SimulationPlan, rep: int, targets: Sequence[float] | None = None) -> dict:
    """One replication reduced to the numbers the metrics need."""
    data = _draw(plan, rep)
    if plan.metric == COVERAGE:
        fn = ci_psi if plan.method == CI_PSI else interval_p
        rep_ci = fn(data, plan.level)
        covered = [lo <= t <= hi for lo, t, hi in zip(rep_ci.lower, targets, rep_ci.upper)]
        return {"rep": rep, "covered": covered}
    report = run_test(data, plan.method, plan.ranking, trend=plan.trend,
                      contrast=plan.contrast, side=plan.side)
    return {"rep": rep, "p_value": report.p_value, "degenerate": report.degenerate,
            "numerator": report.numerator, "statistic": report.statistic}


def _run_chunk(args) -> list[dict]:
    plan, reps, targets = args
    return [replicate(plan, k, targets) for k in reps]


def _rate(hits: int, total: int) -> tuple[float | None, float | None]:
    if total == 0:
        return None, None
    r = hits / total
    return r, math.sqrt(r * (1.0 - r) / total)


def _summarize(plan: SimulationPlan, rows: list[dict], targets) -> SimulationResult:
    base = dict(reps=plan.reps, seed=plan.seed, plan=plan.to_dict())
    if plan.metric == COVERAGE:
        d = len(plan.specs)
        cover = [sum(r["covered"][i] for r in rows) for i in range(d)]
        pairs = [_rate(c, plan.reps) for c in cover]
        return SimulationResult(
            COVERAGE, [v for v, _ in pairs], [s for _, s in pairs], n_degenerate=0,
            n_effective=plan.reps, details={"targets": list(targets), "level": plan.level}, **base)
    degenerate = sum(bool(r["degenerate"]) for r in rows)
    live = [r for r in rows if not r["degenerate"]]
    if plan.metric == REJECTION_RATE:
        value, se = _rate(sum(r["p_value"] < plan.alpha for r in live), len(live))
        details = {"alpha": plan.alpha}
    else:
        nums = np.array([r["numerator"] for r in rows], dtype=float)
        value, se = _rate(int(np.sum(nums > 0)), len(nums))
        mean = float(nums.mean())
        sd = float(nums.std(ddof=1)) if nums.size > 1 else 0.0
        details = {
            "mean_numerator": mean,
            "se_mean_numerator": sd / math.sqrt(nums.size),
            "negative_frequency": float(np.mean(nums < 0)),
        }
    return SimulationResult(plan.metric, value, se, n_degenerate=degenerate,
                            n_effective=len(live), details=details, **base)


def resolve_workers(workers) -> int:
    if workers in (None, "max"):
        return os.cpu_count() or 1
    workers = int(workers)
    if workers < 1:
        raise ValueError("workers must be at least 1")
    return workers


def run(plan: SimulationPlan, workers=1) -> SimulationResult:
    """Run every replication and reduce to the plan's metric.

    ``workers`` is a process count or ``"max"``; it changes wall time only.
    """
    workers = resolve_workers(workers)
    targets = _targets(plan) if plan.metric == COVERAGE else None
    if workers == 1 or plan.reps < 2:
        rows = _run_chunk((plan, range(plan.reps), targets))
    else:
        step = math.ceil(plan.reps / (4 * workers))
        chunks = [(plan, range(a, min(a + step, plan.reps)), targets) for a in range(0, plan.reps, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_run_chunk, chunks) for row in part]
    rows.sort(key=lambda r: r["rep"])
    result = _summarize(plan, rows, targets)
    if plan.keep_replications:
        result.replications = rows
    return result
