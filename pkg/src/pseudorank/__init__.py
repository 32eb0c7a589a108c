"""Rank and pseudo-rank inference for grouped and 2x2 factorial data."""

__version__ = "0.1.0"

from .grouped import Group, GroupedData
from .ranking import count, pseudo_ranks, ranks
from .effects import estimate_p, estimate_pairwise, estimate_psi
from .rank_tests import anova_2x2, contrast_test, hn_trend, kruskal_wallis
from .confidence import ci_psi, interval_p

__all__ = [
    "__version__",
    "Group",
    "GroupedData",
    "count",
    "ranks",
    "pseudo_ranks",
    "estimate_p",
    "estimate_psi",
    "estimate_pairwise",
    "kruskal_wallis",
    "hn_trend",
    "contrast_test",
    "anova_2x2",
    "ci_psi",
    "interval_p",
]
