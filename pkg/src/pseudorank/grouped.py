"""Grouped observations: the common input of every estimator and test."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Group:
    label: str
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "label", str(self.label))

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class GroupedData:
    """Observations partitioned into ``d >= 2`` groups.

    ``factor_labels`` optionally maps each group to an ``(a_level, b_level)``
    pair for 2x2 layouts.
    """

    groups: tuple[Group, ...]
    factor_labels: tuple[tuple[str, str], ...] | None = field(default=None)

    def __post_init__(self):
        groups = tuple(self.groups)
        object.__setattr__(self, "groups", groups)
        if len(groups) < 2:
            raise ValueError(f"need at least 2 groups, got {len(groups)}")
        for g in groups:
            if g.n < 1:
                raise ValueError(f"group {g.label!r} is empty")
            if not np.all(np.isfinite(g.values)):
                raise ValueError(f"group {g.label!r} contains non-finite values")
        if self.factor_labels is not None:
            labels = tuple((str(a), str(b)) for a, b in self.factor_labels)
            if len(labels) != len(groups):
                raise ValueError("factor_labels must have one entry per group")
            object.__setattr__(self, "factor_labels", labels)

    @classmethod
    def from_lists(
        cls,
        values: Sequence[Sequence[float]],
        labels: Sequence[str] | None = None,
        factor_labels: Sequence[tuple[str, str]] | None = None,
    ) -> "GroupedData":
        if labels is None:
            labels = [str(i + 1) for i in range(len(values))]
        groups = tuple(Group(lab, v) for lab, v in zip(labels, values))
        fl = None if factor_labels is None else tuple(tuple(p) for p in factor_labels)
        return cls(groups, fl)

    @classmethod
    def from_2x2(
        cls,
        cells: Sequence[Sequence[float]],
        a_levels: tuple[str, str] = ("1", "2"),
        b_levels: tuple[str, str] = ("1", "2"),
    ) -> "GroupedData":
        """Build a 2x2 layout from cells ordered (a1b1, a1b2, a2b1, a2b2)."""
        if len(cells) != 4:
            raise ValueError("a 2x2 layout needs exactly four cells")
        pairs = [(a, b) for a in a_levels for b in b_levels]
        labels = [f"{a}:{b}" for a, b in pairs]
        return cls.from_lists(cells, labels, pairs)

    @property
    def d(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([g.n for g in self.groups], dtype=np.int64)

    @property
    def N(self) -> int:
        return int(self.sizes.sum())

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.groups]

    @property
    def values(self) -> list[np.ndarray]:
        return [g.values for g in self.groups]

    def pooled(self) -> np.ndarray:
        return np.concatenate(self.values)

    def transform(self, fn) -> "GroupedData":
        """Apply ``fn`` elementwise to every value, keeping the layout."""
        groups = tuple(Group(g.label, fn(g.values)) for g in self.groups)
        return GroupedData(groups, self.factor_labels)

    def is_balanced(self) -> bool:
        sizes = self.sizes
        return bool(np.all(sizes == sizes[0]))

    def factorial_order(self) -> list[int]:
        """Group indices ordered as (a1b1, a1b2, a2b1, a2b2).

        Factor levels are taken in order of first appearance.
        """
        if self.factor_labels is None:
            raise ValueError("data carries no factor labels; a 2x2 layout is required")
        if self.d != 4:
            raise ValueError(f"a 2x2 layout needs exactly 4 groups, got {self.d}")
        a_levels = list(dict.fromkeys(a for a, _ in self.factor_labels))
        b_levels = list(dict.fromkeys(b for _, b in self.factor_labels))
        if len(a_levels) != 2 or len(b_levels) != 2:
            raise ValueError("a 2x2 layout needs exactly two levels per factor")
        index = {pair: i for i, pair in enumerate(self.factor_labels)}
        if len(index) != 4:
            raise ValueError("each 2x2 cell must appear exactly once")
        order = []
        for a in a_levels:
            for b in b_levels:
                if (a, b) not in index:
                    raise ValueError(f"cell ({a}, {b}) is missing from the 2x2 layout")
                order.append(index[(a, b)])
        return order

    def as_2x2(self) -> "GroupedData":
        """Return the same data reordered to the canonical 2x2 cell order."""
        order = self.factorial_order()
        return GroupedData(
            tuple(self.groups[i] for i in order),
            tuple(self.factor_labels[i] for i in order),
        )
