from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import DomainError

SUMMARY_FIELDS = ("n", "n_missing", "mean", "sd", "median", "q1", "q3", "min", "max")


@dataclass(frozen=True)
class DescriptiveSummary:
    n: int
    n_missing: int
    mean: float | None = None
    sd: float | None = None
    median: float | None = None
    q1: float | None = None
    q3: float | None = None
    min: float | None = None
    max: float | None = None

    def items(self) -> list[tuple[str, float | None]]:
        return [(name, getattr(self, name)) for name in SUMMARY_FIELDS]


@dataclass(frozen=True)
class CategoricalSummary:
    levels: list[tuple[str, int, float]] = field(default_factory=list)
    n_missing: int = 0

    @property
    def n_non_missing(self) -> int:
        return sum(count for _, count, _ in self.levels)


def quantile(values: Sequence[float], p: float) -> float:
    """Type-7 sample quantile of already sorted ``values``.

    Interpolates linearly between the order statistics around the 1-based
    position ``h = (n - 1) * p + 1``.
    """
    if not values:
        raise DomainError("quantile of an empty sequence is undefined")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"quantile probability must lie in [0, 1], got {p!r}")
    h = (len(values) - 1) * p + 1
    lo = math.floor(h)
    hi = math.ceil(h)
    x_lo = values[lo - 1]
    return x_lo + (h - lo) * (values[hi - 1] - x_lo)


def describe_continuous(values: Iterable[float | None]) -> DescriptiveSummary:
    present: list[float] = []
    n_missing = 0
    for v in values:
        if v is None:
            n_missing += 1
        else:
            present.append(float(v))
    n = len(present)
    if n == 0:
        return DescriptiveSummary(n=0, n_missing=n_missing)
    present.sort()
    mean = math.fsum(present) / n
    sd = None
    if n >= 2:
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in present) / (n - 1))
    return DescriptiveSummary(
        n=n,
        n_missing=n_missing,
        mean=mean,
        sd=sd,
        median=quantile(present, 0.5),
        q1=quantile(present, 0.25),
        q3=quantile(present, 0.75),
        min=present[0],
        max=present[-1],
    )


def describe_categorical(values: Iterable[str | None]) -> CategoricalSummary:
    counts: Counter[str] = Counter()
    n_missing = 0
    for v in values:
        if v is None:
            n_missing += 1
        else:
            counts[str(v)] += 1
    total = sum(counts.values())
    levels = [(label, counts[label], 100.0 * counts[label] / total) for label in sorted(counts)]
    return CategoricalSummary(levels=levels, n_missing=n_missing)
