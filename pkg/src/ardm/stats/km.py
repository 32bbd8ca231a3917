"""Kaplan-Meier product-limit estimator with Greenwood variance.

Confidence limits use the complementary log-log transform, so both limits
always fall inside [0, 1]. Events at a time are processed before censorings
at the same time: a subject censored at ``t`` still counts in the risk set
for events at ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import DomainError
from .normal import two_sided_z

# Survival values within this distance of 0.5 count as having reached it.
MEDIAN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class KMPoint:
    time: float
    n_risk: int
    n_event: int
    n_censor: int
    surv: float
    std_err: float
    ci_lower: float | None
    ci_upper: float | None


@dataclass(frozen=True)
class KMCurve:
    stratum: str
    points: list[KMPoint] = field(default_factory=list)
    n_subjects: int = 0
    n_events: int = 0
    median_survival: float | None = None
    conf_level: float = 0.95


def _loglog_limits(surv: float, greenwood_sum: float, z: float) -> tuple[float | None, float | None]:
    if surv <= 0.0 or surv >= 1.0:
        return None, None
    log_s = math.log(surv)
    se_star = math.sqrt(greenwood_sum) / abs(log_s)
    lower = surv ** math.exp(z * se_star)
    upper = surv ** math.exp(-z * se_star)
    return lower, upper


def km_estimate(
    times: Sequence[float],
    event_flags: Sequence[int],
    conf_level: float = 0.95,
    stratum: str = "",
) -> KMCurve:
    """Estimate a single-stratum survival curve.

    ``event_flags`` holds 1 for an observed event and 0 for a censored
    observation. Every distinct observed time yields a point, including
    censor-only times (``n_event == 0``).
    """
    if len(times) != len(event_flags):
        raise DomainError("times and event_flags differ in length")
    if not times:
        raise DomainError("km_estimate needs at least one observation")
    z = two_sided_z(conf_level)

    tallies: dict[float, list[int]] = {}
    for t, e in zip(times, event_flags):
        t = float(t)
        if not math.isfinite(t):
            raise DomainError(f"time must be finite, got {t!r}")
        if t < 0:
            raise DomainError(f"negative time {t!r}")
        if e not in (0, 1):
            raise DomainError(f"event flag must be 0 or 1, got {e!r}")
        slot = tallies.setdefault(t, [0, 0])
        slot[0 if e == 1 else 1] += 1

    n_risk = len(times)
    surv = 1.0
    greenwood = 0.0
    points: list[KMPoint] = []
    median = None
    for t in sorted(tallies):
        d, c = tallies[t]
        if d:
            surv *= 1.0 - d / n_risk
            if n_risk > d:
                greenwood += d / (n_risk * (n_risk - d))
        lower, upper = _loglog_limits(surv, greenwood, z)
        points.append(
            KMPoint(
                time=t,
                n_risk=n_risk,
                n_event=d,
                n_censor=c,
                surv=surv,
                std_err=math.sqrt(surv * surv * greenwood),
                ci_lower=lower,
                ci_upper=upper,
            )
        )
        if median is None and d and surv <= 0.5 + MEDIAN_TOLERANCE:
            median = t
        n_risk -= d + c

    return KMCurve(
        stratum=stratum,
        points=points,
        n_subjects=len(times),
        n_events=sum(p.n_event for p in points),
        median_survival=median,
        conf_level=conf_level,
    )


def km_median(curve: KMCurve) -> float | None:
    """Smallest event time at which survival drops to 0.5 or below."""
    for p in curve.points:
        if p.n_event and p.surv <= 0.5 + MEDIAN_TOLERANCE:
            return p.time
    return None
