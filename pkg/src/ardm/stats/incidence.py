from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..errors import DomainError

ANY_EVENT = "ANY EVENT"


@dataclass(frozen=True)
class IncidenceRow:
    group: str
    term: str
    n_subjects: int
    denom: int
    percent: float


def ae_incidence(
    ae_rows: Iterable[tuple[str, str, str]],
    denominators: Mapping[str, int],
) -> list[IncidenceRow]:
    """Count distinct subjects per (group, term) and per group overall.

    ``ae_rows`` are ``(usubjid, group, term)`` triples. Each group that has
    at least one event also gets a synthetic ``ANY EVENT`` row. Rows come
    back ordered by descending percent, then term, then group.
    """
    subjects: dict[tuple[str, str], set[str]] = {}
    for usubjid, group, term in ae_rows:
        if group not in denominators:
            raise DomainError(f"no denominator for group {group!r}")
        subjects.setdefault((group, term), set()).add(usubjid)
        subjects.setdefault((group, ANY_EVENT), set()).add(usubjid)

    rows = []
    for (group, term), ids in subjects.items():
        denom = denominators[group]
        if denom <= 0 or len(ids) > denom:
            raise DomainError(
                f"group {group!r}: {len(ids)} subjects with {term!r} exceed population {denom}"
            )
        rows.append(IncidenceRow(group, term, len(ids), denom, 100.0 * len(ids) / denom))
    rows.sort(key=lambda r: (-r.percent, r.term, r.group))
    return rows
