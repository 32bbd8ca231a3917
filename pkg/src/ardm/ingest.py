"""CSV ingestion, column typing and domain validation for ADaM datasets."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import DomainError, ParseError

DOMAINS = ("ADSL", "ADTTE", "ADAE", "OTHER")
KINDS = ("continuous", "categorical", "date", "flag", "identifier")

# Overridable per call; these follow common ADaM usage.
REQUIRED_COLUMNS: dict[str, tuple[str, ...]] = {
    "ADSL": ("USUBJID", "TRT01P"),
    "ADTTE": ("USUBJID", "PARAMCD", "AVAL", "CNSR", "TRTP"),
    "ADAE": ("USUBJID", "AEDECOD", "AEBODSYS", "TRTA"),
    "OTHER": ("USUBJID",),
}

FLAG_VALUES = {"0": 0, "1": 1, "Y": 1, "N": 0}
_DATE_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])-(0[1-9]|[12]\d|3[01])$")
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str
    unit: str | None = None
    label: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "kind": self.kind, "unit": self.unit, "label": self.label}


@dataclass
class AnalysisDataset:
    domain: str
    columns: list[ColumnMeta]
    rows: list[list[Any]]
    source_name: str
    checksum: str = ""

    def __post_init__(self) -> None:
        if not self.checksum:
            self.checksum = checksum_dataset(self)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> list[Any]:
        idx = self.names.index(name)
        return [row[idx] for row in self.rows]

    def kind_of(self, name: str) -> str:
        return self.columns[self.names.index(name)].kind

    def records(self) -> list[dict[str, Any]]:
        names = self.names
        return [dict(zip(names, row)) for row in self.rows]


@dataclass(frozen=True)
class Issue:
    severity: str
    column: str
    message: str


@dataclass
class ValidationReport:
    dataset_ref: str
    issues: list[Issue] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset_ref": self.dataset_ref,
            "passed": self.passed,
            "issues": [
                {"severity": i.severity, "column": i.column, "message": i.message}
                for i in self.issues
            ],
        }


def is_number(text: str) -> bool:
    if not _NUMBER_RE.match(text):
        return False
    return math.isfinite(float(text))


def infer_column_types(header: Sequence[str], rows: Sequence[Sequence[str | None]]) -> list[ColumnMeta]:
    """Infer a kind for each column from its raw text cells.

    Precedence is identifier, flag, continuous, date, then categorical.
    Empty strings and ``None`` both count as missing.
    """
    if not rows:
        raise DomainError("cannot infer column types without at least one row")
    metas = []
    for j, name in enumerate(header):
        cells = [r[j] for r in rows if r[j] not in (None, "")]
        if name.endswith("ID"):
            kind = "identifier"
        elif not cells:
            kind = "categorical"
        elif all(c in FLAG_VALUES for c in cells):
            kind = "flag"
        elif all(is_number(c) for c in cells):
            kind = "continuous"
        elif all(_DATE_RE.match(c) for c in cells):
            kind = "date"
        else:
            kind = "categorical"
        metas.append(ColumnMeta(name=name, kind=kind))
    return metas


def _convert(text: str, meta: ColumnMeta, line: int) -> Any:
    if text == "":
        return None
    if meta.kind == "continuous":
        if not is_number(text):
            raise ParseError(f"column {meta.name}: {text!r} is not a finite number", line)
        return float(text)
    if meta.kind == "flag":
        if text not in FLAG_VALUES:
            raise ParseError(f"column {meta.name}: {text!r} is not a flag value", line)
        return FLAG_VALUES[text]
    if meta.kind == "date" and not _DATE_RE.match(text):
        raise ParseError(f"column {meta.name}: {text!r} is not an ISO-8601 date", line)
    return text


def load_meta(source: str | Path | Iterable[Mapping[str, Any]]) -> list[ColumnMeta]:
    """Read a sidecar column descriptor: a JSON array of {name, kind, unit, label}."""
    if isinstance(source, (str, Path)):
        entries = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        entries = list(source)
    metas = []
    for entry in entries:
        kind = entry.get("kind")
        if kind not in KINDS:
            raise DomainError(f"column meta for {entry.get('name')!r}: unknown kind {kind!r}")
        metas.append(
            ColumnMeta(
                name=str(entry["name"]).upper(),
                kind=kind,
                unit=entry.get("unit"),
                label=entry.get("label"),
            )
        )
    return metas


def parse_dataset(
    source: bytes | str | Path,
    domain: str,
    meta: Sequence[ColumnMeta] | None = None,
    source_name: str | None = None,
) -> AnalysisDataset:
    """Parse RFC 4180 CSV into a typed :class:`AnalysisDataset`.

    ``source`` may be raw bytes or a file path. Columns listed in ``meta``
    take their kind from it; the rest are inferred.
    """
    if domain not in DOMAINS:
        raise DomainError(f"unknown domain {domain!r}; expected one of {', '.join(DOMAINS)}")
    if isinstance(source, (str, Path)):
        path = Path(source)
        data = path.read_bytes()
        source_name = source_name or path.name
    else:
        data = source
    source_name = source_name or "<bytes>"
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}") from None

    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    raw: list[list[str]] = []
    lines: list[int] = []
    header: list[str] | None = None
    try:
        for record in reader:
            if not record:
                continue
            if header is None:
                header = [h.strip().upper() for h in record]
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, found {len(record)}", reader.line_num
                )
            raw.append(record)
            lines.append(reader.line_num)
    except csv.Error as exc:
        raise ParseError(str(exc), reader.line_num) from None
    if header is None:
        raise ParseError("missing header row", 1)
    if any(not h for h in header):
        raise ParseError("empty column name in header", 1)
    dupes = sorted({h for h in header if header.count(h) > 1})
    if dupes:
        raise ParseError(f"duplicate column names: {', '.join(dupes)}", 1)
    if "USUBJID" not in header:
        raise DomainError(f"{source_name}: missing subject identifier column USUBJID")

    given = {m.name: m for m in meta or ()}
    if raw:
        inferred = infer_column_types(header, raw)
    else:
        inferred = [ColumnMeta(h, "identifier" if h.endswith("ID") else "categorical") for h in header]
    columns = [given.get(m.name, m) for m in inferred]

    rows = [
        [_convert(cell, col, line) for cell, col in zip(record, columns)]
        for record, line in zip(raw, lines)
    ]
    subj = header.index("USUBJID")
    for row, line in zip(rows, lines):
        if row[subj] is None:
            raise DomainError(f"{source_name}: line {line}: USUBJID is empty")
    return AnalysisDataset(domain=domain, columns=columns, rows=rows, source_name=source_name)


def format_cell(value: Any) -> str:
    """Canonical text for a typed cell; the inverse of parsing for every kind."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def checksum_dataset(dataset: AnalysisDataset) -> str:
    lines = ["\x1f".join(dataset.names)] if dataset.columns else []
    for row in dataset.rows:
        lines.append("\x1f".join(format_cell(v) for v in row))
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def to_csv(dataset: AnalysisDataset) -> bytes:
    """Serialize with canonical cell text so re-parsing yields the same checksum."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(dataset.names)
    for row in dataset.rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def validate_domain(
    dataset: AnalysisDataset,
    required: Mapping[str, Sequence[str]] | None = None,
) -> ValidationReport:
    report = ValidationReport(dataset_ref=dataset.source_name)
    issues = report.issues
    names = dataset.names
    required = REQUIRED_COLUMNS if required is None else required
    for col in required.get(dataset.domain, ()):
        if col not in names:
            issues.append(Issue("error", col, f"missing required column {col}"))

    for j, col in enumerate(dataset.columns):
        if all(row[j] is None for row in dataset.rows):
            issues.append(Issue("warning", col.name, "column has no values; typed as categorical"))

    if "USUBJID" in names:
        j = names.index("USUBJID")
        if any(row[j] is None for row in dataset.rows):
            issues.append(Issue("error", "USUBJID", "null subject identifier"))

    if dataset.domain == "ADTTE":
        if "AVAL" in names:
            vals = dataset.column("AVAL")
            if dataset.kind_of("AVAL") not in ("continuous", "flag"):
                issues.append(Issue("error", "AVAL", "analysis value is not numeric"))
            elif any(v is not None and v < 0 for v in vals):
                issues.append(Issue("error", "AVAL", "negative analysis value"))
            if any(v is None for v in vals):
                issues.append(Issue("warning", "AVAL", "missing analysis value"))
        if "CNSR" in names:
            if any(v not in (0, 1) for v in dataset.column("CNSR")):
                issues.append(Issue("error", "CNSR", "censoring flag outside {0, 1}"))
        if "USUBJID" in names and "PARAMCD" in names:
            seen: set[tuple[Any, Any]] = set()
            dupes: set[tuple[Any, Any]] = set()
            for key in zip(dataset.column("USUBJID"), dataset.column("PARAMCD")):
                if key in seen:
                    dupes.add(key)
                seen.add(key)
            for usubjid, paramcd in sorted(dupes, key=str):
                issues.append(
                    Issue("error", "dataset", f"duplicate record for USUBJID={usubjid} PARAMCD={paramcd}")
                )
    return report
