"""Data products rendered from stored results.

Nothing here imports the statistics kernels: every number comes out of the
store as it was written, so a plot or table can be regenerated without the
source data or analysis code.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import NotFoundError, PivotError, RenderError
from .store import ResultFilter, ResultRecord, Store, get_run, query_results

log = logging.getLogger(__name__)

# Column order for wide tables; statistics not listed sort after these.
STATISTIC_ORDER = (
    "n",
    "n_missing",
    "mean",
    "sd",
    "median",
    "q1",
    "q3",
    "min",
    "max",
    "count",
    "n_subjects",
    "denom",
    "percent",
    "n_events",
    "median_survival",
    "conf_level",
)


@dataclass
class StratumPlot:
    label: str
    steps: list[tuple[float, float]]
    censor_marks: list[tuple[float, float]] = field(default_factory=list)
    ci_band: list[tuple[float, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "steps": [list(p) for p in self.steps],
            "censor_marks": [list(p) for p in self.censor_marks],
            "ci_band": [list(p) for p in self.ci_band],
        }


@dataclass
class KMPlotData:
    strata: list[StratumPlot]
    conf_level: float | None
    source_run: int
    variable: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "source_run": self.source_run,
            "variable": self.variable,
            "conf_level": self.conf_level,
            "strata": [s.to_dict() for s in self.strata],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        """Long format: one line per plotted coordinate."""
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["stratum", "series", "time", "surv", "lower", "upper"])
        for s in self.strata:
            for t, surv in s.steps:
                writer.writerow([s.label, "step", repr(t), repr(surv), "", ""])
            for t, surv in s.censor_marks:
                writer.writerow([s.label, "censor", repr(t), repr(surv), "", ""])
            for t, lo, hi in s.ci_band:
                writer.writerow([s.label, "ci", repr(t), "", repr(lo), repr(hi)])
        return buf.getvalue()


@dataclass
class TableDocument:
    orientation: str
    header: list[str]
    rows: list[list[str]]
    caption: str

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buf.getvalue()

    def to_text(self) -> str:
        widths = [len(h) for h in self.header]
        for row in self.rows:
            widths = [max(w, len(c)) for w, c in zip(widths, row)]
        lines = [self.caption, ""]
        lines.append("  ".join(h.ljust(w) for h, w in zip(self.header, widths)).rstrip())
        lines.append("  ".join("-" * w for w in widths))
        for row in self.rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        return "\n".join(lines) + "\n"


def _stratum_label(rec: ResultRecord) -> str:
    return ";".join(v for _, v in rec.group_keys)


def _km_records(store: Store, run_id: int) -> list[ResultRecord]:
    get_run(store, run_id)
    records = query_results(store, ResultFilter(run_id=run_id))
    if not any(r.statistic_name == "surv" and r.time is not None for r in records):
        raise RenderError(f"run {run_id} has no Kaplan-Meier results")
    return records


def render_km_plot_data(store: Store, run_id: int, exclude_strata: Sequence[str] = ()) -> KMPlotData:
    """Assemble per-stratum step functions from stored KM rows.

    Step points start at (0, 1) and change only at event times; a final
    point at the last censoring time extends the curve when needed.
    """
    records = _km_records(store, run_id)
    points: dict[str, dict[float, dict[str, float | None]]] = {}
    conf_level = None
    variable = ""
    for rec in records:
        label = _stratum_label(rec)
        variable = rec.variable
        if rec.time is None:
            if rec.statistic_name == "conf_level":
                conf_level = rec.value
            points.setdefault(label, {})
            continue
        points.setdefault(label, {}).setdefault(rec.time, {})[rec.statistic_name] = rec.value

    unknown = sorted(set(exclude_strata) - points.keys())
    if unknown:
        log.warning("run %s has no stratum named %s; ignored", run_id, ", ".join(unknown))
    kept = [label for label in sorted(points) if label not in set(exclude_strata)]
    if not kept:
        raise RenderError("every stratum was excluded; nothing to render")

    strata = []
    for label in kept:
        by_time = points[label]
        steps: list[tuple[float, float]] = [(0.0, 1.0)]
        marks: list[tuple[float, float]] = []
        band: list[tuple[float, float, float]] = []
        for t in sorted(by_time):
            row = by_time[t]
            surv = row.get("surv")
            if surv is None:
                continue
            if (row.get("n_event") or 0) > 0:
                if t == 0.0:
                    steps[0] = (0.0, surv)
                else:
                    steps.append((t, surv))
                lo, hi = row.get("ci_lower"), row.get("ci_upper")
                if lo is not None and hi is not None:
                    band.append((t, lo, hi))
            if (row.get("n_censor") or 0) > 0:
                marks.append((t, surv))
        last = max(by_time) if by_time else 0.0
        if last > steps[-1][0]:
            steps.append((last, steps[-1][1]))
        strata.append(StratumPlot(label, steps, marks, band))
    return KMPlotData(strata=strata, conf_level=conf_level, source_run=run_id, variable=variable)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


_PALETTE = ("#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#66456b", "#00798c")


def render_km_svg(plot: KMPlotData, width: int = 640, height: int = 400) -> str:
    if width <= 0 or height <= 0:
        raise RenderError(f"plot dimensions must be positive, got {width}x{height}")
    if not plot.strata:
        raise RenderError("no strata to draw")
    left, right, top, bottom = 56.0, 16.0, 16.0, 44.0
    inner_w = max(width - left - right, 1.0)
    inner_h = max(height - top - bottom, 1.0)
    t_max = max(t for s in plot.strata for t, _ in s.steps) or 1.0

    def x(t: float) -> float:
        return left + inner_w * t / t_max

    def y(s: float) -> float:
        return top + inner_h * (1.0 - s)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        '<g class="axes" stroke="black" stroke-width="1" font-family="sans-serif" font-size="11">',
        f'<line x1="{_fmt(left)}" y1="{_fmt(y(0))}" x2="{_fmt(left + inner_w)}" y2="{_fmt(y(0))}"/>',
        f'<line x1="{_fmt(left)}" y1="{_fmt(y(0))}" x2="{_fmt(left)}" y2="{_fmt(y(1))}"/>',
    ]
    for i in range(6):
        s = i / 5
        out.append(f'<line x1="{_fmt(left - 4)}" y1="{_fmt(y(s))}" x2="{_fmt(left)}" y2="{_fmt(y(s))}"/>')
        out.append(
            f'<text x="{_fmt(left - 8)}" y="{_fmt(y(s) + 4)}" text-anchor="end" stroke="none">{s:.1f}</text>'
        )
    for i in range(6):
        t = t_max * i / 5
        out.append(f'<line x1="{_fmt(x(t))}" y1="{_fmt(y(0))}" x2="{_fmt(x(t))}" y2="{_fmt(y(0) + 4)}"/>')
        out.append(
            f'<text x="{_fmt(x(t))}" y="{_fmt(y(0) + 16)}" text-anchor="middle" stroke="none">{t:g}</text>'
        )
    out.append(
        f'<text x="{_fmt(left + inner_w / 2)}" y="{_fmt(height - 6.0)}" text-anchor="middle"'
        f' stroke="none">{_escape(plot.variable or "time")}</text>'
    )
    out.append("</g>")

    for i, stratum in enumerate(plot.strata):
        color = _PALETTE[i % len(_PALETTE)]
        label = _escape(stratum.label)
        out.append(f'<g class="stratum" data-label="{label}">')
        if stratum.ci_band:
            upper = " ".join(f"{_fmt(x(t))},{_fmt(y(hi))}" for t, _, hi in stratum.ci_band)
            lower = " ".join(f"{_fmt(x(t))},{_fmt(y(lo))}" for t, lo, _ in reversed(stratum.ci_band))
            out.append(f'<path class="km-ci" d="M {upper} L {lower} Z" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        vertices = []
        prev = None
        for t, s in stratum.steps:
            if prev is not None:
                vertices.append((t, prev))
            vertices.append((t, s))
            prev = s
        pts = " ".join(f"{_fmt(x(t))},{_fmt(y(s))}" for t, s in vertices)
        out.append(f'<polyline class="km-step" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for t, s in stratum.censor_marks:
            out.append(
                f'<line class="km-censor" x1="{_fmt(x(t))}" y1="{_fmt(y(s) - 4)}" x2="{_fmt(x(t))}"'
                f' y2="{_fmt(y(s) + 4)}" stroke="{color}"/>'
            )
        ly = top + 14.0 * (i + 1)
        out.append(
            f'<text x="{_fmt(left + inner_w - 4)}" y="{_fmt(ly)}" text-anchor="end" fill="{color}"'
            f' font-family="sans-serif" font-size="11">{label}</text>'
        )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def format_number(value: float | None) -> str:
    if value is None:
        return ""
    text = format(value, ".6g")
    return "0" if text == "-0" else text


def _cell(rec: ResultRecord) -> str:
    return format_number(rec.value) if rec.value is not None else (rec.value_text or "")


def _stat_rank(name: str) -> tuple[int, str]:
    if name in STATISTIC_ORDER:
        return (STATISTIC_ORDER.index(name), name)
    return (len(STATISTIC_ORDER), name)


def render_table(store: Store, run_id: int, orientation: str = "long") -> TableDocument:
    run = get_run(store, run_id)
    if run.status != "completed":
        raise NotFoundError(f"run {run_id} has status {run.status}; no results to render")
    records = query_results(store, ResultFilter(run_id=run_id))
    caption = (
        f"{run.standard_name} {run.standard_version}, run {run.run_id},"
        f" params {run.canonical_params}, identity {run.identity[:12]}"
    )
    if orientation == "long":
        if run.standard_name == "safety":
            records = _incidence_order(records)
        rows = [
            [r.group_label(), r.variable, r.statistic_name, format_number(r.time), _cell(r)]
            for r in records
        ]
        return TableDocument("long", ["group", "variable", "statistic", "time", "value"], rows, caption)
    if orientation != "wide":
        raise RenderError(f"unknown orientation {orientation!r}")

    cells: dict[tuple[str, str], dict[str, str]] = {}
    stat_names: set[str] = set()
    for r in records:
        row_key = (r.group_label(), r.variable)
        row = cells.setdefault(row_key, {})
        if r.statistic_name in row:
            raise PivotError(
                f"pivot collision at group={row_key[0]} variable={row_key[1]}"
                f" statistic={r.statistic_name}; use the long orientation"
            )
        row[r.statistic_name] = _cell(r)
        stat_names.add(r.statistic_name)
    columns = sorted(stat_names, key=_stat_rank)
    rows = [[g, v] + [cells[(g, v)].get(s, "") for s in columns] for (g, v) in cells]
    return TableDocument("wide", ["group", "variable"] + columns, rows, caption)


def _incidence_order(records: list[ResultRecord]) -> list[ResultRecord]:
    """Within each group, order terms by descending percent, then term."""
    percent = {
        (r.group_label(), r.variable): r.value or 0.0
        for r in records
        if r.statistic_name == "percent"
    }
    position = {r.group_label(): i for i, r in reversed(list(enumerate(records)))}
    return sorted(
        records,
        key=lambda r: (
            position[r.group_label()],
            -percent.get((r.group_label(), r.variable), 0.0),
            r.variable,
            r.statistic_name,
        ),
    )
