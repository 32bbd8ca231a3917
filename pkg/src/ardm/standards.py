"""Analysis standards: declarative grammar steps executed against the store.

A standard is data. Its steps name formulas from fixed registries and bind
their arguments either to literals or, with a leading ``$``, to run
parameters. Steps always execute in grammar order::

    select -> transform -> apply_formula -> store

and a run either stores every result it produced or nothing at all.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

from . import stats
from .errors import (
    AnalysisFailed,
    ArdmError,
    DataError,
    DefinitionError,
    NotFoundError,
    ParamSchemaError,
    UserError,
)
from .ingest import AnalysisDataset
from .schema import build_subject_level, get_dataset_registration, load_dataset, subject_level_rows
from .store import (
    AnalysisRun,
    ResultRecord,
    Store,
    canonical_json,
    find_completed_run,
    insert_results,
    record_failed_run,
    utc_now,
)

log = logging.getLogger(__name__)

STEP_KINDS = ("select", "transform", "apply_formula", "store")
PARAM_KINDS = ("text", "text_list", "number")
_SEMVER = re.compile(r"^(\d+)\.(\d+)\.(\d+)$")

# Placeholder for undefined statistics; a stored value is never empty on both columns.
MISSING_TEXT = "NA"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    required: bool = False
    default: Any = None
    choices: tuple[str, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        d = {"name": self.name, "kind": self.kind, "required": self.required, "default": self.default}
        if self.choices is not None:
            d["choices"] = list(self.choices)
        return d


@dataclass(frozen=True)
class Step:
    kind: str
    formula: str
    args: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "formula": self.formula, "args": dict(self.args)}


@dataclass(frozen=True)
class AnalysisStandard:
    name: str
    version: str
    param_schema: tuple[ParamSpec, ...]
    steps: tuple[Step, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "version": self.version,
            "param_schema": [p.to_dict() for p in self.param_schema],
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AnalysisStandard":
        try:
            params = tuple(
                ParamSpec(
                    name=p["name"],
                    kind=p["kind"],
                    required=bool(p.get("required", False)),
                    default=p.get("default"),
                    choices=tuple(p["choices"]) if p.get("choices") is not None else None,
                )
                for p in data["param_schema"]
            )
            steps = tuple(Step(s["kind"], s["formula"], dict(s.get("args", {}))) for s in data["steps"])
            return cls(name=data["name"], version=data["version"], param_schema=params, steps=steps)
        except (KeyError, TypeError) as exc:
            raise DefinitionError(f"malformed standard definition: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "AnalysisStandard":
        return cls.from_dict(json.loads(text))

    @property
    def version_key(self) -> tuple[int, int, int]:
        m = _SEMVER.match(self.version)
        return tuple(int(g) for g in m.groups()) if m else (0, 0, 0)

    def input_domains(self) -> list[tuple[str, bool]]:
        """(domain, required) for every select step, in step order."""
        return [
            (s.args["domain"], not s.args.get("optional", False))
            for s in self.steps
            if s.kind == "select"
        ]


# -- parameters -------------------------------------------------------------


def _coerce(spec: ParamSpec, value: Any) -> Any:
    if spec.kind == "number":
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ParamSchemaError(f"parameter {spec.name}: {value!r} is not a number") from None
    if spec.kind == "text_list":
        if isinstance(value, str):
            items = [v.strip() for v in value.split(",")]
        else:
            items = [str(v) for v in value]
        items = [v for v in items if v]
        if not items:
            raise ParamSchemaError(f"parameter {spec.name}: empty list")
        return items
    if not isinstance(value, str):
        raise ParamSchemaError(f"parameter {spec.name}: expected text, got {value!r}")
    if spec.choices is not None and value not in spec.choices:
        raise ParamSchemaError(
            f"parameter {spec.name}: {value!r} not one of {', '.join(spec.choices)}"
        )
    return value


def resolve_params(params: Mapping[str, Any], schema: Sequence[ParamSpec]) -> dict[str, Any]:
    """Apply defaults and coerce values; reject unknown or missing names."""
    specs = {p.name: p for p in schema}
    unknown = sorted(set(params) - specs.keys())
    if unknown:
        raise ParamSchemaError(f"unknown parameter(s): {', '.join(unknown)}")
    resolved = {}
    for spec in schema:
        if spec.name in params:
            resolved[spec.name] = _coerce(spec, params[spec.name])
        elif spec.required:
            raise ParamSchemaError(f"missing required parameter {spec.name}")
        elif spec.default is not None:
            resolved[spec.name] = _coerce(spec, spec.default)
    return resolved


def canonicalize_params(
    params: Mapping[str, Any], schema: Sequence[ParamSpec] | None = None
) -> tuple[str, str]:
    """Return the key-sorted compact JSON of ``params`` and its SHA-256.

    With ``schema`` the map is validated and fully defaulted first.
    """
    if schema is not None:
        params = resolve_params(params, schema)
    text = canonical_json(dict(params))
    return text, hashlib.sha256(text.encode("utf-8")).hexdigest()


def run_identity(standard: AnalysisStandard, canonical: str, checksums: Sequence[str]) -> str:
    payload = canonical_json([standard.name, standard.version, canonical, sorted(checksums)])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# -- execution context and formula registries -------------------------------


@dataclass
class RunContext:
    store: Store
    params: dict[str, Any]
    datasets: dict[str, AnalysisDataset]
    dataset_ids: dict[str, int]
    frames: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    denominators: dict[str, int] = field(default_factory=dict)
    records: list[ResultRecord] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)

    def bind(self, args: Mapping[str, Any]) -> dict[str, Any]:
        return {k: _bind_value(v, self.params) for k, v in args.items()}

    def frame(self, domain: str) -> list[dict[str, Any]]:
        if domain not in self.frames:
            raise DataError(f"no {domain} rows selected")
        return self.frames[domain]

    def kind_of(self, domain: str, column: str) -> str:
        ds = self.datasets[domain]
        if column not in ds.names:
            raise DataError(f"{domain} has no column {column}")
        return ds.kind_of(column)


def _bind_value(value: Any, params: Mapping[str, Any]) -> Any:
    if isinstance(value, str) and value.startswith("$"):
        return params.get(value[1:])
    if isinstance(value, list):
        return [_bind_value(v, params) for v in value]
    return value


def _select_all(ctx: RunContext, domain: str, optional: bool = False) -> None:
    ds = ctx.datasets.get(domain)
    if ds is None:
        if optional:
            return
        raise DataError(f"no {domain} dataset supplied")
    ctx.frames[domain] = sorted(ds.records(), key=_row_order)


def _select_where(ctx: RunContext, domain: str, column: str, equals: Any, optional: bool = False) -> None:
    ds = ctx.datasets.get(domain)
    if ds is None:
        if optional:
            return
        raise DataError(f"no {domain} dataset supplied")
    if column not in ds.names:
        raise DataError(f"{domain} has no column {column}")
    rows = [r for r in ds.records() if r[column] == equals]
    if not rows:
        raise DataError(f"empty analysis set: no {domain} rows with {column}={equals}")
    ctx.frames[domain] = sorted(rows, key=_row_order)


def _row_order(row: Mapping[str, Any]) -> tuple:
    return tuple((k, "" if v is None else str(v)) for k, v in sorted(row.items()))


def _event_from_censor(ctx: RunContext, domain: str, censor: str = "CNSR", event: str = "EVENT") -> None:
    for row in ctx.frame(domain):
        cnsr = row.get(censor)
        if cnsr not in (0, 1):
            raise DataError(f"{row.get('USUBJID')}: censoring flag {cnsr!r} is not 0 or 1")
        row[event] = 1 - cnsr


def _attach_group(ctx: RunContext, domain: str, column: str, source: str = "ADSL") -> None:
    rows = ctx.frame(domain)
    if column in ctx.datasets[domain].names:
        return
    if source not in ctx.frames or column not in ctx.datasets[source].names:
        raise DataError(f"stratification column {column} not found in {domain} or {source}")
    labels = {}
    for r in ctx.frames[source]:
        labels.setdefault(r["USUBJID"], r[column])
    for row in rows:
        if row["USUBJID"] not in labels:
            raise DataError(f"{row['USUBJID']} absent from {source}")
        row[column] = labels[row["USUBJID"]]


def _subject_level_join(ctx: RunContext, domain: str, group_by: str) -> None:
    """Attach arm labels and population sizes from the subject-level table."""
    if group_by not in ctx.datasets["ADSL"].names:
        raise DataError(f"ADSL has no column {group_by}")
    adsl_id = ctx.dataset_ids["ADSL"]
    build_subject_level(ctx.store, adsl_id, ctx.dataset_ids.get(domain))
    subjects = {r.usubjid for r in subject_level_rows(ctx.store, adsl_id)}
    arms = {}
    for r in ctx.frame("ADSL"):
        if r["USUBJID"] in subjects:
            arms.setdefault(r["USUBJID"], r[group_by])
    if any(a is None for a in arms.values()):
        raise DataError(f"ADSL subjects with missing {group_by}")
    ctx.denominators = {}
    for arm in arms.values():
        ctx.denominators[arm] = ctx.denominators.get(arm, 0) + 1
    kept = []
    for row in ctx.frame(domain):
        if row["USUBJID"] in arms:
            row[group_by] = arms[row["USUBJID"]]
            kept.append(row)
    ctx.frames[domain] = kept


def _groups(ctx: RunContext, domain: str, group_by: str) -> dict[str, list[dict[str, Any]]]:
    rows = ctx.frame(domain)
    if rows and group_by not in rows[0]:
        raise DataError(f"{domain} has no column {group_by}")
    out: dict[str, list[dict[str, Any]]] = {}
    for row in rows:
        label = row[group_by]
        if label is None:
            raise DataError(f"{row['USUBJID']}: missing {group_by}")
        out.setdefault(str(label), []).append(row)
    return dict(sorted(out.items()))


def _number_record(keys, variable, stat, value, unit=None, time=None) -> ResultRecord:
    if value is None:
        return ResultRecord(keys, variable, stat, None, MISSING_TEXT, unit, time)
    return ResultRecord(keys, variable, stat, float(value), None, unit, time)


_DESCRIBABLE = {"continuous": "continuous", "categorical": "categorical", "flag": "categorical"}


def _describe_targets(ctx: RunContext, domain: str, variables: Sequence[str], which: str) -> list[str]:
    chosen = []
    for var in variables:
        kind = ctx.kind_of(domain, var)
        if kind not in _DESCRIBABLE:
            raise DataError(f"{domain}.{var} is {kind}; only continuous or categorical columns can be described")
        if _DESCRIBABLE[kind] == which:
            chosen.append(var)
    return chosen


def _apply_describe_continuous(ctx: RunContext, domain: str, variables: Sequence[str], group_by: str) -> None:
    ds = ctx.datasets[domain]
    for var in _describe_targets(ctx, domain, variables, "continuous"):
        unit = ds.columns[ds.names.index(var)].unit
        for arm, rows in _groups(ctx, domain, group_by).items():
            summary = stats.describe_continuous(r[var] for r in rows)
            keys = ((group_by, arm),)
            for stat, value in summary.items():
                rec_unit = None if stat in ("n", "n_missing") else unit
                ctx.records.append(_number_record(keys, var, stat, value, rec_unit))


def _apply_describe_categorical(ctx: RunContext, domain: str, variables: Sequence[str], group_by: str) -> None:
    for var in _describe_targets(ctx, domain, variables, "categorical"):
        for arm, rows in _groups(ctx, domain, group_by).items():
            summary = stats.describe_categorical(
                None if r[var] is None else str(r[var]) for r in rows
            )
            keys = ((group_by, arm),)
            ctx.records.append(_number_record(keys, var, "n", summary.n_non_missing))
            ctx.records.append(_number_record(keys, var, "n_missing", summary.n_missing))
            for level, count, pct in summary.levels:
                level_keys = keys + ((var, level),)
                ctx.records.append(_number_record(level_keys, var, "count", count))
                ctx.records.append(_number_record(level_keys, var, "percent", pct))


_AE_LEVELS = {"preferred_term": "AEDECOD", "body_system": "AEBODSYS"}


def _apply_ae_incidence(ctx: RunContext, domain: str, group_by: str, level: str) -> None:
    term_col = _AE_LEVELS.get(level, level)
    rows = ctx.frame(domain)
    ae_rows = []
    for r in rows:
        if r.get(term_col) is None:
            raise DataError(f"{r['USUBJID']}: missing {term_col}")
        ae_rows.append((r["USUBJID"], str(r[group_by]), str(r[term_col])))
    incidence = stats.ae_incidence(ae_rows, ctx.denominators)
    with_any = {row.group for row in incidence if row.term == stats.ANY_EVENT}
    for arm, denom in sorted(ctx.denominators.items()):
        if arm not in with_any:
            incidence.append(stats.IncidenceRow(arm, stats.ANY_EVENT, 0, denom, 0.0))
    for row in incidence:
        keys = ((group_by, row.group),)
        ctx.records.append(_number_record(keys, row.term, "n_subjects", row.n_subjects))
        ctx.records.append(_number_record(keys, row.term, "denom", row.denom))
        ctx.records.append(_number_record(keys, row.term, "percent", row.percent))


KM_POINT_STATS = ("n_risk", "n_event", "n_censor", "surv", "std_err", "ci_lower", "ci_upper")


def _apply_km_estimate(
    ctx: RunContext,
    domain: str,
    group_by: str,
    variable: str,
    conf_level: float,
    time: str = "AVAL",
    event: str = "EVENT",
) -> None:
    ds = ctx.datasets[domain]
    unit = ds.columns[ds.names.index(time)].unit if time in ds.names else None
    for stratum, rows in _groups(ctx, domain, group_by).items():
        times = [r[time] for r in rows]
        if any(t is None for t in times):
            raise DataError(f"stratum {stratum}: missing {time} values")
        curve = stats.km_estimate(times, [r[event] for r in rows], conf_level, stratum=stratum)
        keys = ((group_by, stratum),)
        for p in curve.points:
            for stat in KM_POINT_STATS:
                ctx.records.append(_number_record(keys, variable, stat, getattr(p, stat), None, p.time))
        ctx.records.append(_number_record(keys, variable, "n_subjects", curve.n_subjects))
        ctx.records.append(_number_record(keys, variable, "n_events", curve.n_events))
        ctx.records.append(_number_record(keys, variable, "median_survival", curve.median_survival, unit))
        ctx.records.append(_number_record(keys, variable, "conf_level", curve.conf_level))


SELECTORS: dict[str, Callable[..., None]] = {
    "rows_all": _select_all,
    "rows_where": _select_where,
}
TRANSFORMS: dict[str, Callable[..., None]] = {
    "event_from_censor": _event_from_censor,
    "attach_group": _attach_group,
    "subject_level_join": _subject_level_join,
}
# Each apply_formula id names the stats operation its adapter dispatches to.
KERNELS: dict[str, Callable[..., None]] = {
    "describe_continuous": _apply_describe_continuous,
    "describe_categorical": _apply_describe_categorical,
    "ae_incidence": _apply_ae_incidence,
    "km_estimate": _apply_km_estimate,
}
STORERS = ("store_results",)

_REGISTRIES = {"select": SELECTORS, "transform": TRANSFORMS, "apply_formula": KERNELS}


def validate_standard(standard: AnalysisStandard) -> None:
    if not re.match(r"^[a-z][a-z0-9_]*$", standard.name):
        raise DefinitionError(f"invalid standard name {standard.name!r}")
    if not _SEMVER.match(standard.version):
        raise DefinitionError(f"version {standard.version!r} is not MAJOR.MINOR.PATCH")
    for p in standard.param_schema:
        if p.kind not in PARAM_KINDS:
            raise DefinitionError(f"parameter {p.name}: unknown kind {p.kind!r}")
    if not standard.steps or standard.steps[-1].kind != "store":
        raise DefinitionError(f"{standard.name}: the last step must be a store step")
    if sum(s.kind == "store" for s in standard.steps) != 1:
        raise DefinitionError(f"{standard.name}: exactly one store step is allowed")
    position = -1
    param_names = {p.name for p in standard.param_schema}
    for i, step in enumerate(standard.steps):
        if step.kind not in STEP_KINDS:
            raise DefinitionError(f"step {i}: unknown step kind {step.kind!r}")
        rank = STEP_KINDS.index(step.kind)
        if rank < position:
            raise DefinitionError(
                f"step {i}: {step.kind} cannot follow {STEP_KINDS[position]} (grammar order is"
                f" {' -> '.join(STEP_KINDS)})"
            )
        position = rank
        known = STORERS if step.kind == "store" else _REGISTRIES[step.kind]
        if step.formula not in known:
            raise DefinitionError(f"step {i}: unknown {step.kind} formula {step.formula!r}")
        if step.kind == "select" and "domain" not in step.args:
            raise DefinitionError(f"step {i}: select steps need a domain argument")
        for value in step.args.values():
            for ref in value if isinstance(value, list) else [value]:
                if isinstance(ref, str) and ref.startswith("$") and ref[1:] not in param_names:
                    raise DefinitionError(f"step {i}: argument refers to unknown parameter {ref}")
    if not any(s.kind == "apply_formula" for s in standard.steps):
        raise DefinitionError(f"{standard.name}: no apply_formula step")


# -- registry ---------------------------------------------------------------


def register_standard(store: Store, standard: AnalysisStandard) -> None:
    store.require_schema()
    validate_standard(standard)
    definition = standard.to_json()
    with store.transaction():
        row = store.execute(
            "SELECT definition FROM standards_registry WHERE name = ? AND version = ?",
            (standard.name, standard.version),
        ).fetchone()
        if row is not None:
            if row[0] != definition:
                raise DefinitionError(
                    f"{standard.name} {standard.version} is already registered with different content"
                )
            return
        store.execute(
            "INSERT INTO standards_registry (name, version, definition) VALUES (?, ?, ?)",
            (standard.name, standard.version, definition),
        )


def list_standards(store: Store) -> list[AnalysisStandard]:
    store.require_schema()
    rows = store.execute("SELECT definition FROM standards_registry")
    found = [AnalysisStandard.from_json(r[0]) for r in rows]
    return sorted(found, key=lambda s: (s.name, s.version_key))


def get_standard(store: Store, name: str, version: str | None = None) -> AnalysisStandard:
    matches = [s for s in list_standards(store) if s.name == name]
    if version is not None:
        matches = [s for s in matches if s.version == version]
    if not matches:
        suffix = f" version {version}" if version else ""
        raise NotFoundError(f"no registered standard {name!r}{suffix}")
    return matches[-1]


# -- runs -------------------------------------------------------------------


def _bind_inputs(
    store: Store, standard: AnalysisStandard, dataset_ids: Sequence[int]
) -> tuple[dict[str, int], list[str]]:
    by_domain: dict[str, int] = {}
    checksums = []
    for dataset_id in dataset_ids:
        reg = get_dataset_registration(store, dataset_id)
        if reg.domain in by_domain and by_domain[reg.domain] != dataset_id:
            raise UserError(f"more than one {reg.domain} dataset supplied")
        by_domain[reg.domain] = dataset_id
        checksums.append(reg.checksum)
    wanted = dict(standard.input_domains())
    extra = sorted(set(by_domain) - wanted.keys())
    if extra:
        raise UserError(f"{standard.name} does not use {', '.join(extra)} datasets")
    missing = sorted(d for d, required in wanted.items() if required and d not in by_domain)
    if missing:
        raise UserError(f"{standard.name} needs a {', '.join(missing)} dataset")
    return by_domain, sorted(set(checksums))


def run_standard(
    store: Store,
    name: str,
    params: Mapping[str, Any],
    dataset_ids: Sequence[int],
    version: str | None = None,
) -> AnalysisRun:
    """Execute a registered standard and store its results atomically.

    A completed run with the same identity is returned unchanged with
    ``status='skipped_duplicate'``. Failures record a failed run row and
    raise :class:`AnalysisFailed` (or re-raise unexpected exceptions).
    """
    store.require_schema()
    standard = get_standard(store, name, version)
    canonical, _ = canonicalize_params(params, standard.param_schema)
    by_domain, checksums = _bind_inputs(store, standard, dataset_ids)
    identity = run_identity(standard, canonical, checksums)

    existing = find_completed_run(store, identity)
    if existing is not None:
        log.info("run %s already completed with identity %s; skipping", existing.run_id, identity)
        return replace(existing, status="skipped_duplicate")

    run = AnalysisRun(
        standard_name=standard.name,
        standard_version=standard.version,
        canonical_params=canonical,
        identity=identity,
        dataset_ids=sorted(by_domain.values()),
        started=utc_now(),
    )
    ctx = RunContext(
        store=store,
        params=json.loads(canonical),
        datasets={d: load_dataset(store, i) for d, i in by_domain.items()},
        dataset_ids=by_domain,
        trace=run.trace,
    )
    try:
        for step in standard.steps:
            args = ctx.bind(step.args)
            ctx.trace.append(f"{step.kind}:{step.formula}")
            if step.kind == "store":
                if not ctx.records:
                    raise DataError("empty analysis set: no results produced")
                run.finished = utc_now()
                insert_results(store, run, ctx.records)
            else:
                _REGISTRIES[step.kind][step.formula](ctx, **args)
    except Exception as exc:
        run.run_id = None
        run.finished = utc_now()
        run.message = str(exc)
        record_failed_run(store, run)
        log.error("run of %s %s failed: %s", standard.name, standard.version, exc)
        if isinstance(exc, ArdmError):
            raise AnalysisFailed(f"{standard.name} run failed: {exc}", run) from exc
        raise
    return run


# -- built-in standards -----------------------------------------------------

DESCRIPTIVE = AnalysisStandard(
    name="descriptive",
    version="1.0.0",
    param_schema=(
        ParamSpec("variables", "text_list", required=True),
        ParamSpec("group_by", "text", default="TRT01P"),
    ),
    steps=(
        Step("select", "rows_all", {"domain": "ADSL"}),
        Step("apply_formula", "describe_continuous", {"domain": "ADSL", "variables": "$variables", "group_by": "$group_by"}),
        Step("apply_formula", "describe_categorical", {"domain": "ADSL", "variables": "$variables", "group_by": "$group_by"}),
        Step("store", "store_results"),
    ),
)

SAFETY = AnalysisStandard(
    name="safety",
    version="1.0.0",
    param_schema=(
        ParamSpec("group_by", "text", default="TRT01P"),
        ParamSpec("level", "text", default="preferred_term", choices=("preferred_term", "body_system")),
    ),
    steps=(
        Step("select", "rows_all", {"domain": "ADAE"}),
        Step("select", "rows_all", {"domain": "ADSL"}),
        Step("transform", "subject_level_join", {"domain": "ADAE", "group_by": "$group_by"}),
        Step("apply_formula", "ae_incidence", {"domain": "ADAE", "group_by": "$group_by", "level": "$level"}),
        Step("store", "store_results"),
    ),
)

SURVIVAL = AnalysisStandard(
    name="survival",
    version="1.0.0",
    param_schema=(
        ParamSpec("param", "text", required=True),
        ParamSpec("strata", "text", default="TRTP"),
        ParamSpec("conf_level", "number", default=0.95),
    ),
    steps=(
        Step("select", "rows_where", {"domain": "ADTTE", "column": "PARAMCD", "equals": "$param"}),
        Step("select", "rows_all", {"domain": "ADSL", "optional": True}),
        Step("transform", "event_from_censor", {"domain": "ADTTE", "censor": "CNSR", "event": "EVENT"}),
        Step("transform", "attach_group", {"domain": "ADTTE", "column": "$strata", "source": "ADSL"}),
        Step(
            "apply_formula",
            "km_estimate",
            {
                "domain": "ADTTE",
                "group_by": "$strata",
                "variable": "$param",
                "conf_level": "$conf_level",
                "time": "AVAL",
                "event": "EVENT",
            },
        ),
        Step("store", "store_results"),
    ),
)

BUILTIN_STANDARDS = (DESCRIPTIVE, SAFETY, SURVIVAL)


def register_builtins(store: Store) -> None:
    for standard in BUILTIN_STANDARDS:
        register_standard(store, standard)
