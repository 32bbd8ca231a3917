"""ARDM table layout plus dataset registration and subject-level aggregates.

Tables fall into three groups. Metadata tables describe datasets,
columns, registered standards and runs; the intermediate table caches
per-subject aggregates; results tables hold every stored statistic.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from .errors import DataError, NotFoundError, SchemaVersionError, ValidationRejected
from .ingest import AnalysisDataset, ColumnMeta, parse_dataset, to_csv, validate_domain
from .store import Store, canonical_json, utc_now

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# (group, table, columns as (name, SQL type, nullable), table constraints)
_TABLES: list[tuple[str, str, list[tuple[str, str, bool]], list[str]]] = [
    (
        "metadata",
        "dataset_meta",
        [
            ("dataset_id", "INTEGER", False),
            ("domain", "TEXT", False),
            ("source_name", "TEXT", False),
            ("checksum", "TEXT", False),
            ("n_rows", "INTEGER", False),
            ("ingest_time", "TEXT", False),
            ("content", "BLOB", True),
        ],
        ["PRIMARY KEY (dataset_id)", "UNIQUE (checksum)"],
    ),
    (
        "metadata",
        "column_meta",
        [
            ("dataset_id", "INTEGER", False),
            ("position", "INTEGER", False),
            ("name", "TEXT", False),
            ("kind", "TEXT", False),
            ("unit", "TEXT", True),
            ("label", "TEXT", True),
        ],
        [
            "PRIMARY KEY (dataset_id, position)",
            "UNIQUE (dataset_id, name)",
            "FOREIGN KEY (dataset_id) REFERENCES dataset_meta (dataset_id)",
        ],
    ),
    (
        "metadata",
        "standards_registry",
        [
            ("name", "TEXT", False),
            ("version", "TEXT", False),
            ("definition", "TEXT", False),
        ],
        ["PRIMARY KEY (name, version)"],
    ),
    (
        "metadata",
        "runs",
        [
            ("run_id", "INTEGER", False),
            ("standard_name", "TEXT", False),
            ("standard_version", "TEXT", False),
            ("canonical_params", "TEXT", False),
            ("identity", "TEXT", False),
            ("dataset_ids", "TEXT", False),
            ("started", "TEXT", True),
            ("finished", "TEXT", True),
            ("status", "TEXT", False),
            ("message", "TEXT", True),
        ],
        ["PRIMARY KEY (run_id)", "CHECK (status IN ('completed', 'failed'))"],
    ),
    (
        "intermediate",
        "subject_level",
        [
            ("dataset_id", "INTEGER", False),
            ("adae_id", "INTEGER", True),
            ("usubjid", "TEXT", False),
            ("grp", "TEXT", True),
            ("derived_flags", "TEXT", False),
            ("derived_values", "TEXT", False),
        ],
        [
            "PRIMARY KEY (dataset_id, usubjid)",
            "FOREIGN KEY (dataset_id) REFERENCES dataset_meta (dataset_id)",
        ],
    ),
    (
        "results",
        "results_numeric",
        [
            ("result_id", "INTEGER", False),
            ("run_id", "INTEGER", False),
            ("group_keys", "TEXT", False),
            ("variable", "TEXT", False),
            ("statistic_name", "TEXT", False),
            ("value", "REAL", True),
            ("value_text", "TEXT", True),
            ("unit", "TEXT", True),
        ],
        [
            "PRIMARY KEY (result_id)",
            "UNIQUE (run_id, group_keys, variable, statistic_name)",
            "CHECK (value IS NOT NULL OR value_text IS NOT NULL)",
            "FOREIGN KEY (run_id) REFERENCES runs (run_id)",
        ],
    ),
    (
        "results",
        "results_km",
        [
            ("result_id", "INTEGER", False),
            ("run_id", "INTEGER", False),
            ("group_keys", "TEXT", False),
            ("variable", "TEXT", False),
            ("statistic_name", "TEXT", False),
            ("value", "REAL", True),
            ("value_text", "TEXT", True),
            ("unit", "TEXT", True),
            ("time", "REAL", False),
        ],
        [
            "PRIMARY KEY (result_id)",
            "UNIQUE (run_id, group_keys, variable, statistic_name, time)",
            "CHECK (value IS NOT NULL OR value_text IS NOT NULL)",
            "FOREIGN KEY (run_id) REFERENCES runs (run_id)",
        ],
    ),
]

_INDEXES = [
    "CREATE UNIQUE INDEX IF NOT EXISTS runs_completed_identity"
    " ON runs (identity) WHERE status = 'completed'",
    "CREATE INDEX IF NOT EXISTS results_numeric_stat ON results_numeric (statistic_name)",
    "CREATE INDEX IF NOT EXISTS results_km_stat ON results_km (statistic_name)",
]


@dataclass(frozen=True)
class TableSpec:
    group: str
    name: str
    columns: tuple[tuple[str, str, bool], ...]


@dataclass(frozen=True)
class SchemaDescriptor:
    version: int
    tables: tuple[TableSpec, ...]

    def table(self, name: str) -> TableSpec:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


@dataclass(frozen=True)
class DatasetRegistration:
    dataset_id: int
    domain: str
    source_name: str
    checksum: str
    n_rows: int
    ingest_time: str


@dataclass(frozen=True)
class SubjectLevelRow:
    dataset_id: int
    usubjid: str
    group: str | None
    derived_flags: dict[str, int]
    derived_values: dict[str, float]


TABLE_GROUPS = {name: group for group, name, _, _ in _TABLES}


def _ddl(name: str, columns: list[tuple[str, str, bool]], constraints: list[str]) -> str:
    parts = [f"{col} {sqltype}{'' if nullable else ' NOT NULL'}" for col, sqltype, nullable in columns]
    return f"CREATE TABLE IF NOT EXISTS {name} ({', '.join(parts + constraints)})"


def describe_schema(store: Store) -> SchemaDescriptor:
    """Descriptor reconstructed from the tables present in ``store``."""
    present = set(store.table_names())
    tables = []
    for group, name, _, _ in _TABLES:
        if name not in present:
            continue
        info = store.execute(f"PRAGMA table_info({name})").fetchall()
        cols = tuple((row[1], row[2], not row[3]) for row in info)
        tables.append(TableSpec(group, name, cols))
    return SchemaDescriptor(version=store.schema_version, tables=tuple(tables))


def init_schema(store: Store) -> SchemaDescriptor:
    version = store.schema_version
    if version > SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{store.path}: store schema version {version} is newer than supported version"
            f" {SCHEMA_VERSION}"
        )
    if version < SCHEMA_VERSION:
        with store.transaction():
            store.execute("CREATE TABLE IF NOT EXISTS schema_version (version INTEGER NOT NULL)")
            for _, name, columns, constraints in _TABLES:
                store.execute(_ddl(name, columns, constraints))
            for stmt in _INDEXES:
                store.execute(stmt)
            store.execute("DELETE FROM schema_version")
            store.execute("INSERT INTO schema_version (version) VALUES (?)", (SCHEMA_VERSION,))
    return describe_schema(store)


def _registration(row: tuple) -> DatasetRegistration:
    return DatasetRegistration(*row)


def find_dataset(store: Store, checksum: str) -> DatasetRegistration | None:
    row = store.execute(
        "SELECT dataset_id, domain, source_name, checksum, n_rows, ingest_time"
        " FROM dataset_meta WHERE checksum = ?",
        (checksum,),
    ).fetchone()
    return _registration(row) if row else None


def get_dataset_registration(store: Store, dataset_id: int) -> DatasetRegistration:
    store.require_schema()
    row = store.execute(
        "SELECT dataset_id, domain, source_name, checksum, n_rows, ingest_time"
        " FROM dataset_meta WHERE dataset_id = ?",
        (dataset_id,),
    ).fetchone()
    if row is None:
        raise NotFoundError(f"no dataset with id {dataset_id}")
    return _registration(row)


def list_datasets(store: Store) -> list[DatasetRegistration]:
    store.require_schema()
    rows = store.execute(
        "SELECT dataset_id, domain, source_name, checksum, n_rows, ingest_time"
        " FROM dataset_meta ORDER BY dataset_id"
    )
    return [_registration(r) for r in rows]


def register_dataset(store: Store, dataset: AnalysisDataset) -> DatasetRegistration:
    """Record a validated dataset; the same content registers only once."""
    store.require_schema()
    report = validate_domain(dataset)
    if not report.passed:
        raise ValidationRejected(report)
    with store.transaction():
        existing = find_dataset(store, dataset.checksum)
        if existing is not None:
            return existing
        cur = store.execute(
            "INSERT INTO dataset_meta (domain, source_name, checksum, n_rows, ingest_time, content)"
            " VALUES (?, ?, ?, ?, ?, ?)",
            (
                dataset.domain,
                dataset.source_name,
                dataset.checksum,
                len(dataset.rows),
                utc_now(),
                to_csv(dataset),
            ),
        )
        dataset_id = int(cur.lastrowid)
        store.conn.executemany(
            "INSERT INTO column_meta (dataset_id, position, name, kind, unit, label)"
            " VALUES (?, ?, ?, ?, ?, ?)",
            [(dataset_id, i, c.name, c.kind, c.unit, c.label) for i, c in enumerate(dataset.columns)],
        )
    return get_dataset_registration(store, dataset_id)


def column_metas(store: Store, dataset_id: int) -> list[ColumnMeta]:
    rows = store.execute(
        "SELECT name, kind, unit, label FROM column_meta WHERE dataset_id = ? ORDER BY position",
        (dataset_id,),
    )
    return [ColumnMeta(*r) for r in rows]


def load_dataset(store: Store, dataset_id: int) -> AnalysisDataset:
    """Rebuild a registered dataset from its stored content and column metadata."""
    reg = get_dataset_registration(store, dataset_id)
    (content,) = store.execute(
        "SELECT content FROM dataset_meta WHERE dataset_id = ?", (dataset_id,)
    ).fetchone()
    if content is None:
        raise NotFoundError(f"dataset {dataset_id} has no stored content")
    dataset = parse_dataset(
        bytes(content), reg.domain, meta=column_metas(store, dataset_id), source_name=reg.source_name
    )
    if dataset.checksum != reg.checksum:
        raise DataError(
            f"dataset {dataset_id}: stored content no longer matches checksum {reg.checksum}"
        )
    return dataset


def build_subject_level(store: Store, adsl_id: int, adae_id: int | None = None) -> int:
    """Write one subject-level row per ADSL subject, replacing prior rows.

    ``ANY_AE`` is 1 for subjects with at least one ADAE record. ADAE
    subjects missing from ADSL are logged and skipped.
    """
    adsl = load_dataset(store, adsl_id)
    if adsl.domain != "ADSL":
        raise DataError(f"dataset {adsl_id} is {adsl.domain}, expected ADSL")
    with_ae: set[str] = set()
    if adae_id is not None:
        adae = load_dataset(store, adae_id)
        if adae.domain != "ADAE":
            raise DataError(f"dataset {adae_id} is {adae.domain}, expected ADAE")
        with_ae = set(adae.column("USUBJID"))

    arms: dict[str, str | None] = {}
    for usubjid, arm in zip(adsl.column("USUBJID"), adsl.column("TRT01P")):
        arms.setdefault(usubjid, arm)
    orphans = sorted(with_ae - arms.keys())
    if orphans:
        log.warning(
            "%d ADAE subject(s) absent from ADSL skipped: %s", len(orphans), ", ".join(orphans)
        )

    with store.transaction():
        store.execute("DELETE FROM subject_level WHERE dataset_id = ?", (adsl_id,))
        store.conn.executemany(
            "INSERT INTO subject_level (dataset_id, adae_id, usubjid, grp, derived_flags,"
            " derived_values) VALUES (?, ?, ?, ?, ?, ?)",
            [
                (
                    adsl_id,
                    adae_id,
                    usubjid,
                    arm,
                    canonical_json({"ANY_AE": int(usubjid in with_ae)}),
                    canonical_json({}),
                )
                for usubjid, arm in sorted(arms.items())
            ],
        )
    return len(arms)


def subject_level_rows(store: Store, adsl_id: int) -> list[SubjectLevelRow]:
    rows = store.execute(
        "SELECT dataset_id, usubjid, grp, derived_flags, derived_values FROM subject_level"
        " WHERE dataset_id = ? ORDER BY usubjid",
        (adsl_id,),
    )
    return [
        SubjectLevelRow(ds, usubjid, grp, json.loads(flags), json.loads(values))
        for ds, usubjid, grp, flags, values in rows
    ]
