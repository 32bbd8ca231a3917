"""Single-file results store and its query surface.

The store is a SQLite database. Writable handles take an exclusive
``flock`` on the file so at most one writer exists at a time; read-only
handles open the file with ``mode=ro`` and never modify it. Results are
append-only: a run and all of its records land in one transaction.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import sqlite3
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator, Sequence

from .errors import DataError, DuplicateResultError, LockError, NotFoundError, OpenError, UserError

try:
    import fcntl
except ImportError:  # pragma: no cover - non-POSIX
    fcntl = None

log = logging.getLogger(__name__)

RECORD_FIELDS = (
    "result_id",
    "run_id",
    "group_keys",
    "variable",
    "statistic_name",
    "value",
    "value_text",
    "unit",
    "time",
)

RUN_STATUSES = ("completed", "failed", "skipped_duplicate")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def group_keys_text(keys: Sequence[tuple[str, str]]) -> str:
    return canonical_json([[str(k), str(v)] for k, v in keys])


@dataclass(frozen=True)
class ResultRecord:
    group_keys: tuple[tuple[str, str], ...]
    variable: str
    statistic_name: str
    value: float | None = None
    value_text: str | None = None
    unit: str | None = None
    time: float | None = None
    result_id: int | None = None
    run_id: int | None = None
    standard_name: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.value is None and self.value_text is None:
            raise DataError(
                f"result {self.variable}/{self.statistic_name} has neither value nor value_text"
            )

    @property
    def key(self) -> tuple[str, str, str, float | None]:
        return (group_keys_text(self.group_keys), self.variable, self.statistic_name, self.time)

    def group_label(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.group_keys)

    def as_row(self) -> dict[str, Any]:
        return {
            "result_id": self.result_id,
            "run_id": self.run_id,
            "group_keys": [list(p) for p in self.group_keys],
            "variable": self.variable,
            "statistic_name": self.statistic_name,
            "value": self.value,
            "value_text": self.value_text,
            "unit": self.unit,
            "time": self.time,
        }


@dataclass
class AnalysisRun:
    standard_name: str
    standard_version: str
    canonical_params: str
    identity: str
    dataset_ids: list[int]
    started: str | None = None
    finished: str | None = None
    status: str = "completed"
    run_id: int | None = None
    message: str | None = None
    # In-memory record of executed grammar steps; not persisted.
    trace: list[str] = field(default_factory=list, compare=False, repr=False)


@dataclass(frozen=True)
class RunSummary:
    run_id: int
    standard_name: str
    standard_version: str
    identity: str
    status: str
    n_records: int
    started: str | None
    finished: str | None
    message: str | None = None


@dataclass
class ResultFilter:
    standard_name: str | None = None
    run_id: int | None = None
    dataset_id: int | None = None
    groups: list[tuple[str, str]] = field(default_factory=list)
    variable: str | None = None
    statistic_names: list[str] = field(default_factory=list)
    time_min: float | None = None
    time_max: float | None = None


class Store:
    """Handle on one store file. Use :func:`open_store` to create one."""

    def __init__(self, path: Path, conn: sqlite3.Connection, writable: bool, lock_fd: int | None):
        self.path = path
        self.conn = conn
        self.writable = writable
        self._lock_fd = lock_fd
        self._depth = 0

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def close(self) -> None:
        if self.conn is not None:
            self.conn.close()
            self.conn = None
        if self._lock_fd is not None:
            os.close(self._lock_fd)
            self._lock_fd = None

    @contextmanager
    def transaction(self) -> Iterator[sqlite3.Connection]:
        """Run the body atomically; nested use joins the outer transaction."""
        if not self.writable:
            raise UserError(f"{self.path}: store is open read-only")
        if self._depth:
            self._depth += 1
            try:
                yield self.conn
            finally:
                self._depth -= 1
            return
        self.conn.execute("BEGIN IMMEDIATE")
        self._depth = 1
        try:
            yield self.conn
        except BaseException:
            self.conn.execute("ROLLBACK")
            raise
        else:
            self.conn.execute("COMMIT")
        finally:
            self._depth = 0

    def execute(self, sql: str, params: Sequence[Any] = ()) -> sqlite3.Cursor:
        return self.conn.execute(sql, params)

    def table_names(self) -> list[str]:
        rows = self.execute("SELECT name FROM sqlite_master WHERE type = 'table' ORDER BY name")
        return [r[0] for r in rows]

    @property
    def schema_version(self) -> int:
        if "schema_version" not in self.table_names():
            return 0
        row = self.execute("SELECT version FROM schema_version").fetchone()
        return int(row[0]) if row else 0

    def require_schema(self) -> None:
        if self.schema_version == 0:
            raise UserError(f"{self.path}: store is not initialized (run init first)")


def open_store(path: str | os.PathLike[str], create: bool = False, readonly: bool = False) -> Store:
    """Open (or create) a store file.

    Writable handles hold an exclusive lock until closed; a second writer
    fails immediately with :class:`LockError`.
    """
    path = Path(path)
    if not path.exists():
        if readonly or not create:
            raise OpenError(f"{path}: no such store (use init to create one)")
        try:
            path.touch()
        except OSError as exc:
            raise OpenError(f"{path}: cannot create store: {exc.strerror}") from None

    if readonly:
        conn = sqlite3.connect(f"{path.resolve().as_uri()}?mode=ro", uri=True, isolation_level=None)
        _check_sqlite(conn, path)
        return Store(path, conn, writable=False, lock_fd=None)

    lock_fd = os.open(path, os.O_RDWR)
    if fcntl is not None:
        try:
            fcntl.flock(lock_fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except BlockingIOError:
            os.close(lock_fd)
            raise LockError(
                f"{path}: another process holds the write lock; retry when it finishes"
            ) from None
    conn = sqlite3.connect(path, isolation_level=None, timeout=10.0)
    conn.execute("PRAGMA synchronous = FULL")
    conn.execute("PRAGMA foreign_keys = ON")
    _check_sqlite(conn, path)
    return Store(path, conn, writable=True, lock_fd=lock_fd)


def _check_sqlite(conn: sqlite3.Connection, path: Path) -> None:
    try:
        conn.execute("SELECT count(*) FROM sqlite_master").fetchone()
    except sqlite3.DatabaseError as exc:
        conn.close()
        raise OpenError(f"{path}: not a store file ({exc})") from None


# -- writes -----------------------------------------------------------------


def _insert_run_row(store: Store, run: AnalysisRun) -> int:
    cur = store.execute(
        "INSERT INTO runs (standard_name, standard_version, canonical_params, identity,"
        " dataset_ids, started, finished, status, message) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
        (
            run.standard_name,
            run.standard_version,
            run.canonical_params,
            run.identity,
            canonical_json(sorted(run.dataset_ids)),
            run.started,
            run.finished,
            run.status,
            run.message,
        ),
    )
    return int(cur.lastrowid)


def _sort_key(rec: ResultRecord) -> tuple:
    gk, variable, stat, time = rec.key
    return (gk, variable, time is not None, time or 0.0, stat)


def insert_results(store: Store, run: AnalysisRun, records: Sequence[ResultRecord]) -> int:
    """Commit a completed run row and all its records in one transaction."""
    if run.status != "completed":
        raise DataError(f"insert_results expects a completed run, got status {run.status!r}")
    if not records:
        raise DataError("a completed run must store at least one result record")
    seen: set[tuple] = set()
    for rec in records:
        if rec.key in seen:
            gk, variable, stat, time = rec.key
            raise DuplicateResultError(
                f"duplicate result key: group_keys={gk} variable={variable}"
                f" statistic={stat} time={time}"
            )
        seen.add(rec.key)

    ordered = sorted(records, key=_sort_key)
    with store.transaction():
        existing = store.execute(
            "SELECT run_id FROM runs WHERE identity = ? AND status = 'completed'", (run.identity,)
        ).fetchone()
        if existing:
            raise DuplicateResultError(
                f"run identity {run.identity} already completed as run {existing[0]}"
            )
        run_id = _insert_run_row(store, run)
        next_id = store.execute(
            "SELECT max(coalesce((SELECT max(result_id) FROM results_numeric), 0),"
            " coalesce((SELECT max(result_id) FROM results_km), 0)) + 1"
        ).fetchone()[0]
        try:
            for offset, rec in enumerate(ordered):
                params = (
                    next_id + offset,
                    run_id,
                    group_keys_text(rec.group_keys),
                    rec.variable,
                    rec.statistic_name,
                    rec.value,
                    rec.value_text,
                    rec.unit,
                )
                if rec.time is None:
                    store.execute(
                        "INSERT INTO results_numeric (result_id, run_id, group_keys, variable,"
                        " statistic_name, value, value_text, unit) VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                        params,
                    )
                else:
                    store.execute(
                        "INSERT INTO results_km (result_id, run_id, group_keys, variable,"
                        " statistic_name, value, value_text, unit, time)"
                        " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                        params + (rec.time,),
                    )
        except sqlite3.IntegrityError as exc:
            raise DuplicateResultError(f"result insert violated a uniqueness constraint: {exc}") from None
    run.run_id = run_id
    return len(ordered)


def record_failed_run(store: Store, run: AnalysisRun) -> int:
    run.status = "failed"
    with store.transaction():
        run.run_id = _insert_run_row(store, run)
    return run.run_id


# -- reads ------------------------------------------------------------------

_RESULTS_UNION = (
    "SELECT result_id, run_id, group_keys, variable, statistic_name, value, value_text, unit,"
    " NULL AS time FROM results_numeric"
    " UNION ALL "
    "SELECT result_id, run_id, group_keys, variable, statistic_name, value, value_text, unit,"
    " time FROM results_km"
)


def _row_to_record(row: sqlite3.Row | tuple) -> ResultRecord:
    rid, run_id, gk, variable, stat, value, value_text, unit, time, standard = row
    return ResultRecord(
        group_keys=tuple((k, v) for k, v in json.loads(gk)),
        variable=variable,
        statistic_name=stat,
        value=value,
        value_text=value_text,
        unit=unit,
        time=time,
        result_id=rid,
        run_id=run_id,
        standard_name=standard,
    )


def stored_statistic_names(store: Store) -> set[str]:
    rows = store.execute(
        "SELECT DISTINCT statistic_name FROM results_numeric"
        " UNION SELECT DISTINCT statistic_name FROM results_km"
    )
    return {r[0] for r in rows}


def query_results(store: Store, filter: ResultFilter | None = None) -> list[ResultRecord]:
    """Return stored records matching every predicate in ``filter``.

    Ordering is by run, group keys, variable, time (untimed rows first),
    then statistic name. Statistic names that appear nowhere in the store
    are logged and simply match nothing.
    """
    store.require_schema()
    f = filter or ResultFilter()
    where: list[str] = []
    params: list[Any] = []
    if f.standard_name is not None:
        where.append("r.standard_name = ?")
        params.append(f.standard_name)
    if f.run_id is not None:
        where.append("x.run_id = ?")
        params.append(f.run_id)
    if f.dataset_id is not None:
        where.append("EXISTS (SELECT 1 FROM json_each(r.dataset_ids) d WHERE d.value = ?)")
        params.append(f.dataset_id)
    for key, value in f.groups:
        where.append(
            "EXISTS (SELECT 1 FROM json_each(x.group_keys) g"
            " WHERE json_extract(g.value, '$[0]') = ? AND json_extract(g.value, '$[1]') = ?)"
        )
        params.extend([key, value])
    if f.variable is not None:
        where.append("x.variable = ?")
        params.append(f.variable)
    if f.statistic_names:
        unknown = sorted(set(f.statistic_names) - stored_statistic_names(store))
        if unknown:
            log.warning("no stored results carry statistic name(s): %s", ", ".join(unknown))
        where.append(f"x.statistic_name IN ({', '.join('?' * len(f.statistic_names))})")
        params.extend(f.statistic_names)
    if f.time_min is not None:
        where.append("x.time >= ?")
        params.append(f.time_min)
    if f.time_max is not None:
        where.append("x.time <= ?")
        params.append(f.time_max)
    sql = (
        f"SELECT x.*, r.standard_name FROM ({_RESULTS_UNION}) x JOIN runs r ON r.run_id = x.run_id"
        + (" WHERE " + " AND ".join(where) if where else "")
        + " ORDER BY x.run_id, x.group_keys, x.variable, x.time, x.statistic_name"
    )
    return [_row_to_record(row) for row in store.execute(sql, params)]


def _count_records(store: Store, run_id: int) -> int:
    return store.execute(
        "SELECT (SELECT count(*) FROM results_numeric WHERE run_id = ?)"
        " + (SELECT count(*) FROM results_km WHERE run_id = ?)",
        (run_id, run_id),
    ).fetchone()[0]


_RUN_COLUMNS = (
    "run_id, standard_name, standard_version, canonical_params, identity, dataset_ids,"
    " started, finished, status, message"
)


def _row_to_run(row: tuple) -> AnalysisRun:
    run_id, name, version, params, identity, ds, started, finished, status, message = row
    return AnalysisRun(
        standard_name=name,
        standard_version=version,
        canonical_params=params,
        identity=identity,
        dataset_ids=json.loads(ds),
        started=started,
        finished=finished,
        status=status,
        run_id=run_id,
        message=message,
    )


def list_runs(store: Store) -> list[RunSummary]:
    store.require_schema()
    out = []
    for row in store.execute(f"SELECT {_RUN_COLUMNS} FROM runs ORDER BY run_id"):
        run = _row_to_run(row)
        out.append(
            RunSummary(
                run_id=run.run_id,
                standard_name=run.standard_name,
                standard_version=run.standard_version,
                identity=run.identity,
                status=run.status,
                n_records=_count_records(store, run.run_id),
                started=run.started,
                finished=run.finished,
                message=run.message,
            )
        )
    return out


def get_run(store: Store, run_id: int) -> AnalysisRun:
    store.require_schema()
    row = store.execute(f"SELECT {_RUN_COLUMNS} FROM runs WHERE run_id = ?", (run_id,)).fetchone()
    if row is None:
        raise NotFoundError(f"no run with id {run_id}")
    return _row_to_run(row)


def find_completed_run(store: Store, identity: str) -> AnalysisRun | None:
    row = store.execute(
        f"SELECT {_RUN_COLUMNS} FROM runs WHERE identity = ? AND status = 'completed'", (identity,)
    ).fetchone()
    return _row_to_run(row) if row else None


# -- export -----------------------------------------------------------------


def _csv_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def results_to_csv(records: Sequence[ResultRecord]) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for rec in records:
        row = rec.as_row()
        row["group_keys"] = rec.group_label()
        writer.writerow([_csv_value(row[name]) for name in RECORD_FIELDS])
    return buf.getvalue()


def results_to_json(records: Sequence[ResultRecord]) -> str:
    return json.dumps([rec.as_row() for rec in records], ensure_ascii=False, indent=2) + "\n"
