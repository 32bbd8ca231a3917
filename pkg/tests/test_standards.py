import hashlib
import json

import pytest

from ardm import standards
from ardm.errors import AnalysisFailed, DefinitionError, ParamSchemaError, UserError
from ardm.ingest import parse_dataset
from ardm.schema import register_dataset
from ardm.standards import (
    STEP_KINDS,
    SURVIVAL,
    AnalysisStandard,
    ParamSpec,
    Step,
    canonicalize_params,
    get_standard,
    list_standards,
    register_standard,
    run_standard,
)
from ardm.store import ResultFilter, list_runs, query_results
from tests.conftest import csv_bytes, pilot_dir


def _results_bytes(store):
    return [store.execute(f"SELECT * FROM {t} ORDER BY result_id").fetchall() for t in ("results_numeric", "results_km")]


def test_canonical_params_sorted():
    text, digest = canonicalize_params({"strata": "TRT01P", "param": "TTDE"})
    assert text == '{"param":"TTDE","strata":"TRT01P"}'
    assert digest == hashlib.sha256(text.encode()).hexdigest()


def test_canonical_params_key_order_irrelevant():
    a = canonicalize_params({"a": 1, "b": "x"})[1]
    b = canonicalize_params({"b": "x", "a": 1})[1]
    assert a == b


def test_canonical_params_schema_errors():
    with pytest.raises(ParamSchemaError, match="stratum_typo"):
        canonicalize_params({"param": "TTDE", "stratum_typo": "TRTP"}, SURVIVAL.param_schema)
    with pytest.raises(ParamSchemaError, match="param"):
        canonicalize_params({}, SURVIVAL.param_schema)


def test_canonical_params_defaults_and_coercion():
    text, _ = canonicalize_params({"param": "TTDE", "conf_level": "0.9"}, SURVIVAL.param_schema)
    assert json.loads(text) == {"param": "TTDE", "strata": "TRTP", "conf_level": 0.9}


def test_builtins_listed_sorted(store):
    assert [(s.name, s.version) for s in list_standards(store)] == [
        ("descriptive", "1.0.0"), ("safety", "1.0.0"), ("survival", "1.0.0"),
    ]


def test_empty_registry(tmp_path):
    from ardm.schema import init_schema
    from ardm.store import open_store

    with open_store(tmp_path / "e.db", create=True) as s:
        init_schema(s)
        assert list_standards(s) == []


def test_reregister_identical_is_noop(store):
    register_standard(store, SURVIVAL)
    assert store.execute("SELECT count(*) FROM standards_registry").fetchone()[0] == 3


def test_conflicting_content_rejected(store):
    changed = AnalysisStandard(SURVIVAL.name, SURVIVAL.version, SURVIVAL.param_schema[:2] + (
        ParamSpec("conf_level", "number", default=0.9),), SURVIVAL.steps)
    with pytest.raises(DefinitionError, match="different content"):
        register_standard(store, changed)


def test_versions_sorted(store):
    v2 = AnalysisStandard("survival", "1.10.0", SURVIVAL.param_schema, SURVIVAL.steps)
    v1b = AnalysisStandard("survival", "1.2.0", SURVIVAL.param_schema, SURVIVAL.steps)
    register_standard(store, v2)
    register_standard(store, v1b)
    assert [s.version for s in list_standards(store) if s.name == "survival"] == ["1.0.0", "1.2.0", "1.10.0"]
    assert get_standard(store, "survival").version == "1.10.0"


@pytest.mark.parametrize(
    "steps, match",
    [
        ((Step("store", "store_results"), Step("select", "rows_all", {"domain": "ADSL"})), "last step"),
        ((Step("select", "rows_all", {"domain": "ADSL"}), Step("apply_formula", "km_estimate"),
          Step("transform", "event_from_censor", {"domain": "ADSL"}), Step("store", "store_results")), "cannot follow"),
        ((Step("select", "rows_all", {"domain": "ADSL"}), Step("apply_formula", "nope"), Step("store", "store_results")), "unknown"),
        ((Step("select", "rows_all", {"domain": "ADSL"}), Step("store", "store_results")), "apply_formula"),
        ((Step("select", "rows_all", {"domain": "ADSL"}), Step("apply_formula", "km_estimate", {"x": "$missing"}),
          Step("store", "store_results")), "unknown parameter"),
    ],
)
def test_grammar_violations(store, steps, match):
    bad = AnalysisStandard("custom", "1.0.0", (), steps)
    with pytest.raises(DefinitionError, match=match):
        register_standard(store, bad)


def test_standard_json_round_trip():
    for std in standards.BUILTIN_STANDARDS:
        assert AnalysisStandard.from_json(std.to_json()) == std


def test_every_apply_formula_names_a_stats_operation():
    from ardm import stats

    for name in standards.KERNELS:
        assert callable(getattr(stats, name))


# -- runs on the pilot-shaped data -----------------------------------------


def test_survival_run_three_strata(store, pilot_ids):
    run = run_standard(store, "survival", {"param": "TTDE"}, [pilot_ids["ADTTE"]])
    assert run.status == "completed"
    med = query_results(store, ResultFilter(run_id=run.run_id, statistic_names=["median_survival"]))
    assert len(med) == 3


def test_step_trace_follows_grammar(store, pilot_ids):
    run = run_standard(store, "survival", {"param": "TTDE", "strata": "TRT01P"}, [pilot_ids["ADTTE"], pilot_ids["ADSL"]])
    kinds = [STEP_KINDS.index(entry.split(":")[0]) for entry in run.trace]
    assert kinds == sorted(kinds)
    assert run.trace[-1] == "store:store_results"
    labels = {r.group_keys[0] for r in query_results(store, ResultFilter(run_id=run.run_id))}
    assert {k for k, _ in labels} == {"TRT01P"}


def test_duplicate_run_skipped(store, pilot_ids):
    first = run_standard(store, "survival", {"param": "TTDE"}, [pilot_ids["ADTTE"]])
    before = _results_bytes(store)
    second = run_standard(store, "survival", {"strata": "TRTP", "param": "TTDE"}, [pilot_ids["ADTTE"]])
    assert second.status == "skipped_duplicate" and second.run_id == first.run_id
    assert _results_bytes(store) == before
    assert [r.status for r in list_runs(store)] == ["completed"]


def test_descriptive_age_by_arm(store, pilot_ids):
    run = run_standard(store, "descriptive", {"variables": ["AGE"]}, [pilot_ids["ADSL"]])
    rows = query_results(store, ResultFilter(run_id=run.run_id))
    arms = {r.group_keys for r in rows}
    assert len(arms) == 3
    for arm in arms:
        assert sorted(r.statistic_name for r in rows if r.group_keys == arm) == sorted(
            ["n", "n_missing", "mean", "sd", "median", "q1", "q3", "min", "max"])


def test_descriptive_categorical_levels(store, pilot_ids):
    run = run_standard(store, "descriptive", {"variables": "SEX,SAFFL"}, [pilot_ids["ADSL"]])
    rows = query_results(store, ResultFilter(run_id=run.run_id, variable="SEX", statistic_names=["percent"]))
    by_arm = {}
    for r in rows:
        by_arm.setdefault(r.group_keys[0], []).append(r.value)
    for values in by_arm.values():
        assert sum(values) == pytest.approx(100.0, abs=1e-9)


def test_descriptive_rejects_identifier(store, pilot_ids):
    with pytest.raises(AnalysisFailed, match="identifier"):
        run_standard(store, "descriptive", {"variables": ["SITEID"]}, [pilot_ids["ADSL"]])


def test_safety_run(store, pilot_ids):
    run = run_standard(store, "safety", {}, [pilot_ids["ADAE"], pilot_ids["ADSL"]])
    rows = query_results(store, ResultFilter(run_id=run.run_id))
    denoms = {r.group_label(): r.value for r in rows if r.statistic_name == "denom" and r.variable == "ANY EVENT"}
    assert sorted(denoms.values()) == [84, 84, 86]
    for r in rows:
        if r.statistic_name == "n_subjects":
            assert r.value <= denoms[r.group_label()]
    body = run_standard(store, "safety", {"level": "body_system"}, [pilot_ids["ADAE"], pilot_ids["ADSL"]])
    assert body.run_id != run.run_id


def test_input_row_order_does_not_change_results(store, pilot_ids):
    src = (pilot_dir() / "adtte.csv").read_text().splitlines()
    shuffled = [src[0]] + list(reversed(src[1:]))
    ds = parse_dataset(("\n".join(shuffled) + "\n").encode(), "ADTTE", source_name="adtte_rev.csv")
    other = register_dataset(store, ds).dataset_id
    assert other != pilot_ids["ADTTE"]
    a = run_standard(store, "survival", {"param": "TTDE"}, [pilot_ids["ADTTE"]])
    b = run_standard(store, "survival", {"param": "TTDE"}, [other])
    strip = lambda recs: [(r.group_keys, r.variable, r.statistic_name, r.value, r.value_text, r.time) for r in recs]
    assert strip(query_results(store, ResultFilter(run_id=a.run_id))) == strip(
        query_results(store, ResultFilter(run_id=b.run_id)))


def test_empty_selection_fails_and_stores_nothing(store, pilot_ids):
    with pytest.raises(AnalysisFailed, match="empty analysis set") as info:
        run_standard(store, "survival", {"param": "NOPE"}, [pilot_ids["ADTTE"]])
    assert info.value.run.status == "failed"
    (summary,) = list_runs(store)
    assert summary.status == "failed" and summary.n_records == 0
    assert query_results(store) == []


def test_kernel_failure_mid_run_is_atomic(store, pilot_ids, monkeypatch):
    from ardm import stats

    real = stats.km_estimate
    calls = {"n": 0}

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 2:
            raise stats.DomainError("injected failure in second stratum") if hasattr(stats, "DomainError") else \
                __import__("ardm.errors").errors.DomainError("injected failure in second stratum")
        return real(*args, **kwargs)

    monkeypatch.setattr(stats, "km_estimate", flaky)
    with pytest.raises(AnalysisFailed, match="injected"):
        run_standard(store, "survival", {"param": "TTDE"}, [pilot_ids["ADTTE"]])
    assert [s.status for s in list_runs(store)] == ["failed"]
    assert query_results(store) == []
    monkeypatch.undo()
    run = run_standard(store, "survival", {"param": "TTDE"}, [pilot_ids["ADTTE"]])
    assert run.status == "completed"


def test_missing_required_dataset(store, pilot_ids):
    with pytest.raises(UserError, match="ADTTE"):
        run_standard(store, "survival", {"param": "TTDE"}, [pilot_ids["ADSL"]])
    with pytest.raises(UserError, match="does not use"):
        run_standard(store, "descriptive", {"variables": "AGE"}, [pilot_ids["ADSL"], pilot_ids["ADAE"]])


def test_survival_strata_joined_from_adsl_requires_adsl(store, pilot_ids):
    with pytest.raises(AnalysisFailed, match="TRT01P"):
        run_standard(store, "survival", {"param": "TTDE", "strata": "TRT01P"}, [pilot_ids["ADTTE"]])


def test_tiny_survival_matches_hand_values(store):
    lines = ["USUBJID,PARAMCD,AVAL,CNSR,TRTP"]
    for i, (t, e) in enumerate(zip([2, 3, 5, 5, 8, 11], [1, 0, 1, 1, 0, 1])):
        lines.append(f"S{i},TTDE,{t},{1 - e},A")
    ds_id = register_dataset(store, parse_dataset(csv_bytes(*lines), "ADTTE")).dataset_id
    run = run_standard(store, "survival", {"param": "TTDE"}, [ds_id])
    surv = {r.time: r.value for r in query_results(store, ResultFilter(run_id=run.run_id, statistic_names=["surv"]))}
    assert surv[5.0] == pytest.approx(5 / 12) and surv[11.0] == 0.0
    (median,) = query_results(store, ResultFilter(run_id=run.run_id, statistic_names=["median_survival"]))
    assert median.value == 5.0
