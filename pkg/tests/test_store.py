import json

import pytest

from lexverify.bundle import dump_bundle
from lexverify.store import CaseStore, NotFound, VersionConflict


def test_put_new_case_version_one(store_dir, fsc):
    store = CaseStore(store_dir)
    rec = store.put_case(fsc)
    assert rec.version == 1
    assert rec.bundle == fsc
    assert (store_dir / fsc.case_id / "bundle.v1.json").exists()
    assert (store_dir / fsc.case_id / "log.jsonl").exists()


def test_stale_expected_version_conflicts(store_dir, fsc):
    store = CaseStore(store_dir)
    store.put_case(fsc)
    store.put_case(fsc, expected_version=1)
    with pytest.raises(VersionConflict):
        store.put_case(fsc, expected_version=1)  # now at 2
    with pytest.raises(VersionConflict):
        store.put_case(fsc.with_facts(fsc.facts), expected_version=None)


def test_get_unknown_case(store_dir):
    with pytest.raises(NotFound):
        CaseStore(store_dir).get_case("missing")


def test_record_result_bumps_version_and_preserves_order(store_dir, fsc):
    store = CaseStore(store_dir)
    store.put_case(fsc)
    v2 = store.record_result(fsc.case_id, "illegality", {"status": "unsat"})
    v3 = store.record_result(fsc.case_id, "optimize", {"cost": 1})
    assert (v2, v3) == (2, 3)
    rec = store.get_case(fsc.case_id)
    assert rec.version == 3
    assert rec.results["illegality"] == {"status": "unsat"}
    assert rec.results["optimize"] == {"cost": 1}
    ops = [h.operation for h in rec.history]
    assert ops == ["put_case", "record_result", "record_result"]


def test_record_result_unknown_case(store_dir):
    with pytest.raises(NotFound):
        CaseStore(store_dir).record_result("missing", "illegality", {})


def test_latest_result_per_kind_wins(store_dir, fsc):
    store = CaseStore(store_dir)
    store.put_case(fsc)
    store.record_result(fsc.case_id, "illegality", {"status": "unsat"})
    store.record_result(fsc.case_id, "illegality", {"status": "sat"})
    assert store.get_case(fsc.case_id).results["illegality"] == {"status": "sat"}


def test_replay_reproduces_bundle_byte_identically(store_dir, fsc):
    store = CaseStore(store_dir)
    store.put_case(fsc)
    modified = fsc.with_facts({**fsc.facts, "plan_executed": True})
    store.put_case(modified, expected_version=1)
    assert dump_bundle(store.replay_bundle(fsc.case_id, 1)) == dump_bundle(fsc)
    assert dump_bundle(store.replay_bundle(fsc.case_id, 2)) == dump_bundle(modified)
    assert dump_bundle(store.get_case(fsc.case_id).bundle) == dump_bundle(modified)


def test_crash_consistency_partial_log_line(store_dir, fsc):
    store = CaseStore(store_dir)
    store.put_case(fsc)
    store.record_result(fsc.case_id, "illegality", {"status": "unsat"})
    log = store_dir / fsc.case_id / "log.jsonl"
    # simulate a crash mid-append: a truncated trailing line
    with log.open("a") as fh:
        fh.write('{"version": 3, "ts": 1.0, "operation": "record_res')
    reopened = CaseStore(store_dir).get_case(fsc.case_id)
    assert reopened.version == 2
    assert reopened.bundle == fsc


def test_crash_consistency_orphan_snapshot(store_dir, fsc):
    store = CaseStore(store_dir)
    store.put_case(fsc)
    # snapshot written but log append never happened
    orphan = store_dir / fsc.case_id / "bundle.v2.json"
    orphan.write_text(dump_bundle(fsc))
    reopened = CaseStore(store_dir)
    assert reopened.get_case(fsc.case_id).version == 1
    # the next put overwrites the orphan and acknowledges version 2
    rec = reopened.put_case(fsc, expected_version=1)
    assert rec.version == 2


def test_list_cases_with_predicate(store_dir, fsc):
    store = CaseStore(store_dir)
    store.put_case(fsc)
    other = fsc.with_facts(fsc.facts)
    object.__setattr__(other, "case_id", "zz-other")  # frozen dataclass, test-only
    store.put_case(other)
    all_ids = [r.case_id for r in store.list_cases()]
    assert all_ids == sorted(all_ids)
    filtered = store.list_cases(lambda r: r.case_id.startswith("zz"))
    assert [r.case_id for r in filtered] == ["zz-other"]
