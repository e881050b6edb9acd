import copy

import pytest

from morpheus import ScenarioConfig, Trace, run
from morpheus.adversary import DelayPolicy
from morpheus.config import FaultSpec, PayloadSpec
from morpheus.harness.checks import (
    HorizonTooShort,
    LivenessPolicy,
    check_consistency,
    check_delivery,
    check_liveness,
    check_quiescence,
    check_tip_bound,
    check_unique_certification,
    is_prefix,
    run_checks,
)
from morpheus.harness.fixtures import corrupted_trace
from morpheus.simnet import Record


@pytest.fixture(scope="module")
def healthy():
    cfg = ScenarioConfig(
        n=4, gst=20, horizon=900, seed=1, delay=DelayPolicy("uniform"),
        payloads=[PayloadSpec(p, start=3 * p, every=40, stop=200) for p in range(4)],
    )
    return run(cfg)


def _copy(trace):
    t = Trace(copy.deepcopy(trace.config))
    t.records = list(trace.records)
    t.messages = dict(trace.messages)
    return t


def test_is_prefix():
    assert is_prefix((), (1,))
    assert is_prefix((1, 2), (1, 2))
    assert not is_prefix((2,), (1, 2))
    assert not is_prefix((1, 2, 3), (1, 2))


def test_all_correct_run_passes_everything(healthy):
    verdicts = run_checks(healthy)
    assert all(v.ok for v in verdicts), [str(v) for v in verdicts]
    assert {v.name for v in verdicts} == {
        "consistency", "liveness", "unique-certification", "quiescence", "tip-bound", "delivery",
    }


def test_corrupted_trace_reports_witness_pair():
    v = check_consistency(corrupted_trace())
    assert not v.ok
    a, b = v.witness
    assert a[0] == 1 and b[0] == "union"
    assert not check_unique_certification(corrupted_trace()).ok


def test_reflexive_sample_passes():
    t = corrupted_trace()
    t.records = [r for r in t.records if r.src == 0]
    assert check_consistency(t).ok


def test_liveness_reports_missing_transaction(healthy):
    t = _copy(healthy)
    t.records = [r for r in t.records if r.kind != "accept"]
    v = check_liveness(t)
    assert not v.ok and v.stats["missing"] == v.stats["issued"] > 0


def test_liveness_horizon_too_short():
    t = corrupted_trace()
    t.config = dict(t.config, horizon=10_000)
    t.add(9_999, "tx", 2, -1, "tx", 8, tx=[2, 0])
    with pytest.raises(HorizonTooShort):
        check_liveness(t)
    assert check_liveness(t, LivenessPolicy(grace=0)).ok is False


def test_silent_leader_transactions_finalize_after_view_change():
    cfg = ScenarioConfig(
        n=4, horizon=2000, seed=2,
        faults={0: FaultSpec("byzantine", strategy="silent-leader")},
        payloads=[PayloadSpec(p, start=0, every=10, stop=60) for p in (1, 2, 3)],
    )
    t = run(cfg)
    assert max(r.detail["view"] for r in t.of_kind("view")) >= 1
    assert check_liveness(t).ok


def test_quiescence_flags_late_sends(healthy):
    assert check_quiescence(healthy).ok
    t = _copy(healthy)
    t.records.append(Record(t.horizon, "send", 1, -1, "qc1", 100, {"copies": 3}))
    assert not check_quiescence(t).ok


def test_delivery_flags_late_messages(healthy):
    assert check_delivery(healthy).ok
    t = _copy(healthy)
    t.records.append(Record(500, "deliver", 0, 1, "vote1", 80, {"sent": 400}))
    assert not check_delivery(t).ok


def test_tip_bound_flags_events(healthy):
    assert check_tip_bound(healthy).ok
    t = _copy(healthy)
    t.records.append(Record(5, "tipbound", 2, -1, "", 0, {"tips": 9}))
    assert not check_tip_bound(t).ok


def test_checkers_are_trace_pure(healthy, tmp_path):
    path = tmp_path / "t.jsonl"
    healthy.write(path)
    again = Trace.read(path)
    first = [(v.name, v.ok, v.violations, v.stats) for v in run_checks(healthy)]
    second = [(v.name, v.ok, v.violations, v.stats) for v in run_checks(again)]
    assert first == second
