from morpheus import ScenarioConfig, run
from morpheus.adversary import DelayPolicy
from morpheus.config import PayloadSpec
from morpheus.harness.metrics import measure_communication, measure_latency, report


def low_tput(**kw):
    cfg = dict(n=4, horizon=700, delay=DelayPolicy("max"), payloads=[PayloadSpec(1, start=0, every=100, stop=500)])
    cfg.update(kw)
    return run(ScenarioConfig(**cfg))


def test_latency_is_recorded_per_block():
    rep = measure_latency(low_tput())
    assert len(rep.blocks) == 5
    for b in rep.blocks:
        assert b.issuer == 1
        assert b.ticks == 30
        assert b.first_final <= b.issuer_final
    assert set(rep.tx_latency.values()) == {30}


def test_leader_blocks_are_separate():
    t = low_tput()
    assert all(b.issuer == 1 for b in measure_latency(t, kind="Tr").blocks)
    assert not measure_latency(t, kind="Lead").blocks


def test_communication_counts_copies():
    t = low_tput()
    rep = measure_communication(t)
    sends = [r for r in t.of_kind("send") if r.src in t.correct]
    assert rep.total_bytes == sum(r.msg_bytes * r.detail["copies"] for r in sends)
    assert sum(rep.sends_by_type.values()) == sum(r.detail["copies"] for r in sends)
    assert rep.finalized_txs == 5
    assert rep.bytes_per_tx == rep.total_bytes / 5


def test_quiet_tail_sends_nothing():
    t = low_tput(horizon=1500)
    rep = measure_communication(t, start=600)
    assert rep.total_bytes == 0 and rep.bytes_per_tx is None


def test_report_is_deterministic():
    assert report(low_tput()) == report(low_tput())
    r = report(low_tput())
    assert r["max_latency_delta"] == 3.0
    assert r["latency_histogram_delta"] == {3.0: 5}
