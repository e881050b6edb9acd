import dataclasses

import pytest

from morpheus import ScenarioConfig, run
from morpheus.config import PayloadSpec
from morpheus.crypto import CryptoProvider
from morpheus.harness.fixtures import DagBuilder, mid_one_qc_fixture
from morpheus.messages import (
    GENESIS,
    GENESIS_QC,
    LEAD,
    TR,
    Block,
    Committee,
    EndView,
    MissingAncestor,
    Transaction,
    ViewCert,
    from_json,
    lead,
    message_kind,
    observes,
    qc_compare,
    to_json,
)


def _qc(view, btype, h, z=1):
    return dataclasses.replace(GENESIS_QC, z=z, view=view, btype=btype, h=h)


def test_qc_preorder_is_view_then_type_then_height():
    assert qc_compare(_qc(1, LEAD, 9), _qc(2, LEAD, 1)) == -1
    assert qc_compare(_qc(2, TR, 1), _qc(2, LEAD, 5)) == 1
    assert qc_compare(_qc(2, TR, 3), _qc(2, TR, 4)) == -1
    assert qc_compare(_qc(2, TR, 3, z=1), _qc(2, TR, 3, z=2)) == 0


def test_leaders_rotate():
    assert [lead(v, 4) for v in range(6)] == [0, 1, 2, 3, 0, 1]
    with pytest.raises(ValueError):
        lead(-1, 4)


def test_genesis():
    assert GENESIS.is_genesis and GENESIS.h == 0
    assert GENESIS_QC.digest == GENESIS.digest and GENESIS_QC.z == 1
    assert Committee(4).verify_qc(GENESIS_QC)
    assert Committee(4).validate_block(GENESIS)


def test_committee_rejects_too_many_faults():
    with pytest.raises(ValueError):
        Committee(4, f=2)
    assert Committee(7).quorum == 5


def test_transaction_block_validity():
    d = DagBuilder()
    c = d.committee
    a = d.block(0, txs=[1])
    b = d.block(0, [a], txs=[2])
    assert c.validate_block(a) and c.validate_block(b)
    # unsigned, wrongly signed, or signed by someone else
    assert not c.validate_block(dataclasses.replace(a, sig=None))
    assert not c.validate_block(dataclasses.replace(a, auth=1))
    # slot 1 must point at the author's slot-0 block
    orphan = d.block(0, [GENESIS], txs=[3], slot=1)
    assert not c.validate_block(orphan)
    # the 1-QC must be strictly lower
    hi = Block(TR, 0, 1, 2, 0, (GENESIS_QC,), d.qc(a, 1), (), ())
    hi = dataclasses.replace(hi, sig=d.provider.signer(2).sign(hi.body))
    assert not c.validate_block(hi)


def test_leader_blocks_from_an_execution_validate():
    cfg = ScenarioConfig(n=4, horizon=400, payloads=[PayloadSpec(p, start=20, every=10, stop=100) for p in range(4)])
    trace = run(cfg)
    c = Committee(4, CryptoProvider(4, cfg.seed))
    leaders = [m for m in trace.messages.values() if isinstance(m, Block) and m.btype == LEAD]
    assert leaders
    assert all(c.validate_block(b) for b in leaders)
    first = min(leaders, key=lambda b: b.slot)
    assert len(first.just) >= c.quorum
    stripped = dataclasses.replace(first, just=())
    stripped = dataclasses.replace(stripped, sig=c.provider.signer(first.auth).sign(stripped.body))
    assert not c.validate_block(stripped)
    assert not c.validate_block(dataclasses.replace(first, auth=(first.auth + 1) % 4))


def test_qc_verification():
    d = DagBuilder()
    a = d.block(0, txs=[0])
    q = d.qc(a, 2)
    assert d.committee.verify_qc(q)
    assert not d.committee.verify_qc(dataclasses.replace(q, z=1))
    with pytest.raises(Exception):
        d.qc(a, 1, voters=[0, 1])


def test_json_round_trip_every_kind():
    d = DagBuilder()
    a = d.block(1, txs=[0, 1])
    q = d.qc(a, 2)
    ev = EndView(3, d.provider.signer(0).sign(EndView.body_for(3)))
    cert = ViewCert(4, d.provider.aggregate([d.provider.signer(i).sign(EndView.body_for(3)) for i in range(2)], 2))
    for m in (a, q, ev, cert, Transaction(1, 2, b"x"), GENESIS):
        back = from_json(to_json(m))
        assert back.encoded == m.encoded


def test_message_kinds():
    d = DagBuilder()
    a = d.block(1, txs=[0])
    assert message_kind(a) == "block-Tr"
    assert message_kind(d.qc(a, 2)) == "qc2"
    assert message_kind(Transaction(0, 0, b"")) == "tx"


def test_observes():
    d, head, mid = mid_one_qc_fixture()
    store = d.blocks
    assert observes(head, mid, store)
    assert observes(head, GENESIS, store)
    assert observes(head, head, store)
    assert not observes(mid, head, store)
    side = [b for b in store.values() if b.auth == 3][0]
    assert not observes(mid, side, store) and not observes(side, mid, store)
    with pytest.raises(MissingAncestor):
        observes(head, GENESIS, {head.digest: head})
