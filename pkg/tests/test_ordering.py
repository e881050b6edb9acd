import random

import pytest

import oracles
from morpheus.harness.fixtures import (
    DagBuilder,
    chain_fixture,
    diamond_fixture,
    duplicate_tx_fixture,
    fixture_messages,
    incomplete_fixture,
    mid_one_qc_fixture,
    random_dag,
)
from morpheus.messages import GENESIS, GENESIS_QC, MissingAncestor, Transaction
from morpheus.ordering import BlockStore, Extractor, extract, flatten, head_qc, tau, tau_dagger


def _ids(log):
    return [t.tx_id for t in log]


def test_tau_of_genesis():
    assert tau(GENESIS, BlockStore()) == [GENESIS]


def test_tau_single_block_on_genesis():
    d = DagBuilder()
    b = d.block(0, txs=[0])
    assert tau(b, d.blocks) == [GENESIS, b]


def test_tau_with_mid_chain_one_qc():
    d, head, mid = mid_one_qc_fixture()
    seq = tau(head, d.blocks)
    # frozen from oracles.tau on this fixture
    assert [(b.auth, b.btype, b.h) for b in seq] == [(-1, 0, 0), (0, 2, 1), (1, 2, 2), (2, 2, 2), (3, 2, 3), (0, 1, 4)]
    assert seq[:3] == tau(mid, d.blocks)


def test_tau_diamond():
    d, top = diamond_fixture()
    assert [(b.auth, b.btype, b.h) for b in tau(top, d.blocks)] == [(-1, 0, 0), (1, 2, 1), (2, 2, 1), (0, 1, 2)]


def test_tau_missing_ancestor():
    d = DagBuilder()
    a = d.block(0, txs=[0])
    b = d.block(0, [a], txs=[1])
    with pytest.raises(MissingAncestor):
        tau(b, BlockStore([b]))


def test_flatten():
    assert flatten([GENESIS]) == []
    d = DagBuilder()
    t1 = d.block(0, txs=[0, 1])
    t2 = d.block(1, [t1], txs=[2])
    leader = d.block(0, [t2], btype=1)
    assert _ids(flatten([GENESIS, t1, leader, t2])) == [(0, 0), (0, 1), (1, 2)]


def test_flatten_drops_duplicates():
    d, head = duplicate_tx_fixture()
    assert _ids(flatten(tau(head, d.blocks))) == [(0, 0), (1, 5)]


def test_tau_dagger_is_deterministic():
    d, head, _ = mid_one_qc_fixture()
    blocks = list(d.blocks.values())
    first = tau_dagger(blocks)
    for _ in range(5):
        random.shuffle(blocks)
        assert tau_dagger(blocks) == first


def test_extract_without_two_qc_is_empty():
    assert extract([GENESIS, GENESIS_QC]) == []
    d = DagBuilder()
    d.block(0, txs=[0])
    assert extract(d.messages()) == []


# expected logs frozen from oracles.extract on each fixture
@pytest.mark.parametrize(
    "name,expected",
    [
        ("chain", [(0, 0), (0, 1), (0, 2)]),
        ("diamond", [(1, 0), (2, 0)]),
        ("mid-one-qc", [(0, 0), (1, 0), (2, 0), (3, 0)]),
        ("duplicate-tx", [(0, 0), (1, 5)]),
        ("incomplete", [(0, 0)]),
    ],
)
def test_extract_fixtures(name, expected):
    assert _ids(extract(fixture_messages(name))) == expected


def test_incomplete_ancestry_falls_back_to_next_two_qc():
    msgs, a = incomplete_fixture()
    q, closed = head_qc(msgs)
    assert q.digest == a.digest
    assert len(closed) == 2


def test_chain_head_is_chosen():
    d, head = chain_fixture()
    q, _ = head_qc(d.messages())
    assert q.digest == head.digest


def test_extract_matches_oracle_on_random_dags():
    rng = random.Random(11)
    for _ in range(200):
        msgs = random_dag(rng)
        assert extract(msgs) == oracles.extract(msgs)


def test_tau_is_a_topological_order_of_the_ancestry():
    rng = random.Random(5)
    for _ in range(100):
        d = DagBuilder(seed=rng.randrange(100))
        made = [GENESIS]
        for _ in range(rng.randint(1, 6)):
            prev = rng.sample(made, rng.randint(1, min(2, len(made))))
            made.append(d.block(rng.randrange(4), prev, txs=[rng.randrange(3)]))
        head = made[-1]
        seq = tau(head, d.blocks)
        assert len(seq) == len(set(seq))
        assert {b.digest for b in seq} == oracles.observed(head, d.blocks)
        orders = [[b.digest for b in o] for o in oracles.all_topological_orders(seq)]
        assert [b.digest for b in seq] in orders


def test_extractor_matches_extract_on_every_prefix():
    rng = random.Random(3)
    for _ in range(30):
        msgs = random_dag(rng)
        e = Extractor()
        for i, m in enumerate(msgs):
            e.add(m)
            assert list(e.log()) == extract(msgs[: i + 1])


def test_extract_ignores_non_block_messages():
    d, _ = chain_fixture()
    msgs = d.messages() + [Transaction(9, 9, b"loose")]
    assert _ids(extract(msgs)) == [(0, 0), (0, 1), (0, 2)]
