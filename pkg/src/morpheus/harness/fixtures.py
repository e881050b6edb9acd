"""Hand-built block DAGs and traces used by the ordering and checker tests.

Blocks here are signed and certified directly through a
:class:`~morpheus.crypto.CryptoProvider` that holds every key, which lets a
fixture create certificates no honest execution would produce.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..config import ScenarioConfig
from ..crypto import CryptoProvider
from ..messages import GENESIS, GENESIS_QC, LEAD, QC, TR, Block, Committee, Message, Transaction, vote_body
from ..simnet import Trace


@dataclass
class DagBuilder:
    n: int = 4
    seed: int = 0
    blocks: dict[bytes, Block] = field(default_factory=dict)
    qcs: list[QC] = field(default_factory=list)

    def __post_init__(self):
        self.provider = CryptoProvider(self.n, self.seed)
        self.committee = Committee(self.n, self.provider)
        self.blocks[GENESIS.digest] = GENESIS
        self._one: dict[bytes, QC] = {GENESIS.digest: GENESIS_QC}
        self._slots: dict[tuple[int, int], int] = {}

    def qc(self, b: Block, z: int, voters: Optional[Iterable[int]] = None) -> QC:
        if b.is_genesis and z == 1:
            return GENESIS_QC
        body = vote_body(z, b.btype, b.view, b.h, b.auth, b.slot, b.digest)
        voters = range(self.committee.quorum) if voters is None else voters
        tsig = self.provider.aggregate([self.provider.signer(i).sign(body) for i in voters], self.committee.quorum)
        q = QC(z, b.btype, b.view, b.h, b.auth, b.slot, b.digest, tsig)
        if q not in self.qcs:
            self.qcs.append(q)
        if z == 1:
            self._one[b.digest] = q
        return q

    def block(
        self,
        auth: int,
        prev: Iterable[Block] = (GENESIS,),
        one: Optional[Block] = None,
        txs: Iterable = (),
        btype: int = TR,
        view: int = 0,
        slot: Optional[int] = None,
    ) -> Block:
        """Sign a block pointing at ``prev`` (via their 1-QCs, made on demand)."""
        prev = list(prev)
        one = one if one is not None else max(prev, key=lambda b: b.h)
        prev_qcs = tuple(self._one.get(b.digest) or self.qc(b, 1) for b in prev)
        one_qc = self._one.get(one.digest) or self.qc(one, 1)
        h = 1 + max(q.h for q in prev_qcs + (one_qc,))
        if slot is None:
            slot = self._slots.get((btype, auth), 0)
        self._slots[(btype, auth)] = slot + 1
        tx = tuple(t if isinstance(t, Transaction) else Transaction(auth, t, f"tx{auth}.{t}".encode()) for t in txs)
        unsigned = Block(btype, view, h, auth, slot, prev_qcs, one_qc, tx, ())
        b = Block(btype, view, h, auth, slot, prev_qcs, one_qc, tx, (), self.provider.signer(auth).sign(unsigned.body))
        self.blocks[b.digest] = b
        return b

    def messages(self, include_genesis: bool = True) -> list[Message]:
        out: list[Message] = [b for b in self.blocks.values() if include_genesis or not b.is_genesis]
        return out + list(self.qcs)


# -- named DAGs ---------------------------------------------------------------------


def chain_fixture() -> tuple[DagBuilder, Block]:
    """Three transaction blocks by one process, each on top of the last, with a 2-QC on the head."""
    d = DagBuilder()
    a = d.block(0, txs=[0])
    b = d.block(0, [a], txs=[1])
    c = d.block(0, [b], txs=[2])
    d.qc(c, 2)
    return d, c


def diamond_fixture() -> tuple[DagBuilder, Block]:
    """Two concurrent transaction blocks joined by a leader block carrying a 2-QC."""
    d = DagBuilder()
    x = d.block(1, txs=[0])
    y = d.block(2, txs=[0])
    top = d.block(0, [x, y], one=x, btype=LEAD)
    d.qc(top, 2)
    return d, top


def mid_one_qc_fixture() -> tuple[DagBuilder, Block, Block]:
    """Five blocks where the head's 1-QC names a middle block rather than a parent."""
    d = DagBuilder()
    a = d.block(0, txs=[0])
    m = d.block(1, [a], txs=[0])
    s = d.block(2, [a], txs=[0])
    t = d.block(3, [s], txs=[0])
    head = d.block(0, [m, t], one=m, btype=LEAD)
    d.qc(head, 2)
    return d, head, m


def duplicate_tx_fixture() -> tuple[DagBuilder, Block]:
    """The same transaction carried by two blocks on one chain."""
    d = DagBuilder()
    tx = Transaction(0, 0, b"shared")
    a = d.block(0, txs=[tx])
    b = d.block(1, [a], txs=[tx, 5])
    d.qc(b, 2)
    return d, b


def incomplete_fixture() -> tuple[list[Message], Block]:
    """A 2-QC whose block is present but one of its ancestors is not."""
    d = DagBuilder()
    a = d.block(0, txs=[0])
    d.qc(a, 2)
    hidden = d.block(1, [a], txs=[0])
    top = d.block(2, [hidden], txs=[0])
    d.qc(top, 2)
    msgs = [m for m in d.messages() if m is not hidden]
    return msgs, a


FIXTURES = {
    "chain": chain_fixture,
    "diamond": diamond_fixture,
    "mid-one-qc": mid_one_qc_fixture,
    "duplicate-tx": duplicate_tx_fixture,
    "incomplete": incomplete_fixture,
}


def fixture_messages(name: str) -> list[Message]:
    built = FIXTURES[name]()
    first = built[0]
    return first.messages() if isinstance(first, DagBuilder) else list(first)


# -- random DAGs -----------------------------------------------------------------------


def random_dag(rng: random.Random, max_blocks: int = 12, n: int = 4) -> list[Message]:
    """A random message set of at most ``max_blocks`` blocks (genesis included).

    Every block's 1-QC names one of its ancestors. 2-QCs land on random blocks,
    and occasionally a non-genesis block is dropped so that some ancestries
    are incomplete.
    """
    d = DagBuilder(n=n, seed=rng.randrange(1 << 30))
    made: list[Block] = [GENESIS]
    ancestors: dict[bytes, set[bytes]] = {GENESIS.digest: {GENESIS.digest}}
    for _ in range(rng.randint(1, max_blocks - 1)):
        prev = rng.sample(made, rng.randint(1, min(3, len(made))))
        anc = set().union(*(ancestors[b.digest] for b in prev))
        one = d.blocks[rng.choice(sorted(anc))]
        btype = rng.choice((TR, TR, LEAD))
        auth = rng.randrange(n)
        txs = [rng.randrange(6) for _ in range(rng.randint(0, 2))] if btype == TR else []
        b = d.block(auth, prev, one=one, txs=txs, btype=btype, view=rng.randint(0, 2))
        ancestors[b.digest] = anc | {b.digest}
        made.append(b)
        if rng.random() < 0.4:
            d.qc(b, 2)
    msgs = d.messages()
    if len(made) > 2 and rng.random() < 0.3:
        gone = rng.choice(made[1:])
        msgs = [m for m in msgs if m is not gone]
    rng.shuffle(msgs)
    return msgs


# -- corrupted trace -------------------------------------------------------------------------


def corrupted_trace() -> Trace:
    """Two processes each holding a different block certified at the same level.

    The blocks conflict (neither observes the other), so the logs the two
    processes extract are incompatible.
    """
    d = DagBuilder()
    a = d.block(1, txs=[0], slot=0)
    b = d.block(1, txs=[1], slot=0)
    qa, qb = d.qc(a, 2), d.qc(b, 2)
    cfg = ScenarioConfig(n=4, horizon=10).to_dict()
    trace = Trace(cfg)
    for tick, pid, msgs in ((1, 0, (a, qa)), (2, 1, (b, qb))):
        for m in msgs:
            trace.add(tick, "accept", pid, -1, "", 0, m=trace.intern(m))
    return trace
