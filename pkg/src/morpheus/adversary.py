"""Message delay policies and Byzantine replica behaviours.

Byzantine behaviours are replica subclasses. They hold only their own
:class:`~morpheus.crypto.Signer`, so every message they emit is signed by the
corrupted identity and nothing else.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .messages import LEAD, TR, Block, Message, Transaction
from .replica import ALL, Replica, Send


# -- delivery times --------------------------------------------------------------


@dataclass(frozen=True)
class DeliveryRule:
    gst: int
    Delta: int
    delta: int

    def window(self, t: int) -> tuple[int, int]:
        """Earliest and latest admissible delivery tick for a send at ``t``."""
        hi = self.gst + self.Delta if t < self.gst else t + self.delta
        return t + 1, max(t + 1, hi)


@dataclass
class DelayPolicy:
    """How the adversary picks delivery ticks inside the admissible window.

    ``uniform`` draws uniformly, ``max`` always uses the latest tick, ``min``
    the earliest, and ``targeted`` delays messages to or from ``victims`` to
    the latest tick while delivering everything else at the earliest.
    """

    name: str = "uniform"
    victims: frozenset[int] = field(default_factory=frozenset)

    NAMES = ("uniform", "max", "min", "targeted")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise ValueError(f"unknown delay policy {self.name!r}")
        self.victims = frozenset(self.victims)

    def delay(self, src: int, dst: int, t: int, rule: DeliveryRule, rng: random.Random) -> int:
        lo, hi = rule.window(t)
        if self.name == "max":
            return hi
        if self.name == "min":
            return lo
        if self.name == "targeted":
            return hi if (dst in self.victims or src in self.victims) else lo
        return rng.randint(lo, hi)


def adversary_delay(src: int, dst: int, t: int, rule: DeliveryRule, policy: DelayPolicy, rng: random.Random) -> int:
    return policy.delay(src, dst, t, rule, rng)


# -- Byzantine replicas ----------------------------------------------------------


class SilentLeader(Replica):
    """Follows the protocol but never produces leader blocks."""

    def _new_leader_block(self) -> bool:
        return False


class Equivocator(Replica):
    """Issues two different transaction blocks for every slot.

    One version goes to the lower half of the other processes, the second
    version to the upper half.
    """

    def _new_tr_block(self) -> bool:
        if not self.payload_ready():
            return False
        txs = tuple(self.queue.popleft() for _ in range(len(self.queue)))
        a = self.make_tr_block(txs)
        marker = Transaction(self.pid, -1 - a.slot, b"equivocation")
        b = self._sign_block(TR, a.slot, a.h, a.prev, a.one_qc, txs + (marker,), ())
        others = [p for p in range(self.n) if p != self.pid]
        half = len(others) // 2
        for p in others[:half]:
            self.out.append(Send(a, p))
        for p in others[half:]:
            self.out.append(Send(b, p))
        self._accept(a)
        return True


class SelectiveWithholder(Replica):
    """As leader, withholds its leader blocks from ``victims`` (f+1 processes by default)."""

    def __init__(self, *args, victims: Optional[list[int]] = None, **kw):
        super().__init__(*args, **kw)
        if victims is None:
            victims = [p for p in range(self.n) if p != self.pid][: self.f + 1]
        self.victims = set(victims)

    def _emit(self, msg: Message, dest: Optional[int] = ALL) -> None:
        if isinstance(msg, Block) and msg.btype == LEAD and dest is ALL:
            self._accept(msg)
            for p in range(self.n):
                if p != self.pid and p not in self.victims:
                    self.out.append(Send(msg, p))
            return
        super()._emit(msg, dest)


class VoteSplitter(Replica):
    """1-votes every block it receives and 2-votes every 1-QC, ignoring all guards."""

    def __init__(self, *args, **kw):
        self._split: set[tuple[int, bytes]] = set()
        self._seen_blocks: list[Block] = []
        self._seen_one_qcs: list = []
        super().__init__(*args, **kw)

    def _add_qc(self, q) -> bool:
        added = super()._add_qc(q)
        if added and q.z == 1 and q.btype in (LEAD, TR):
            self._seen_one_qcs.append(q)
        return added

    def _accept_block(self, b: Block) -> bool:
        fresh = b.digest not in self.blocks
        ok = super()._accept_block(b)
        if ok and fresh:
            self._seen_blocks.append(b)
        return ok

    def transitions(self) -> tuple:
        return super().transitions() + (self._split_votes,)

    def _split_votes(self) -> bool:
        while self._seen_blocks:
            b = self._seen_blocks.pop(0)
            if (1, b.digest) not in self._split:
                self._split.add((1, b.digest))
                self.out.append(Send(self._vote_for_block(1, b), ALL))
                return True
        while self._seen_one_qcs:
            q = self._seen_one_qcs.pop(0)
            if (2, q.digest) not in self._split:
                self._split.add((2, q.digest))
                self.out.append(Send(self._vote_for_qc(2, q), ALL))
                return True
        return False


class StaleViewLagger(Replica):
    """Never leaves its starting view and keeps voting there."""

    def _update_view(self) -> bool:
        return False


STRATEGIES = {
    "silent-leader": SilentLeader,
    "equivocator": Equivocator,
    "selective-withholder": SelectiveWithholder,
    "vote-splitter": VoteSplitter,
    "stale-view-lagger": StaleViewLagger,
}
