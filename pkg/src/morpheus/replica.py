"""Per-process protocol state machine.

A :class:`Replica` consumes messages, payload arrivals and timer ticks (all in
local time) and returns the messages it wants to send. After every input it
runs the transition list in priority order, executing the first one that
applies, until none does.

The QC observation relation is maintained incrementally. Only the top QC of
each (type, author) chain can be a tip, and a chain top is dominated exactly
when a block in M that already has a QC points to it. Finality is a per-chain
frontier ``(slot, z)``: every QC of the chain at or below it is final.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .crypto import InsufficientShares, Signer
from .messages import (
    GENESIS,
    GENESIS_QC,
    LEAD,
    QC,
    TR,
    Block,
    Committee,
    EndView,
    Message,
    Transaction,
    ViewCert,
    ViewMsg,
    Vote,
    vote_body,
)

ALL = None  # destination meaning "every other process"

Chain = tuple[int, int]


@dataclass(frozen=True)
class Send:
    msg: Message
    dest: Optional[int] = ALL


@dataclass
class Batching:
    """When a replica with pending transactions may issue a transaction block."""

    min_txs: int = 1
    max_txs: int = 0  # 0 means no cap
    min_gap: int = 0  # ticks between own transaction blocks


@dataclass
class Event:
    """Something worth recording that is not a send."""

    kind: str
    detail: dict = field(default_factory=dict)


def best_qc(qcs: Iterable[QC]) -> Optional[QC]:
    """Greatest QC under the level preorder; ties go to the smallest encoding."""
    best = None
    for q in qcs:
        if best is None or q.level > best.level or (q.level == best.level and q.encoded < best.encoded):
            best = q
    return best


class Replica:
    def __init__(
        self,
        pid: int,
        committee: Committee,
        signer: Signer,
        delta_bound: int,
        batching: Optional[Batching] = None,
    ):
        if signer.pid != pid:
            raise ValueError("signer does not belong to this process")
        self.pid = pid
        self.c = committee
        self.n = committee.n
        self.f = committee.f
        self.signer = signer
        self.Delta = delta_bound
        self.batching = batching or Batching()

        self.view = 0
        self.slot_lead = 0
        self.slot_tr = 0
        self.view_entry_time = 0
        self.voted: set[tuple[int, int, int, int]] = set()
        self.phase: set[int] = set()

        # M
        self.blocks: dict[bytes, Block] = {GENESIS.digest: GENESIS}
        self.votes: dict[tuple[int, bytes], dict[int, Vote]] = defaultdict(dict)
        self.end_views: dict[int, dict[int, EndView]] = defaultdict(dict)
        self.certs: dict[int, ViewCert] = {}
        self.view_msgs: dict[int, dict[int, ViewMsg]] = defaultdict(dict)
        self.lead_blocks: dict[int, list[Block]] = defaultdict(list)
        self.max_height = 0
        self.pointers: dict[bytes, set[bytes]] = defaultdict(set)

        # Q
        self.Q: dict[tuple, QC] = {}
        self.qc_for: dict[tuple[int, bytes], QC] = {}
        self.qc_entered: dict[tuple, int] = {}
        self.chain_qcs: dict[Chain, dict[int, dict[int, QC]]] = defaultdict(lambda: defaultdict(dict))
        self.top: dict[Chain, QC] = {}
        self.covered: set[bytes] = set()
        self.max_one_qc: QC = GENESIS_QC
        self.max_qc_view = -1
        self.lead_one_qcs: dict[int, list[QC]] = defaultdict(list)

        # finality
        self.frontier: dict[Chain, tuple[int, int]] = {}
        self.unfinal: dict[tuple, QC] = {}
        self.final_blocks: set[bytes] = set()
        self.unfinal_by_chain: dict[Chain, dict[tuple, QC]] = defaultdict(dict)
        self.unspread: dict[Chain, dict[bytes, Block]] = defaultdict(dict)
        self.dirty = False

        # bookkeeping for transitions
        self.to_zero_vote: deque[Block] = deque()
        self.zero_qc_pending: deque[QC] = deque()
        self.zero_qc_sent: set[bytes] = set()
        self.certs_formed: set[int] = set()
        self.lead_views: set[int] = set()
        self.own_lead: dict[int, Block] = {}
        self.complained: set[tuple] = set()
        self.aged: set[tuple] = set()
        self.end_view_sent: set[int] = set()
        self.queue: deque[Transaction] = deque()
        self.last_tr_time: Optional[int] = None

        self.now = 0
        self.out: list[Send] = []
        self.events: list[Event] = []
        self.accepted: list[Message] = []
        self.max_tips_seen = 0

        self._add_qc(GENESIS_QC)
        self._raise(GENESIS_QC.chain, (0, 2))

    # ------------------------------------------------------------------ inputs

    def start(self, now: int) -> list[Send]:
        """Enter view 0 and tell its leader about it."""
        self.now = now
        self.view_entry_time = now
        self._emit(self._view_msg(0), self.c.lead(0))
        return self._run()

    def on_receive(self, msg: Message, now: int) -> list[Send]:
        self.now = now
        if not self._accept(msg):
            self.events.append(Event("reject", {"message": type(msg).__name__}))
        return self._run()

    def on_payload(self, txs: Iterable[Transaction], now: int) -> list[Send]:
        self.now = now
        self.queue.extend(txs)
        return self._run()

    def on_timer(self, now: int) -> list[Send]:
        self.now = now
        return self._run()

    def step(self, now: int) -> list[Send]:
        self.now = now
        return self._run()

    # ------------------------------------------------------------ M and Q

    def _accept(self, msg: Message) -> bool:
        if isinstance(msg, Block):
            return self._accept_block(msg)
        if isinstance(msg, QC):
            if not self.c.verify_qc(msg):
                return False
            if self._add_qc(msg):
                self.accepted.append(msg)
            return True
        if isinstance(msg, Vote):
            if not self.c.verify_vote(msg):
                return False
            self._add_vote(msg)
            return True
        if isinstance(msg, EndView):
            if not self.c.verify_end_view(msg):
                return False
            self.end_views[msg.v][msg.sig.signer] = msg
            return True
        if isinstance(msg, ViewCert):
            if not self.c.verify_cert(msg):
                return False
            self.certs.setdefault(msg.v, msg)
            return True
        if isinstance(msg, ViewMsg):
            if not self.c.verify_view_msg(msg):
                return False
            self.view_msgs[msg.v].setdefault(msg.signer, msg)
            self._add_qc(msg.qc)
            return True
        return False

    def _accept_block(self, b: Block) -> bool:
        if b.digest in self.blocks:
            return True
        if not self.c.validate_block(b):
            return False
        for q in b.prev:
            self._add_qc(q)
        self._add_qc(b.one_qc)
        for m in b.just:
            self._add_qc(m.qc)
        self.blocks[b.digest] = b
        self.accepted.append(b)
        self.max_height = max(self.max_height, b.h)
        for d in b.pointed:
            self.pointers[d].add(b.digest)
        if b.btype == LEAD:
            self.lead_blocks[b.view].append(b)
        self.unspread[(b.btype, b.auth)][b.digest] = b
        self.dirty = True
        self.to_zero_vote.append(b)
        if any((z, b.digest) in self.qc_for for z in (0, 1, 2)):
            self.covered.update(b.pointed)
        self._try_spread(b)
        return True

    def _add_vote(self, v: Vote) -> None:
        k = (v.z, v.digest)
        box = self.votes[k]
        if v.voter in box:
            return
        box[v.voter] = v
        if len(box) >= self.c.quorum and k not in self.qc_for:
            try:
                tsig = self.c.provider.aggregate((x.sig for x in box.values()), self.c.quorum)
            except InsufficientShares:
                return
            q = QC(v.z, v.btype, v.view, v.h, v.auth, v.slot, v.digest, tsig)
            if self._add_qc(q):
                self.accepted.append(q)
                if q.z == 0 and q.auth == self.pid and q.digest not in self.zero_qc_sent:
                    self.zero_qc_pending.append(q)

    def _add_qc(self, q: QC) -> bool:
        k = q.key
        if k in self.Q or (q.z, q.digest) in self.qc_for:
            return False
        self.Q[k] = q
        self.qc_for[(q.z, q.digest)] = q
        self.qc_entered[k] = self.now
        c = q.chain
        self.chain_qcs[c][q.slot][q.z] = q
        t = self.top.get(c)
        if t is None or (q.slot, q.z) > (t.slot, t.z):
            self.top[c] = q
        if q.z == 1 and best_qc((self.max_one_qc, q)) is q:
            self.max_one_qc = q
        if q.view > self.max_qc_view:
            self.max_qc_view = q.view
        if q.z == 1 and q.btype == LEAD:
            self.lead_one_qcs[q.view].append(q)

        self.dirty = True
        b = self.blocks.get(q.digest)
        if b is not None:
            self.covered.update(b.pointed)
        if self._is_covered(q):
            self._finalize(q)
        else:
            self.unfinal[k] = q
            self.unfinal_by_chain[c][k] = q
        if q.z == 2:
            self._raise(c, (q.slot, 2))
        elif b is not None:
            self._try_spread(b)
        return True

    # ------------------------------------------------------------ finality

    def _is_covered(self, q: QC) -> bool:
        fr = self.frontier.get(q.chain)
        return fr is not None and (q.slot, q.z) <= fr

    def _finalize(self, q: QC) -> None:
        self.unfinal.pop(q.key, None)
        self.unfinal_by_chain[q.chain].pop(q.key, None)
        self.dirty = True
        if q.digest not in self.final_blocks:
            self.final_blocks.add(q.digest)
            self.events.append(Event("final", {"block": q.digest, "type": q.btype, "auth": q.auth, "slot": q.slot}))

    def _raise(self, chain: Chain, to: tuple[int, int]) -> None:
        work = [(chain, to)]
        while work:
            c, pos = work.pop()
            old = self.frontier.get(c)
            if old is not None and pos <= old:
                continue
            self.frontier[c] = pos
            for q in [q for q in self.unfinal_by_chain[c].values() if (q.slot, q.z) <= pos]:
                self._finalize(q)
            for b in [b for b in self.unspread[c].values() if b.slot <= pos[0]]:
                work.extend(self._spread_targets(b))

    def _spread_targets(self, b: Block) -> list[tuple[Chain, tuple[int, int]]]:
        """Once some covered QC certifies ``b``, everything it points to is final."""
        if b.digest not in self.unspread[(b.btype, b.auth)]:
            return []
        fr = self.frontier.get((b.btype, b.auth))
        if fr is None:
            return []
        zs = [z for z in (0, 1, 2) if (z, b.digest) in self.qc_for and (b.slot, z) <= fr]
        if not zs:
            return []
        del self.unspread[(b.btype, b.auth)][b.digest]
        return [(q.chain, (q.slot, 2)) for q in b.prev]

    def _try_spread(self, b: Block) -> None:
        for c, pos in self._spread_targets(b):
            self._raise(c, pos)

    def is_final(self, q: QC) -> bool:
        return q.key in self.Q and self._is_covered(q)

    def block_final(self, b: Block) -> bool:
        return b.digest in self.final_blocks

    # ------------------------------------------------------------ tips

    def tips(self) -> list[QC]:
        return [q for q in self.top.values() if q.digest not in self.covered]

    def single_tip_Q(self) -> Optional[QC]:
        t = self.tips()
        return t[0] if len(t) == 1 else None

    def single_tip_M(self) -> Optional[Block]:
        q = self.single_tip_Q()
        if q is None:
            return None
        ptrs = self.pointers.get(q.digest)
        if not ptrs or len(ptrs) != 1:
            return None
        (d,) = ptrs
        return self.blocks[d]

    def q_observes(self, q: QC, q2: QC) -> bool:
        """Whether ``q`` observes ``q2`` in Q (reference search, no shortcuts)."""
        if q.key not in self.Q or q2.key not in self.Q:
            return False
        seen = {q.key}
        stack = [q]
        while stack:
            x = stack.pop()
            if x.key == q2.key:
                return True
            nxt = [
                y
                for s, by_z in self.chain_qcs[x.chain].items()
                for z, y in by_z.items()
                if (s, z) <= (x.slot, x.z)
            ]
            b = self.blocks.get(x.digest)
            if b is not None:
                for p in b.prev:
                    nxt.extend(self.qc_for[(z, p.digest)] for z in (0, 1, 2) if (z, p.digest) in self.qc_for)
            for y in nxt:
                if y.key not in seen:
                    seen.add(y.key)
                    stack.append(y)
        return False

    # ------------------------------------------------------------ helpers

    def _emit(self, msg: Message, dest: Optional[int] = ALL) -> None:
        """Send a message. Copies for this process are received at once."""
        if dest == self.pid:
            self._accept(msg)
            return
        self.out.append(Send(msg, dest))
        if dest is ALL:
            self._accept(msg)

    def _vote(self, z: int, btype: int, view: int, h: int, auth: int, slot: int, d: bytes) -> Vote:
        sig = self.signer.sign(vote_body(z, btype, view, h, auth, slot, d))
        return Vote(z, btype, view, h, auth, slot, d, sig)

    def _vote_for_block(self, z: int, b: Block) -> Vote:
        return self._vote(z, b.btype, b.view, b.h, b.auth, b.slot, b.digest)

    def _vote_for_qc(self, z: int, q: QC) -> Vote:
        return self._vote(z, q.btype, q.view, q.h, q.auth, q.slot, q.digest)

    def _view_msg(self, v: int) -> ViewMsg:
        q = self.max_one_qc
        return ViewMsg(v, q, self.signer.sign(ViewMsg.body_for(v, q)))

    def _own_qc(self, btype: int, slot: int, z_min: int = 0) -> Optional[QC]:
        by_z = self.chain_qcs.get((btype, self.pid), {}).get(slot)
        if not by_z:
            return None
        z = max(by_z)
        return by_z[z] if z >= z_min else None

    def transitions(self) -> tuple:
        """Transition list in priority order."""
        return (
            self._form_certificate,
            self._update_view,
            self._zero_vote,
            self._zero_qc,
            self._new_tr_block,
            self._new_leader_block,
            self._tr_one_vote,
            self._tr_two_vote,
            self._lead_one_vote,
            self._lead_two_vote,
            self._complain,
            self._end_view,
        )

    def _run(self) -> list[Send]:
        transitions = self.transitions()
        while True:
            for t in transitions:
                if t():
                    break
            else:
                break
        ntips = len(self.tips())
        if ntips > self.max_tips_seen:
            self.max_tips_seen = ntips
            if ntips > 2 * self.n:
                self.events.append(Event("tipbound", {"tips": ntips}))
        out, self.out = self.out, []
        return out

    # ------------------------------------------------------------ view changes

    def _form_certificate(self) -> bool:
        ready = [v for v, box in self.end_views.items() if v >= self.view and len(box) >= self.f + 1]
        if not ready:
            return False
        v = max(ready)
        if v + 1 in self.certs_formed or v + 1 in self.certs:
            return False
        self.certs_formed.add(v + 1)
        tsig = self.c.provider.aggregate((m.sig for m in self.end_views[v].values()), self.f + 1)
        self._emit(ViewCert(v + 1, tsig))
        return True

    def _update_view(self) -> bool:
        cert_v = max((v for v in self.certs if v > self.view), default=None)
        qc_v = self.max_qc_view if self.max_qc_view > self.view else None
        if cert_v is None and qc_v is None:
            return False
        v = max(x for x in (cert_v, qc_v) if x is not None)
        if v == cert_v:
            witness: Message = self.certs[v]
        else:
            witness = best_qc(q for q in self.Q.values() if q.view == v)
        self.view = v
        self.view_entry_time = self.now
        self.complained.clear()
        self.aged.clear()
        self.events.append(Event("view", {"view": v}))
        self.out.append(Send(witness, ALL))
        leader = self.c.lead(v)
        for q in self.tips():
            if q.auth == self.pid:
                self._emit(q, leader)
        self._emit(self._view_msg(v), leader)
        return True

    # ------------------------------------------------------------ 0-votes

    def _zero_vote(self) -> bool:
        while self.to_zero_vote:
            b = self.to_zero_vote.popleft()
            k = (0, b.btype, b.slot, b.auth)
            if k in self.voted:
                continue
            self.voted.add(k)
            self._emit(self._vote_for_block(0, b), b.auth)
            return True
        return False

    def _zero_qc(self) -> bool:
        while self.zero_qc_pending:
            q = self.zero_qc_pending.popleft()
            if q.digest in self.zero_qc_sent:
                continue
            self.zero_qc_sent.add(q.digest)
            self.out.append(Send(q, ALL))
            return True
        return False

    # ------------------------------------------------------------ block production

    def payload_ready(self) -> bool:
        p = self.batching
        if len(self.queue) < max(1, p.min_txs):
            return False
        if p.min_gap and self.last_tr_time is not None and self.now - self.last_tr_time < p.min_gap:
            return False
        return self.slot_tr == 0 or self._own_qc(TR, self.slot_tr - 1) is not None

    def _new_tr_block(self) -> bool:
        if not self.payload_ready():
            return False
        take = len(self.queue) if not self.batching.max_txs else min(self.batching.max_txs, len(self.queue))
        txs = tuple(self.queue.popleft() for _ in range(take))
        self._emit(self.make_tr_block(txs))
        return True

    def make_tr_block(self, txs: tuple[Transaction, ...]) -> Block:
        s = self.slot_tr
        q1 = self._own_qc(TR, s - 1) if s > 0 else GENESIS_QC
        prev = {q1.key: q1}
        q2 = self.single_tip_Q()
        if q2 is not None:
            prev.setdefault(q2.key, q2)
        one = self.max_one_qc
        h = 1 + max(q.h for q in prev.values())
        if one.h >= h:
            # keep the 1-QC below the new block by pointing at it as well
            prev.setdefault(one.key, one)
            h = one.h + 1
        b = self._sign_block(TR, s, h, tuple(prev.values()), one, txs, ())
        self.slot_tr += 1
        self.last_tr_time = self.now
        self.events.append(Event("issue", {"block": b.digest, "type": TR, "slot": s, "txs": [list(t.tx_id) for t in txs]}))
        return b

    def _sign_block(self, btype, slot, h, prev, one, txs, just) -> Block:
        unsigned = Block(btype, self.view, h, self.pid, slot, prev, one, txs, just)
        return Block(btype, self.view, h, self.pid, slot, prev, one, txs, just, self.signer.sign(unsigned.body))

    def leader_ready(self) -> bool:
        v = self.view
        if v not in self.lead_views:
            if len(self.view_msgs.get(v, {})) < self.c.quorum:
                return False
            return self.slot_lead == 0 or self._own_qc(LEAD, self.slot_lead - 1) is not None
        prev = self.own_lead.get(self.slot_lead - 1)
        return prev is not None and (1, prev.digest) in self.qc_for

    def _new_leader_block(self) -> bool:
        if self.pid != self.c.lead(self.view) or self.view in self.phase:
            return False
        if not self.leader_ready():
            return False
        first_of_view = self.view not in self.lead_views
        if self.single_tip_Q() is not None and not first_of_view:
            return False
        self._emit(self.make_leader_block())
        return True

    def make_leader_block(self) -> Block:
        v, s = self.view, self.slot_lead
        prev = {q.key: q for q in self.tips()}
        if s > 0:
            q = self._own_qc(LEAD, s - 1)
            if not any(p.digest == q.digest for p in prev.values()):
                prev[q.key] = q
        h = 1 + max(q.h for q in prev.values())
        if v not in self.lead_views:
            msgs = sorted(self.view_msgs[v].values(), key=lambda m: m.signer)[: self.c.quorum]
            just = tuple(msgs)
            one = self.max_one_qc
            if one.h >= h:
                prev.setdefault(one.key, one)
                h = one.h + 1
        else:
            just = ()
            one = self.qc_for[(1, self.own_lead[s - 1].digest)]
        b = self._sign_block(LEAD, s, h, tuple(prev.values()), one, (), just)
        self.lead_views.add(v)
        self.own_lead[s] = b
        self.slot_lead += 1
        self.events.append(Event("issue", {"block": b.digest, "type": LEAD, "slot": s, "txs": []}))
        return b

    # ------------------------------------------------------------ voting

    def tr_votes_allowed(self) -> bool:
        """Every leader block of the current view that is in M is final."""
        return all(b.digest in self.final_blocks for b in self.lead_blocks.get(self.view, ()))

    def _tr_one_vote(self) -> bool:
        if not self.tr_votes_allowed():
            return False
        b = self.single_tip_M()
        if b is None or b.btype != TR or b.view != self.view:
            return False
        if b.one_qc.level < self.max_one_qc.level:
            return False
        k = (1, TR, b.slot, b.auth)
        if k in self.voted:
            return False
        self.voted.add(k)
        self.phase.add(self.view)
        self._emit(self._vote_for_block(1, b))
        return True

    def _tr_two_vote(self) -> bool:
        if not self.tr_votes_allowed():
            return False
        q = self.single_tip_Q()
        if q is None or q.z != 1 or q.btype != TR:
            return False
        k = (2, TR, q.slot, q.auth)
        if k in self.voted or self.max_height > q.h:
            return False
        self.voted.add(k)
        self.phase.add(self.view)
        self._emit(self._vote_for_qc(2, q))
        return True

    def _lead_one_vote(self) -> bool:
        if self.view in self.phase:
            return False
        for b in self.lead_blocks.get(self.view, ()):
            k = (1, LEAD, b.slot, b.auth)
            if k not in self.voted:
                self.voted.add(k)
                self._emit(self._vote_for_block(1, b))
                return True
        return False

    def _lead_two_vote(self) -> bool:
        if self.view in self.phase:
            return False
        for q in self.lead_one_qcs.get(self.view, ()):
            k = (2, LEAD, q.slot, q.auth)
            if k not in self.voted:
                self.voted.add(k)
                self._emit(self._vote_for_qc(2, q))
                return True
        return False

    # ------------------------------------------------------------ complaints

    def _trigger(self, k: tuple) -> int:
        return max(self.view_entry_time, self.qc_entered[k])

    def _complain(self) -> bool:
        if not self.unfinal:
            return False
        limit = self.now - 6 * self.Delta
        fresh = [k for k in self.unfinal if k not in self.aged and self._trigger(k) <= limit]
        if not fresh and not self.dirty:
            return False
        self.aged.update(fresh)
        self.dirty = False
        aged = [self.unfinal[k] for k in self.aged if k in self.unfinal]
        leader = self.c.lead(self.view)
        for q in self._maximal(aged):
            if q.key not in self.complained:
                self.complained.add(q.key)
                self._emit(q, leader)
                self.dirty = True
                return True
        return False

    def _maximal(self, qcs: list[QC]) -> list[QC]:
        """Elements of ``qcs`` not strictly observed by another element."""
        by_chain: dict[Chain, QC] = {}
        for q in qcs:
            t = by_chain.get(q.chain)
            if t is None or (q.slot, q.z) > (t.slot, t.z):
                by_chain[q.chain] = q
        cands = sorted(by_chain.values(), key=lambda q: q.encoded)
        return [q for q in cands if not any(o is not q and self._observes_unfinal(o, q) for o in cands)]

    def _observes_unfinal(self, q: QC, target: QC) -> bool:
        """Observation search restricted to unfinalized QCs.

        A final QC only observes final QCs, so the search can stop there when
        the target is unfinalized.
        """
        seen = {q.key}
        stack = [q]
        while stack:
            x = stack.pop()
            if x.key == target.key:
                return True
            nxt = [y for y in self.unfinal_by_chain[x.chain].values() if (y.slot, y.z) <= (x.slot, x.z)]
            b = self.blocks.get(x.digest)
            if b is not None:
                for p in b.prev:
                    nxt.extend(y for y in self.unfinal_by_chain[p.chain].values() if y.digest == p.digest)
            for y in nxt:
                if y.key not in seen:
                    seen.add(y.key)
                    stack.append(y)
        return False

    def _end_view(self) -> bool:
        if self.view in self.end_view_sent:
            return False
        limit = self.now - 12 * self.Delta
        if not any(self._trigger(k) <= limit for k in self.unfinal):
            return False
        self.end_view_sent.add(self.view)
        self._emit(EndView(self.view, self.signer.sign(EndView.body_for(self.view))))
        return True

    # ------------------------------------------------------------ timers

    def next_wakeup(self) -> Optional[int]:
        """Earliest local time at which a timer-driven transition may fire."""
        cands = []
        if self.unfinal:
            first = max(self.view_entry_time, min(self.qc_entered[k] for k in self.unfinal))
            if self.view not in self.end_view_sent:
                cands.append(first + 12 * self.Delta)
            pending = [self._trigger(k) for k in self.unfinal if k not in self.aged]
            if pending:
                cands.append(min(pending) + 6 * self.Delta)
        if self.batching.min_gap and self.queue and self.last_tr_time is not None:
            cands.append(self.last_tr_time + self.batching.min_gap)
        cands = [t for t in cands if t > self.now]
        return min(cands) if cands else None
