"""Deterministic block linearization and log extraction.

``extract`` maps any set of received messages to a transaction log. It never
fails on incomplete input: blocks whose ancestry is not fully present are
ignored, so missing data only shortens the log.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

from .messages import GENESIS, QC, Block, MissingAncestor, Transaction


def order_key(b: Block) -> tuple:
    return (b.h, b.auth, b.btype, b.slot, b.digest)


def _edges(b: Block) -> Iterable[bytes]:
    yield from b.pointed
    if b.one_qc is not None:
        yield b.one_qc.digest


class BlockStore(dict):
    """Blocks keyed by digest. Genesis is always present."""

    def __init__(self, blocks: Iterable[Block] = ()):
        super().__init__()
        self[GENESIS.digest] = GENESIS
        for b in blocks:
            self.add(b)

    def add(self, b: Block) -> None:
        self.setdefault(b.digest, b)

    def closed(self) -> "BlockStore":
        """Largest subset whose members have every ancestor present.

        Ancestors are followed through both ``prev`` and ``one_qc``, so the
        recursive ordering of any member is computable from the subset.
        """
        ok: dict[bytes, bool] = {}
        for b in sorted(self.values(), key=lambda x: x.h):
            good = True
            for d in _edges(b):
                target = self.get(d)
                if target is None or target.h >= b.h or not ok.get(d, False):
                    good = False
                    break
            ok[b.digest] = good or b.digest == GENESIS.digest
        out = BlockStore()
        for d, good in ok.items():
            if good:
                out[d] = self[d]
        return out


def ancestry(b: Block, store: Mapping[bytes, Block]) -> set[bytes]:
    """Digests of every block ``b`` observes, including ``b`` itself."""
    seen = {b.digest}
    stack = [b]
    while stack:
        x = stack.pop()
        for d in x.pointed:
            if d not in seen:
                y = store.get(d)
                if y is None:
                    raise MissingAncestor(d.hex())
                seen.add(d)
                stack.append(y)
    return seen


def tau_dagger(blocks: Iterable[Block]) -> list[Block]:
    """Topological order of ``blocks`` under observes, smallest key first.

    Heights strictly increase along pointers, so the minimal-key greedy
    topological sort is simply the key order.
    """
    return sorted(set(blocks), key=order_key)


def tau(b: Block, store: Mapping[bytes, Block]) -> list[Block]:
    """Recursive linearization of the ancestry of ``b`` along its 1-QC chain."""
    chain = [b]
    x = b
    while not x.is_genesis:
        if x.one_qc is None:
            raise MissingAncestor("block without 1-QC")
        y = store.get(x.one_qc.digest)
        if y is None:
            raise MissingAncestor(x.one_qc.digest.hex())
        if y.h >= x.h:
            raise MissingAncestor("1-QC does not descend")
        chain.append(y)
        x = y
    chain.reverse()

    out = [chain[0]]
    emitted = {chain[0].digest}
    exact = True  # emitted equals the ancestry of the previous chain element
    for parent, child in zip(chain, chain[1:]):
        if exact:
            fresh, reached_parent = _residual(child, emitted, parent.digest, store)
            if not reached_parent:
                exact = False
                fresh = None
        else:
            fresh = None
        if fresh is None:
            rest = ancestry(child, store) - ancestry(parent, store)
            fresh = [store[d] for d in rest]
            new_emitted = emitted | rest
            exact = new_emitted == ancestry(child, store)
            emitted = new_emitted
        else:
            emitted.update(x.digest for x in fresh)
        out.extend(tau_dagger(fresh))
    return out


def _residual(b: Block, emitted: set[bytes], parent: bytes, store) -> tuple[list[Block], bool]:
    """Blocks observed by ``b`` outside ``emitted``, and whether the search met ``parent``.

    When ``emitted`` is the (downward closed) ancestry of ``parent`` and ``b``
    observes ``parent``, the result is exactly the set difference of ancestries.
    """
    reached = b.digest == parent
    if b.digest in emitted:
        return [], reached
    seen = {b.digest}
    found = [b]
    stack = [b]
    while stack:
        x = stack.pop()
        for d in x.pointed:
            if d in emitted:
                reached = reached or d == parent
                continue
            if d in seen:
                continue
            y = store.get(d)
            if y is None:
                raise MissingAncestor(d.hex())
            seen.add(d)
            found.append(y)
            stack.append(y)
    return found, reached


def flatten(seq: Iterable[Block]) -> list[Transaction]:
    seen: set[Transaction] = set()
    log = []
    for b in seq:
        for tx in b.txs:
            if tx not in seen:
                seen.add(tx)
                log.append(tx)
    return log


def _qcs_in(messages: Iterable) -> tuple[BlockStore, list[QC]]:
    store = BlockStore()
    qcs: list[QC] = []
    for m in messages:
        if isinstance(m, Block):
            store.add(m)
            qcs.extend(m.prev)
            if m.one_qc is not None:
                qcs.append(m.one_qc)
        elif isinstance(m, QC):
            qcs.append(m)
    return store, qcs


def head_qc(messages: Iterable) -> tuple[Optional[QC], BlockStore]:
    """Maximal 2-QC whose block lies in the downward closed part, and that part."""
    store, qcs = _qcs_in(messages)
    closed = store.closed()
    best: Optional[QC] = None
    for q in qcs:
        if q.z != 2 or q.digest not in closed:
            continue
        if best is None or q.level > best.level or (
            q.level == best.level and q.encoded < best.encoded
        ):
            best = q
    return best, closed


def extract(messages: Iterable) -> list[Transaction]:
    q, closed = head_qc(messages)
    b = closed[q.digest] if q is not None else GENESIS
    return flatten(tau(b, closed))


class Extractor:
    """Incremental ``extract`` for a message set that only grows.

    ``log()`` always equals ``extract`` of everything added so far. Logs are
    cached per head block, since the log of a head depends on nothing else.
    """

    def __init__(self, cache: Optional[dict] = None):
        self.store = BlockStore()
        self.closed: set[bytes] = {GENESIS.digest}
        self.waiting: dict[bytes, list[Block]] = {}
        self.pending2: dict[bytes, list[QC]] = {}
        self.head: Optional[QC] = None
        self.cache = {} if cache is None else cache

    def add(self, m) -> None:
        if isinstance(m, Block):
            for q in m.prev:
                self._qc(q)
            if m.one_qc is not None:
                self._qc(m.one_qc)
            if m.digest not in self.store:
                self.store.add(m)
                self._try_close(m)
        elif isinstance(m, QC):
            self._qc(m)

    def _qc(self, q: QC) -> None:
        if q.z != 2:
            return
        if q.digest in self.closed:
            self._offer(q)
        else:
            self.pending2.setdefault(q.digest, []).append(q)

    def _offer(self, q: QC) -> None:
        h = self.head
        if h is None or q.level > h.level or (q.level == h.level and q.encoded < h.encoded):
            self.head = q

    def _try_close(self, b: Block) -> None:
        stack = [b]
        while stack:
            x = stack.pop()
            if x.digest in self.closed:
                continue
            missing = None
            for d in _edges(x):
                t = self.store.get(d)
                if t is not None and t.h >= x.h:
                    missing = False  # malformed: never closes
                    break
                if d not in self.closed:
                    missing = d
                    break
            if missing is False:
                continue
            if missing is not None:
                self.waiting.setdefault(missing, []).append(x)
                continue
            self.closed.add(x.digest)
            for q in self.pending2.pop(x.digest, ()):
                self._offer(q)
            stack.extend(self.waiting.pop(x.digest, ()))

    def head_block(self) -> Block:
        return GENESIS if self.head is None else self.store[self.head.digest]

    def log(self) -> tuple[Transaction, ...]:
        b = self.head_block()
        out = self.cache.get(b.digest)
        if out is None:
            out = self.cache[b.digest] = tuple(flatten(tau(b, self.store)))
        return out
