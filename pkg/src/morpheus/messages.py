"""Protocol messages, canonical encoding and block validity.

All messages are immutable. Encodings use a fixed field order, 8-byte
big-endian signed integers and length-prefixed sequences, so digests and
message sizes do not depend on in-memory layout.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Union

from .crypto import CryptoProvider, Signature, ThresholdSignature, hash_block, max_faulty

GEN, LEAD, TR = 0, 1, 2
TYPE_NAMES = {GEN: "gen", LEAD: "lead", TR: "Tr"}
NO_AUTH = -1

_I = struct.Struct(">q")


def enc_int(x: int) -> bytes:
    return _I.pack(x)


def enc_bytes(b: bytes) -> bytes:
    return _I.pack(len(b)) + b


def enc_seq(items: Iterable[bytes]) -> bytes:
    items = list(items)
    return _I.pack(len(items)) + b"".join(items)


def enc_sig(sig: Optional[Signature]) -> bytes:
    if sig is None:
        return enc_int(-1)
    return enc_int(sig.signer) + sig.tag


def enc_tsig(tsig: ThresholdSignature) -> bytes:
    return enc_int(tsig.m) + tsig.tag


@dataclass(frozen=True)
class Transaction:
    issuer: int
    seq: int
    payload: bytes = b""

    @cached_property
    def encoded(self) -> bytes:
        return b"T" + enc_int(self.issuer) + enc_int(self.seq) + enc_bytes(self.payload)

    @property
    def tx_id(self) -> tuple[int, int]:
        return (self.issuer, self.seq)


def vote_body(z: int, btype: int, view: int, h: int, auth: int, slot: int, d: bytes) -> bytes:
    return b"V" + b"".join(_I.pack(x) for x in (z, btype, view, h, auth, slot)) + d


@dataclass(frozen=True)
class Vote:
    z: int
    btype: int
    view: int
    h: int
    auth: int
    slot: int
    digest: bytes = field(repr=False)
    sig: Signature = field(repr=False)

    @cached_property
    def body(self) -> bytes:
        return vote_body(self.z, self.btype, self.view, self.h, self.auth, self.slot, self.digest)

    @cached_property
    def encoded(self) -> bytes:
        return self.body + enc_sig(self.sig)

    @property
    def voter(self) -> int:
        return self.sig.signer


@dataclass(frozen=True)
class QC:
    """A z-quorum certificate for one block, carrying the block's metadata."""

    z: int
    btype: int
    view: int
    h: int
    auth: int
    slot: int
    digest: bytes = field(repr=False)
    tsig: ThresholdSignature = field(repr=False, compare=False)

    @cached_property
    def body(self) -> bytes:
        return vote_body(self.z, self.btype, self.view, self.h, self.auth, self.slot, self.digest)

    @cached_property
    def encoded(self) -> bytes:
        return b"Q" + self.body + enc_tsig(self.tsig)

    @property
    def key(self) -> tuple:
        return (self.z, self.btype, self.view, self.h, self.auth, self.slot, self.digest)

    @property
    def level(self) -> tuple[int, int, int]:
        """Sort key of the QC preorder: view, then type (lead < Tr), then height."""
        return (self.view, self.btype, self.h)

    @property
    def chain(self) -> tuple[int, int]:
        return (self.btype, self.auth)

    def __repr__(self) -> str:
        return (
            f"QC(z={self.z}, {TYPE_NAMES[self.btype]}, v={self.view}, h={self.h}, "
            f"auth={self.auth}, slot={self.slot}, {self.digest[:4].hex()})"
        )


@dataclass(frozen=True)
class EndView:
    v: int
    sig: Signature

    @staticmethod
    def body_for(v: int) -> bytes:
        return b"E" + enc_int(v)

    @cached_property
    def encoded(self) -> bytes:
        return self.body_for(self.v) + enc_sig(self.sig)


@dataclass(frozen=True)
class ViewCert:
    """Certificate for entering view ``v``, built from f+1 end-view (v-1) messages."""

    v: int
    tsig: ThresholdSignature = field(compare=False)

    @cached_property
    def encoded(self) -> bytes:
        return b"C" + enc_int(self.v) + enc_tsig(self.tsig)


@dataclass(frozen=True)
class ViewMsg:
    v: int
    qc: QC
    sig: Signature

    @staticmethod
    def body_for(v: int, qc: QC) -> bytes:
        return b"W" + enc_int(v) + qc.body

    @cached_property
    def body(self) -> bytes:
        return self.body_for(self.v, self.qc)

    @cached_property
    def encoded(self) -> bytes:
        return b"W" + enc_int(self.v) + self.qc.encoded + enc_sig(self.sig)

    @property
    def signer(self) -> int:
        return self.sig.signer


@dataclass(frozen=True)
class Block:
    btype: int
    view: int
    h: int
    auth: int
    slot: int
    prev: tuple[QC, ...] = ()
    one_qc: Optional[QC] = None
    txs: tuple[Transaction, ...] = ()
    just: tuple[ViewMsg, ...] = ()
    sig: Optional[Signature] = field(default=None, compare=False, repr=False)

    @cached_property
    def body(self) -> bytes:
        parts = [
            b"B",
            enc_int(self.btype),
            enc_int(self.view),
            enc_int(self.h),
            enc_int(self.auth),
            enc_int(self.slot),
            enc_seq(q.encoded for q in self.prev),
            enc_seq([self.one_qc.encoded] if self.one_qc is not None else []),
            enc_seq(t.encoded for t in self.txs),
            enc_seq(m.encoded for m in self.just),
        ]
        return b"".join(parts)

    @cached_property
    def digest(self) -> bytes:
        return hash_block(self)

    @cached_property
    def encoded(self) -> bytes:
        return self.body + enc_sig(self.sig)

    @cached_property
    def pointed(self) -> frozenset[bytes]:
        return frozenset(q.digest for q in self.prev)

    @property
    def is_genesis(self) -> bool:
        return self.btype == GEN

    def __hash__(self) -> int:
        return hash(self.digest)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Block) and self.digest == other.digest

    def __repr__(self) -> str:
        return (
            f"Block({TYPE_NAMES[self.btype]}, v={self.view}, h={self.h}, auth={self.auth}, "
            f"slot={self.slot}, {self.digest[:4].hex()})"
        )


Message = Union[Block, QC, Vote, EndView, ViewCert, ViewMsg, Transaction]


GENESIS = Block(GEN, -1, 0, NO_AUTH, 0)
GENESIS_QC = QC(
    1, GEN, -1, 0, NO_AUTH, 0, GENESIS.digest, ThresholdSignature(0, GENESIS.digest, bytes(32))
)


def qc_compare(q: QC, q2: QC) -> int:
    """-1, 0 or 1 as q is less than, equivalent to, or greater than q2."""
    a, b = q.level, q2.level
    return (a > b) - (a < b)


def message_size(m: Message) -> int:
    return len(m.encoded)


def message_kind(m: Message) -> str:
    if isinstance(m, Block):
        return "block-" + TYPE_NAMES[m.btype]
    if isinstance(m, QC):
        return f"qc{m.z}"
    if isinstance(m, Vote):
        return f"vote{m.z}"
    return {EndView: "end-view", ViewCert: "view-cert", ViewMsg: "view-msg", Transaction: "tx"}[type(m)]


def lead(v: int, n: int) -> int:
    if v < 0:
        raise ValueError("views start at 0")
    return v % n


class MissingAncestor(KeyError):
    pass


def observes(b: Block, b2: Block, store: Mapping[bytes, Block]) -> bool:
    """Whether ``b`` observes ``b2`` (reflexive-transitive closure of points-to)."""
    target = b2.digest
    if b.digest == target:
        return True
    if b2.h >= b.h:
        return False
    seen = {b.digest}
    stack = [b]
    while stack:
        x = stack.pop()
        for d in x.pointed:
            if d == target:
                return True
            if d in seen:
                continue
            seen.add(d)
            y = store.get(d)
            if y is None:
                raise MissingAncestor(d.hex())
            if y.h > b2.h:
                stack.append(y)
    return False


class Committee:
    """Public parameters shared by all processes: n, f, keys and validity rules."""

    def __init__(self, n: int, provider: Optional[CryptoProvider] = None, f: Optional[int] = None):
        self.n = n
        self.f = max_faulty(n) if f is None else f
        if n < 3 * self.f + 1:
            raise ValueError(f"n={n} cannot tolerate f={self.f}")
        self.quorum = n - self.f
        self.provider = provider or CryptoProvider(n)
        self._good_qcs: set[tuple] = {GENESIS_QC.key}

    def lead(self, v: int) -> int:
        return lead(v, self.n)

    # -- signature checks ------------------------------------------------

    def verify_qc(self, q: QC) -> bool:
        k = q.key
        if k in self._good_qcs:
            return q.tsig == GENESIS_QC.tsig if k == GENESIS_QC.key else True
        if q.btype == GEN or q.z not in (0, 1, 2):
            return False
        if not self.provider.verify_threshold(q.body, q.tsig, self.quorum):
            return False
        self._good_qcs.add(k)
        return True

    def verify_vote(self, v: Vote) -> bool:
        return v.z in (0, 1, 2) and v.btype in (LEAD, TR) and self.provider.verify(v.body, v.sig, v.sig.signer)

    def verify_end_view(self, m: EndView) -> bool:
        return self.provider.verify(EndView.body_for(m.v), m.sig, m.sig.signer)

    def verify_cert(self, c: ViewCert) -> bool:
        return c.v >= 1 and self.provider.verify_threshold(EndView.body_for(c.v - 1), c.tsig, self.f + 1)

    def verify_view_msg(self, m: ViewMsg) -> bool:
        return (
            m.qc.z == 1
            and self.verify_qc(m.qc)
            and self.provider.verify(m.body, m.sig, m.sig.signer)
        )

    def verify_block_sig(self, b: Block) -> bool:
        return b.sig is not None and self.provider.verify(b.body, b.sig, b.auth)

    # -- block validity ----------------------------------------------------

    def _common(self, b: Block) -> bool:
        if b.view < 0 or b.h <= 0 or b.slot < 0 or not 0 <= b.auth < self.n:
            return False
        if not b.prev or b.one_qc is None or b.one_qc.z != 1:
            return False
        if not self.verify_block_sig(b):
            return False
        if b.one_qc.h >= b.h or not self.verify_qc(b.one_qc):
            return False
        for q in b.prev:
            if q.view > b.view or not self.verify_qc(q):
                return False
        return b.h == 1 + max(q.h for q in b.prev)

    def validate_transaction_block(self, b: Block) -> bool:
        if b.btype != TR or b.just:
            return False
        if not self._common(b):
            return False
        if b.slot > 0:
            return any(q.btype == TR and q.auth == b.auth and q.slot == b.slot - 1 for q in b.prev)
        return True

    def validate_leader_block(self, b: Block) -> bool:
        if b.btype != LEAD or b.txs:
            return False
        if b.view < 0 or b.auth != self.lead(b.view):
            return False
        if not self._common(b):
            return False
        star = None
        if b.slot > 0:
            own = {q.digest: q for q in b.prev if q.btype == LEAD and q.auth == b.auth and q.slot == b.slot - 1}
            if len(own) != 1:
                return False
            (star,) = own.values()
        if star is None or star.view < b.view:
            signers = set()
            for m in b.just:
                if m.v != b.view or not self.verify_view_msg(m):
                    return False
                signers.add(m.signer)
                if qc_compare(b.one_qc, m.qc) < 0:
                    return False
            return len(signers) >= self.quorum
        return (
            b.one_qc.digest == star.digest
            and (b.one_qc.btype, b.one_qc.auth, b.one_qc.slot) == (LEAD, b.auth, b.slot - 1)
        )

    def validate_block(self, b: Block) -> bool:
        if b.btype == TR:
            return self.validate_transaction_block(b)
        if b.btype == LEAD:
            return self.validate_leader_block(b)
        return b == GENESIS


# -- JSON codec (trace files) ------------------------------------------------


def _sig_json(s: Optional[Signature]) -> Optional[list]:
    return None if s is None else [s.signer, s.payload_digest.hex(), s.tag.hex()]


def _sig_from(x: Optional[list]) -> Optional[Signature]:
    return None if x is None else Signature(x[0], bytes.fromhex(x[1]), bytes.fromhex(x[2]))


def _tsig_json(t: ThresholdSignature) -> list:
    return [t.m, t.payload_digest.hex(), t.tag.hex()]


def _tsig_from(x: list) -> ThresholdSignature:
    return ThresholdSignature(x[0], bytes.fromhex(x[1]), bytes.fromhex(x[2]))


def to_json(m: Message) -> dict:
    if isinstance(m, QC):
        return {"k": "qc", "z": m.z, "t": m.btype, "v": m.view, "h": m.h, "a": m.auth,
                "s": m.slot, "d": m.digest.hex(), "ts": _tsig_json(m.tsig)}
    if isinstance(m, Vote):
        return {"k": "vote", "z": m.z, "t": m.btype, "v": m.view, "h": m.h, "a": m.auth,
                "s": m.slot, "d": m.digest.hex(), "sig": _sig_json(m.sig)}
    if isinstance(m, Transaction):
        return {"k": "tx", "i": m.issuer, "n": m.seq, "p": m.payload.hex()}
    if isinstance(m, ViewMsg):
        return {"k": "viewmsg", "v": m.v, "q": to_json(m.qc), "sig": _sig_json(m.sig)}
    if isinstance(m, EndView):
        return {"k": "endview", "v": m.v, "sig": _sig_json(m.sig)}
    if isinstance(m, ViewCert):
        return {"k": "cert", "v": m.v, "ts": _tsig_json(m.tsig)}
    if isinstance(m, Block):
        return {
            "k": "block", "t": m.btype, "v": m.view, "h": m.h, "a": m.auth, "s": m.slot,
            "prev": [to_json(q) for q in m.prev],
            "one": to_json(m.one_qc) if m.one_qc is not None else None,
            "txs": [to_json(t) for t in m.txs],
            "just": [to_json(j) for j in m.just],
            "sig": _sig_json(m.sig),
        }
    raise TypeError(type(m))


def from_json(x: dict) -> Message:
    k = x["k"]
    if k == "qc":
        return QC(x["z"], x["t"], x["v"], x["h"], x["a"], x["s"], bytes.fromhex(x["d"]), _tsig_from(x["ts"]))
    if k == "vote":
        return Vote(x["z"], x["t"], x["v"], x["h"], x["a"], x["s"], bytes.fromhex(x["d"]), _sig_from(x["sig"]))
    if k == "tx":
        return Transaction(x["i"], x["n"], bytes.fromhex(x["p"]))
    if k == "viewmsg":
        return ViewMsg(x["v"], from_json(x["q"]), _sig_from(x["sig"]))
    if k == "endview":
        return EndView(x["v"], _sig_from(x["sig"]))
    if k == "cert":
        return ViewCert(x["v"], _tsig_from(x["ts"]))
    if k == "block":
        return Block(
            x["t"], x["v"], x["h"], x["a"], x["s"],
            tuple(from_json(q) for q in x["prev"]),
            from_json(x["one"]) if x["one"] is not None else None,
            tuple(from_json(t) for t in x["txs"]),
            tuple(from_json(j) for j in x["just"]),
            _sig_from(x["sig"]),
        )
    raise ValueError(f"unknown message kind {k!r}")
