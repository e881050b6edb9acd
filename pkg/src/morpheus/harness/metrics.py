"""Latency and communication metrics derived from a trace."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from ..messages import TR
from ..simnet import Trace


@dataclass
class BlockLatency:
    block: str
    issuer: int
    slot: int
    issued: int
    issuer_final: Optional[int]
    first_final: Optional[int]

    @property
    def ticks(self) -> Optional[int]:
        return None if self.issuer_final is None else self.issuer_final - self.issued


@dataclass
class MetricsReport:
    blocks: list[BlockLatency] = field(default_factory=list)
    tx_latency: dict[tuple, Optional[int]] = field(default_factory=dict)
    sends_by_type: dict[str, int] = field(default_factory=dict)
    bytes_by_type: dict[str, int] = field(default_factory=dict)
    total_bytes: int = 0
    finalized_txs: int = 0
    bytes_per_tx: Optional[float] = None
    max_view: int = 0
    last_send: int = 0
    delta: int = 1

    def as_dict(self) -> dict:
        lat = [b.ticks for b in self.blocks]
        done = [x for x in lat if x is not None]
        return {
            "blocks": len(self.blocks),
            "blocks_final": len(done),
            "max_latency_ticks": max(done, default=None),
            "max_latency_delta": (max(done) / self.delta) if done else None,
            "finalized_txs": self.finalized_txs,
            "total_bytes": self.total_bytes,
            "bytes_per_tx": self.bytes_per_tx,
            "bytes_by_type": dict(sorted(self.bytes_by_type.items())),
            "sends_by_type": dict(sorted(self.sends_by_type.items())),
            "max_view": self.max_view,
            "last_send": self.last_send,
        }


def measure_latency(trace: Trace, kind: str = "Tr") -> MetricsReport:
    """Finalization latency of blocks issued by correct processes.

    ``issuer_final`` is when the issuer itself first regards the block as
    final; ``first_final`` is the earliest correct process to do so.
    """
    rep = MetricsReport(delta=trace.config["delta"])
    correct = set(trace.correct)
    issued: dict[str, tuple[int, int, int, list]] = {}
    for r in trace.of_kind("issue"):
        if r.src in correct:
            is_tr = r.detail["type"] == TR
            if kind == "all" or (kind == "Tr") == is_tr:
                issued[r.detail["block"]] = (r.tick, r.src, r.detail["slot"], r.detail["txs"])
    own: dict[str, int] = {}
    first: dict[str, int] = {}
    for r in trace.of_kind("final"):
        b = r.detail["block"]
        if b not in issued or r.src not in correct:
            continue
        first.setdefault(b, r.tick)
        if r.src == issued[b][1]:
            own.setdefault(b, r.tick)
    tx_issue = {tuple(r.detail["tx"]): r.tick for r in trace.of_kind("tx") if r.src in correct}
    for b, (t, p, slot, txs) in issued.items():
        rep.blocks.append(BlockLatency(b, p, slot, t, own.get(b), first.get(b)))
        for tx in txs:
            tx = tuple(tx)
            if tx in tx_issue:
                rep.tx_latency[tx] = None if b not in own else own[b] - tx_issue[tx]
    return rep


def measure_communication(trace: Trace, start: int = 0, end: Optional[int] = None) -> MetricsReport:
    """Bytes sent by correct processes in [start, end] per transaction finalized there."""
    end = trace.horizon if end is None else end
    rep = MetricsReport(delta=trace.config["delta"])
    correct = set(trace.correct)
    sends: Counter = Counter()
    nbytes: Counter = Counter()
    for r in trace.of_kind("send"):
        if r.src in correct and start <= r.tick <= end:
            copies = r.detail.get("copies", 1)
            sends[r.msg_type] += copies
            nbytes[r.msg_type] += r.msg_bytes * copies
    rep.sends_by_type = dict(sends)
    rep.bytes_by_type = dict(nbytes)
    rep.total_bytes = sum(nbytes.values())
    lat = measure_latency(trace)
    issued_at = {tuple(r.detail["tx"]): r.tick for r in trace.of_kind("tx")}
    done = [tx for tx, l in lat.tx_latency.items() if l is not None and start <= issued_at[tx] + l <= end]
    rep.finalized_txs = len(done)
    rep.bytes_per_tx = rep.total_bytes / len(done) if done else None
    rep.max_view = max((r.detail["view"] for r in trace.of_kind("view")), default=0)
    rep.last_send = max((r.tick for r in trace.of_kind("send") if r.src in correct), default=0)
    return rep


def report(trace: Trace) -> dict:
    lat = measure_latency(trace)
    comm = measure_communication(trace)
    out = comm.as_dict()
    done = [b.ticks for b in lat.blocks if b.ticks is not None]
    out.update(
        {
            "blocks": len(lat.blocks),
            "blocks_final": len(done),
            "max_latency_ticks": max(done, default=None),
            "max_latency_delta": max(done) / lat.delta if done else None,
            "latency_histogram_delta": dict(sorted(Counter(x / lat.delta for x in done).items())),
        }
    )
    return out
