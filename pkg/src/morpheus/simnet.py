"""Deterministic discrete-event network.

Events are ordered by ``(tick, sender, per-sender sequence number)``; every
random choice comes from one generator seeded by the scenario, so a run is a
pure function of its configuration.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from .adversary import STRATEGIES, DeliveryRule
from .config import ConfigInvalid, ScenarioConfig
from .crypto import CryptoProvider
from .messages import QC, Block, Committee, Message, Transaction, from_json, message_kind, message_size, to_json
from .replica import ALL, Replica, Send

__all__ = ["ConfigInvalid", "Record", "Trace", "run", "Simulation"]

# Column order of every trace line.
FIELDS = ("tick", "kind", "src", "dst", "msg_type", "msg_bytes", "detail")


@dataclass(frozen=True)
class Record:
    tick: int
    kind: str
    src: int
    dst: int
    msg_type: str
    msg_bytes: int
    detail: dict = field(default_factory=dict, compare=False)

    def as_list(self) -> list:
        return [self.tick, self.kind, self.src, self.dst, self.msg_type, self.msg_bytes, self.detail]


class Trace:
    """Ordered event records of one execution plus the blocks and QCs they reference."""

    def __init__(self, config: dict):
        self.config = config
        self.records: list[Record] = []
        self.messages: dict[int, Message] = {}
        self._ids: dict[bytes, int] = {}

    # -- construction ---------------------------------------------------------

    def intern(self, m: Message) -> int:
        key = m.encoded
        i = self._ids.get(key)
        if i is None:
            i = self._ids[key] = len(self._ids)
            self.messages[i] = m
        return i

    def add(self, tick: int, kind: str, src: int = -1, dst: int = -1, msg_type: str = "", msg_bytes: int = 0, **detail):
        self.records.append(Record(tick, kind, src, dst, msg_type, msg_bytes, detail))

    # -- views ------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.config["n"]

    @property
    def correct(self) -> list[int]:
        faults = self.config.get("faults", {})
        return [p for p in range(self.n) if (faults.get(str(p)) or {}).get("kind", "correct") == "correct"]

    @property
    def horizon(self) -> int:
        return self.config["horizon"]

    def of_kind(self, *kinds: str) -> Iterator[Record]:
        return (r for r in self.records if r.kind in kinds)

    def accepts(self, pid: Optional[int] = None) -> list[tuple[int, int, Message]]:
        """(tick, process, message) for every block or QC entering a process's M."""
        return [
            (r.tick, r.src, self.messages[r.detail["m"]])
            for r in self.records
            if r.kind == "accept" and (pid is None or r.src == pid)
        ]

    # -- serialization ----------------------------------------------------------

    def lines(self) -> Iterator[str]:
        yield json.dumps([0, "config", -1, -1, "", 0, self.config], sort_keys=True)
        defined: set[int] = set()
        for r in self.records:
            if r.kind == "accept" and r.detail["m"] not in defined:
                i = r.detail["m"]
                defined.add(i)
                yield json.dumps([r.tick, "msg", -1, -1, "", 0, {"id": i, "json": to_json(self.messages[i])}], sort_keys=True)
            yield json.dumps(r.as_list(), sort_keys=True)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")

    @classmethod
    def read(cls, path) -> "Trace":
        with open(path) as fh:
            return cls.parse(fh)

    @classmethod
    def parse(cls, lines) -> "Trace":
        trace: Optional[Trace] = None
        for line in lines:
            line = line.strip()
            if not line:
                continue
            tick, kind, src, dst, mt, mb, detail = json.loads(line)
            if kind == "config":
                trace = cls(detail)
                continue
            if trace is None:
                raise ValueError("trace does not start with a config record")
            if kind == "msg":
                m = from_json(detail["json"])
                trace.messages[detail["id"]] = m
                trace._ids[m.encoded] = detail["id"]
                continue
            trace.records.append(Record(tick, kind, src, dst, mt, mb, detail))
        if trace is None:
            raise ValueError("empty trace")
        return trace


class Simulation:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.cfg = config
        self.rng = random.Random(config.seed)
        self.rule = DeliveryRule(config.gst, config.Delta, config.delta)
        self.provider = CryptoProvider(config.n, config.seed)
        self.committee = Committee(config.n, self.provider, config.f)
        self.trace = Trace(config.to_dict())
        self.heap: list[tuple] = []
        self.seq = [0] * config.n
        self.timer_at: dict[int, int] = {}
        self.crashed: set[int] = set()
        self.tx_seq = [0] * config.n
        self.replicas: list[Replica] = [self._make(p) for p in range(config.n)]
        self.tick = 0

    def _make(self, pid: int) -> Replica:
        spec = self.cfg.role(pid)
        cls = Replica
        kw: dict[str, Any] = {}
        if spec.kind == "byzantine":
            cls = STRATEGIES[spec.strategy]
            kw = dict(spec.params)
        return cls(pid, self.committee, self.provider.signer(pid), self.cfg.Delta, self.cfg.batching, **kw)

    def _push(self, tick: int, src: int, kind: str, data: Any) -> None:
        self.seq[src] += 1
        heapq.heappush(self.heap, (tick, src, self.seq[src], kind, data))

    def _local(self, pid: int, tick: int) -> int:
        return tick + self.cfg.clock_offsets.get(pid, 0)

    # -- main loop --------------------------------------------------------------

    def run(self) -> Trace:
        cfg = self.cfg
        for p in range(cfg.n):
            spec = cfg.role(p)
            if spec.kind == "crash":
                self._push(spec.crash_at, p, "crash", None)
            self._push(0, p, "start", None)
        for ps in cfg.payloads:
            for t in ps.schedule(cfg.horizon):
                self._push(t, ps.pid, "payload", ps.count)
        while self.heap:
            tick, src, _, kind, data = heapq.heappop(self.heap)
            if tick > cfg.horizon:
                break
            self.tick = tick
            if kind == "crash":
                self.crashed.add(src)
                self.trace.add(tick, "crash", src)
            elif kind == "start":
                self._activate(src, lambda r, now: r.start(now))
            elif kind == "payload":
                self._payload(src, data)
            elif kind == "timer":
                if self.timer_at.get(src) == tick:
                    del self.timer_at[src]
                    self._activate(src, lambda r, now: r.on_timer(now))
            elif kind == "deliver":
                dst, msg, sent = data
                if dst in self.crashed:
                    continue
                self.trace.add(tick, "deliver", src, dst, message_kind(msg), message_size(msg), sent=sent)
                self._activate(dst, lambda r, now, m=msg: r.on_receive(m, now))
        return self.trace

    def _payload(self, pid: int, count: int) -> None:
        if pid in self.crashed:
            return
        txs = []
        for _ in range(count):
            s = self.tx_seq[pid]
            self.tx_seq[pid] += 1
            body = f"p{pid}:{s}".encode().ljust(self.cfg.tx_size, b".")
            tx = Transaction(pid, s, body)
            txs.append(tx)
            self.trace.add(self.tick, "tx", pid, -1, "tx", len(tx.encoded), tx=[pid, s])
        self._activate(pid, lambda r, now: r.on_payload(txs, now))

    def _activate(self, pid: int, fn) -> None:
        if pid in self.crashed:
            return
        r = self.replicas[pid]
        sends = fn(r, self._local(pid, self.tick))
        self._drain(pid, r)
        for s in sends:
            self._dispatch(pid, s)
        wake = r.next_wakeup()
        if wake is not None:
            at = max(self.tick + 1, wake - self.cfg.clock_offsets.get(pid, 0))
            cur = self.timer_at.get(pid)
            if cur is None or at < cur or cur <= self.tick:
                self.timer_at[pid] = at
                self._push(at, pid, "timer", None)

    def _drain(self, pid: int, r: Replica) -> None:
        for m in r.accepted:
            if isinstance(m, (Block, QC)):
                self.trace.add(self.tick, "accept", pid, -1, message_kind(m), 0, m=self.trace.intern(m))
        r.accepted.clear()
        for e in r.events:
            detail = {k: (v.hex() if isinstance(v, bytes) else v) for k, v in e.detail.items()}
            self.trace.add(self.tick, e.kind, pid, -1, "", 0, **detail)
        r.events.clear()

    def _dispatch(self, src: int, s: Send) -> None:
        spec = self.cfg.role(src)
        dests = [p for p in range(self.cfg.n) if p != src] if s.dest is ALL else [s.dest]
        kind, size = message_kind(s.msg), message_size(s.msg)
        sent = 0
        for d in dests:
            if spec.kind == "omission" and (d in spec.drop_to or (spec.drop_prob and self.rng.random() < spec.drop_prob)):
                self.trace.add(self.tick, "drop", src, d, kind, size)
                continue
            at = self.cfg.delay.delay(src, d, self.tick, self.rule, self.rng)
            self._push(at, src, "deliver", (d, s.msg, self.tick))
            sent += 1
        if sent:
            self.trace.add(self.tick, "send", src, -1 if s.dest is ALL else s.dest, kind, size, copies=sent)


def run(config: ScenarioConfig) -> Trace:
    return Simulation(config).run()
