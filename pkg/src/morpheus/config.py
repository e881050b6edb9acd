"""Scenario description for one simulated execution."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Optional

from .adversary import STRATEGIES, DelayPolicy
from .crypto import max_faulty
from .replica import Batching


class ConfigInvalid(ValueError):
    pass


FAULT_KINDS = ("correct", "crash", "omission", "byzantine")


@dataclass
class FaultSpec:
    kind: str = "correct"
    crash_at: Optional[int] = None
    drop_prob: float = 0.0
    drop_to: list[int] = field(default_factory=list)
    strategy: Optional[str] = None
    params: dict = field(default_factory=dict)


@dataclass
class PayloadSpec:
    """Transactions handed to process ``pid``: ``count`` at each of its ticks.

    Ticks are ``start, start+every, ...`` below ``stop`` (a single tick when
    ``every`` is 0), or the explicit ``ticks`` list when given.
    """

    pid: int
    start: int = 0
    every: int = 0
    count: int = 1
    stop: Optional[int] = None
    ticks: list[int] = field(default_factory=list)

    def schedule(self, horizon: int) -> list[int]:
        if self.ticks:
            return sorted(t for t in self.ticks if t <= horizon)
        if self.every <= 0:
            return [self.start] if self.start <= horizon else []
        stop = horizon + 1 if self.stop is None else min(self.stop, horizon + 1)
        return list(range(self.start, stop, self.every))


@dataclass
class ScenarioConfig:
    n: int = 4
    f: Optional[int] = None
    gst: int = 0
    Delta: int = 10
    delta: int = 10
    horizon: int = 2000
    seed: int = 0
    faults: dict[int, FaultSpec] = field(default_factory=dict)
    payloads: list[PayloadSpec] = field(default_factory=list)
    batching: Batching = field(default_factory=Batching)
    delay: DelayPolicy = field(default_factory=DelayPolicy)
    clock_offsets: dict[int, int] = field(default_factory=dict)
    tx_size: int = 16

    @property
    def faulty(self) -> int:
        return max_faulty(self.n) if self.f is None else self.f

    def role(self, pid: int) -> FaultSpec:
        return self.faults.get(pid, FaultSpec())

    def correct(self) -> list[int]:
        return [p for p in range(self.n) if self.role(p).kind == "correct"]

    def validate(self) -> "ScenarioConfig":
        if self.n < 1:
            raise ConfigInvalid("n must be positive")
        f = self.faulty
        if f < 0 or self.n < 3 * f + 1:
            raise ConfigInvalid(f"n={self.n} needs n >= 3f+1 (f={f})")
        if not 0 < self.delta <= self.Delta:
            raise ConfigInvalid("need 0 < delta <= Delta")
        if self.gst < 0 or self.horizon <= self.gst:
            raise ConfigInvalid("need 0 <= GST < horizon")
        bad = [p for p in self.faults if not 0 <= p < self.n]
        bad += [p for p in self.clock_offsets if not 0 <= p < self.n]
        bad += [s.pid for s in self.payloads if not 0 <= s.pid < self.n]
        if bad:
            raise ConfigInvalid(f"no such process: {sorted(set(bad))}")
        faulty = [p for p, s in self.faults.items() if s.kind != "correct"]
        if len(faulty) > f:
            raise ConfigInvalid(f"{len(faulty)} faulty processes exceed f={f}")
        for p, s in self.faults.items():
            if s.kind not in FAULT_KINDS:
                raise ConfigInvalid(f"p{p}: unknown fault kind {s.kind!r}")
            if s.kind == "crash" and (s.crash_at is None or s.crash_at < 0):
                raise ConfigInvalid(f"p{p}: crash needs crash_at >= 0")
            if s.kind == "omission" and not 0 <= s.drop_prob <= 1:
                raise ConfigInvalid(f"p{p}: drop_prob outside [0, 1]")
            if s.kind == "byzantine" and s.strategy not in STRATEGIES:
                raise ConfigInvalid(f"p{p}: unknown strategy {s.strategy!r}")
        if self.batching.min_txs < 1 or self.batching.max_txs < 0 or self.batching.min_gap < 0:
            raise ConfigInvalid("bad batching parameters")
        return self

    # -- plain-data round trip ---------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["faults"] = {str(p): v for p, v in d["faults"].items()}
        d["clock_offsets"] = {str(p): v for p, v in d["clock_offsets"].items()}
        d["delay"] = {"name": self.delay.name, "victims": sorted(self.delay.victims)}
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScenarioConfig":
        d = dict(d or {})
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        try:
            faults = {int(p): FaultSpec(**(v or {})) for p, v in (d.pop("faults", None) or {}).items()}
            payloads = [PayloadSpec(**v) for v in d.pop("payloads", None) or []]
            batching = Batching(**(d.pop("batching", None) or {}))
            delay = d.pop("delay", None) or {}
            if isinstance(delay, str):
                delay = {"name": delay}
            delay = DelayPolicy(delay.get("name", "uniform"), frozenset(delay.get("victims", ())))
            offsets = {int(p): int(v) for p, v in (d.pop("clock_offsets", None) or {}).items()}
            cfg = cls(faults=faults, payloads=payloads, batching=batching, delay=delay, clock_offsets=offsets, **d)
        except (TypeError, ValueError) as e:
            raise ConfigInvalid(str(e)) from e
        return cfg.validate()
