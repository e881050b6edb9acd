"""Seeded matrix of simulations over n, Byzantine strategy and seed."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..adversary import STRATEGIES, DelayPolicy
from ..config import FaultSpec, PayloadSpec, ScenarioConfig
from ..simnet import run
from .checks import run_checks


@dataclass(frozen=True)
class SweepCase:
    n: int
    strategy: Optional[str]
    seed: int
    Delta: int = 6
    delta: int = 3
    txs_per_process: int = 3

    def config(self) -> ScenarioConfig:
        """Uniform delays, a random GST, and f processes running ``strategy``.

        The corrupted processes are ``(seed + k) % n`` for ``k < f``, so
        across seeds every process (and so every view's leader) gets a turn.
        The horizon leaves room for 20 views of complaint timers after GST.
        """
        rng = random.Random(f"{self.n}/{self.strategy}/{self.seed}")
        f = (self.n - 1) // 3
        gst = rng.randint(0, 10 * self.Delta)
        faults = {}
        if self.strategy is not None:
            for k in range(f):
                faults[(self.seed + k) % self.n] = FaultSpec("byzantine", strategy=self.strategy)
        payloads = []
        for p in range(self.n):
            if p in faults:
                continue
            ticks = sorted(rng.randint(0, gst + 5 * self.Delta) for _ in range(self.txs_per_process))
            payloads.append(PayloadSpec(p, ticks=ticks))
        horizon = gst + 20 * 12 * self.Delta + 10 * self.Delta
        return ScenarioConfig(
            n=self.n,
            gst=gst,
            Delta=self.Delta,
            delta=self.delta,
            horizon=horizon,
            seed=self.seed,
            faults=faults,
            payloads=payloads,
            delay=DelayPolicy("uniform"),
        )


@dataclass
class SweepResult:
    case: SweepCase
    verdicts: dict[str, bool] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())


def run_case(case: SweepCase) -> SweepResult:
    trace = run(case.config())
    res = SweepResult(case)
    for v in run_checks(trace):
        res.verdicts[v.name] = v.ok
        res.violations += [f"{v.name}: {m}" for m in v.violations]
    return res


def cases(ns: Iterable[int], seeds: int, strategies: Optional[Iterable[Optional[str]]] = None) -> list[SweepCase]:
    strategies = list(STRATEGIES) if strategies is None else list(strategies)
    return [SweepCase(n, s, seed) for n in ns for s in strategies for seed in range(seeds)]


def sweep(all_cases: list[SweepCase], workers: Optional[int] = None) -> list[SweepResult]:
    if workers == 1 or len(all_cases) < 2:
        return [run_case(c) for c in all_cases]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_case, all_cases, chunksize=8))


def aggregate(results: list[SweepResult]) -> list[dict]:
    """One row per (n, strategy): runs and passes per checker."""
    rows: dict[tuple, dict] = {}
    for r in results:
        key = (r.case.n, r.case.strategy or "none")
        row = rows.setdefault(key, {"n": key[0], "strategy": key[1], "runs": 0, "failed": 0})
        row["runs"] += 1
        row["failed"] += not r.ok
        for name, ok in r.verdicts.items():
            row[name] = row.get(name, 0) + ok
    return [rows[k] for k in sorted(rows)]
