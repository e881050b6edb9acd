"""Trace checkers. Each is a pure function of a :class:`~morpheus.simnet.Trace`."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from ..messages import QC, Block
from ..ordering import Extractor
from ..simnet import Trace


class HorizonTooShort(Exception):
    """The run ended too soon after some transaction to judge it."""


@dataclass
class Verdict:
    name: str
    ok: bool = True
    violations: list[str] = field(default_factory=list)
    witness: Optional[tuple] = None
    stats: dict = field(default_factory=dict)

    def fail(self, msg: str, witness: Optional[tuple] = None) -> None:
        self.ok = False
        self.violations.append(msg)
        if self.witness is None:
            self.witness = witness

    def __str__(self) -> str:
        head = f"{self.name}: {'pass' if self.ok else 'FAIL'}"
        return head if self.ok else head + " - " + "; ".join(self.violations[:3])


def is_prefix(a: tuple, b: tuple) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def _ids(log: tuple) -> tuple:
    return tuple(t.tx_id for t in log)


def sample_ticks(trace: Trace, random_ticks: int = 20) -> list[int]:
    """Every finalization tick of a correct process, plus seeded random ticks and the horizon."""
    correct = set(trace.correct)
    ticks = {r.tick for r in trace.of_kind("final") if r.src in correct}
    rng = random.Random(trace.config.get("seed", 0))
    ticks.update(rng.randint(0, trace.horizon) for _ in range(random_ticks))
    ticks.add(trace.horizon)
    return sorted(ticks)


def check_consistency(trace: Trace, random_ticks: int = 20) -> Verdict:
    """Extraction is monotone under inclusion and all sampled logs are compatible.

    Message sets sampled: each correct process's M at every sample tick and
    the union over correct processes at the same ticks.
    """
    v = Verdict("consistency")
    correct = trace.correct
    ticks = sample_ticks(trace, random_ticks)
    cache: dict = {}
    per = {p: Extractor(cache) for p in correct}
    union = Extractor(cache)
    streams = {p: trace.accepts(p) for p in correct}
    pos = {p: 0 for p in correct}
    last: dict = {}
    logs: dict[tuple, tuple] = {}
    for t in ticks:
        for p in correct:
            s, i = streams[p], pos[p]
            while i < len(s) and s[i][0] <= t:
                per[p].add(s[i][2])
                union.add(s[i][2])
                i += 1
            pos[p] = i
        u = _ids(union.log())
        logs[("union", t)] = u
        for key, log in [(("union",), u)] + [((p,), _ids(per[p].log())) for p in correct]:
            logs[key + (t,)] = log
            prev = last.get(key)
            if prev is not None and not is_prefix(prev[1], log):
                v.fail(f"{key[0]}: log at t={prev[0]} is not a prefix of log at t={t}", (key + (prev[0],), key + (t,)))
            last[key] = (t, log)
            if key != ("union",) and not is_prefix(log, u):
                v.fail(f"p{key[0]} at t={t}: log is not a prefix of the union's", (key + (t,), ("union", t)))
    longest_key = max(logs, key=lambda k: len(logs[k]))
    longest = logs[longest_key]
    for k, log in logs.items():
        if not is_prefix(log, longest):
            v.fail(f"incompatible logs {k} and {longest_key}", (k, longest_key))
            break
    v.stats = {"samples": len(logs), "max_log": len(longest)}
    return v


@dataclass
class LivenessPolicy:
    """A transaction issued later than ``horizon - grace`` cannot be judged."""

    grace: int


def default_grace(trace: Trace) -> int:
    cfg = trace.config
    f = cfg.get("f")
    if f is None:
        f = (cfg["n"] - 1) // 3
    return cfg["gst"] + (f + 2) * (12 * cfg["Delta"] + 10 * cfg["delta"])


def check_liveness(trace: Trace, policy: Optional[LivenessPolicy] = None) -> Verdict:
    """Every correct process's transaction is in the log of the union of correct M at the horizon."""
    policy = policy or LivenessPolicy(default_grace(trace))
    v = Verdict("liveness")
    correct = set(trace.correct)
    e = Extractor()
    for _, _, m in trace.accepts():
        e.add(m)
    found = {t.tx_id for t in e.log()}
    missing, too_late = [], []
    issued = [(r.tick, tuple(r.detail["tx"])) for r in trace.of_kind("tx") if r.src in correct]
    for tick, tx in issued:
        if tx in found:
            continue
        (too_late if tick + policy.grace > trace.horizon else missing).append((tick, tx))
    for tick, tx in missing:
        v.fail(f"transaction {tx} issued at t={tick} never extracted")
    v.stats = {"issued": len(issued), "missing": len(missing), "unjudged": len(too_late)}
    if too_late and not missing:
        raise HorizonTooShort(f"{len(too_late)} transactions issued within {policy.grace} ticks of the horizon")
    return v


def all_qcs(trace: Trace) -> list[QC]:
    out = []
    for m in trace.messages.values():
        if isinstance(m, QC):
            out.append(m)
        elif isinstance(m, Block):
            out.extend(m.prev)
            if m.one_qc is not None:
                out.append(m.one_qc)
    return out


def check_unique_certification(trace: Trace) -> Verdict:
    """No two 1-QCs (or 2-QCs) with equal (view, type, height) certify different blocks."""
    v = Verdict("unique-certification")
    seen: dict[tuple, set] = defaultdict(set)
    for q in all_qcs(trace):
        if q.z in (1, 2):
            seen[(q.z, q.view, q.btype, q.h)].add(q.digest)
    for k, ds in sorted(seen.items()):
        if len(ds) > 1:
            v.fail(f"{len(ds)} blocks certified at z={k[0]} view={k[1]} type={k[2]} h={k[3]}", (k,))
    v.stats = {"levels": len(seen)}
    return v


def payload_final_tick(trace: Trace) -> int:
    """Tick at which the last correct transaction is first seen final by its issuer."""
    correct = set(trace.correct)
    block_txs = {}
    for r in trace.of_kind("issue"):
        if r.src in correct:
            block_txs[r.detail["block"]] = r.src
    last = 0
    done = set()
    for r in trace.of_kind("final"):
        b = r.detail["block"]
        if block_txs.get(b) == r.src and b not in done:
            done.add(b)
            last = max(last, r.tick)
    return last


def check_quiescence(trace: Trace, slack: Optional[int] = None) -> Verdict:
    """Correct processes stop sending once the last payload is final and traffic drains."""
    v = Verdict("quiescence")
    cfg = trace.config
    slack = 2 * cfg["Delta"] if slack is None else slack
    correct = set(trace.correct)
    t_final = max(payload_final_tick(trace), cfg["gst"])
    sends = [r.tick for r in trace.of_kind("send") if r.src in correct]
    last = max(sends, default=0)
    if last > t_final + slack:
        late = sum(1 for t in sends if t > t_final + slack)
        v.fail(f"{late} sends after t={t_final + slack} (last at t={last})")
    v.stats = {"payload_final": t_final, "last_send": last}
    return v


def check_tip_bound(trace: Trace) -> Verdict:
    v = Verdict("tip-bound")
    for r in trace.of_kind("tipbound"):
        v.fail(f"p{r.src} held {r.detail['tips']} tips at t={r.tick}")
    return v


def check_delivery(trace: Trace) -> Verdict:
    """Deliveries never exceed the partial-synchrony bound (checked against send ticks)."""
    v = Verdict("delivery")
    cfg = trace.config
    for r in trace.of_kind("deliver"):
        sent = r.detail.get("sent")
        if sent is None:
            continue
        bound = max(cfg["gst"], sent) + cfg["Delta"]
        if sent >= cfg["gst"]:
            bound = min(bound, sent + cfg["delta"])
        if not sent < r.tick <= bound:
            v.fail(f"message sent at {sent} delivered at {r.tick} (bound {bound})")
    return v


def run_checks(trace: Trace, policy: Optional[LivenessPolicy] = None) -> list[Verdict]:
    out = [check_consistency(trace)]
    try:
        out.append(check_liveness(trace, policy))
    except HorizonTooShort as e:
        out.append(Verdict("liveness", True, stats={"unjudged": str(e)}))
    out += [check_unique_certification(trace), check_quiescence(trace), check_tip_bound(trace), check_delivery(trace)]
    return out
