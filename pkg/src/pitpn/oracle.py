"""Interval-shrinking semantics of ground nets, used as an independent
reference for the clock semantics, and a bounded lockstep comparison of the
two (the bisimulation check).

An interval state maps every enabled transition to its current firing
interval (lo, hi) with hi None for infinity; disabled transitions carry no
interval.  Left endpoints are clamped at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .concrete import (
    CompiledNet,
    ConcreteState,
    NotApplicable,
    _active,
    _enabled,
    _horizon,
    compile_net,
    fire,
    initial_state,
    mte,
    tick,
)
from .net import INF


@dataclass(frozen=True)
class IntervalState:
    marking: tuple
    intervals: tuple  # per transition: (lo, hi|None) or None when disabled


def oracle_initial(net) -> IntervalState:
    cn = compile_net(net)
    ivs = tuple((t.lo, t.hi) if _enabled(cn.m0, t) else None for t in cn.trans)
    return IntervalState(cn.m0, ivs)


def oracle_delay(s: IntervalState, delta, net) -> Optional[IntervalState]:
    """The time step by ``delta``; None when some active transition's upper
    endpoint would become negative."""
    cn = compile_net(net)
    delta = Fraction(delta)
    if delta < 0:
        return None
    out = []
    for t, iv in zip(cn.trans, s.intervals):
        if iv is None:
            out.append(None)
            continue
        if not _active(s.marking, t):
            out.append(iv)  # enabled but inhibited: frozen
            continue
        lo, hi = iv
        lo2 = max(Fraction(0), lo - delta)
        hi2 = None if hi is None else hi - delta
        if hi2 is not None and hi2 < 0:
            return None
        out.append((lo2, hi2))
    return IntervalState(s.marking, tuple(out))


def oracle_fire(s: IntervalState, tid: str, net) -> Optional[IntervalState]:
    """The discrete step; None when ``tid`` may not fire."""
    cn = compile_net(net)
    tf = cn.t(tid)
    iv = s.intervals[tf.index]
    if not _active(s.marking, tf) or iv is None or iv[0] != 0:
        return None
    m = list(s.marking)
    for p, w in tf.pre:
        m[p] -= w
    inter = tuple(m)
    for p, w in tf.post:
        m[p] += w
    after = tuple(m)
    out = []
    for t, cur in zip(cn.trans, s.intervals):
        if not _enabled(after, t):
            out.append(None)
        elif t.index == tf.index or not _enabled(inter, t):
            out.append((t.lo, t.hi))  # newly enabled: static interval
        else:
            out.append(cur)
    return IntervalState(after, tuple(out))


def oracle_step(s: IntervalState, net, deltas) -> list:
    """All (delta, tid, successor) combining a delay from ``deltas`` with a
    discrete step."""
    out = []
    for d in deltas:
        mid = oracle_delay(s, d, net)
        if mid is None:
            continue
        for t in compile_net(net).trans:
            nxt = oracle_fire(mid, t.id, net)
            if nxt is not None:
                out.append((d, t.id, nxt))
    return out


def corresponds(a: IntervalState, c: ConcreteState, net) -> Optional[str]:
    """None if the interval state and the clock state are related, otherwise
    a description of the first mismatch."""
    cn = compile_net(net)
    if a.marking != c.marking:
        return f"markings differ: {a.marking} vs {c.marking}"
    for t, iv, clock in zip(cn.trans, a.intervals, c.clocks):
        if not _enabled(a.marking, t):
            if clock != 0:
                return f"{t.id}: disabled but clock is {clock}"
            continue
        if iv is None:
            return f"{t.id}: enabled without interval"
        lo, hi = iv
        if t.hi is not None:
            if clock != t.hi - hi:
                return f"{t.id}: clock {clock} but static upper minus current upper is {t.hi - hi}"
        elif lo > 0:
            if clock != t.lo - lo:
                return f"{t.id}: clock {clock} but static lower minus current lower is {t.lo - lo}"
        elif clock < t.lo:
            return f"{t.id}: clock {clock} below static lower {t.lo}"
    return None


@dataclass
class BisimReport:
    ok: bool
    pairs: int = 0
    depth: int = 0
    failures: list = field(default_factory=list)


def _delay_grid(cn: CompiledNet, c: ConcreteState, step: Fraction) -> list:
    bound = mte(c, cn)
    limit = _horizon(cn, step) if bound is INF else bound
    out = []
    k = 0
    while k * step <= limit:
        out.append(k * step)
        k += 1
    out.append(limit + step)  # one delay past mte must be refused by both
    return out


def bisim_check(net, depth: int = 6, step=1, max_failures: int = 10) -> BisimReport:
    """Explore both semantics in lockstep for ``depth`` delay-then-fire steps
    over the delay grid ``0, step, 2*step, ...`` and check that every step
    is accepted by both or refused by both and that all matched pairs are
    related."""
    cn = compile_net(net)
    step = Fraction(step)
    report = BisimReport(True, depth=depth)
    a0, c0 = oracle_initial(cn), initial_state(cn)
    frontier = {(a0, c0)}
    seen = set(frontier)

    def fail(msg):
        report.ok = False
        if len(report.failures) < max_failures:
            report.failures.append(msg)

    for (a, c) in frontier:
        err = corresponds(a, c, cn)
        if err:
            fail(f"initial: {err}")
    for level in range(depth):
        nxt_frontier = set()
        for a, c in frontier:
            for d in _delay_grid(cn, c, step):
                a_mid = oracle_delay(a, d, cn)
                try:
                    c_mid = tick(c, d, cn)
                except NotApplicable:
                    c_mid = None
                if (a_mid is None) != (c_mid is None):
                    fail(f"depth {level}: delay {d} accepted by only one side")
                    continue
                if a_mid is None:
                    continue
                for t in cn.trans:
                    a2 = oracle_fire(a_mid, t.id, cn)
                    try:
                        c2 = fire(c_mid, t.id, cn)
                    except NotApplicable:
                        c2 = None
                    if (a2 is None) != (c2 is None):
                        fail(f"depth {level}: delay {d} then {t.id} accepted by only one side")
                        continue
                    if a2 is None:
                        continue
                    err = corresponds(a2, c2, cn)
                    if err:
                        fail(f"depth {level}: after delay {d} and {t.id}: {err}")
                        continue
                    pair = (a2, c2)
                    if pair not in seen:
                        seen.add(pair)
                        nxt_frontier.add(pair)
        frontier = nxt_frontier
        if not frontier:
            break
    report.pairs = len(seen)
    return report
