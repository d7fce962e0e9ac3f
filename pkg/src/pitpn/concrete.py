"""Clock-based concrete semantics of instantiated nets, time-sampled
exploration and explicit-state reachability."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .logic import eval_term
from .net import INF, Net, NetError, concrete_marking

R0, R1, R2 = "R0", "R1", "R2"


class NotApplicable(Exception):
    """A rule cannot be applied in the given state."""


@dataclass(frozen=True)
class ConcreteState:
    marking: tuple
    clocks: tuple
    tick_ok: Optional[bool] = True  # None in R0 mode
    time: Optional[Fraction] = None  # global clock, R2 mode only

    def marking_dict(self, net: "CompiledNet") -> dict:
        return dict(zip(net.places, self.marking))

    def clocks_dict(self, net: "CompiledNet") -> dict:
        return dict(zip(net.tids, self.clocks))


@dataclass(frozen=True)
class _T:
    id: str
    index: int
    pre: tuple  # (place index, weight)
    post: tuple
    inhibit: tuple
    delta: tuple  # (place index, post - pre) non-zero entries
    lo: Fraction
    hi: Optional[Fraction]  # None = infinity


class CompiledNet:
    """Index-based view of a ground net for fast state manipulation."""

    def __init__(self, net: Net):
        if net.is_parametric:
            raise NetError("concrete engine needs an instantiated net (use instantiate)")
        self.net = net
        self.places = net.places
        self.tids = net.transition_ids
        idx = net.place_index()
        ts = []
        for i, t in enumerate(net.transitions):
            pre = tuple((idx[p], w) for p, w in t.pre)
            post = tuple((idx[p], w) for p, w in t.post)
            inh = tuple((idx[p], w) for p, w in t.inhibit)
            d = {}
            for p, w in pre:
                d[p] = d.get(p, 0) - w
            for p, w in post:
                d[p] = d.get(p, 0) + w
            lo = eval_term(t.interval.lo, {})
            hi = None if t.interval.hi is INF else eval_term(t.interval.hi, {})
            ts.append(_T(t.id, i, pre, post, inh, tuple((p, v) for p, v in d.items() if v), lo, hi))
        self.trans = tuple(ts)
        self.by_id = {t.id: t for t in ts}
        self.m0 = tuple(concrete_marking(net)[p] for p in net.places)

    def t(self, tid: str) -> _T:
        try:
            return self.by_id[tid]
        except KeyError:
            raise NetError(f"unknown transition {tid}") from None


def compile_net(net) -> CompiledNet:
    return net if isinstance(net, CompiledNet) else CompiledNet(net)


def _enabled(m: tuple, t: _T) -> bool:
    return all(m[p] >= w for p, w in t.pre)


def _inhibited(m: tuple, t: _T) -> bool:
    return any(m[p] >= w for p, w in t.inhibit)


def _active(m: tuple, t: _T) -> bool:
    return _enabled(m, t) and not _inhibited(m, t)


def initial_state(net, mode: str = R0, global_time: bool = False) -> ConcreteState:
    """R0: no tick flag; R1: tickOk/tickNotOk alternation; R2: R1 plus the
    global clock.  ``global_time`` adds the global clock to R0 as well, which
    is what time-bounded sampled search uses."""
    cn = compile_net(net)
    zeros = tuple(Fraction(0) for _ in cn.trans)
    gt = Fraction(0) if global_time or mode == R2 else None
    if mode == R0:
        return ConcreteState(cn.m0, zeros, None, gt)
    if mode in (R1, R2):
        return ConcreteState(cn.m0, zeros, True, gt)
    raise ValueError(f"unknown mode {mode}")


def mte(s: ConcreteState, net):
    """Maximal time elapse; INF when no active transition has a finite bound."""
    cn = compile_net(net)
    best = None
    for t in cn.trans:
        if t.hi is not None and _active(s.marking, t):
            room = t.hi - s.clocks[t.index]
            if best is None or room < best:
                best = room
    return INF if best is None else best


def tick(s: ConcreteState, delta, net) -> ConcreteState:
    cn = compile_net(net)
    delta = Fraction(delta)
    if delta < 0:
        raise NotApplicable("negative time step")
    if s.tick_ok is False:
        raise NotApplicable("tick not allowed right after a tick")
    bound = mte(s, cn)
    if bound is not INF and delta > bound:
        raise NotApplicable(f"time step {delta} exceeds mte {bound}")
    clocks = tuple(
        c + delta if _active(s.marking, t) else c for c, t in zip(s.clocks, cn.trans)
    )
    flag = None if s.tick_ok is None else False
    time = None if s.time is None else s.time + delta
    return ConcreteState(s.marking, clocks, flag, time)


def firable(s: ConcreteState, t: _T) -> bool:
    if not _active(s.marking, t):
        return False
    c = s.clocks[t.index]
    return t.lo <= c and (t.hi is None or c <= t.hi)


def fire(s: ConcreteState, tid: str, net) -> ConcreteState:
    cn = compile_net(net)
    t = cn.t(tid)
    if not firable(s, t):
        raise NotApplicable(f"transition {tid} is not firable")
    m = list(s.marking)
    for p, w in t.pre:
        m[p] -= w
    inter = tuple(m)
    for p, w in t.post:
        m[p] += w
    clocks = []
    for u in cn.trans:
        if u.index == t.index:
            clocks.append(Fraction(0))
        elif _enabled(inter, u):
            clocks.append(s.clocks[u.index])
        else:
            clocks.append(Fraction(0))
    flag = None if s.tick_ok is None else True
    return ConcreteState(tuple(m), tuple(clocks), flag, s.time)


def firable_ids(s: ConcreteState, net) -> list:
    cn = compile_net(net)
    return [t.id for t in cn.trans if firable(s, t)]


def check_invariant(s: ConcreteState, net) -> None:
    """disabled => clock 0; active with finite upper u => clock <= u."""
    cn = compile_net(net)
    for t in cn.trans:
        c = s.clocks[t.index]
        if c < 0:
            raise AssertionError(f"negative clock for {t.id}")
        if not _enabled(s.marking, t) and c != 0:
            raise AssertionError(f"disabled {t.id} has clock {c}")
        if t.hi is not None and _active(s.marking, t) and c > t.hi:
            raise AssertionError(f"clock of {t.id} exceeds its upper bound")
    if any(v < 0 for v in s.marking):
        raise AssertionError("negative marking")


# --------------------------------------------------------------------------
# events and traces

Event = tuple  # ("tick", Fraction) or ("fire", tid)


def apply_event(s: ConcreteState, ev: Event, net) -> ConcreteState:
    kind, arg = ev
    if kind == "tick":
        return tick(s, arg, net)
    if kind == "fire":
        return fire(s, arg, net)
    raise ValueError(f"unknown event {ev}")


@dataclass
class Trace:
    states: list
    events: list

    @property
    def final(self) -> ConcreteState:
        return self.states[-1]

    def __len__(self):
        return len(self.events)

    def render(self, net) -> list:
        cn = compile_net(net)
        lines = []
        for i, s in enumerate(self.states):
            if i:
                kind, arg = self.events[i - 1]
                lines.append(f"  --{kind} {arg}-->")
            lines.append("  " + describe_state(s, cn))
        return lines


def describe_state(s: ConcreteState, net) -> str:
    cn = compile_net(net)
    m = ", ".join(f"{p}:{v}" for p, v in zip(cn.places, s.marking) if v)
    c = ", ".join(f"{t}:{_fmt(v)}" for t, v in zip(cn.tids, s.clocks) if v)
    parts = [f"marking {{{m}}}", f"clocks {{{c}}}"]
    if s.tick_ok is not None:
        parts.insert(0, "tickOk" if s.tick_ok else "tickNotOk")
    if s.time is not None:
        parts.append(f"GT {_fmt(s.time)}")
    return " ".join(parts)


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def replay(init: ConcreteState, events: Iterable[Event], net) -> Trace:
    cn = compile_net(net)
    states = [init]
    evs = list(events)
    for ev in evs:
        states.append(apply_event(states[-1], ev, cn))
    return Trace(states, evs)


def verify_trace(trace: Trace, net) -> bool:
    """Re-apply the events and compare every recorded state."""
    try:
        again = replay(trace.states[0], trace.events, net)
    except NotApplicable:
        return False
    return again.states == trace.states


# --------------------------------------------------------------------------
# sampled exploration


def _horizon(cn: CompiledNet, step: Fraction) -> Fraction:
    """Cap for unbounded time steps in flagged sampling: past the largest
    interval constant no clock comparison changes any more."""
    consts = [t.lo for t in cn.trans] + [t.hi for t in cn.trans if t.hi is not None]
    return max(consts + [Fraction(0)]) + step


def sampled_successors(s: ConcreteState, net, step=1, strategy=None,
                       time_bound=None) -> list:
    """(event, state) pairs: fire-successors in declaration order, then time
    successors.

    Without a tick flag (R0) time advances by exactly ``step``.  With the
    tickOk flag a single tick must cover the whole delay before the next
    firing, so every multiple of ``step`` up to mte is offered instead.
    """
    cn = compile_net(net)
    step = Fraction(step)
    if step <= 0:
        raise ValueError("sampling step must be positive")
    fires = [t.id for t in cn.trans if firable(s, t)]
    delays = []
    if s.tick_ok is not False:
        bound = mte(s, cn)
        if s.tick_ok is None:
            limit = step
        else:
            limit = _horizon(cn, step) if bound is INF else bound
        if bound is not INF:
            limit = min(limit, bound)
        if time_bound is not None and s.time is not None:
            limit = min(limit, time_bound - s.time)
        k = 1
        while k * step <= limit:
            delays.append(k * step)
            k += 1
    tick_allowed = bool(delays)
    if strategy is not None:
        fires, tick_allowed = strategy.filter(fires, tick_allowed, lambda tid: True)
    out = [(("fire", tid), fire(s, tid, cn)) for tid in fires]
    if tick_allowed:
        out.extend((("tick", d), tick(s, d, cn)) for d in delays)
    return out


FOUND, NOT_FOUND, INCONCLUSIVE = "found", "not-found", "inconclusive"


@dataclass
class SearchResult:
    status: str
    trace: Optional[Trace] = None
    states: int = 0
    complete: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == FOUND


def _trace_to(parent: dict, s: ConcreteState) -> Trace:
    states, events = [s], []
    while parent[s] is not None:
        prev, ev = parent[s]
        states.append(prev)
        events.append(ev)
        s = prev
    states.reverse()
    events.reverse()
    return Trace(states, events)


def search_ef(init: ConcreteState, net, pred: Callable, step=1, time_bound=None,
              window=None, max_depth=None, strategy=None, max_states=1_000_000,
              check_invariants=False) -> SearchResult:
    """Breadth-first search for a state satisfying ``pred(state, cn)``.

    ``window`` = (a, b) additionally requires a <= global time <= b.
    """
    cn = compile_net(net)
    if time_bound is not None:
        time_bound = Fraction(time_bound)
    lo_w = hi_w = None
    if window is not None:
        lo_w = Fraction(window[0])
        hi_w = None if window[1] is None or window[1] is INF else Fraction(window[1])

    def goal(s):
        if window is not None:
            if s.time is None:
                raise NetError("time windows need global-time (R2) states")
            if s.time < lo_w or (hi_w is not None and s.time > hi_w):
                return False
        return pred(s, cn)

    parent = {init: None}
    depth = {init: 0}
    queue = deque([init])
    truncated = False
    while queue:
        s = queue.popleft()
        if check_invariants:
            check_invariant(s, cn)
        if goal(s):
            return SearchResult(FOUND, _trace_to(parent, s), len(parent), False)
        if max_depth is not None and depth[s] >= max_depth:
            if sampled_successors(s, cn, step, strategy, time_bound):
                truncated = True
            continue
        for ev, nxt in sampled_successors(s, cn, step, strategy, time_bound):
            if nxt in parent:
                continue
            if len(parent) >= max_states:
                return SearchResult(INCONCLUSIVE, None, len(parent), False)
            parent[nxt] = (s, ev)
            depth[nxt] = depth[s] + 1
            queue.append(nxt)
    if truncated:
        return SearchResult(INCONCLUSIVE, None, len(parent), False)
    return SearchResult(NOT_FOUND, None, len(parent), True)


def check_ag(init: ConcreteState, net, pred: Callable, **kw) -> SearchResult:
    """AG pred: NOT_FOUND of the negation means the property holds."""
    return search_ef(init, net, lambda s, cn: not pred(s, cn), **kw)


def reachable(init: ConcreteState, net, step=1, strategy=None, time_bound=None,
              max_states=1_000_000):
    """All sampled-reachable states and the edge list; None if budget hit."""
    cn = compile_net(net)
    seen = {init: 0}
    order = [init]
    edges = []
    queue = deque([init])
    while queue:
        s = queue.popleft()
        for ev, nxt in sampled_successors(s, cn, step, strategy, time_bound):
            if nxt not in seen:
                if len(seen) >= max_states:
                    return None
                seen[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            edges.append((seen[s], ev, seen[nxt]))
    return order, edges


# --------------------------------------------------------------------------
# common predicates


def k_safe_pred(k: int):
    def pred(s: ConcreteState, cn) -> bool:
        return all(v <= k for v in s.marking)

    return pred


def marking_pred(fn: Callable[[dict], bool]):
    def pred(s: ConcreteState, cn) -> bool:
        return fn(dict(zip(cn.places, s.marking)))

    return pred
