"""Parametric time Petri nets with inhibitor arcs: structure and the
marking-level predicates shared by the concrete and symbolic engines."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Union

from .logic import (
    FALSE,
    INT,
    REAL,
    TRUE,
    EvaluationError,
    Formula,
    LinExpr,
    Var,
    conj,
    const,
    disj,
    eval_term,
    evaluate,
    free_vars,
    ge,
    le,
    negate,
    substitute,
)


class NetError(Exception):
    """Structural problem with a net (unknown ids, bad valuation...)."""


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
TimeBound = Union[LinExpr, _Infinity]


@dataclass(frozen=True)
class Interval:
    lo: LinExpr
    hi: TimeBound

    @staticmethod
    def of(lo, hi) -> "Interval":
        return Interval(LinExpr.of(lo), INF if hi is INF or hi is None else LinExpr.of(hi))

    @property
    def finite(self) -> bool:
        return self.hi is not INF

    def contains(self, value, env=None) -> bool:
        """Concrete membership test (parameters resolved through ``env``)."""
        env = env or {}
        lo = eval_term(self.lo, env)
        if value < lo:
            return False
        return self.hi is INF or value <= eval_term(self.hi, env)

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _weights(items) -> tuple:
    if isinstance(items, Mapping):
        items = items.items()
    out = {}
    for p, w in items:
        out[p] = out.get(p, 0) + int(w)
    return tuple(sorted((p, w) for p, w in out.items() if w != 0))


@dataclass(frozen=True)
class Transition:
    id: str
    pre: tuple = ()
    post: tuple = ()
    inhibit: tuple = ()
    interval: Interval = field(default_factory=lambda: Interval.of(0, INF))

    @staticmethod
    def make(id: str, pre=(), post=(), inhibit=(), interval=None) -> "Transition":
        return Transition(id, _weights(pre), _weights(post), _weights(inhibit),
                          interval if interval is not None else Interval.of(0, INF))

    @property
    def pre_map(self) -> dict:
        return dict(self.pre)

    @property
    def post_map(self) -> dict:
        return dict(self.post)

    @property
    def inhibit_map(self) -> dict:
        return dict(self.inhibit)


@dataclass(frozen=True)
class Net:
    name: str
    places: tuple
    transitions: tuple
    time_params: tuple = ()
    marking_params: tuple = ()
    init_marking: tuple = ()  # (place, LinExpr) pairs, total over places
    init_constraint: Formula = TRUE

    @staticmethod
    def make(name, places, transitions, init_marking=None, time_params=(),
             marking_params=(), init_constraint=TRUE) -> "Net":
        init_marking = dict(init_marking or {})
        m = tuple((p, LinExpr.of(init_marking.get(p, 0))) for p in places)
        return Net(name, tuple(places), tuple(transitions), tuple(time_params),
                   tuple(marking_params), m, init_constraint)

    # -- lookups

    def transition(self, tid: str) -> Transition:
        for t in self.transitions:
            if t.id == tid:
                return t
        raise NetError(f"unknown transition {tid}")

    @property
    def transition_ids(self) -> tuple:
        return tuple(t.id for t in self.transitions)

    @property
    def m0(self) -> dict:
        return dict(self.init_marking)

    @property
    def param_vars(self) -> tuple:
        return tuple(Var(p, REAL) for p in self.time_params) + tuple(Var(p, INT) for p in self.marking_params)

    @property
    def params(self) -> tuple:
        return tuple(self.time_params) + tuple(self.marking_params)

    @property
    def is_parametric(self) -> bool:
        return bool(self.time_params or self.marking_params)

    def place_index(self) -> dict:
        return {p: i for i, p in enumerate(self.places)}

    def arc_count(self) -> int:
        return sum(len(t.pre) + len(t.post) + len(t.inhibit) for t in self.transitions)


# --------------------------------------------------------------------------
# marking predicates; markings map place -> int or LinExpr


def _val(m: Mapping, p: str):
    return m.get(p, 0)


def _le(w, v) -> Formula:
    if isinstance(v, LinExpr):
        return le(w, v)
    return TRUE if w <= v else FALSE


def _check_places(net: Net | None, t: Transition):
    if net is None:
        return
    known = set(net.places)
    for p, _ in t.pre + t.post + t.inhibit:
        if p not in known:
            raise NetError(f"transition {t.id} references unknown place {p}")


def enabled(m: Mapping, t: Transition, net: Net | None = None) -> Formula:
    """Pre(t) <= m."""
    _check_places(net, t)
    return conj([_le(w, _val(m, p)) for p, w in t.pre])


def inhibited(m: Mapping, t: Transition, net: Net | None = None) -> Formula:
    """Some inhibitor place holds at least the arc weight."""
    _check_places(net, t)
    return disj([_le(w, _val(m, p)) for p, w in t.inhibit if w > 0])


def active(m: Mapping, t: Transition, net: Net | None = None) -> Formula:
    return conj(enabled(m, t, net), negate(inhibited(m, t, net)))


def fire_marking(m: Mapping, tf: Transition) -> dict:
    out = dict(m)
    for p, w in tf.pre:
        out[p] = out.get(p, 0) - w
    for p, w in tf.post:
        out[p] = out.get(p, 0) + w
    return out


def intermediate_marking(m: Mapping, tf: Transition) -> dict:
    out = dict(m)
    for p, w in tf.pre:
        out[p] = out.get(p, 0) - w
    return out


def newly_enabled(t: Transition, m: Mapping, tf: Transition, net: Net | None = None) -> Formula:
    after = enabled(fire_marking(m, tf), t, net)
    if t.id == tf.id:
        return after
    return conj(after, negate(enabled(intermediate_marking(m, tf), t, net)))


def k_safe(k: int, m: Mapping) -> Formula:
    return conj([_le(v, k) if not isinstance(v, LinExpr) else le(v, k) for v in m.values()])


def marking_le(m1: Mapping, m2: Mapping) -> bool:
    keys = set(m1) | set(m2)
    return all(m1.get(p, 0) <= m2.get(p, 0) for p in keys)


def truth(f: Formula) -> bool:
    """Boolean value of a constant-folded formula."""
    if f == TRUE:
        return True
    if f == FALSE:
        return False
    raise NetError(f"formula is not ground: {f}")


# --------------------------------------------------------------------------
# instantiation and validation


def instantiate(net: Net, valuation: Mapping[str, object]) -> Net:
    """Substitute every parameter by its value."""
    missing = [p for p in net.params if p not in valuation]
    if missing:
        raise NetError(f"missing parameter values: {', '.join(missing)}")
    env = {p: Fraction(valuation[p]) for p in net.params}
    for p in net.marking_params:
        if env[p].denominator != 1 or env[p] < 0:
            raise NetError(f"marking parameter {p} must be a natural number")
    try:
        ok = evaluate(net.init_constraint, env)
    except EvaluationError as exc:
        raise NetError(str(exc)) from exc
    if not ok:
        raise NetError("valuation violates the net's initial constraint")
    mapping = {v: const(env[v.name]) for v in net.param_vars}
    trans = []
    for t in net.transitions:
        lo = substitute(t.interval.lo, mapping)
        hi = t.interval.hi if t.interval.hi is INF else substitute(t.interval.hi, mapping)
        trans.append(replace(t, interval=Interval(lo, hi)))
    marking = tuple((p, substitute(e, mapping)) for p, e in net.init_marking)
    return Net(net.name, net.places, tuple(trans), (), (), marking, TRUE)


def concrete_marking(net: Net) -> dict:
    out = {}
    for p, e in net.init_marking:
        if not e.is_const or e.const.denominator != 1:
            raise NetError(f"initial marking of {p} is not a ground natural number")
        out[p] = int(e.const)
    return out


def well_formedness(net: Net) -> Formula:
    """0 <= lo(t) <= hi(t) for every transition, parameters non-negative."""
    parts = [ge(LinExpr.of(v), 0) for v in net.param_vars]
    for t in net.transitions:
        parts.append(ge(t.interval.lo, 0))
        if t.interval.hi is not INF:
            parts.append(le(t.interval.lo, t.interval.hi))
    for _, e in net.init_marking:
        parts.append(ge(e, 0))
    return conj(parts)


def validate(net: Net, solver=None) -> list:
    """Diagnostics for a net; empty when well formed.

    Solver-dependent checks (satisfiability of the initial constraint,
    parametric intervals forced empty) run only if a solver is supplied.
    """
    diags = []
    if not net.places:
        diags.append("net has no places")
    if not net.transitions:
        diags.append("net has no transitions")
    seen = set()
    for p in net.places:
        if p in seen:
            diags.append(f"duplicate place {p}")
        seen.add(p)
    tids = set()
    for t in net.transitions:
        if t.id in tids:
            diags.append(f"duplicate transition {t.id}")
        tids.add(t.id)
    params = set(net.params)
    for t in net.transitions:
        for kind, arcs in (("pre", t.pre), ("post", t.post), ("inhibit", t.inhibit)):
            for p, w in arcs:
                if p not in seen:
                    diags.append(f"transition {t.id}: {kind} arc references unknown place {p}")
                if w < 0:
                    diags.append(f"transition {t.id}: negative {kind} weight on {p}")
        ends = [t.interval.lo] + ([] if t.interval.hi is INF else [t.interval.hi])
        for e in ends:
            for v in free_vars(e):
                if v.name not in net.time_params:
                    diags.append(f"transition {t.id}: interval uses undeclared parameter {v.name}")
        lo, hi = t.interval.lo, t.interval.hi
        if lo.is_const and lo.const < 0:
            diags.append(f"transition {t.id}: negative lower bound {lo}")
        if hi is not INF and lo.is_const and hi.is_const and lo.const > hi.const:
            diags.append(f"transition {t.id}: empty interval [{lo}, {hi}]")
    for p, e in net.init_marking:
        if p not in seen:
            diags.append(f"initial marking references unknown place {p}")
        if e.is_const and e.const < 0:
            diags.append(f"negative initial marking for {p}")
        for v in free_vars(e):
            if v.name not in net.marking_params:
                diags.append(f"initial marking of {p} uses undeclared parameter {v.name}")
    for v in free_vars(net.init_constraint):
        if v.name not in params:
            diags.append(f"initial constraint uses undeclared variable {v.name}")
    if solver is not None and not diags:
        base = conj(net.init_constraint, *[ge(LinExpr.of(v), 0) for v in net.param_vars])
        if solver.check_sat(base, want_model=False).is_unsat:
            diags.append("initial constraint is unsatisfiable")
        else:
            for t in net.transitions:
                lo, hi = t.interval.lo, t.interval.hi
                if hi is INF or (lo.is_const and hi.is_const):
                    continue
                if solver.check_sat(conj(base, le(lo, hi)), want_model=False).is_unsat:
                    diags.append(f"transition {t.id}: interval is empty under the initial constraint")
    return diags
