"""LTL model checking of sampled state graphs.

Formulas are negated, put in negation normal form and translated to a
generalized Büchi automaton with the on-the-fly tableau construction of
Gerth, Peled, Vardi and Wolper.  Emptiness of the product with the state
graph is decided by nested depth-first search, which yields lasso-shaped
counterexamples.  Deadlocked states are given a stutter self-loop so that
every run is infinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .concrete import compile_net, reachable
from .logic import INT, Formula, LinExpr, Var, conj, evaluate, le
from .syntax import Parser, SyntaxError_

# --------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class LTL:
    pass


@dataclass(frozen=True)
class LTrue(LTL):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class LFalse(LTL):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Prop(LTL):
    """Atomic proposition: a state formula over place names (and GT)."""

    formula: Formula
    text: str = field(default="", compare=False)

    def __str__(self):
        return self.text or str(self.formula)


@dataclass(frozen=True)
class LNot(LTL):
    arg: LTL

    def __str__(self):
        return f"~ {self.arg}"


@dataclass(frozen=True)
class LAnd(LTL):
    left: LTL
    right: LTL

    def __str__(self):
        return f"({self.left} /\\ {self.right})"


@dataclass(frozen=True)
class LOr(LTL):
    left: LTL
    right: LTL

    def __str__(self):
        return f"({self.left} \\/ {self.right})"


@dataclass(frozen=True)
class Next(LTL):
    arg: LTL

    def __str__(self):
        return f"X {self.arg}"


@dataclass(frozen=True)
class Until(LTL):
    left: LTL
    right: LTL

    def __str__(self):
        return f"({self.left} U {self.right})"


@dataclass(frozen=True)
class Release(LTL):
    left: LTL
    right: LTL

    def __str__(self):
        return f"({self.left} R {self.right})"


TRUE, FALSE = LTrue(), LFalse()


def eventually(f: LTL) -> LTL:
    return Until(TRUE, f)


def always(f: LTL) -> LTL:
    return Release(FALSE, f)


def implies(a: LTL, b: LTL) -> LTL:
    return LOr(LNot(a), b)


def nnf(f: LTL, neg: bool = False) -> LTL:
    """Negation normal form; negations only in front of propositions."""
    if isinstance(f, LTrue):
        return FALSE if neg else TRUE
    if isinstance(f, LFalse):
        return TRUE if neg else FALSE
    if isinstance(f, Prop):
        return LNot(f) if neg else f
    if isinstance(f, LNot):
        return nnf(f.arg, not neg)
    if isinstance(f, LAnd):
        return (LOr if neg else LAnd)(nnf(f.left, neg), nnf(f.right, neg))
    if isinstance(f, LOr):
        return (LAnd if neg else LOr)(nnf(f.left, neg), nnf(f.right, neg))
    if isinstance(f, Next):
        return Next(nnf(f.arg, neg))
    if isinstance(f, Until):
        return (Release if neg else Until)(nnf(f.left, neg), nnf(f.right, neg))
    if isinstance(f, Release):
        return (Until if neg else Release)(nnf(f.left, neg), nnf(f.right, neg))
    raise TypeError(f"not an LTL formula: {f!r}")


# --------------------------------------------------------------------------
# parsing
#
#   ltl   := imp
#   imp   := or ('->' imp)?
#   or    := and ('\/' and)*
#   and   := until ('/\' until)*
#   until := unary (('U' | 'R') until)?
#   unary := ('~' | '!' | 'not') unary | '[]' unary | '<>' unary | 'X' unary
#          | '(' ltl ')' | 'true' | 'false' | state-formula atom


class _LtlParser(Parser):
    def ltl(self) -> LTL:
        left = self.l_or()
        if self.accept("->"):
            return implies(left, self.ltl())
        return left

    def l_or(self) -> LTL:
        left = self.l_and()
        while self.accept("\\/") or self.accept("||") or self.accept("or"):
            left = LOr(left, self.l_and())
        return left

    def l_and(self) -> LTL:
        left = self.l_until()
        while self.accept("/\\") or self.accept("&&") or self.accept("and"):
            left = LAnd(left, self.l_until())
        return left

    def l_until(self) -> LTL:
        left = self.l_unary()
        if self.accept("U"):
            return Until(left, self.l_until())
        if self.accept("R"):
            return Release(left, self.l_until())
        return left

    def l_unary(self) -> LTL:
        if self.accept("~") or self.accept("!") or self.accept("not"):
            return LNot(self.l_unary())
        if self.accept("[]"):
            return always(self.l_unary())
        if self.accept("<>"):
            return eventually(self.l_unary())
        if self.accept("X"):
            return Next(self.l_unary())
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.peek() == ("op", "("):
            save = self.i
            self.take()
            try:
                f = self.ltl()
                self.expect(")")
                kind, v = self.peek()
                if not (kind == "op" and v in ("<=", "<", "=", "==", ">=", ">", "!=", "+", "-", "*")):
                    return f
            except SyntaxError_:
                pass
            self.i = save
        start = self.i
        atom = self.unary_atom()
        text = " ".join(v for _, v in self.toks[start:self.i])
        return Prop(atom, text)

    def unary_atom(self) -> Formula:
        kind, v = self.peek()
        if kind == "id" and self.peek(1) == ("op", "(") and self.call is not None:
            return self._call()
        return self.comparison()


def place_resolver(places) -> Callable[[str], LinExpr]:
    known = set(places)

    def resolve(name: str) -> LinExpr:
        if name in known or name == "GT":
            return LinExpr.of(Var(name, INT))
        raise SyntaxError_(f"unknown place {name!r}")

    return resolve


def _k_safe_call(places):

    def call(name, args):
        if name == "k-safe" and len(args) == 1 and isinstance(args[0], LinExpr) and args[0].is_const:
            k = args[0].const
            return conj([le(LinExpr.of(Var(p, INT)), k) for p in places])
        raise SyntaxError_(f"unknown function {name}")

    return call


def parse_ltl(text: str, places) -> LTL:
    p = _LtlParser(text, place_resolver(places), _k_safe_call(places))
    f = p.ltl()
    if not p.at_end():
        raise SyntaxError_(f"trailing input at {p.peek()[1]!r}")
    return f


# --------------------------------------------------------------------------
# Kripke structures


@dataclass
class Kripke:
    """Finite state graph: ``succ[i]`` lists (event, j) pairs; ``valuation``
    maps a state index to the environment used to evaluate propositions."""

    states: list
    succ: list
    valuation: Callable[[int], dict]
    init: int = 0

    @staticmethod
    def from_reachable(states, edges, valuation) -> "Kripke":
        succ = [[] for _ in states]
        for i, ev, j in edges:
            succ[i].append((ev, j))
        for i, out in enumerate(succ):
            if not out:
                out.append((("stutter", None), i))
        return Kripke(list(states), succ, valuation)


def holds_prop(k: Kripke, i: int, p: Prop, cache: dict) -> bool:
    key = (i, p)
    if key not in cache:
        cache[key] = evaluate(p.formula, k.valuation(i))
    return cache[key]


# --------------------------------------------------------------------------
# tableau construction


@dataclass
class _Node:
    id: int
    incoming: set
    new: list
    old: set
    next: set


def _expand(node: _Node, nodes: list, counter: list):
    while node.new:
        f = node.new.pop()
        if f in node.old:
            continue
        if isinstance(f, LFalse):
            return
        if isinstance(f, LNot) and f.arg in node.old or isinstance(f, Prop) and LNot(f) in node.old:
            return
        node.old.add(f)
        if isinstance(f, (LTrue, Prop, LNot)):
            continue
        if isinstance(f, LAnd):
            node.new.extend([f.left, f.right])
            continue
        if isinstance(f, Next):
            node.next.add(f.arg)
            continue
        if isinstance(f, (LOr, Until, Release)):
            if isinstance(f, LOr):
                new1, next1, new2 = [f.left], set(), [f.right]
            elif isinstance(f, Until):
                new1, next1, new2 = [f.left], {f}, [f.right]
            else:
                new1, next1, new2 = [f.right], {f}, [f.left, f.right]
            counter[0] += 1
            n1 = _Node(counter[0], set(node.incoming), node.new + new1, set(node.old), node.next | next1)
            counter[0] += 1
            n2 = _Node(counter[0], set(node.incoming), node.new + new2, set(node.old), set(node.next))
            _expand(n1, nodes, counter)
            _expand(n2, nodes, counter)
            return
        raise TypeError(f"unexpected formula {f!r}")
    for other in nodes:
        if other.old == node.old and other.next == node.next:
            other.incoming |= node.incoming
            return
    nodes.append(node)
    counter[0] += 1
    _expand(_Node(counter[0], {node.id}, list(node.next), set(), set()), nodes, counter)


@dataclass
class Buchi:
    """Generalized Büchi automaton; ``labels[q]`` are the literals a state
    must satisfy, ``accepting`` one set of automaton states per Until."""

    states: list
    initial: list
    succ: dict
    labels: dict
    accepting: list


INIT = -1


def build_buchi(f: LTL) -> Buchi:
    f = nnf(f)
    nodes: list = []
    _expand(_Node(0, {INIT}, [f], set(), set()), nodes, [0])
    ids = [n.id for n in nodes]
    succ = {q: [] for q in ids}
    initial = []
    for n in nodes:
        for src in n.incoming:
            if src == INIT:
                initial.append(n.id)
            elif src in succ:
                succ[src].append(n.id)
    labels = {n.id: [g for g in n.old if isinstance(g, (Prop, LNot))] for n in nodes}
    untils = sorted({g for n in nodes for g in n.old if isinstance(g, Until)}, key=str)
    accepting = [
        {n.id for n in nodes if u not in n.old or u.right in n.old} for u in untils
    ]
    return Buchi(ids, initial, succ, labels, accepting)


# --------------------------------------------------------------------------
# product and emptiness


@dataclass
class LtlResult:
    holds: Optional[bool]  # None = inconclusive
    stem: list = field(default_factory=list)  # Kripke state indices
    cycle: list = field(default_factory=list)
    stem_events: list = field(default_factory=list)
    cycle_events: list = field(default_factory=list)
    states: int = 0
    product_states: int = 0
    reason: str = ""

    @property
    def counterexample(self) -> bool:
        return self.holds is False


def _label_ok(k: Kripke, i: int, lits, cache) -> bool:
    for lit in lits:
        if isinstance(lit, Prop):
            if not holds_prop(k, i, lit, cache):
                return False
        elif holds_prop(k, i, lit.arg, cache):
            return False
    return True


def find_accepting_lasso(k: Kripke, ba: Buchi):
    """Nested DFS on the degeneralized product.  Returns (path, cycle) as
    lists of ((kripke state, automaton state, counter), event) or None."""
    cache: dict = {}
    n_acc = len(ba.accepting)

    def accepting(node):
        _, q, c = node
        return n_acc == 0 or (c == 0 and q in ba.accepting[0])

    def successors(node):
        i, q, c = node
        if n_acc == 0:
            c2 = 0
        else:
            c2 = (c + 1) % n_acc if q in ba.accepting[c] else c
        out = []
        for ev, j in k.succ[i]:
            for q2 in ba.succ[q]:
                if _label_ok(k, j, ba.labels[q2], cache):
                    out.append((ev, (j, q2, c2)))
        return out

    inits = [(k.init, q, 0) for q in ba.initial if _label_ok(k, k.init, ba.labels[q], cache)]
    visited1, visited2 = set(), set()
    for root in inits:
        if root in visited1:
            continue
        # outer DFS with explicit stack of (node, iterator, event-in)
        visited1.add(root)
        stack = [(root, iter(successors(root)), None)]
        on_stack = [root]
        while stack:
            node, it, _ = stack[-1]
            advanced = False
            for ev, nxt in it:
                if nxt not in visited1:
                    visited1.add(nxt)
                    stack.append((nxt, iter(successors(nxt)), ev))
                    on_stack.append(nxt)
                    advanced = True
                    break
            if advanced:
                continue
            # post-order: inner search from accepting nodes
            if accepting(node):
                cyc = _inner_dfs(node, successors, visited2, set(on_stack))
                if cyc is not None:
                    path = [(n, ev) for n, _, ev in stack]
                    return path, cyc
            stack.pop()
            on_stack.pop()
    return None, len(visited1) + len(visited2)


def _inner_dfs(seed, successors, visited2, on_stack):
    """Search a path from ``seed`` back to any node on the outer stack
    (which closes a cycle through the accepting seed)."""
    if seed in visited2:
        return None
    visited2.add(seed)
    stack = [(seed, iter(successors(seed)), None)]
    while stack:
        node, it, _ = stack[-1]
        advanced = False
        for ev, nxt in it:
            if nxt in on_stack:
                path = [(n, e) for n, _, e in stack[1:]] + [(nxt, ev)]
                return nxt, path
            if nxt not in visited2:
                visited2.add(nxt)
                stack.append((nxt, iter(successors(nxt)), ev))
                advanced = True
                break
        if not advanced:
            stack.pop()
    return None


def check_kripke(k: Kripke, phi: LTL) -> LtlResult:
    """A-semantics: phi holds on every infinite run from the initial state."""
    ba = build_buchi(LNot(phi))
    found, *rest = find_accepting_lasso(k, ba)
    if found is None:
        return LtlResult(True, states=len(k.states), product_states=rest[0])
    path = found
    target, cyc = rest[0]
    # the stem ends at the node where the cycle re-enters the outer stack
    nodes = [n for n, _ in path]
    cut = nodes.index(target)
    stem = path[: cut + 1]
    loop = path[cut + 1:] + cyc
    return LtlResult(
        False,
        stem=[n[0] for n, _ in stem],
        stem_events=[ev for _, ev in stem[1:]],
        cycle=[n[0] for n, _ in loop],
        cycle_events=[ev for _, ev in loop],
        states=len(k.states),
    )


def model_check(init, net, phi, step=1, strategy=None, max_states=200_000,
                existential: bool = False) -> LtlResult:
    """Check an LTL formula (text or LTL) on the sampled graph of a ground
    net.  ``existential`` asks whether some run satisfies it, via
    E(phi) = not A(not phi); the returned lasso is then a witness."""
    cn = compile_net(net)
    if isinstance(phi, str):
        phi = parse_ltl(phi, cn.places)
    graph = reachable(init, cn, step=step, strategy=strategy, max_states=max_states)
    if graph is None:
        return LtlResult(None, reason=f"state budget of {max_states} exceeded")
    states, edges = graph

    def valuation(i):
        s = states[i]
        env = dict(zip(cn.places, s.marking))
        if s.time is not None:
            env["GT"] = s.time
        return env

    k = Kripke.from_reachable(states, edges, valuation)
    if not existential:
        return check_kripke(k, phi)
    res = check_kripke(k, LNot(phi))
    res.holds = None if res.holds is None else not res.holds
    return res


# --------------------------------------------------------------------------
# brute-force reference


def eval_on_lasso(phi: LTL, labels: list, loop: int, prop_value) -> bool:
    """Truth of phi at position 0 of the ultimately periodic word
    labels[0..n-1] (labels[n-1] loops back to labels[loop])."""
    n = len(labels)

    def nxt(i):
        return i + 1 if i < n - 1 else loop

    memo = {}

    def sat(f) -> list:
        if f in memo:
            return memo[f]
        if isinstance(f, LTrue):
            r = [True] * n
        elif isinstance(f, LFalse):
            r = [False] * n
        elif isinstance(f, Prop):
            r = [prop_value(labels[i], f) for i in range(n)]
        elif isinstance(f, LNot):
            r = [not v for v in sat(f.arg)]
        elif isinstance(f, LAnd):
            a, b = sat(f.left), sat(f.right)
            r = [x and y for x, y in zip(a, b)]
        elif isinstance(f, LOr):
            a, b = sat(f.left), sat(f.right)
            r = [x or y for x, y in zip(a, b)]
        elif isinstance(f, Next):
            a = sat(f.arg)
            r = [a[nxt(i)] for i in range(n)]
        elif isinstance(f, Until):
            a, b = sat(f.left), sat(f.right)
            r = list(b)
            changed = True
            while changed:
                changed = False
                for i in range(n):
                    if not r[i] and a[i] and r[nxt(i)]:
                        r[i] = True
                        changed = True
        elif isinstance(f, Release):
            r = [not v for v in sat(Until(nnf(f.left, True), nnf(f.right, True)))]
        else:
            raise TypeError(f"not an LTL formula: {f!r}")
        memo[f] = r
        return r

    return sat(phi)[0]


def brute_force_check(k: Kripke, phi: LTL, bound: Optional[int] = None) -> bool:
    """A-semantics by enumerating every lasso whose stem plus cycle visits
    at most ``bound`` positions (default: number of states).  Exponential;
    meant for graphs of a few dozen states."""
    bound = bound or len(k.states)
    cache: dict = {}

    def prop_value(i, p):
        return holds_prop(k, i, p, cache)

    path = [k.init]

    def dfs() -> bool:
        i = path[-1]
        for _, j in k.succ[i]:
            for loop, s in enumerate(path):
                if s == j and not eval_on_lasso(phi, path, loop, prop_value):
                    return False
            if len(path) < bound:
                path.append(j)
                ok = dfs()
                path.pop()
                if not ok:
                    return False
        return True

    return dfs()
