"""Native text format for nets.

    net <name>
    param <id> : real|int
    constraint <formula>
    place <id> = <int-expr>
    trans <id> : <pre-list> -> <post-list> [inhibit <list>] in [<expr>, <expr>|inf]

Lists are comma separated ``place`` or ``k*place`` items and may be empty.
``#`` starts a comment when it is the first non-blank character of a line or
is preceded by whitespace.
"""

from __future__ import annotations

import re

from .logic import INT, REAL, TRUE, LinExpr, Var, conj, render_formula, render_term
from .net import INF, Interval, Net, Transition
from .syntax import SyntaxError_, parse_expr, parse_formula

_COMMENT = re.compile(r"(^|\s)#(?![A-Za-z]).*$")


def _strip(line: str) -> str:
    return _COMMENT.sub("", line).strip()


def _arc_list(text: str, line_no: int) -> list:
    text = text.strip()
    if not text or text in ("-", "()"):
        return []
    out = []
    for item in text.split(","):
        item = item.strip()
        m = re.fullmatch(r"(?:(\d+)\s*\*\s*)?([A-Za-z_][A-Za-z0-9_.']*)", item)
        if not m:
            raise SyntaxError_(f"bad arc item {item!r}", line_no)
        out.append((m.group(2), int(m.group(1) or 1)))
    return out


_TRANS = re.compile(
    r"^trans\s+(?P<id>\S+)\s*:\s*(?P<pre>[^>]*?)\s*->(?P<post>.*?)"
    r"(?:\s+inhibit\s+(?P<inh>.*?))?\s+in\s*\[(?P<lo>[^,\]]+),(?P<hi>[^\]]+)\]\s*$"
)


def parse_native(text: str) -> Net:
    name = None
    params = {}
    places = []
    marking_src = {}
    constraints = []
    trans_src = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        head = line.split(None, 1)[0]
        rest = line[len(head):].strip()
        if head == "net":
            if not rest:
                raise SyntaxError_("net needs a name", line_no)
            name = rest
        elif head == "param":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(real|int)", rest)
            if not m:
                raise SyntaxError_(f"bad parameter declaration {rest!r}", line_no)
            if m.group(1) in params:
                raise SyntaxError_(f"duplicate parameter {m.group(1)}", line_no)
            params[m.group(1)] = REAL if m.group(2) == "real" else INT
        elif head == "constraint":
            constraints.append((rest, line_no))
        elif head == "place":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_.']*)\s*(?:=\s*(.+))?", rest)
            if not m:
                raise SyntaxError_(f"bad place declaration {rest!r}", line_no)
            if m.group(1) in marking_src:
                raise SyntaxError_(f"duplicate place {m.group(1)}", line_no)
            places.append(m.group(1))
            marking_src[m.group(1)] = (m.group(2) or "0", line_no)
        elif head == "trans":
            m = _TRANS.match(line)
            if not m:
                raise SyntaxError_(f"bad transition declaration {line!r}", line_no)
            trans_src.append((m, line_no))
        else:
            raise SyntaxError_(f"unknown section {head!r}", line_no)
    if name is None:
        raise SyntaxError_("missing 'net <name>' line")

    def resolve(ident: str) -> LinExpr:
        if ident not in params:
            raise SyntaxError_(f"unknown parameter {ident!r}")
        return LinExpr.of(Var(ident, params[ident]))

    def expr(src: str, line_no: int) -> LinExpr:
        try:
            return parse_expr(src, resolve)
        except SyntaxError_ as exc:
            raise SyntaxError_(str(exc), line_no) from None

    marking = {p: expr(src, ln) for p, (src, ln) in marking_src.items()}
    transitions = []
    for m, ln in trans_src:
        lo = expr(m.group("lo"), ln)
        hi_src = m.group("hi").strip()
        hi = INF if hi_src == "inf" else expr(hi_src, ln)
        transitions.append(Transition.make(
            m.group("id"),
            _arc_list(m.group("pre"), ln),
            _arc_list(m.group("post"), ln),
            _arc_list(m.group("inh") or "", ln),
            Interval(lo, hi),
        ))
    cons = []
    for src, ln in constraints:
        try:
            cons.append(parse_formula(src, resolve))
        except SyntaxError_ as exc:
            raise SyntaxError_(str(exc), ln) from None
    if not places:
        raise SyntaxError_("a net needs at least one place")
    if not transitions:
        raise SyntaxError_("a net needs at least one transition")
    time_params = tuple(p for p, s in params.items() if s == REAL)
    marking_params = tuple(p for p, s in params.items() if s == INT)
    return Net.make(name, places, transitions, marking, time_params, marking_params,
                    conj(cons) if cons else TRUE)


def _arcs_text(arcs) -> str:
    return ", ".join(p if w == 1 else f"{w}*{p}" for p, w in arcs)


def print_native(net: Net) -> str:
    lines = [f"net {net.name}"]
    for p in net.time_params:
        lines.append(f"param {p} : real")
    for p in net.marking_params:
        lines.append(f"param {p} : int")
    if net.init_constraint != TRUE:
        lines.append(f"constraint {render_formula(net.init_constraint)}")
    for p, e in net.init_marking:
        lines.append(f"place {p} = {render_term(e)}")
    for t in net.transitions:
        hi = "inf" if t.interval.hi is INF else render_term(t.interval.hi)
        line = f"trans {t.id} : {_arcs_text(t.pre)} -> {_arcs_text(t.post)}"
        if t.inhibit:
            line += f" inhibit {_arcs_text(t.inhibit)}"
        line += f" in [{render_term(t.interval.lo)}, {hi}]"
        lines.append(line)
    return "\n".join(lines) + "\n"


def load_native(path) -> Net:
    with open(path, encoding="utf-8") as fh:
        return parse_native(fh.read())
