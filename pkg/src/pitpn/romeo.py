"""Importer for Romeo-style XML nets.

Accepted subset (anything else yields a diagnostic and is skipped):

* ``<TPN name=...>`` root (any root tag is accepted).
* ``<place id=... label=... initialMarking=...>``; the marking may be an
  integer or an integer parameter name.
* ``<transition id=... label=... eft=... lft=...>``; bounds are numbers,
  ``inf``/``infini``/empty for an unbounded latest time, or linear
  expressions over parameters such as ``2*a``.  ``eft_param``/``lft_param``
  attributes, when present, name a parameter that replaces the bound.
* ``<arc place=... transition=... type=... weight=...>`` with type
  ``PlaceTransition``, ``TransitionPlace``, ``logicalInhibitor`` or
  ``inhibitor``.  ``source``/``target`` attributes naming place and
  transition ids or labels are accepted instead of ``place``/``transition``.
* ``<parameter name=... [type=int|real]/>`` declarations (optional: names
  used in bounds are declared implicitly as real time parameters) and
  ``<constraint>formula</constraint>`` or ``<parameter ... constraint=...>``.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .logic import INT, REAL, TRUE, LinExpr, Var, conj
from .net import INF, Interval, Net, Transition
from .syntax import SyntaxError_, parse_expr, parse_formula


class RomeoError(Exception):
    """Malformed XML or an unusable model."""


_INF_WORDS = {"", "inf", "infini", "infinity", "oo", "-1"}
_ARC_KINDS = {
    "placetransition": "pre",
    "transitionplace": "post",
    "logicalinhibitor": "inhibit",
    "inhibitor": "inhibit",
}
_IGNORED = {"graphics", "position", "deltaLabel", "scheduling", "preferences",
            "colorPlace", "colorTransition", "colorArc", "nail", "colorArcs", "color"}


# children of these carry layout or tool data; skip them silently
_CONTAINERS = _IGNORED | {"place", "transition", "arc"}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_romeo(text: str, name: str | None = None):
    """(Net, diagnostics) for the XML document ``text``."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise RomeoError(f"malformed XML: {exc}") from None
    diags = []
    params: dict = {}
    constraints = []
    places = []  # (id, label, marking text)
    transitions = []  # (id, label, eft, lft, eft_param, lft_param)
    arcs = []
    parents = {c: p for p in root.iter() for c in p}
    for el in root.iter():
        tag = _local(el.tag)
        if el is root:
            continue
        if tag == "place":
            pid = el.get("id")
            label = el.get("label") or (f"p{pid}" if pid is not None else None)
            if label is None:
                diags.append("place without id or label skipped")
                continue
            places.append((pid if pid is not None else label, label,
                           (el.get("initialMarking") or "0").strip()))
        elif tag == "transition":
            tid = el.get("id")
            label = el.get("label") or (f"t{tid}" if tid is not None else None)
            if label is None:
                diags.append("transition without id or label skipped")
                continue
            transitions.append((tid if tid is not None else label, label,
                                (el.get("eft") or "0").strip(), (el.get("lft") or "").strip(),
                                el.get("eft_param"), el.get("lft_param")))
        elif tag == "arc":
            arcs.append(dict(el.attrib))
        elif tag == "parameter":
            pname = el.get("name") or el.get("id")
            if not pname:
                diags.append("parameter without name skipped")
                continue
            sort = INT if (el.get("type") or "").lower() in ("int", "integer", "nat") else REAL
            params[pname] = sort
            if el.get("constraint"):
                constraints.append(el.get("constraint"))
        elif tag == "constraint":
            if el.text and el.text.strip():
                constraints.append(el.text.strip())
        elif tag in ("parameters", "constraints", "TPN", "PTPN"):
            continue
        elif tag in _IGNORED:
            continue
        elif _local(parents[el].tag) not in _CONTAINERS:
            diags.append(f"unknown element <{tag}> ignored")

    # implicit parameters: identifiers used in bounds or markings
    def declare_implicit(sort: str):
        def resolve(ident):
            if ident not in params:
                params[ident] = sort
            return LinExpr.of(Var(ident, params[ident]))

        return resolve

    for _, _, eft, lft, ep, lp in transitions:
        for src in (eft, lft):
            if src.lower() not in _INF_WORDS:
                try:
                    parse_expr(src, declare_implicit(REAL))
                except SyntaxError_:
                    pass
        for pn in (ep, lp):
            if pn:
                params.setdefault(pn, REAL)
    for _, _, mk in places:
        if mk and not mk.lstrip("-").isdigit():
            try:
                parse_expr(mk, declare_implicit(INT))
            except SyntaxError_:
                pass

    def resolve(ident):
        if ident not in params:
            raise SyntaxError_(f"unknown parameter {ident!r}")
        return LinExpr.of(Var(ident, params[ident]))

    def bound(src: str, what: str):
        try:
            return parse_expr(src, resolve)
        except SyntaxError_ as exc:
            diags.append(f"{what}: unparseable bound {src!r} ({exc})")
            return None

    place_by_id = {}
    labels = []
    marking = {}
    for pid, label, mk in places:
        if label in marking:
            diags.append(f"duplicate place {label}")
            continue
        place_by_id[pid] = label
        place_by_id[label] = label
        labels.append(label)
        e = bound(mk, f"place {label} marking")
        marking[label] = e if e is not None else LinExpr.of(0)

    trans_arcs = {}
    trans_by_id = {}
    for tid, label, *_ in transitions:
        trans_by_id[tid] = label
        trans_by_id[label] = label
        trans_arcs[label] = {"pre": {}, "post": {}, "inhibit": {}}
    for a in arcs:
        kind_src = (a.get("type") or "").strip()
        kind = _ARC_KINDS.get(kind_src.lower())
        place_ref = a.get("place")
        trans_ref = a.get("transition")
        if place_ref is None or trans_ref is None:
            src, dst = a.get("source"), a.get("target")
            if src in place_by_id and dst in trans_by_id:
                place_ref, trans_ref = src, dst
                kind = kind or ("pre" if kind_src.lower() in ("", "normal") else kind)
            elif src in trans_by_id and dst in place_by_id:
                place_ref, trans_ref = dst, src
                kind = kind or ("post" if kind_src.lower() in ("", "normal") else kind)
        if kind is None:
            raise RomeoError(f"unknown arc type {kind_src!r}")
        if place_ref not in place_by_id or trans_ref not in trans_by_id:
            diags.append(f"arc between unknown nodes {place_ref!r} and {trans_ref!r} skipped")
            continue
        try:
            w = int(a.get("weight") or 1)
        except ValueError:
            diags.append(f"arc weight {a.get('weight')!r} is not an integer; using 1")
            w = 1
        p, t = place_by_id[place_ref], trans_by_id[trans_ref]
        d = trans_arcs[t][kind]
        d[p] = d.get(p, 0) + w

    ts = []
    for tid, label, eft, lft, ep, lp in transitions:
        lo = LinExpr.of(Var(ep, params[ep])) if ep else bound(eft, f"transition {label} eft")
        if lp:
            hi = LinExpr.of(Var(lp, params[lp]))
        elif lft.lower() in _INF_WORDS:
            hi = INF
        else:
            hi = bound(lft, f"transition {label} lft")
            if hi is None:
                hi = INF
        if lo is None:
            lo = LinExpr.of(0)
        arcs_t = trans_arcs[label]
        ts.append(Transition.make(label, arcs_t["pre"], arcs_t["post"], arcs_t["inhibit"],
                                  Interval(lo, hi)))

    cons = []
    for c in constraints:
        try:
            cons.append(parse_formula(c, resolve))
        except SyntaxError_ as exc:
            diags.append(f"unparseable constraint {c!r} ({exc})")
    if not labels:
        raise RomeoError("model has no places")
    if not ts:
        raise RomeoError("model has no transitions")
    time_params = tuple(p for p, s in params.items() if s == REAL)
    marking_params = tuple(p for p, s in params.items() if s == INT)
    net = Net.make(name or root.get("name") or "romeo", labels, ts, marking,
                   time_params, marking_params, conj(cons) if cons else TRUE)
    return net, diags


def load_romeo(path):
    with open(path, encoding="utf-8") as fh:
        return parse_romeo(fh.read())
