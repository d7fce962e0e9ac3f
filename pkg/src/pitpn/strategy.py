"""Execution strategies: ordered preference tiers over transitions with an
implicit final tier of everything else.

``prefer(t3) or-else all`` fires only t3 whenever t3 can fire and falls
back to every option otherwise.  The strategy is applied at every step of
a search.  Time elapse is never removed by a tier.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable

from .net import Net
from .syntax import SyntaxError_


@dataclass(frozen=True)
class Strategy:
    name: str
    tiers: tuple  # tuple of frozensets of transition ids

    def validate(self, net: Net):
        known = set(net.transition_ids)
        for tier in self.tiers:
            for tid in tier:
                if tid not in known:
                    raise SyntaxError_(f"strategy {self.name}: unknown transition {tid}")

    def filter(self, fires: list, tick_allowed: bool,
               applicable: Callable[[str], bool]) -> tuple:
        """Restrict candidate firings; returns (fires, tick_allowed)."""
        for tier in self.tiers:
            chosen = [f for f in fires if f in tier and applicable(f)]
            if chosen:
                return chosen, tick_allowed
        return list(fires), tick_allowed


ALL = Strategy("all", ())


def prefer(*tiers: Iterable[str], name: str = "") -> Strategy:
    ts = tuple(frozenset([t] if isinstance(t, str) else t) for t in tiers)
    return Strategy(name or "prefer", ts)


_PREFER = re.compile(r"prefer\s*\(([^)]*)\)")


def parse_strategy(text: str, net: Net | None = None) -> Strategy:
    """``[strategy <name> =] prefer(a, b) or-else prefer(c) or-else all``"""
    text = text.strip()
    name = "strategy"
    m = re.match(r"^strategy\s+([A-Za-z_][\w\-]*)\s*=\s*(.*)$", text)
    if m:
        name, text = m.group(1), m.group(2)
    parts = [p.strip() for p in re.split(r"\bor-else\b", text)]
    tiers = []
    for i, part in enumerate(parts):
        if part == "all":
            if i != len(parts) - 1:
                raise SyntaxError_("'all' must be the last alternative")
            break
        pm = _PREFER.fullmatch(part)
        if not pm:
            raise SyntaxError_(f"bad strategy alternative {part!r}")
        ids = [x.strip() for x in pm.group(1).split(",") if x.strip()]
        if not ids:
            raise SyntaxError_("prefer() needs at least one transition")
        tiers.append(frozenset(ids))
    s = Strategy(name, tuple(tiers))
    if net is not None:
        s.validate(net)
    return s
