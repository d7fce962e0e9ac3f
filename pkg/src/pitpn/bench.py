"""Benchmark harness: EF(p > n) per place and AG 1-safe per model, across
the unfolded and folded symbolic engines, with a per-cell timeout."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .folding import folded_search
from .logic import TRUE
from .models import load_model, place_label
from .predicate import k_safe, parse_predicate
from .smt import SolverError
from .symbolic import SolverUnknown, SymbolicEngine
from .synthesis import FOLDED, UNFOLDED, SolverConfig

MODELS = ("tutorial", "producer_consumer", "scheduling")
ENGINES = (UNFOLDED, FOLDED)
DEFAULT_TIMEOUT = 600.0

YES, NO, TO = "yes", "no", "TO"


@dataclass(frozen=True)
class Cell:
    model: str
    query: str  # "EF(p > n)" or "AG 1-safe"
    place: Optional[str]
    n: Optional[int]
    engine: str


@dataclass
class CellResult:
    cell: Cell
    verdict: str  # yes / no / TO
    seconds: float
    states: int = 0
    note: str = ""

    @property
    def conclusive(self) -> bool:
        return self.verdict != TO


def suite(models=MODELS, ns=(0, 1, 2), engines=ENGINES, safety: bool = True) -> list:
    cells = []
    for m in models:
        net = load_model(m)
        for n in ns:
            for p in net.places:
                for e in engines:
                    cells.append(Cell(m, f"EF({p} > {n})", p, n, e))
        if safety:
            for e in engines:
                cells.append(Cell(m, "AG 1-safe", None, None, e))
    return cells


def run_cell(cell: Cell, timeout: float = DEFAULT_TIMEOUT, solver_path: Optional[str] = None) -> CellResult:
    """EF cells answer yes when a state is found; AG cells answer yes when
    the folded or unfolded search for a violation completes empty."""
    net = load_model(cell.model)
    solver = SolverConfig(path=solver_path).open()
    start = time.monotonic()
    try:
        ef = cell.place is not None
        goal = parse_predicate(f"{cell.place} > {cell.n}", net) if ef else k_safe(net, 1).negated()
        engine = SymbolicEngine(net, solver)
        init = engine.init_state(TRUE)
        if cell.engine == FOLDED:
            res = folded_search(engine, init, goal, n_solutions=1, time_budget=timeout)
        else:
            res = engine.search(init, goal, n_solutions=1, time_budget=timeout)
        took = time.monotonic() - start
        if res.solutions:
            verdict = YES if ef else NO
        elif res.complete and not res.stats.unknown:
            verdict = NO if ef else YES
        else:
            verdict = TO
        return CellResult(cell, verdict, took, res.stats.states, res.reason)
    except (SolverUnknown, SolverError) as exc:
        return CellResult(cell, TO, time.monotonic() - start, 0, f"solver: {exc}")
    finally:
        solver.close()


def _run_packed(args):
    return run_cell(*args)


def bench(cells=None, timeout: float = DEFAULT_TIMEOUT, solver_path: Optional[str] = None,
          jobs: int = 1, progress=None) -> list:
    """Run every cell (in parallel when ``jobs`` > 1, one solver process per
    cell) and return the results in cell order."""
    cells = list(cells if cells is not None else suite())
    if jobs <= 1:
        out = []
        for c in cells:
            r = run_cell(c, timeout, solver_path)
            if progress:
                progress(r)
            out.append(r)
        return out
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        out = list(pool.map(_run_packed, [(c, timeout, solver_path) for c in cells]))
    if progress:
        for r in out:
            progress(r)
    return out


def _fmt_cell(r: Optional[CellResult]) -> str:
    if r is None:
        return "-"
    if r.verdict == TO:
        return "TO"
    return f"{r.verdict} {r.seconds * 1000:.0f}ms"


def table(results: list) -> str:
    """One block per query family: rows model/place, one column per engine."""
    engines = list(dict.fromkeys(r.cell.engine for r in results))
    by_key = {(r.cell.model, r.cell.query, r.cell.engine): r for r in results}
    blocks = []
    ns = sorted({r.cell.n for r in results if r.cell.n is not None})
    for n in ns:
        rows = [("Model", "Place reached", *engines)]
        seen = []
        for r in results:
            c = r.cell
            if c.n == n and (c.model, c.place) not in seen:
                seen.append((c.model, c.place))
        for model, place in seen:
            q = f"EF({place} > {n})"
            rows.append((model, place_label(model, place),
                         *[_fmt_cell(by_key.get((model, q, e))) for e in engines]))
        blocks.append((f"EF(p > {n})", rows))
    safety = [r for r in results if r.cell.place is None]
    if safety:
        rows = [("Model", "", *engines)]
        for model in dict.fromkeys(r.cell.model for r in safety):
            rows.append((model, "1-safe",
                         *[_fmt_cell(by_key.get((model, "AG 1-safe", e))) for e in engines]))
        blocks.append(("AG 1-safe", rows))
    out = []
    for title, rows in blocks:
        widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
        out.append(title)
        for i, row in enumerate(rows):
            out.append("  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip())
            if i == 0:
                out.append("  ".join("-" * w for w in widths))
        out.append("")
    return "\n".join(out)


def to_records(results: list) -> list:
    return [
        {"model": r.cell.model, "query": r.cell.query,
         "place": place_label(r.cell.model, r.cell.place) if r.cell.place else None,
         "engine": r.cell.engine, "verdict": r.verdict, "conclusive": r.conclusive,
         "seconds": round(r.seconds, 3), "states": r.states, "note": r.note}
        for r in results
    ]
