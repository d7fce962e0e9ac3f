"""Gateway to an external SMT solver speaking SMT-LIB2 over pipes."""

from __future__ import annotations

import os
import select
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import smtlib
from .logic import (
    And,
    EvaluationError,
    Exists,
    Formula,
    Not,
    Or,
    Var,
    conj,
    disj,
    evaluate,
    free_vars,
    iff,
    implies,
    negate,
)

DEFAULT_TIMEOUT = 60.0
QE_TACTIC = "(then qe simplify)"
SIMPLIFY_TACTIC = "(then simplify propagate-ineqs ctx-solver-simplify simplify)"
SOLVER_ENV = "PITPN_SOLVER"


@dataclass(frozen=True)
class Sat:
    model: dict = field(default_factory=dict)

    is_sat = True
    is_unsat = False
    is_unknown = False


@dataclass(frozen=True)
class Unsat:
    is_sat = False
    is_unsat = True
    is_unknown = False


@dataclass(frozen=True)
class Unknown:
    reason: str = ""

    is_sat = False
    is_unsat = False
    is_unknown = True


SmtResult = Sat | Unsat | Unknown


class SolverError(Exception):
    pass


class Unsupported(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


def default_solver_path() -> str:
    path = os.environ.get(SOLVER_ENV) or shutil.which("z3")
    if not path:
        raise SolverError("no z3 binary found; install z3-solver or set PITPN_SOLVER")
    return path


@dataclass
class SolverStats:
    calls: int = 0
    time: float = 0.0
    qe_calls: int = 0


class SmtLibProcess:
    """One solver process.  Declarations are tracked per push level so that
    every asserted variable is declared exactly once with a consistent sort."""

    name = "smtlib"
    supports_quantifiers = False
    supports_qe = False

    def __init__(self, path: str | None = None, timeout: float = DEFAULT_TIMEOUT,
                 args: tuple = ("-in", "-smt2"), stats: SolverStats | None = None):
        self.path = path or default_solver_path()
        self.args = args
        self.timeout = timeout
        self.stats = stats if stats is not None else SolverStats()
        self.proc = None
        self._start()

    # -- process plumbing

    def _start(self):
        self.proc = subprocess.Popen(
            [self.path, *self.args],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
            bufsize=1,
        )
        self._buf = ""
        self.levels = [dict()]
        self._send("(set-option :print-success false)")
        self._send("(set-option :produce-models true)")
        self._send("(set-logic ALL)")

    def close(self):
        if self.proc is not None:
            try:
                self.proc.stdin.write("(exit)\n")
                self.proc.stdin.flush()
            except (BrokenPipeError, OSError, ValueError):
                pass
            try:
                self.proc.wait(timeout=1)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
            self.proc = None

    def restart(self):
        if self.proc is not None:
            self.proc.kill()
            self.proc.wait()
            self.proc = None
        self._start()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            if self.proc is not None:
                self.proc.kill()
                self.proc.wait()
        except Exception:
            pass

    def _send(self, cmd: str):
        try:
            self.proc.stdin.write(cmd + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise SolverError(f"solver pipe closed: {exc}") from exc

    def _read_response(self, deadline: float) -> str:
        """Read one complete s-expression (or bare token) from the solver."""
        fd = self.proc.stdout.fileno()
        text = self._buf
        while True:
            stripped = text.strip()
            if stripped:
                if stripped.startswith("("):
                    if smtlib.paren_balance(stripped) == 0 and stripped.endswith(")"):
                        break
                elif "\n" in text.lstrip():
                    break
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise SolverTimeout("solver did not answer in time")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536).decode()
            if not chunk:
                raise SolverError("solver exited: " + text.strip())
            text += chunk
        self._buf = ""
        return text.strip()

    def _query(self, cmd: str, timeout: float | None = None) -> str:
        limit = self.timeout if timeout is None else timeout
        self._send(cmd)
        return self._read_response(time.monotonic() + limit + 5)

    # -- declarations and scopes

    def declared(self) -> dict:
        out = {}
        for level in self.levels:
            out.update(level)
        return out

    def declare(self, variables):
        known = self.declared()
        for v in sorted(variables):
            if v.name in known:
                if known[v.name] != v.sort:
                    raise SolverError(f"variable {v.name} redeclared with sort {v.sort}")
                continue
            self._send(smtlib.declare(v))
            self.levels[-1][v.name] = v.sort
            known[v.name] = v.sort

    def push(self):
        self._send("(push 1)")
        self.levels.append(dict())

    def pop(self):
        if len(self.levels) == 1:
            raise SolverError("pop without push")
        self._send("(pop 1)")
        self.levels.pop()

    def _check_quantifiers(self, f: Formula):
        if not self.supports_quantifiers and _has_exists(f):
            raise Unsupported(f"{self.name} adapter is quantifier-free only")

    def assert_(self, f: Formula):
        self._check_quantifiers(f)
        self.declare(free_vars(f))
        self._send(f"(assert {smtlib.formula(f)})")

    # -- queries

    def check(self, want_model: bool = True) -> SmtResult:
        """check-sat on the current assertion stack."""
        start = time.monotonic()
        self.stats.calls += 1
        ms = max(1, int(self.timeout * 1000))
        try:
            self._send(f"(set-option :timeout {ms})")
            answer = self._query("(check-sat)")
        except SolverTimeout:
            self.restart()
            return Unknown("timeout")
        finally:
            self.stats.time += time.monotonic() - start
        if answer == "unsat":
            return Unsat()
        if answer == "sat":
            return Sat(self._model() if want_model else {})
        if answer == "unknown":
            reason = self._query("(get-info :reason-unknown)")
            return Unknown(reason)
        self.restart()
        raise SolverError(f"unexpected solver answer: {answer}")

    def _model(self) -> dict:
        text = self._query("(get-model)")
        exprs = smtlib.parse_sexprs(text)
        if not exprs:
            return {}
        body = exprs[0]
        if body and body[0] == "model":
            body = body[1:]
        reader = smtlib.FormulaReader(self.declared())
        model = {}
        for item in body:
            if not isinstance(item, list) or not item or item[0] != "define-fun":
                continue
            name = item[1][1:-1] if item[1].startswith("|") else item[1]
            if item[2]:
                continue
            value = reader.read_term(item[4])
            if value.is_const:
                model[name] = value.const
        return model

    def check_sat(self, f: Formula, want_model: bool = True) -> SmtResult:
        self.push()
        try:
            self.assert_(f)
            result = self.check(want_model)
        finally:
            if self.proc is not None and len(self.levels) > 1:
                self.pop()
        if result.is_sat and want_model:
            result = Sat(_complete_model(result.model, f))
        return result

    def check_valid(self, f: Formula):
        """True / False / Unknown."""
        r = self.check_sat(negate(f), want_model=False)
        if r.is_unsat:
            return True
        if r.is_sat:
            return False
        return r

    def equiv(self, a: Formula, b: Formula):
        return self.check_valid(iff(a, b))

    def entails(self, a: Formula, b: Formula):
        return self.check_valid(implies(a, b))

    def qe(self, f: Formula) -> Formula:
        raise Unsupported(f"{self.name} adapter has no quantifier elimination")


def _has_exists(f) -> bool:
    if isinstance(f, Exists):
        return True
    if isinstance(f, Not):
        return _has_exists(f.arg)
    if isinstance(f, (And, Or)):
        return any(_has_exists(a) for a in f.args)
    return False


def _complete_model(model: dict, f: Formula) -> dict:
    """Solvers may omit irrelevant variables; give them 0 and keep the model
    only if it still satisfies the formula."""
    out = dict(model)
    for v in free_vars(f):
        out.setdefault(v.name, Fraction(0))
    return out


class Z3Process(SmtLibProcess):
    """QE-capable adapter (z3)."""

    name = "z3"
    supports_quantifiers = True
    supports_qe = True

    def qe(self, f: Formula) -> Formula:
        """Quantifier-free equivalent of ``f`` over its free variables."""
        if not _has_exists(f):
            return f
        self.stats.qe_calls += 1
        out = self.apply_tactic(f, QE_TACTIC)
        if _has_exists(out):
            raise SolverError("quantifier elimination left quantifiers")
        return out

    def simplify(self, f: Formula) -> Formula:
        """Solver-side contextual simplification of a quantifier-free formula."""
        return self.apply_tactic(f, SIMPLIFY_TACTIC)

    def apply_tactic(self, f: Formula, tactic: str) -> Formula:
        """Disjunction of the goals produced by running ``tactic`` on ``f``."""
        start = time.monotonic()
        self.push()
        try:
            self.assert_(f)
            answer = self._query(f"(apply {tactic})")
        except SolverTimeout:
            self.restart()
            raise
        finally:
            self.stats.time += time.monotonic() - start
            if self.proc is not None and len(self.levels) > 1:
                self.pop()
        exprs = smtlib.parse_sexprs(answer)
        if not exprs or not isinstance(exprs[0], list) or exprs[0][0] != "goals":
            self.restart()
            raise SolverError(f"unexpected tactic answer: {answer[:200]}")
        reader = smtlib.FormulaReader({v.name: v.sort for v in free_vars(f)})
        disjuncts = []
        for goal in exprs[0][1:]:
            parts = []
            items = goal[1:]
            i = 0
            while i < len(items):
                it = items[i]
                if isinstance(it, str) and it.startswith(":"):
                    i += 2
                    continue
                parts.append(reader.read_formula(it))
                i += 1
            disjuncts.append(conj(parts))
        return disj(disjuncts)


class QFProcess(SmtLibProcess):
    """Quantifier-free adapter: same protocol, no quantifiers, no QE."""

    name = "qf"


def open_solver(path: str | None = None, timeout: float = DEFAULT_TIMEOUT,
                kind: str = "z3", stats: SolverStats | None = None) -> SmtLibProcess:
    if kind == "z3":
        return Z3Process(path, timeout, stats=stats)
    if kind == "qf":
        return QFProcess(path, timeout, stats=stats)
    raise ValueError(f"unknown solver adapter {kind}")


def model_satisfies(model: dict, f: Formula) -> bool:
    """Native exact-arithmetic re-check of a solver model."""
    try:
        return evaluate(f, model)
    except EvaluationError:
        return False


__all__ = [
    "Sat",
    "Unsat",
    "Unknown",
    "SmtResult",
    "SolverError",
    "Unsupported",
    "SolverStats",
    "SmtLibProcess",
    "Z3Process",
    "QFProcess",
    "open_solver",
    "model_satisfies",
    "DEFAULT_TIMEOUT",
    "QE_TACTIC",
    "Var",
]
