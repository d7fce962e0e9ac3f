"""Command line front end: ``pitpn check|synth|simulate|mc|bench``.

Exit codes: 0 when a verdict was obtained, 2 when the run was
inconclusive (budget exhausted, solver unknown), 3 on input errors.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import bench as B
from .models import BUNDLED, load_model, romeo_path
from .native import load_native
from .net import NetError, validate
from .query import ENGINES, QueryError, QueryFile, load_query, run_query
from .romeo import RomeoError, load_romeo
from .smt import SolverError
from .syntax import SyntaxError_

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 2, 3

_COMMAND_KINDS = {
    "check": ("search-ef", "check-ag", "bounded-response"),
    "synth": ("ef-synth", "ag-synth", "ef-timed"),
    "simulate": ("simulate",),
    "mc": ("mc-ltl",),
}


def _fail(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_INPUT)


def load_net(model: str, fmt: str | None):
    """A path (native or Romeo XML) or the name of a bundled model."""
    if fmt is None:
        fmt = "romeo" if model.endswith(".xml") else "native"
    if not os.path.exists(model):
        if model in BUNDLED:
            if fmt == "romeo":
                path = romeo_path(model)
                if not path.is_file():
                    raise NetError(f"no Romeo variant of bundled model {model}")
                net, diags = load_romeo(str(path))
                return net, diags
            return load_model(model), []
        raise NetError(f"model file {model} not found")
    if fmt == "romeo":
        return load_romeo(model)
    return load_native(model), []


def _common(f):
    opts = [
        click.option("--model", "-m", required=True, help="Model file or bundled model name."),
        click.option("--format", "fmt", type=click.Choice(["native", "romeo"]), default=None,
                     help="Model format (default: by file extension)."),
        click.option("--query", "-q", default=None,
                     help="Query file, or inline 'key: value; ...' text."),
        click.option("--engine", type=click.Choice(ENGINES), default=None),
        click.option("--timeout", type=float, default=None, help="Budget in seconds."),
        click.option("--solver", "solver_path", default=None, help="Path to the z3 binary."),
        click.option("--report", "report_fmt", type=click.Choice(["json", "text"]),
                     default="text"),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _execute(command: str, model, fmt, query, engine, timeout, solver_path, report_fmt,
             default_query=None):
    try:
        net, diags = load_net(model, fmt)
        for d in diags:
            click.echo(f"warning: {d}", err=True)
        problems = validate(net)
        if problems:
            raise NetError("; ".join(problems))
        if query is None:
            if default_query is None:
                raise QueryError("--query is required")
            q = default_query
        elif command == "mc" and not os.path.isfile(query) and "kind" not in query:
            q = QueryFile("mc-ltl", formula=query)
        else:
            q = load_query(query)
        if q.kind not in _COMMAND_KINDS[command]:
            raise QueryError(f"'{command}' runs {', '.join(_COMMAND_KINDS[command])} queries, "
                             f"not {q.kind}")
        if engine is not None:
            q.engine = engine
        if timeout is not None:
            q.timeout = timeout
        report = run_query(net, q, solver_path=solver_path, model_name=net.name)
    except (NetError, RomeoError, QueryError, SyntaxError_, OSError) as exc:
        _fail(str(exc))
    except SolverError as exc:
        click.echo(f"error: solver: {exc}", err=True)
        sys.exit(EXIT_INCONCLUSIVE)
    click.echo(report.render(report_fmt))
    sys.exit(EXIT_OK if report.conclusive else EXIT_INCONCLUSIVE)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Analysis of parametric time Petri nets with inhibitor arcs."""


@main.command()
@_common
def check(model, fmt, query, engine, timeout, solver_path, report_fmt):
    """Reachability, invariance and bounded-response checks."""
    _execute("check", model, fmt, query, engine, timeout, solver_path, report_fmt)


@main.command()
@_common
def synth(model, fmt, query, engine, timeout, solver_path, report_fmt):
    """Parameter synthesis (EF, AG, time-bounded EF)."""
    _execute("synth", model, fmt, query, engine, timeout, solver_path, report_fmt)


@main.command()
@_common
def simulate(model, fmt, query, engine, timeout, solver_path, report_fmt):
    """Random time-sampled run of the (instantiated) net."""
    _execute("simulate", model, fmt, query, engine, timeout, solver_path, report_fmt,
             default_query=QueryFile("simulate"))


@main.command()
@_common
def mc(model, fmt, query, engine, timeout, solver_path, report_fmt):
    """LTL model checking on the time-sampled state graph."""
    _execute("mc", model, fmt, query, engine, timeout, solver_path, report_fmt)


@main.command("bench")
@click.option("--models", default=",".join(B.MODELS), help="Comma separated bundled models.")
@click.option("--n", "ns", default="0,1,2", help="Comma separated thresholds for EF(p > n).")
@click.option("--engines", default=",".join(B.ENGINES), help="unfolded and/or folded.")
@click.option("--no-safety", is_flag=True, help="Skip the AG 1-safe rows.")
@click.option("--timeout", type=float, default=B.DEFAULT_TIMEOUT, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--solver", "solver_path", default=None)
@click.option("--report", "report_fmt", type=click.Choice(["json", "text"]), default="text")
def bench_cmd(models, ns, engines, no_safety, timeout, jobs, solver_path, report_fmt):
    """Replay the EF(p > n) and 1-safety benchmark table."""
    try:
        model_list = [m.strip() for m in models.split(",") if m.strip()]
        unknown = [m for m in model_list if m not in BUNDLED]
        if unknown:
            raise QueryError(f"unknown models: {', '.join(unknown)}")
        n_list = tuple(int(x) for x in ns.split(",") if x.strip())
        eng = tuple(e.strip() for e in engines.split(",") if e.strip())
        bad = [e for e in eng if e not in B.ENGINES]
        if bad:
            raise QueryError(f"unknown engines: {', '.join(bad)}")
    except (ValueError, QueryError) as exc:
        _fail(str(exc))
    cells = B.suite(model_list, n_list, eng, safety=not no_safety)

    def progress(r):
        if report_fmt == "text":
            click.echo(f"  {r.cell.model} {r.cell.query} [{r.cell.engine}]: {r.verdict} "
                       f"({r.seconds:.2f}s)", err=True)

    results = B.bench(cells, timeout=timeout, solver_path=solver_path, jobs=jobs,
                      progress=progress)
    if report_fmt == "json":
        click.echo(json.dumps(B.to_records(results), indent=2))
    else:
        click.echo(B.table(results))
    sys.exit(EXIT_OK if all(r.conclusive for r in results) else EXIT_INCONCLUSIVE)


if __name__ == "__main__":
    main()
