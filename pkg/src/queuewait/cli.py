"""``queuewait`` command line: density tables, moments, transform checks, simulation."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from .errors import ConfigError, DomainError, PrecisionError, QuadratureError, ShapeError
from .lifo_md1 import fifo_moments, lifo_distribution, lifo_moments
from .mm1 import mm1_distribution, mm1_fifo_density, mm1_lifo_density, mm1_siro_density
from .params import Discipline, ServiceLaw, make_params, service_moments
from .siro_md1 import siro_cell_densities, siro_moments
from .simulate import SimConfig, compare_to_analytic, run_sim, z_scores
from .transforms import verify_g_equals_falt

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3, 4
CSV_HEADER = "x,series,value,provenance"


def _num(v: float) -> str:
    return f"{v:.12g}"


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _records_csv(records) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for x, series, value, prov in records:
        buf.write(f"{_num(x)},{series},{_num(value)},{prov}\n")
    return buf.getvalue()


def _json(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA, **payload}, indent=2, sort_keys=True) + "\n"


def _grid(step: float, xmax: float) -> np.ndarray:
    if not (step > 0 and xmax > 0):
        raise ConfigError("--step and --xmax must be positive")
    n = int(math.floor(xmax / step + 1e-9))
    return step * np.arange(1, n + 1)


def cmd_density(args) -> int:
    p = make_params(args.lam, args.mu, args.law)
    d = Discipline.coerce(args.discipline)
    tag = f"{d.value}_{'md1' if p.deterministic else 'mm1'}"
    records = [(0.0, tag + "_atom", 1.0 - p.rho, "analytic")]
    extra = {}

    if p.deterministic and d is Discipline.FIFO:
        sys.stderr.write("M/D/1-FIFO density is not provided analytically; "
                         "use `queuewait simulate --law det --discipline fifo`\n")
        return EXIT_DOMAIN
    if p.deterministic and d is Discipline.SIRO:
        J = args.cells if args.cells is not None else max(1, int(math.ceil(args.xmax / p.a - 1e-9)))
        cells = siro_cell_densities(p, J)
        for j, c in enumerate(cells.cells):
            records.append((j * p.a, tag + "_cells", float(c), "recursion"))
        extra["cells"] = [{"j": j + 1, "lo": j * p.a, "hi": (j + 1) * p.a, "value": float(c)}
                          for j, c in enumerate(cells.cells)]
    else:
        xs = _grid(args.step, args.xmax)
        if p.deterministic:
            pdf, prov = lifo_distribution(p).pdf, "analytic"
        elif d is Discipline.FIFO:
            pdf, prov = (lambda x: mm1_fifo_density(p, x)), "analytic"
        elif d is Discipline.LIFO:
            pdf, prov = (lambda x: mm1_lifo_density(p, x)), "analytic"
        else:
            pdf, prov = (lambda x: mm1_siro_density(p, x)), "quadrature"
        records.extend((float(x), tag, pdf(float(x)), prov) for x in xs)

    if args.format == "json":
        payload = {"command": "density", "lambda": p.lam, "mu": p.mu, "law": p.law.value,
                   "discipline": d.value,
                   "records": [{"x": x, "series": s, "value": v, "provenance": pr}
                               for x, s, v, pr in records], **extra}
        _emit(_json(payload), args.out)
    else:
        _emit(_records_csv(records), args.out)
    return EXIT_OK


def _moment_rows(p):
    m = service_moments(p)
    return [fifo_moments(p, m), lifo_moments(p, m), siro_moments(p, m)]


def cmd_moments(args) -> int:
    p = make_params(args.lam, args.mu, args.law)
    rows = _moment_rows(p)
    if args.format == "json":
        payload = {"command": "moments", "lambda": p.lam, "mu": p.mu, "law": p.law.value,
                   "rows": [{"discipline": r.discipline.value, "mean": r.mean, "variance": r.variance}
                            for r in rows]}
        _emit(_json(payload), args.out)
    else:
        lines = ["discipline,mean,variance"]
        lines += [f"{r.discipline.value},{_num(r.mean)},{_num(r.variance)}" for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    try:
        return [float(t) for t in parts]
    except ValueError:
        raise ConfigError(f"bad --s-grid {text!r}") from None


def cmd_verify(args) -> int:
    p = make_params(args.lam, args.mu, "det")
    s_grid = _parse_grid(args.s_grid)
    report = verify_g_equals_falt(p, args.cells, s_grid)
    records = []
    for s, g, fa, e in zip(report.s, report.g, report.f_alt, report.errors):
        records += [(s, "G", g, "recursion"), (s, "F_alt", fa, "quadrature"),
                    (s, "abs_error", e, "quadrature")]
    if args.format == "json":
        payload = {"command": "verify", "lambda": p.lam, "mu": p.mu, "cells": args.cells,
                   "tol": args.tol, "max_error": report.max_error,
                   "rows": [{"s": s, "G": g, "F_alt": fa, "abs_error": e}
                            for s, g, fa, e in zip(report.s, report.g, report.f_alt, report.errors)]}
        _emit(_json(payload), args.out)
    else:
        _emit(_records_csv(records), args.out)
    return EXIT_OK if report.max_error < args.tol else EXIT_FAIL


def _analytic_density(p, d: Discipline, width: float, n_bins: int):
    if p.law is ServiceLaw.EXPONENTIAL:
        return mm1_distribution(p, d)
    if d is Discipline.LIFO:
        return lifo_distribution(p)
    if d is Discipline.SIRO:
        if not math.isclose(width, p.a, rel_tol=1e-12):
            raise ConfigError("SIRO comparison needs --bin-width equal to the service time")
        return siro_cell_densities(p, n_bins)
    return None  # M/D/1-FIFO: moments only


def cmd_simulate(args) -> int:
    p = make_params(args.lam, args.mu, args.law)
    d = Discipline.coerce(args.discipline)
    width = args.bin_width if args.bin_width is not None else p.a
    cfg = SimConfig(p, d, args.n, warmup=args.warmup, seed=args.seed, bin_width=width,
                    x_max=args.bins * width, n_batches=args.batches)
    res = run_sim(cfg)
    payload = {"command": "simulate", "config": res.meta, "result": res.to_dict()}
    if args.compare == "analytic":
        mom = {r.discipline: r for r in _moment_rows(p)}[d]
        cmp = {
            "mean": mom.mean, "mean_z": float(z_scores(res.mean, mom.mean, res.mean_se)),
            "variance": mom.variance,
            "variance_z": float(z_scores(res.variance, mom.variance, res.variance_se)),
            "atom": 1.0 - p.rho,
            "atom_z": float(z_scores(res.atom_fraction, 1.0 - p.rho, res.atom_se)),
        }
        dens = _analytic_density(p, d, width, len(res.edges) - 1)
        if dens is not None:
            dev = compare_to_analytic(res, dens)
            cmp["bins"] = dev.analytic.tolist()
            cmp["z"] = dev.z.tolist()
            cmp["max_abs_z"] = dev.max_abs_z
        payload["compare"] = cmp
    _emit(_json(payload), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="queuewait", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def rates(sp, law=True):
        sp.add_argument("--lambda", dest="lam", type=float, default=2.0)
        sp.add_argument("--mu", type=float, default=3.0)
        if law:
            sp.add_argument("--law", choices=["det", "exp"], default="det")

    def output(sp, fmt=True):
        if fmt:
            sp.add_argument("--format", choices=["csv", "json"], default="csv")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    sp = sub.add_parser("density", help="tabulate a waiting-time density")
    rates(sp)
    sp.add_argument("--discipline", choices=[d.value for d in Discipline], required=True)
    sp.add_argument("--xmax", type=float, default=3.0)
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--cells", type=int, default=None, help="SIRO M/D/1: number of cells")
    output(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("moments", help="mean and variance under all three disciplines")
    rates(sp)
    output(sp)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("verify", help="compare step-density and SIRO Laplace transforms")
    rates(sp, law=False)
    sp.add_argument("--cells", type=int, default=40)
    sp.add_argument("--s-grid", default="2,4,6,8,10")
    sp.add_argument("--tol", type=float, default=1e-3)
    output(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="discrete-event simulation, JSON output")
    rates(sp)
    sp.add_argument("--discipline", choices=[d.value for d in Discipline], required=True)
    sp.add_argument("--n", type=int, default=1_000_000)
    sp.add_argument("--warmup", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--bins", type=int, default=9)
    sp.add_argument("--bin-width", type=float, default=None)
    sp.add_argument("--batches", type=int, default=50)
    sp.add_argument("--compare", choices=["analytic"], default=None)
    output(sp, fmt=False)
    sp.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ShapeError) as exc:
        sys.stderr.write(f"queuewait: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        sys.stderr.write(f"queuewait: {exc}\n")
        return EXIT_DOMAIN
    except (PrecisionError, QuadratureError) as exc:
        sys.stderr.write(f"queuewait: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
