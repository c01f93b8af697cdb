"""Command-line interface.

Every command reads and writes the JSON formats of :mod:`lossless_schur.io`
and prints ``key=value`` log lines on stdout.  Exit codes: 0 success,
2 out of chart domain, 3 unreadable input, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .atlas import adapted_chart, potapov_factorize
from .errors import LosslessError, OutOfDomainError
from .fit import FitProblem, fit, sample_problem
from .schur import (
    BalancedRealization,
    analyze,
    random_lossless,
    synthesize,
    verify_realization,
)

EXIT_OK, EXIT_DOMAIN, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3, 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with "out of domain"
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def emit(**fields) -> None:
    parts = []
    for k, v in fields.items():
        if isinstance(v, float):
            v = f"{v:.6e}"
        parts.append(f"{k}={v}")
    print(" ".join(parts), flush=True)


def _circle(samples: int) -> np.ndarray:
    return np.exp(2j * np.pi * (np.arange(samples) + 0.5) / samples)


def _load_realization(path) -> BalancedRealization:
    return io.realization_from_json(io.read_json(path))


def _require_out(args) -> Path:
    if args.out is None:
        raise _UsageError(f"{args.command}: --out PATH is required")
    return Path(args.out)


def cmd_random(args) -> int:
    R = random_lossless(args.p, args.n, args.seed, real=args.real)
    io.write_json(io.realization_to_json(R), _require_out(args))
    emit(command="random", p=args.p, n=args.n, seed=args.seed, real=args.real, out=args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    R = _load_realization(args.file)
    rep = verify_realization(R, samples=args.samples)
    deg = "undefined" if rep.degree is None else rep.degree
    emit(unitarity=rep.unitarity, circle_losslessness=rep.circle_losslessness,
         spectral_radius=rep.spectral_radius, degree=deg, n=rep.n)
    if rep.degree is not None and rep.degree < rep.n:
        emit(warning="degree_deficient", degree=rep.degree, n=rep.n)
    ok = rep.ok(args.tol)
    emit(status="pass" if ok else "fail", tol=args.tol)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_adapt(args) -> int:
    R = _load_realization(args.file)
    chart = adapted_chart(R, args.atlas)
    coords = analyze(R, chart)
    io.write_json(io.chart_to_json(chart), _require_out(args))
    emit(command="adapt", atlas=args.atlas, pairs=len(chart.pairs),
         max_parameter_norm=coords.max_parameter_norm(),
         g0_norm=float(np.linalg.norm(coords.g0)), out=args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    R = _load_realization(args.realization)
    chart = io.chart_from_json(io.read_json(args.chart))
    coords = analyze(R, chart)
    io.write_json(io.coords_to_json(coords, real=chart.real), _require_out(args))
    emit(command="analyze", atlas=chart.kind, max_parameter_norm=coords.max_parameter_norm(),
         out=args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    chart = io.chart_from_json(io.read_json(args.chart))
    coords = io.coords_from_json(io.read_json(args.coords))
    R = synthesize(coords, chart)
    io.write_json(io.realization_to_json(R), _require_out(args))
    emit(command="synth", atlas=chart.kind, n=R.n, unitarity=R.unitarity_residual(), out=args.out)
    return EXIT_OK


def _problem_from_file(args) -> FitProblem:
    obj = io.read_json(args.problem)
    if "samples" in obj:
        problem = io.problem_from_json(obj)
    else:
        # a realization: fit its own circle samples from a random start
        target = io.realization_from_json(obj)
        problem = sample_problem(target, args.samples, atlas=args.atlas, seed=args.seed)
    if args.init is not None:
        problem.init = _load_realization(args.init)
    if args.target is not None:
        problem.target = args.target
    if args.max_iters is not None:
        problem.max_iters = args.max_iters
    return problem


def cmd_fit(args) -> int:
    problem = _problem_from_file(args)
    try:
        problem.validate()
    except ValueError as exc:
        raise io.FormatError(str(exc)) from exc

    def log_record(rec):
        emit(**rec)

    res = fit(problem, callback=log_record)
    io.write_json(io.realization_to_json(res.realization), _require_out(args))
    emit(command="fit", status=res.status, objective=res.objective, iterations=res.iterations,
         switches=res.switches, out=args.out)
    return EXIT_DOMAIN if res.status == "domain_failure" else EXIT_OK


def cmd_potapov(args) -> int:
    R = _load_realization(args.file)
    fac = potapov_factorize(R, args.atlas)
    out = _require_out(args)
    out.mkdir(parents=True, exist_ok=True)
    for j, B in enumerate(fac.factors):
        io.write_json(io.realization_to_json(B), out / f"factor_{j + 1:02d}.json")
    io.write_json(io.matrix_to_json(fac.G0 if not fac.chart.real else fac.G0.real), out / "g0.json")
    z = 1.5 * _circle(args.samples)
    G = R.evaluate(z)
    residual = max(float(np.linalg.norm(G[k] - fac(zk))) for k, zk in enumerate(z))
    emit(command="potapov", atlas=args.atlas, factors=len(fac.factors),
         degrees=",".join(str(B.n) for B in fac.factors), product_residual=residual, out=args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lossless-schur", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--samples", type=int, default=64, metavar="N")
        return sp

    sp = add("random", cmd_random, "random balanced realization")
    sp.add_argument("p", type=int)
    sp.add_argument("n", type=int)
    sp.add_argument("--real", action="store_true")

    sp = add("verify", cmd_verify, "check the invariants of a realization file")
    sp.add_argument("file")

    sp = add("adapt", cmd_adapt, "adapted chart of a realization")
    sp.add_argument("file")
    sp.add_argument("--atlas", choices=["complex", "real", "mutual"], default="complex")

    sp = add("analyze", cmd_analyze, "coordinates of a realization in a chart")
    sp.add_argument("realization")
    sp.add_argument("chart")

    sp = add("synth", cmd_synth, "realization from chart coordinates")
    sp.add_argument("chart")
    sp.add_argument("coords")

    sp = add("fit", cmd_fit, "least-squares fit to samples (problem or realization file)")
    sp.add_argument("problem")
    sp.add_argument("--atlas", choices=["complex", "real", "mutual"], default="complex")
    sp.add_argument("--init", metavar="PATH", help="starting realization")
    sp.add_argument("--target", type=float)
    sp.add_argument("--max-iters", type=int)

    sp = add("potapov", cmd_potapov, "elementary lossless factors; --out is a directory")
    sp.add_argument("file")
    sp.add_argument("--atlas", choices=["complex", "real"], default="complex")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        emit(error="usage", message=repr(str(exc)))
        return EXIT_PARSE
    except OutOfDomainError as exc:
        emit(error="out_of_domain", step=exc.step, quality=exc.quality, message=repr(str(exc)))
        return EXIT_DOMAIN
    except (io.FormatError, OSError) as exc:
        emit(error="parse", message=repr(str(exc)))
        return EXIT_PARSE
    except (LosslessError, ValueError, np.linalg.LinAlgError) as exc:
        emit(error="numerical", message=repr(str(exc)))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
