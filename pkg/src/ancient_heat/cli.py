"""Command-line front end.

Exit codes: 0 success, 1 a finding (criterion violated, inequality check
failed), 2 bad input or usage.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import counterexample as cx
from . import inequalities as ineq
from ._io import dumps, fmt, write_atomic, write_json
from .domain import (
    DomainError,
    build_lattice,
    domain_to_dict,
    field_to_csv,
    hop_distance,
    laplacian,
    load_domain,
    random_connected_graph,
    read_field_csv,
    save_domain,
    spectral_radius_bound,
)
from .ladder import GrowthBound, GrowthFitError, LadderOverflowError, build_ladder, check_solvability, estimate_growth
from .oracle import OracleError, ancient_window, eigendecompose
from .series import TruncationError, evaluate_series

THREADS_ENV = "ANCIENT_HEAT_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(x: str) -> float:
    v = float(x)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {x}")
    return v


def _nonneg(x: str) -> float:
    v = float(x)
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be nonnegative and finite, got {x}")
    return v


def _finite(x: str) -> float:
    v = float(x)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {x}")
    return v


def _count(x: str) -> int:
    v = int(x)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be a nonnegative integer, got {x}")
    return v


def _dims(x: str) -> list[int]:
    try:
        return [int(d) for d in x.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"lattice must look like 8x8, got {x}") from None


def _emit(doc: dict, out: str | None, suffix: str = ".report.json") -> None:
    text = dumps(doc) + "\n"
    sys.stdout.write(text)
    if out:
        write_atomic(out + suffix, text)


def _load(args):
    g = load_domain(args.domain)
    a = read_field_csv(args.data, g)
    return g, laplacian(g), a


# ------------------------------------------------------------ subcommands

def cmd_domain(args) -> int:
    if args.action == "build":
        g = build_lattice(args.lattice, args.h, args.boundary, args.origin)
    elif args.action == "random":
        g = random_connected_graph(args.n, np.random.default_rng(args.seed), args.extra_prob)
    else:
        g = load_domain(args.domain)
        d = hop_distance(g)
        _emit(
            {
                "n": g.n,
                "edges": len(g.edges),
                "origin": g.origin,
                "eccentricity": int(d.max()),
                "rho_bar": spectral_radius_bound(laplacian(g)),
                "lattice": domain_to_dict(g)["lattice"],
            },
            None,
        )
        return 0
    if args.out:
        save_domain(g, args.out)
    else:
        sys.stdout.write(dumps(domain_to_dict(g)) + "\n")
    return 0


def cmd_ladder(args) -> int:
    g, op, a = _load(args)
    lad = build_ladder(op, a, args.jmax, normalize=args.normalize)
    doc = {"J": lad.J, "mu": args.mu, "normalized": lad.normalized}
    try:
        est = estimate_growth(lad, hop_distance(g), args.mu, args.j_min)
        doc.update(
            A3_hat=est.A3_hat,
            A4_hat=est.A4_hat,
            residual=est.fit_residual,
            per_j_log_sup=[[j, v] for j, v in est.per_j_log_sup],
        )
    except GrowthFitError as exc:
        doc.update(A3_hat=None, A4_hat=None, residual=None, note=str(exc))
    if args.out:
        lines = ["j,vertex,value"]
        for j in range(lad.J + 1):
            lines += [f"{j},{i},{fmt(v)}" for i, v in enumerate(lad.coefficient(j))]
        write_atomic(args.out + ".csv", "\n".join(lines) + "\n")
    _emit(doc, args.out)
    return 0


def cmd_check(args) -> int:
    g, op, a = _load(args)
    lad = build_ladder(op, a, args.jmax, normalize=args.normalize)
    verdict = check_solvability(lad, GrowthBound(args.A3, args.A4), hop_distance(g), args.mu)
    _emit(verdict.to_dict(), args.out)
    return 0 if verdict.holds else 1


def _series_out(u, rep, out) -> None:
    if out:
        write_atomic(out + ".csv", field_to_csv(u))
    _emit(rep.to_dict(), out)


def cmd_solve(args) -> int:
    g, op, a = _load(args)
    if args.t < 0:
        raise UsageError("--t must be >= 0; pick the sense with --direction")
    t = -args.t if args.direction == "backward" else args.t
    u, rep = evaluate_series(op, a, t, args.tol, j_max=args.jcap)
    _series_out(u, rep, args.out)
    return 0


def cmd_reconstruct(args) -> int:
    g, op, a = _load(args)
    if args.t > 0:
        raise UsageError("--t must be <= 0 for an ancient reconstruction")
    u, rep = evaluate_series(op, a, args.t, args.tol, j_max=args.jcap)
    _series_out(u, rep, args.out)
    return 0


def cmd_verify(args) -> int:
    g = load_domain(args.domain)
    op = laplacian(g)
    spec = eigendecompose(op)
    if args.data:
        a = read_field_csv(args.data, g)
        band = args.band
    else:
        a = np.random.default_rng(args.seed).standard_normal(g.n)
        band = 2.0 if args.band is None else args.band
    exp = args.experiment
    if exp == "remainder":
        reach = abs(args.t)
    elif exp in ("induction", "derivsup"):
        reach = 2 * args.jmax + 1
    else:
        reach = args.jmax + 1
    u = ancient_window(spec, a, -reach, args.dt, band=band)
    if exp == "meanvalue":
        rep = ineq.verify_mean_value(u, op, args.jmax)
    elif exp == "caccioppoli":
        rep = ineq.verify_caccioppoli(u, op, args.jmax)
    elif exp == "induction":
        rep = ineq.verify_induction_bound(u, op, args.jmax)
    elif exp == "derivsup":
        rep = ineq.verify_derivative_sup(u, op, args.jmax)
    else:
        if args.t > 0:
            raise UsageError("--t must be <= 0 for the remainder experiment")
        rep = ineq.taylor_remainder_decay(u, op, args.vertex, args.t, args.jmax)
    doc = rep.to_dict()
    doc["seed"] = args.seed if not args.data else None
    doc["band"] = band
    doc["dt"] = args.dt
    if args.out:
        write_atomic(args.out + ".csv", rep.to_csv())
    _emit(doc, args.out, ".json")
    return 0 if rep.passed else 1


def cmd_tychonov(args) -> int:
    if args.nx < 1:
        raise UsageError("--nx must be >= 1")
    xs = np.linspace(args.x0, args.x1, args.nx) if args.nx > 1 else np.array([args.x0])
    lines = ["x,t,value,tail_estimate"]
    for x in xs:
        val = cx.tychonov_eval(float(x), args.t)
        lines.append(f"{fmt(x)},{fmt(args.t)},{fmt(val.value)},{fmt(val.tail_estimate)}")
    text = "\n".join(lines) + "\n"
    if args.t > 0:
        cert = cx.analyticity_gap(float(args.x0), args.t).to_dict()
    else:
        cert = {"derivatives_at_zero": [0.0] * 10, "sample_value": 0.0, "gap": 0.0, "taylor_prediction": 0.0}
    cert.update(x=float(args.x0), t=args.t)
    if args.out:
        write_atomic(args.out, text)
        base = args.out[:-4] if args.out.endswith(".csv") else args.out
        write_json(base + ".certificate.json", cert)
    else:
        sys.stdout.write(text)
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ancient-heat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("domain", help="build, sample or inspect a domain JSON")
    dsub = d.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = dsub.add_parser("build")
    b.add_argument("--lattice", type=_dims, required=True)
    b.add_argument("--h", type=_positive, default=1.0)
    b.add_argument("--boundary", choices=["dirichlet", "neumann", "periodic"], default="neumann")
    b.add_argument("--origin", type=_count, default=0)
    b.add_argument("--out")
    r = dsub.add_parser("random")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--extra-prob", type=_nonneg, default=0.1)
    r.add_argument("--seed", type=_count, default=0)
    r.add_argument("--out")
    i = dsub.add_parser("info")
    i.add_argument("--domain", required=True)

    def common(sp, data=True):
        sp.add_argument("--domain", required=True)
        if data:
            sp.add_argument("--data", required=True)
        sp.add_argument("--out")

    lp = sub.add_parser("ladder", help="iterated Laplacians and fitted growth")
    common(lp)
    lp.add_argument("--jmax", type=_count, default=32)
    lp.add_argument("--mu", type=_nonneg, default=0.0)
    lp.add_argument("--j-min", type=_count, default=0)
    lp.add_argument("--normalize", action="store_true")

    cp = sub.add_parser("check", help="exponential-growth solvability criterion")
    common(cp)
    cp.add_argument("--jmax", type=_count, default=32)
    cp.add_argument("--A3", type=_positive, required=True)
    cp.add_argument("--A4", type=_positive, required=True)
    cp.add_argument("--mu", type=_nonneg, default=0.0)
    cp.add_argument("--normalize", action="store_true")

    for name, helptext in (("solve", "forward or backward Cauchy solve"), ("reconstruct", "ancient solution at t <= 0")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--t", type=_finite, required=True)
        sp.add_argument("--tol", type=_positive, default=1e-12)
        sp.add_argument("--jcap", type=_count, default=512)
        if name == "solve":
            sp.add_argument("--direction", choices=["backward", "forward"], default="backward")

    vp = sub.add_parser("verify", help="check an interior estimate on caloric data")
    vp.add_argument("--experiment", choices=ineq.EXPERIMENTS, required=True)
    vp.add_argument("--domain", required=True)
    vp.add_argument("--data")
    vp.add_argument("--jmax", type=_count, default=4)
    vp.add_argument("--band", type=_positive)
    vp.add_argument("--dt", type=_positive, default=0.01)
    vp.add_argument("--seed", type=_count, default=0)
    vp.add_argument("--vertex", type=_count, default=0)
    vp.add_argument("--t", type=_finite, default=-1.0)
    vp.add_argument("--out")

    tp = sub.add_parser("tychonov", help="sample the Tychonov solution")
    tp.add_argument("--x0", type=_finite, default=0.0)
    tp.add_argument("--x1", type=_finite, default=2.0)
    tp.add_argument("--nx", type=int, default=41)
    tp.add_argument("--t", type=_finite, default=0.5)
    tp.add_argument("--out")
    return p


COMMANDS = {
    "domain": cmd_domain,
    "ladder": cmd_ladder,
    "check": cmd_check,
    "solve": cmd_solve,
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
    "tychonov": cmd_tychonov,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        threads = os.environ.get(THREADS_ENV)
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(int(threads)):
                return COMMANDS[args.command](args)
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, ValueError, OSError) as exc:
        print(f"ancient-heat: error: {exc}", file=sys.stderr)
        return 2
    except (TruncationError, LadderOverflowError, OracleError, cx.TychonovError, ineq.WindowError) as exc:
        print(f"ancient-heat: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
