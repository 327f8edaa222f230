"""Command-line interface: ``lattice-ldp <command> [options]``.

Structured inputs are JSON files in the formats written by the library's
``to_json`` methods; sweeps are written as CSV.
Exit status is 2 for bad input and 1 when ``verify`` finds a failing check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import acceptance
from .decompose import DEFAULT_LINK_RADIUS, DEFAULT_MASS_FLOOR, cluster_decompose, embed
from .measures import CompactPoint, SparseMeasure
from .mc import ball_decay_estimate, estimate_log_Zt, stay_probability_check
from .rate import dirichlet_sum_ordered, rate_I, rate_I_tilde
from .testfn import DEFAULT_R, metric_D
from .variational import (
    DifferencePotential,
    intersection_rate_curve,
    solve_linear_tilt,
    solve_quadratic_tilt,
)
from .walk import RateKernel, check_assumptions, occupation_measure, simulate, srw


class InputError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _kernel(args) -> RateKernel:
    if args.kernel is None:
        return srw(1)
    return RateKernel.from_dict(_read_json(args.kernel))


def _potential_values(data) -> dict:
    rows = data.get("values", data.get("entries"))
    if rows is None:
        raise InputError("potential file needs a 'values' list")
    return {tuple(z): float(v) for z, v in rows}


def _difference_potential(args, dim: int) -> DifferencePotential:
    if args.potential:
        data = _read_json(args.potential)
        return DifferencePotential(_potential_values(data), dim=int(data["dim"]))
    return DifferencePotential.point(args.v, dim=dim)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _emit(args, payload=None, rows=None, columns=None) -> None:
    """Write a JSON payload or CSV rows to ``--out`` or stdout."""
    buf = io.StringIO()
    if rows is not None and args.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
    elif rows is not None:
        json.dump([dict(zip(columns, r)) for r in rows], buf, indent=2)
        buf.write("\n")
    elif isinstance(payload, (int, float)):
        buf.write(f"{payload!r}\n")
    else:
        json.dump(payload, buf, indent=2)
        buf.write("\n")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def cmd_check_kernel(args) -> int:
    rep = check_assumptions(_kernel(args))
    cert = {str(k): v for k, v in rep.a5_certificate.items()}
    _emit(args, {"a2_total_rate": rep.a2_total_rate, "a3_irreducible": rep.a3_irreducible,
                 "a6_symmetric": rep.a6_symmetric, "a5_certificate": cert})
    return 0


def cmd_simulate(args) -> int:
    kernel = _kernel(args)
    traj = simulate(kernel, args.t, start=args.start and [int(c) for c in args.start.split(",")],
                    seed=args.seed)
    _emit(args, {"start": list(traj.start), "horizon": traj.horizon,
                 "jump_times": traj.jump_times.tolist(),
                 "jump_targets": traj.jump_targets.tolist(),
                 "occupation": occupation_measure(traj).to_dict()})
    return 0


def cmd_rate(args) -> int:
    kernel = _kernel(args)
    if args.measure:
        mu = SparseMeasure.from_dict(_read_json(args.measure))
        value = dirichlet_sum_ordered(kernel, mu) if args.dirichlet_sum_ordered else rate_I(kernel, mu)
    elif args.compact:
        value = rate_I_tilde(kernel, CompactPoint.from_dict(_read_json(args.compact)))
    else:
        raise InputError("rate needs --measure or --compact")
    _emit(args, value)
    return 0


def _compact(path) -> CompactPoint:
    data = _read_json(path)
    if "orbits" in data:
        return CompactPoint.from_dict(data)
    return CompactPoint([SparseMeasure.from_dict(data)], dim=int(data["dim"]))


def cmd_metric(args) -> int:
    res = metric_D(_compact(args.a), _compact(args.b), args.R)
    if args.format == "json":
        _emit(args, {"value": res.value, "truncation_error": res.truncation_error})
    else:
        _emit(args, res.value)
    return 0


def cmd_decompose(args) -> int:
    mu = SparseMeasure.from_dict(_read_json(args.measure))
    pieces, residual = cluster_decompose(mu, args.link_radius, args.mass_floor)
    xi = embed(mu, args.link_radius, args.mass_floor)
    _emit(args, {"compact_point": xi.to_dict(), "residual_mass": residual.mass(),
                 "n_pieces": len(pieces)})
    return 0


def cmd_opt_linear(args) -> int:
    kernel = _kernel(args)
    data = _read_json(args.site_potential)
    V = _potential_values(data)
    sol = solve_linear_tilt(kernel, V, args.radius, method=args.method)
    if args.format == "csv":
        vmax = max(V.values(), default=0.0)
        _emit(args, rows=[(vmax, sol.value, sol.maximizer.mass(), sol.gradient_norm, 1)],
              columns=("v", "lambda", "mass", "grad_norm", "starts"))
    else:
        _emit(args, sol.value)
    return 0


def cmd_opt_quadratic(args) -> int:
    kernel = _kernel(args)
    V = _difference_potential(args, kernel.dim)
    sol = solve_quadratic_tilt(kernel, V, args.radius, n_starts=args.starts, seed=args.seed,
                               workers=args.threads)
    rows = [(V.v0, sol.value, sol.maximizer.mass(), sol.gradient_norm, sol.starts_used)]
    _emit(args, rows=rows, columns=("v", "lambda", "mass", "grad_norm", "starts"))
    return 0


def cmd_ilt_curve(args) -> int:
    kernel = _kernel(args)
    grid = _floats(args.thetas) if args.thetas else acceptance.theta_grid()
    pts = intersection_rate_curve(kernel, grid, args.radius)
    _emit(args, rows=[tuple(p) for p in pts], columns=("theta", "y", "I_prime"))
    return 0


def cmd_mc_zt(args) -> int:
    kernel = _kernel(args)
    V = _difference_potential(args, kernel.dim)
    rows = []
    for t in _floats(args.t):
        e = estimate_log_Zt(kernel, V, t, args.samples, seed=args.seed, workers=args.threads)
        rows.append((t, e.estimate, e.ci_low, e.ci_high, e.n, int(e.heavy_tail)))
    _emit(args, rows=rows, columns=("t", "estimate", "ci_low", "ci_high", "n", "heavy_tail_flag"))
    return 0


def cmd_mc_ball(args) -> int:
    kernel = _kernel(args)
    target = (_compact(args.target) if args.target
              else CompactPoint([SparseMeasure.delta((0,) * kernel.dim)]))
    out = ball_decay_estimate(kernel, target, args.delta, _floats(args.t), args.samples,
                              seed=args.seed, R=args.R, workers=args.threads)
    _emit(args, rows=out, columns=("t", "rate"))
    return 0


def cmd_mc_stay(args) -> int:
    kernel = _kernel(args)
    rows = []
    for t in _floats(args.t):
        sc = stay_probability_check(kernel, t, args.samples, seed=args.seed, workers=args.threads)
        rows.append((t, sc.empirical, sc.exact, sc.sigma, int(sc.passed)))
    _emit(args, rows=rows, columns=("t", "empirical", "exact", "sigma", "passed"))
    return 0


def cmd_verify(args) -> int:
    only = {int(x) for x in args.only.split(",")} if args.only else None
    results = acceptance.run_all(only=only, echo=lambda s: print(s, flush=True))
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kernel", help="kernel JSON (default: 1-d simple random walk, rate 1)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="csv")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker cap; results do not depend on it")

    p = argparse.ArgumentParser(prog="lattice-ldp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=fn)
        return sp

    add("check-kernel", cmd_check_kernel, "assumption report for a kernel")
    s = add("simulate", cmd_simulate, "simulate one trajectory")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--start", help="comma-separated start point")
    s = add("rate", cmd_rate, "rate function of a measure or compact point")
    s.add_argument("--measure")
    s.add_argument("--compact")
    s.add_argument("--dirichlet-sum-ordered", action="store_true",
                   help="report the ordered-pair Dirichlet sum (twice the rate)")
    s = add("metric", cmd_metric, "orbit metric between two compact points")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--R", type=int, default=DEFAULT_R)
    s = add("decompose", cmd_decompose, "cluster decomposition of a measure")
    s.add_argument("--measure", required=True)
    s.add_argument("--link-radius", type=int, default=DEFAULT_LINK_RADIUS)
    s.add_argument("--mass-floor", type=float, default=DEFAULT_MASS_FLOOR)
    s = add("opt-linear", cmd_opt_linear, "sup of int V dmu - I(mu)")
    s.add_argument("--site-potential", required=True)
    s.add_argument("--radius", type=int, default=60)
    s.add_argument("--method", choices=("eigen", "gradient"), default="eigen")
    s = add("opt-quadratic", cmd_opt_quadratic, "sup of sum V(x-y) mu mu - I(mu)")
    s.add_argument("--potential", help="difference potential JSON")
    s.add_argument("--v", type=float, default=4.0, help="point potential strength")
    s.add_argument("--radius", type=int, default=40)
    s.add_argument("--starts", type=int, default=16)
    s = add("ilt-curve", cmd_ilt_curve, "intersection local time rate curve")
    s.add_argument("--thetas", help="comma-separated multipliers")
    s.add_argument("--radius", type=int, default=60)
    s = add("mc-zt", cmd_mc_zt, "Monte Carlo estimate of (1/t) log Z_t")
    s.add_argument("--potential")
    s.add_argument("--v", type=float, default=4.0)
    s.add_argument("--t", default="8")
    s.add_argument("--samples", type=int, default=100_000)
    s = add("mc-ball", cmd_mc_ball, "empirical ball decay rates")
    s.add_argument("--target", help="compact point JSON (default: orbit of delta_0)")
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--t", default="1,2,4")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--R", type=int, default=DEFAULT_R)
    s = add("mc-stay", cmd_mc_stay, "jump-free frequency against exp(-rate t)")
    s.add_argument("--t", default="0.5,1,2")
    s.add_argument("--samples", type=int, default=100_000)
    s = add("verify", cmd_verify, "run every acceptance check")
    s.add_argument("--only", help="comma-separated criterion numbers")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
