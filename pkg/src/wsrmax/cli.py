"""Command line front end.

Subcommands: ``solve`` (run a solver and emit a convergence-trace CSV),
``gen-instance`` (write a problem instance JSON), ``verify-theorem1`` and
``verify-projection`` (oracle checks), ``bench-scaling`` (per-iteration wall
time versus user count).
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import __version__
from .channel import (
    build_instance,
    generate_rayleigh_channels,
    load_instance,
    save_instance,
)
from .optimizer import (
    STATUS_CONVERGED,
    IterationRecord,
    OptimizerConfig,
    SolveResult,
    cgp_solve,
    gp_solve,
)
from .verify import verify_projection, verify_theorem1

TRACE_HEADER = "run,seed,iter,objective,grad_norm,armijo_m,mu_star,max_delta,elapsed_ms"

PRESETS = {
    # 100-user stress scenario: equal weights, n_t = n_r = 4.
    "large100": {"users": 100, "nt": 4, "nr": 4, "weights": "equal"},
}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def format_trace_rows(
    run: int, seed: int, records: list[IterationRecord], unit_scale: float, timing: bool
) -> list[str]:
    rows = []
    for rec in records:
        elapsed = rec.elapsed if timing else 0.0
        rows.append(
            ",".join(
                [
                    str(run),
                    str(seed),
                    str(rec.iter),
                    _fmt(rec.objective * unit_scale),
                    _fmt(rec.grad_norm),
                    str(rec.armijo_m),
                    _fmt(rec.water_level),
                    _fmt(rec.max_delta),
                    _fmt(elapsed),
                ]
            )
        )
    return rows


def write_trace(path, all_rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRACE_HEADER + "\n")
        for row in all_rows:
            fh.write(row + "\n")


def read_trace(path) -> list[dict]:
    """Parse a trace CSV back into row dicts (ints and floats)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != TRACE_HEADER.split(","):
            raise ValueError(f"unexpected trace header: {header}")
        rows = []
        int_cols = {"run", "seed", "iter", "armijo_m"}
        for line in fh:
            parts = line.strip().split(",")
            rows.append(
                {
                    name: (int(v) if name in int_cols else float(v))
                    for name, v in zip(header, parts)
                }
            )
    return rows


def _parse_weights(text: str | None, K: int) -> np.ndarray:
    if text is None or text == "equal":
        return np.ones(K)
    values = np.asarray([float(tok) for tok in text.split(",")], dtype=float)
    if values.size != K:
        raise ValueError(f"got {values.size} weights for {K} users")
    return values


def _build_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        beta=args.beta,
        sigma=args.sigma,
        epsilon=args.tol,
        max_iters=args.max_iters,
    )


def _instance_for_run(args, seed: int):
    if args.instance is not None:
        inst = load_instance(args.instance)
        if args.weights is not None:
            inst = build_instance(
                inst.channels, _parse_weights(args.weights, inst.K), inst.power, inst.label
            )
        return inst
    channels = generate_rayleigh_channels(args.users, args.nt, args.nr, seed)
    weights = _parse_weights(args.weights, args.users)
    return build_instance(channels, weights, args.power, label=f"gen-{seed}")


def cmd_solve(args) -> int:
    if args.preset is not None:
        preset = PRESETS.get(args.preset)
        if preset is None:
            print(f"unknown preset {args.preset!r}", file=sys.stderr)
            return 2
        args.users = preset["users"]
        args.nt = preset["nt"]
        args.nr = preset["nr"]
        if args.weights is None:
            args.weights = preset["weights"]
    if args.instance is not None and args.preset is not None:
        print("--instance and --preset are mutually exclusive", file=sys.stderr)
        return 2
    if args.reps < 1:
        print("--reps must be at least 1", file=sys.stderr)
        return 2

    config = _build_config(args)
    solver = cgp_solve if args.algorithm == "cgp" else gp_solve
    unit_scale = 1.0 / math.log(2.0) if args.unit == "bits" else 1.0

    all_rows: list[str] = []
    all_converged = True
    for run in range(args.reps):
        seed = args.seed + run
        instance = _instance_for_run(args, seed)
        result: SolveResult = solver(instance, config)
        all_converged &= result.status == STATUS_CONVERGED
        all_rows.extend(
            format_trace_rows(run, seed, result.trace, unit_scale, args.timing)
        )
        print(
            f"run {run} seed {seed}: objective {_fmt(result.final_objective * unit_scale)}"
            f" {args.unit}, {result.n_iterations} iterations, {result.status}"
        )
    if args.out is not None:
        write_trace(args.out, all_rows)
    return 0 if all_converged else 1


def cmd_gen_instance(args) -> int:
    channels = generate_rayleigh_channels(args.users, args.nt, args.nr, args.seed)
    weights = _parse_weights(args.weights, args.users)
    instance = build_instance(channels, weights, args.power)
    save_instance(instance, args.out)
    print(f"wrote {args.out}: K={args.users} nt={args.nt} nr={args.nr} P={args.power}")
    return 0


def cmd_verify_theorem1(args) -> int:
    report = verify_theorem1(
        args.users, args.nt, args.nr, args.seed, args.samples, power=args.power
    )
    print(
        f"theorem-1 check: {report.samples} samples,"
        f" max discrepancy {report.max_discrepancy:.3e} (tol {report.tolerance:.0e})"
    )
    print("PASS" if report.ok else "FAIL")
    return 0 if report.ok else 1


def cmd_verify_projection(args) -> int:
    report = verify_projection(
        args.users,
        args.nr,
        args.seed,
        args.samples,
        power=args.power,
        competitors=args.competitors,
        grid_points=args.grid_points,
    )
    print(
        f"projection check: {report.samples} samples\n"
        f"  worst competitor margin {report.competitor_margin:.3e} (>= 0 required)\n"
        f"  grid oracle value gap   {report.grid_value_gap:.3e} (<= 1e-9)\n"
        f"  idempotence gap         {report.idempotence_gap:.3e} (<= 1e-10)\n"
        f"  KKT residual            {report.kkt_residual:.3e} (<= 1e-8)\n"
        f"  all outputs feasible    {report.all_feasible}\n"
        f"  sweep bound respected   {report.sweep_bound_ok}"
    )
    ok = report.ok()
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def measure_iteration_time(
    K: int, n_t: int, n_r: int, iters: int, seed: int, power: float = 10.0
) -> float:
    """Mean wall milliseconds per CGP iteration on a fresh random instance."""
    channels = generate_rayleigh_channels(K, n_t, n_r, seed)
    instance = build_instance(channels, np.ones(K), power)
    # A tiny epsilon keeps the loop from stopping early, so exactly `iters`
    # iterations are measured after a short warmup.
    config = OptimizerConfig(epsilon=1e-300, max_iters=iters)
    warm = OptimizerConfig(epsilon=1e-300, max_iters=3)
    cgp_solve(instance, warm)
    t0 = time.perf_counter()
    result = cgp_solve(instance, config)
    elapsed = time.perf_counter() - t0
    return elapsed * 1e3 / max(result.n_iterations, 1)


def cmd_bench_scaling(args) -> int:
    ks = [int(tok) for tok in args.users.split(",")]
    if ks != sorted(ks):
        print("K list must be ascending", file=sys.stderr)
        return 2
    rows = []
    for K in ks:
        ms = measure_iteration_time(K, args.nt, args.nr, args.iters, args.seed)
        rows.append((K, ms))
        print(f"K={K}: {ms:.3f} ms/iter")
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("K,ms_per_iter\n")
            for K, ms in rows:
                fh.write(f"{K},{_fmt(ms)}\n")
    if len(rows) >= 2:
        logk = np.log([r[0] for r in rows])
        logt = np.log([r[1] for r in rows])
        slope = float(np.polyfit(logk, logt, 1)[0])
        print(f"log-log slope: {slope:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsrmax",
        description="Weighted sum-rate maximization for MIMO broadcast channels",
    )
    parser.add_argument("--version", action="version", version=f"wsrmax {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance_args(p, include_power=True):
        p.add_argument("--users", type=int, default=10, help="number of users K")
        p.add_argument("--nt", type=int, default=4, help="transmit antennas")
        p.add_argument("--nr", type=int, default=4, help="receive antennas per user")
        if include_power:
            p.add_argument("--power", type=float, default=10.0, help="total power budget")
        p.add_argument("--seed", type=int, default=0, help="channel realization seed")

    p = sub.add_parser("solve", help="run a solver and emit a convergence trace")
    add_instance_args(p)
    p.add_argument("--weights", default=None, help="comma list of K weights, or 'equal'")
    p.add_argument("--algorithm", choices=["cgp", "gp"], default="cgp")
    p.add_argument("--beta", type=float, default=0.5, help="Armijo contraction")
    p.add_argument("--sigma", type=float, default=0.1, help="Armijo slope fraction")
    p.add_argument("--tol", type=float, default=1e-6, help="termination threshold")
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--reps", type=int, default=1, help="repetitions (seeds advance by 1)")
    p.add_argument("--instance", default=None, help="instance JSON instead of generating")
    p.add_argument("--out", default=None, help="trace CSV output path")
    p.add_argument("--unit", choices=["nats", "bits"], default="nats")
    p.add_argument("--preset", default=None, help="named scenario, e.g. large100")
    p.add_argument(
        "--timing",
        action="store_true",
        help="record measured per-iteration wall time in the trace"
        " (breaks byte-for-byte reproducibility)",
    )
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen-instance", help="generate and save a problem instance")
    add_instance_args(p)
    p.add_argument("--weights", default=None, help="comma list of K weights, or 'equal'")
    p.add_argument("--out", required=True, help="instance JSON output path")
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("verify-theorem1", help="check the ordering-free objective")
    add_instance_args(p)
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_verify_theorem1)

    p = sub.add_parser("verify-projection", help="check the sum-power projection")
    p.add_argument("--users", type=int, default=3, help="number of covariance blocks K")
    p.add_argument("--nr", type=int, default=3, help="block dimension")
    p.add_argument("--power", type=float, default=10.0, help="total power budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--competitors", type=int, default=1000)
    p.add_argument("--grid-points", type=int, default=10_000_000)
    p.set_defaults(func=cmd_verify_projection)

    p = sub.add_parser("bench-scaling", help="per-iteration wall time vs user count")
    p.add_argument("--users", default="10,20,40,80,160", help="ascending comma list of K")
    p.add_argument("--nt", type=int, default=4)
    p.add_argument("--nr", type=int, default=4)
    p.add_argument("--iters", type=int, default=30, help="iterations timed per K")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV output path (K,ms_per_iter)")
    p.set_defaults(func=cmd_bench_scaling)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
