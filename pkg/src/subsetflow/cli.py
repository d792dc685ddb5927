"""Command-line front end.

Exit statuses: 0 success, 1 verification failed, 2 usage or parse error,
3 numerical divergence, 4 unsupported rendering.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from .flow import DivergenceError, FlowParams, integrate_to_collision, retract_once, retraction_stages
from .subset_space import FiniteSubset
from .verify import SampleSpec, check_lipschitz, draw_config, run_suite, trial_rng

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_RENDER = 4

BENCH_STREAM = 100


class UsageError(Exception):
    pass


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return json.dumps(obj)


def read_points(path: str) -> np.ndarray:
    """Parse a point-set document ``{"points": [[...], ...]}``."""
    try:
        with open(path) if path != "-" else sys.stdin as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict) or "points" not in doc:
        raise UsageError('input must be an object with a "points" field')
    rows = doc["points"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and r for r in rows):
        raise UsageError('"points" must be a nonempty list of nonempty lists')
    if len({len(r) for r in rows}) != 1:
        raise UsageError("all points must have the same dimension")
    if not all(isinstance(c, (int, float)) and not isinstance(c, bool) for r in rows for c in r):
        raise UsageError("coordinates must be numbers")
    arr = np.array(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise UsageError("coordinates must be finite")
    return arr


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _params(args) -> FlowParams:
    try:
        return FlowParams(args.step_safety, args.collision_tol, args.max_steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _dedup_in_order(arr: np.ndarray) -> np.ndarray:
    _, first = np.unique(arr, axis=0, return_index=True)
    return arr[np.sort(first)]


def cmd_retract(args) -> int:
    pts = read_points(args.input)
    params = _params(args)
    A = FiniteSubset(pts)
    k = len(A) - 1 if args.k is None else args.k
    if k < 1:
        raise UsageError("k must be at least 1")
    stages = retraction_stages(A, k, params)
    if stages:
        out_pts = stages[-1].output.tolist()
    else:
        out_pts = _dedup_in_order(pts).tolist()
    doc = {
        "points": out_pts,
        "t_estimate": sum(s.T_estimate for s in stages),
        "displacement_bound": sum(s.displacement_bound for s in stages),
        "steps": sum(s.steps for s in stages),
        "stages": [
            {"cardinality": len(s.output), "t_estimate": s.T_estimate,
             "displacement_bound": s.displacement_bound, "steps": s.steps}
            for s in stages
        ],
    }
    _write(dumps(doc) + "\n", args.output)
    return EXIT_OK


def cmd_trace(args) -> int:
    pts = read_points(args.input)
    params = _params(args)
    if args.svg and pts.shape[1] > 2:
        print("svg requires d <= 2", file=sys.stderr)
        return EXIT_RENDER
    A = FiniteSubset(pts)
    if len(A) < 2:
        raise UsageError("trace needs at least two distinct points")
    trace = integrate_to_collision(A.points, params)
    d = A.dim
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "point_index"] + [f"c{j}" for j in range(d)])
    for state in trace.states:
        for i, p in enumerate(state.u):
            writer.writerow([format(state.t, ".17g"), i] + [format(c, ".17g") for c in p])
    _write(buf.getvalue(), args.output)
    if args.svg:
        render_svg(trace, args.svg)
    return EXIT_OK


def render_svg(trace, path: str):
    """Plot trajectories: the plane for d = 2, position against time for d = 1."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    P = trace.positions
    fig, ax = plt.subplots(figsize=(5, 5))
    for i in range(P.shape[1]):
        if P.shape[2] == 2:
            ax.plot(P[:, i, 0], P[:, i, 1], lw=1)
            ax.plot(P[0, i, 0], P[0, i, 1], "o", ms=3, color="k")
        else:
            ax.plot(trace.times, P[:, i, 0], lw=1)
    if P.shape[2] == 2:
        ax.set_aspect("equal")
        ax.set_xlabel("c0")
        ax.set_ylabel("c1")
    else:
        ax.set_xlabel("t")
        ax.set_ylabel("c0")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_verify(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.dim < 1 or args.trials < 1:
        raise UsageError("--dim and --trials must be at least 1")
    params = _params(args)
    spec = SampleSpec(args.n, args.dim, args.trials, args.seed)
    reports = run_suite(spec, params, tolerance=args.tolerance)
    doc = {
        "suite": [
            {key: r.to_dict()[key] for key in
             ("name", "passed", "observed", "bound", "tolerance", "trials_run", "witness")}
            for r in reports
        ],
        "all_passed": all(r.passed for r in reports),
    }
    _write(dumps(doc) + "\n", args.output)
    return EXIT_OK if doc["all_passed"] else EXIT_FAILED


def cmd_bench(args) -> int:
    if any(n < 2 for n in args.n) or any(d < 1 for d in args.dim) or args.trials < 1:
        raise UsageError("need n >= 2, dim >= 1, trials >= 1")
    params = _params(args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "d", "trials", "mean_steps", "mean_wall_time", "max_ratio_observed"])
    for n in args.n:
        for d in args.dim:
            steps, walls = [], []
            for k in range(args.trials):
                x = draw_config(trial_rng(args.seed, BENCH_STREAM, k), n, d)
                t0 = time.perf_counter()
                res = retract_once(FiniteSubset(x), params)
                walls.append(time.perf_counter() - t0)
                steps.append(res.steps)
            ratio = check_lipschitz(SampleSpec(n, d, args.trials, args.seed), params).observed
            writer.writerow([n, d, args.trials, format(np.mean(steps), ".17g"),
                             format(np.mean(walls), ".6g"), format(ratio, ".17g")])
    _write(buf.getvalue(), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subsetflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def flow_flags(p):
        p.add_argument("--step-safety", type=float, default=0.1)
        p.add_argument("--collision-tol", type=float, default=1e-9)
        p.add_argument("--max-steps", type=int, default=10**6)
        p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("retract", help="retract a point set down to k points")
    p.add_argument("input")
    p.add_argument("--k", type=int, default=None, help="target cardinality (default: one step)")
    flow_flags(p)
    p.set_defaults(func=cmd_retract)

    p = sub.add_parser("trace", help="dump the flow trajectory as CSV")
    p.add_argument("input")
    p.add_argument("--svg", default=None, help="also render trajectories (d <= 2)")
    flow_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tolerance", type=float, default=1e-2,
                   help="relative tolerance of the Lipschitz-type checks")
    flow_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time retractions over a grid of sizes")
    p.add_argument("--n", type=int, nargs="+", default=[3])
    p.add_argument("--dim", type=int, nargs="+", default=[2])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    flow_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"subsetflow {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"subsetflow {args.command}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
