"""Command-line interface.

Subcommands: ``solve``, ``bench``, ``certify``, ``condition`` and ``compare``.
Result files (JSON/CSV) depend only on the instance, seeds and configuration;
timings go to stdout and to ``timing.json`` / the bench table.

Exit codes: 0 healthy, 1 solve finished but some path diverged or a residual
certificate failed, 2 invalid input (an error JSON object goes to stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import MepInstance
from .diagnostics import ALPHA_THRESHOLD, coefficient_norms
from .oracle import OracleDeclined, checked_delta_solve
from .problems import (
    InstanceFormatError,
    QmepInstance,
    load_instance,
    qmep_linearize,
    random_mep,
    random_qmep,
    recover_qmep_pair,
    write_csv,
    write_json,
)
from .solver import (
    SolveOptions,
    SolveReport,
    default_workers,
    residual_certificate,
    solve,
    sorted_by_norm,
)
from .tracker import TrackerConfig, track_path_diag_coeff

EXIT_OK, EXIT_UNHEALTHY, EXIT_INPUT = 0, 1, 2


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


# ---------------------------------------------------------------- argument parsing


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("instance source (choose one)")
    g.add_argument("--file", type=Path, help="instance JSON file")
    g.add_argument("--random", action="store_true", help="random Gaussian instance")
    g.add_argument("--qmep", action="store_true", help="linearized random quadratic problem (k=2)")
    g.add_argument("--k", type=int, default=2, help="number of parameters for --random")
    g.add_argument("--n", type=int, help="common matrix size for --random/--qmep")
    g.add_argument("--dims", type=int, nargs="+", help="per-equation sizes for --random")
    g.add_argument("--seed", type=int, default=0, help="instance seed")


def _add_tracker_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("tracker")
    d = TrackerConfig()
    g.add_argument("--homotopy-seed", type=int, default=0, help="seed for slices/charts/targets")
    g.add_argument("--h-init", type=float, default=d.h_init)
    g.add_argument("--h-min", type=float, default=d.h_min)
    g.add_argument("--h-max", type=float, default=d.h_max)
    g.add_argument("--newton-tol", type=float, default=d.newton_tol)
    g.add_argument("--max-newton", type=int, default=d.max_newton_per_step)
    g.add_argument("--endgame-iters", type=int, default=None)
    g.add_argument("--max-steps", type=int, default=d.max_total_steps)
    g.add_argument("--divergence-cap", type=float, default=d.divergence_norm_cap)
    g.add_argument(
        "--workers", type=int, default=None, help="worker processes (env FPHOMOTOPY_WORKERS)"
    )
    g.add_argument("--out", type=Path, default=Path("."), help="output directory")
    g.add_argument("--plot", action="store_true", help="also write PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fphomotopy", description="Multiparameter eigenvalue solver (fiber product homotopy)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    _add_instance_args(p)
    _add_tracker_args(p)
    p.add_argument("--trace-paths", action="store_true", help="per-path CSV traces")
    p.add_argument("--certify", action="store_true", help="alpha-certify every eigenpair")
    p.add_argument("--polish", type=int, default=1, help="Newton steps before certification")
    p.add_argument("--condition", action="store_true", help="compute condition numbers")
    p.add_argument("--trace-kappa", action="store_true", help="condition number along paths")
    p.add_argument("--compare-delta", action="store_true", help="cross-check with the k=2 oracle")
    p.add_argument("--compare-diag", action="store_true", help="run the diagonal homotopy too")

    p = sub.add_parser("bench", help="benchmark table over sizes and seeds")
    p.add_argument("--k", type=int, nargs="+", default=[2])
    p.add_argument("--n", type=int, nargs="+", default=[3])
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--qmep", action="store_true", help="linearized quadratic problems (k=2)")
    p.add_argument("--compare-diag", action="store_true")
    _add_tracker_args(p)

    p = sub.add_parser("certify", help="alpha-certification table")
    _add_instance_args(p)
    _add_tracker_args(p)
    p.add_argument("--polish", type=int, default=1)

    p = sub.add_parser("condition", help="condition number table")
    _add_instance_args(p)
    _add_tracker_args(p)
    p.add_argument("--trace-kappa", action="store_true")

    p = sub.add_parser("compare", help="compare with the oracle and/or diagonal homotopy")
    _add_instance_args(p)
    _add_tracker_args(p)
    p.add_argument("--compare-delta", action="store_true")
    p.add_argument("--compare-diag", action="store_true")
    return parser


def tracker_config(args) -> TrackerConfig:
    try:
        return TrackerConfig(
            h_init=args.h_init,
            h_max=args.h_max,
            h_min=args.h_min,
            newton_tol=args.newton_tol,
            max_newton_per_step=args.max_newton,
            endgame_max_iters=args.endgame_iters,
            divergence_norm_cap=args.divergence_cap,
            max_total_steps=args.max_steps,
        )
    except ValueError as exc:
        raise CliError("invalid_config", str(exc)) from exc


def resolve_workers(args) -> int:
    if args.workers is not None:
        if args.workers < 1:
            raise CliError("invalid_config", "--workers must be >= 1")
        return args.workers
    try:
        return default_workers()
    except ValueError as exc:
        raise CliError("invalid_config", str(exc)) from exc


def load_source(args) -> tuple[MepInstance, QmepInstance | None, dict]:
    chosen = [name for name in ("file", "random", "qmep") if getattr(args, name)]
    if len(chosen) != 1:
        raise CliError("usage", "choose exactly one of --file, --random, --qmep")
    if args.file:
        if not args.file.exists():
            raise CliError("parse_error", f"{args.file}: no such file")
        try:
            return load_instance(args.file), None, {"source": "file", "path": str(args.file)}
        except (InstanceFormatError, ValueError) as exc:
            raise CliError("parse_error", str(exc)) from exc
    if args.qmep:
        if args.n is None or args.n < 1:
            raise CliError("usage", "--qmep needs --n >= 1")
        q = random_qmep(args.n, args.seed)
        return qmep_linearize(q), q, {"source": "qmep", "n": args.n, "seed": args.seed}
    if args.k < 2:
        raise CliError("usage", "--k must be >= 2")
    if args.dims is not None:
        if len(args.dims) != args.k or min(args.dims) < 1:
            raise CliError("usage", f"--dims needs {args.k} positive sizes")
        dims = tuple(args.dims)
    elif args.n is not None and args.n >= 1:
        dims = (args.n,) * args.k
    else:
        raise CliError("usage", "--random needs --n or --dims")
    inst = random_mep(args.k, dims, args.seed)
    return inst, None, {"source": "random", "k": args.k, "dims": list(dims), "seed": args.seed}


# ---------------------------------------------------------------- output helpers


def _cx(v):
    v = np.asarray(v, dtype=complex)
    return np.stack([v.real, v.imag], axis=-1).tolist()


def eigenpair_rows(report: SolveReport):
    k = report.slices.k
    header = ["rank", "start_index"]
    for j in range(k):
        header += [f"lambda{j + 1}_re", f"lambda{j + 1}_im"]
    header += [
        "backward_error", "deviation", "alpha", "certified", "kappa_fp",
        "kappa_std_lower", "kappa_std_estimate", "kappa_std_upper",
        "cluster_size", "inconsistent", "path_status", "newton_iters",
    ]
    rows = []
    for rank, p in enumerate(sorted_by_norm(report.eigenpairs), 1):
        d = p.diagnostics
        row = [rank, "-".join(map(str, p.start_index))]
        for v in p.lam:
            row += [float(v.real), float(v.imag)]
        row += [
            d.backward_error, d.deviation, d.alpha, d.certified, d.kappa_fp,
            d.kappa_std_lower, d.kappa_std_estimate, d.kappa_std_upper,
            p.cluster_size, p.inconsistent, p.path_status, p.newton_iters,
        ]
        rows.append(row)
    return header, rows


def _finite(v):
    return v if v is None or not isinstance(v, float) or math.isfinite(v) else repr(v)


def report_dict(report: SolveReport, inst: MepInstance, source: dict) -> dict:
    cfg = report.config
    return {
        "instance": {"k": inst.k, "dims": list(inst.dims), **source},
        "homotopy_seed": report.seed,
        "config": {
            "h_init": cfg.h_init, "h_max": cfg.h_max, "h_min": cfg.h_min,
            "newton_tol": cfg.newton_tol, "max_newton_per_step": cfg.max_newton_per_step,
            "endgame_max_iters": cfg.endgame_iters(inst.k, inst.dims),
            "divergence_norm_cap": cfg.divergence_norm_cap, "max_total_steps": cfg.max_total_steps,
        },
        "counts": {
            "start_points": report.n_paths,
            "converged": report.n_converged,
            "divergent": report.n_divergent,
            "clustered": report.n_clustered,
            "eigenpairs": len(report.eigenpairs),
            "start_set_sizes": list(report.starts.sizes),
            "filtered_infinite": list(report.starts.n_infinite),
        },
        "slices": report.slices.to_dict(),
        "target": report.target.to_dict(),
        "eigenpairs": [
            {
                "start_index": list(p.start_index),
                "lambda": _cx(p.lam),
                "x": [_cx(x) for x in p.xs],
                "cluster_size": p.cluster_size,
                "inconsistent": p.inconsistent,
                "diagnostics": {
                    key: _finite(getattr(p.diagnostics, key))
                    for key in (
                        "backward_error", "deviation", "alpha", "certified", "kappa_fp",
                        "kappa_std_lower", "kappa_std_estimate", "kappa_std_upper",
                    )
                },
            }
            for p in sorted_by_norm(report.eigenpairs)
        ],
        "paths": [
            {
                "start_index": list(r.start_index),
                "status": r.status.value,
                "euler_steps": r.stats.euler_steps,
                "newton_iters": r.stats.newton_iters,
                "rejected_steps": r.stats.rejected_steps,
                "h_min_used": _finite(r.stats.h_min_used),
                "h_max_used": r.stats.h_max_used,
                "final_corrector_norm": _finite(r.stats.final_corrector_norm),
            }
            for r in report.path_results
        ],
    }


def _write_path_traces(report: SolveReport, out: Path, plot: bool) -> None:
    trace_dir = out / "paths"
    trace_dir.mkdir(parents=True, exist_ok=True)
    k = report.slices.k
    header = ["t", "h", "newton_iters", "residual_inf"]
    for a in range(k):
        for b in range(k):
            header += [f"lambda{a + 1}{b + 1}_re", f"lambda{a + 1}{b + 1}_im"]
    series = {}
    for r in report.path_results:
        name = "path_" + "-".join(map(str, r.start_index)) + ".csv"
        rows = []
        for t, h, it, res, lam in r.trace or []:
            row = [t, h, it, res]
            for v in lam:
                row += [float(v.real), float(v.imag)]
            rows.append(row)
        write_csv(trace_dir / name, header, rows)
        if r.trace:
            series[r.start_index] = np.array([[row[0], row[4][0]] for row in r.trace])
    if plot and series:
        from .plotting import plot_paths

        plot_paths(series, out / "paths.png")


def _kappa_trace_rows(report: SolveReport):
    rows = []
    for p in sorted_by_norm(report.eigenpairs):
        for t, kappa in p.diagnostics.kappa_trace or []:
            rows.append(["-".join(map(str, p.start_index)), t, kappa])
    return ["start_index", "t", "kappa"], rows


def _match(a: np.ndarray, b: np.ndarray):
    """Optimal assignment between two eigenvalue sets; relative distances."""
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0), np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    scale = 1.0 + np.maximum(
        np.linalg.norm(a, axis=1)[:, None], np.linalg.norm(b, axis=1)[None, :]
    )
    dist = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2) / scale
    ri, ci = linear_sum_assignment(dist)
    return dist[ri, ci], ri, ci


def compare_delta(inst: MepInstance, report: SolveReport, out: Path) -> dict:
    try:
        oracle = checked_delta_solve(inst)
    except OracleDeclined as exc:
        write_json(out / "compare_delta.json", {"declined": str(exc)})
        return {"declined": str(exc)}
    a = np.array([p.lam for p in report.eigenpairs]).reshape(-1, inst.k)
    b = np.array([p.lam for p in oracle]).reshape(-1, inst.k)
    dist, ri, ci = _match(a, b)
    summary = {
        "fiber_count": len(a),
        "oracle_count": len(b),
        "max_relative_distance": float(dist.max()) if dist.size else 0.0,
    }
    write_json(out / "compare_delta.json", summary)
    return summary


def compare_diag(inst: MepInstance, report: SolveReport, seed, config, out: Path) -> dict:
    results = track_path_diag_coeff(inst, seed, config)
    conv = [r for r in results if r.converged]
    a = np.array([r.endpoint.lambdas[0] for r in conv]).reshape(-1, inst.k)
    b = np.array([p.lam for p in report.eigenpairs]).reshape(-1, inst.k)
    nearest = []
    for lam in a:
        if len(b):
            d = np.linalg.norm(b - lam, axis=1) / (1 + np.linalg.norm(lam))
            nearest.append(float(d.min()))
    summary = {
        "start_points": len(results),
        "converged": len(conv),
        "divergent": len(results) - len(conv),
        "status_counts": {
            s: sum(r.status.value == s for r in results)
            for s in sorted({r.status.value for r in results})
        },
        "max_distance_to_fiber_eigenvalue": max(nearest) if nearest else None,
    }
    write_json(out / "compare_diag.json", summary)
    return summary


def _health(inst: MepInstance, report: SolveReport) -> bool:
    norms = coefficient_norms(inst)
    certs = all(residual_certificate(inst, p, norms=norms) for p in report.eigenpairs)
    return report.n_divergent == 0 and certs


def _print_summary(report: SolveReport, elapsed: float) -> None:
    print(
        f"paths={report.n_paths} converged={report.n_converged} divergent={report.n_divergent} "
        f"eigenpairs={len(report.eigenpairs)} clustered={report.n_clustered}"
    )
    etas = [p.diagnostics.backward_error for p in report.eigenpairs]
    if etas:
        print(f"backward_error max={max(etas):.3e} deviation max={report.max_deviation:.3e}")
    print(f"wall_time={elapsed:.3f}s t_path={report.max_path_time:.4f}s")


def _write_timing(report: SolveReport, out: Path, elapsed: float) -> None:
    write_json(
        out / "timing.json",
        {
            "wall_time": elapsed,
            "t_path": report.max_path_time,
            "newton_per_path": report.newton_per_path,
        },
    )


# ---------------------------------------------------------------- subcommands


def _run_solve(args, options: SolveOptions):
    inst, qmep, source = load_source(args)
    config = tracker_config(args)
    workers = resolve_workers(args)
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    report = solve(inst, args.homotopy_seed, config, workers, options)
    elapsed = time.perf_counter() - t0
    return inst, qmep, source, config, report, elapsed


def cmd_solve(args) -> int:
    options = SolveOptions(
        certify=args.certify,
        condition=args.condition,
        polish=args.polish,
        trace_paths=args.trace_paths,
        trace_kappa=args.trace_kappa,
    )
    inst, qmep, source, config, report, elapsed = _run_solve(args, options)
    out = args.out
    write_json(out / "report.json", report_dict(report, inst, source))
    header, rows = eigenpair_rows(report)
    write_csv(out / "eigenpairs.csv", header, rows)
    _write_timing(report, out, elapsed)
    if qmep is not None:
        rec = [recover_qmep_pair(qmep, p.lam, p.xs) for p in sorted_by_norm(report.eigenpairs)]
        write_csv(
            out / "qmep_pairs.csv",
            ["lambda_re", "lambda_im", "mu_re", "mu_im", "residual_1", "residual_2", "structure"],
            [
                [r.lam.real, r.lam.imag, r.mu.real, r.mu.imag, *r.residuals, r.structure_residual]
                for r in rec
            ],
        )
    if args.trace_paths:
        _write_path_traces(report, out, args.plot)
    if args.trace_kappa:
        write_csv(out / "kappa_trace.csv", *_kappa_trace_rows(report))
    if args.compare_delta:
        print("delta oracle:", json.dumps(compare_delta(inst, report, out)))
    if args.compare_diag:
        print("diagonal homotopy:", json.dumps(compare_diag(inst, report, args.homotopy_seed, config, out)))
    if args.plot:
        _plot_solve(report, out)
    _print_summary(report, elapsed)
    return EXIT_OK if _health(inst, report) else EXIT_UNHEALTHY


def _plot_solve(report: SolveReport, out: Path) -> None:
    from . import plotting

    pairs = sorted_by_norm(report.eigenpairs)
    if not pairs:
        return
    plotting.plot_eigenvalues(np.array([p.lam for p in pairs]), out / "eigenvalues.png")
    plotting.plot_by_norm(
        {"backward error": [max(p.diagnostics.backward_error, 1e-300) for p in pairs]},
        out / "backward_error.png",
        "backward error",
    )
    if any(p.diagnostics.certified is not None for p in pairs):
        plotting.plot_by_norm(
            {"alpha": [max(p.diagnostics.alpha, 1e-300) for p in pairs]},
            out / "alpha.png",
            "alpha",
            threshold=ALPHA_THRESHOLD,
        )
    if any(not math.isnan(p.diagnostics.kappa_fp) for p in pairs):
        plotting.plot_by_norm(
            {
                "kappa_fp": [p.diagnostics.kappa_fp for p in pairs],
                "kappa_std (estimate)": [p.diagnostics.kappa_std_estimate for p in pairs],
            },
            out / "kappa.png",
            "condition number",
        )
    traces = {p.start_index: p.diagnostics.kappa_trace for p in pairs if p.diagnostics.kappa_trace}
    if traces:
        plotting.plot_kappa_traces(traces, out / "kappa_trace.png")


def cmd_certify(args) -> int:
    options = SolveOptions(certify=True, polish=args.polish)
    inst, _, _, _, report, elapsed = _run_solve(args, options)
    rows = []
    for rank, p in enumerate(sorted_by_norm(report.eigenpairs), 1):
        d = p.diagnostics
        rows.append(["-".join(map(str, p.start_index)), rank, float(np.linalg.norm(p.lam)), d.alpha, d.certified])
    write_csv(args.out / "certify.csv", ["start_index", "rank", "lambda_norm", "alpha", "certified"], rows)
    n_cert = sum(bool(r[-1]) for r in rows)
    print(f"certified {n_cert}/{len(rows)} eigenpairs after {args.polish} polish step(s)")
    if args.plot:
        _plot_solve(report, args.out)
    _print_summary(report, elapsed)
    return EXIT_OK if _health(inst, report) else EXIT_UNHEALTHY


def cmd_condition(args) -> int:
    options = SolveOptions(condition=True, trace_kappa=args.trace_kappa)
    inst, _, _, _, report, elapsed = _run_solve(args, options)
    rows = []
    for rank, p in enumerate(sorted_by_norm(report.eigenpairs), 1):
        d = p.diagnostics
        rows.append([
            "-".join(map(str, p.start_index)), rank, float(np.linalg.norm(p.lam)), d.kappa_fp,
            d.kappa_std_lower, d.kappa_std_estimate, d.kappa_std_upper,
        ])
    write_csv(
        args.out / "condition.csv",
        ["start_index", "rank", "lambda_norm", "kappa_fp", "kappa_std_lower",
         "kappa_std_estimate", "kappa_std_upper"],
        rows,
    )
    if args.trace_kappa:
        write_csv(args.out / "kappa_trace.csv", *_kappa_trace_rows(report))
        finite = [v for p in report.eigenpairs for _, v in p.diagnostics.kappa_trace or []]
        print(f"kappa along paths: max={max(finite, default=float('nan')):.3e}")
    if args.plot:
        _plot_solve(report, args.out)
    _print_summary(report, elapsed)
    return EXIT_OK if _health(inst, report) else EXIT_UNHEALTHY


def cmd_compare(args) -> int:
    if not (args.compare_delta or args.compare_diag):
        args.compare_delta = args.compare_diag = True
    inst, _, _, config, report, elapsed = _run_solve(args, SolveOptions())
    if args.compare_delta:
        print("delta oracle:", json.dumps(compare_delta(inst, report, args.out)))
    if args.compare_diag:
        print("diagonal homotopy:", json.dumps(compare_diag(inst, report, args.homotopy_seed, config, args.out)))
    _print_summary(report, elapsed)
    return EXIT_OK if _health(inst, report) else EXIT_UNHEALTHY


BENCH_HEADER = [
    "kind", "k", "dims", "seed", "start_points", "eigenpairs", "converged", "divergent",
    "wall_time", "t_path", "newton_per_path", "max_deviation", "max_backward_error",
    "mean_backward_error", "diag_start_points", "diag_divergent", "error",
]


def cmd_bench(args) -> int:
    config = tracker_config(args)
    workers = resolve_workers(args)
    args.out.mkdir(parents=True, exist_ok=True)
    runs = []
    if args.qmep:
        runs = [("qmep", 2, n, s) for n in args.n for s in args.seeds]
    else:
        if min(args.k) < 2:
            raise CliError("usage", "--k values must be >= 2")
        runs = [("random", k, n, s) for k in args.k for n in args.n for s in args.seeds]
    rows = []
    for kind, k, n, seed in runs:
        row = {"kind": kind, "k": k, "seed": seed}
        try:
            inst = qmep_linearize(random_qmep(n, seed)) if kind == "qmep" else random_mep(k, n, seed)
            row["dims"] = "x".join(map(str, inst.dims))
            t0 = time.perf_counter()
            report = solve(inst, args.homotopy_seed, config, workers)
            etas = [p.diagnostics.backward_error for p in report.eigenpairs]
            row.update(
                start_points=report.n_paths,
                eigenpairs=len(report.eigenpairs),
                converged=report.n_converged,
                divergent=report.n_divergent,
                wall_time=time.perf_counter() - t0,
                t_path=report.max_path_time,
                newton_per_path=report.newton_per_path,
                max_deviation=report.max_deviation,
                max_backward_error=max(etas, default=float("nan")),
                mean_backward_error=float(np.mean(etas)) if etas else float("nan"),
            )
            if args.compare_diag:
                diag = track_path_diag_coeff(inst, args.homotopy_seed, config)
                row["diag_start_points"] = len(diag)
                row["diag_divergent"] = sum(not r.converged for r in diag)
        except Exception as exc:  # recorded per run; the bench keeps going
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
        print(" ".join(f"{key}={row[key]}" for key in BENCH_HEADER if key in row), flush=True)
    write_csv(args.out / "bench.csv", BENCH_HEADER, [[r.get(h) for h in BENCH_HEADER] for r in rows])
    ok = [r for r in rows if "error" not in r]
    if ok:
        print(
            f"runs={len(rows)} failed={len(rows) - len(ok)} "
            f"divergent_total={sum(r['divergent'] for r in ok)} "
            f"max_deviation={max(r['max_deviation'] for r in ok):.3e} "
            f"max_backward_error={max(r['max_backward_error'] for r in ok):.3e}"
        )
    if args.plot and ok:
        from .plotting import plot_by_norm

        plot_by_norm({"t_path": [r["t_path"] for r in ok]}, args.out / "bench_t_path.png", "t_path [s]")
    healthy = len(ok) == len(rows) and all(r["divergent"] == 0 for r in ok)
    return EXIT_OK if healthy else EXIT_UNHEALTHY


COMMANDS = {
    "solve": cmd_solve,
    "bench": cmd_bench,
    "certify": cmd_certify,
    "condition": cmd_condition,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
