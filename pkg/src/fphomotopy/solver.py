"""End-to-end solve: slices, targets, start set, tracking, collapse, clustering."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import Eigenpair, FiberPoint, MepInstance
from .diagnostics import (
    alpha_number,
    backward_error,
    coefficient_norms,
    kappa_along_path,
    kappa_fp,
    kappa_standard,
)
from .startsys import (
    RETRY_BUDGET,
    ChartDegenerateError,
    SliceSet,
    StartSet,
    sample_slices,
    start_solutions,
)
from .targetsys import TargetConstraints, sample_target
from .tracker import (
    FiberProductHomotopy,
    PathResult,
    PathStatus,
    TrackerConfig,
    newton_refine,
    track_homotopy,
)

DEVIATION_FLAG = 1e-4
CLUSTER_TOL = 1e-8
WORKERS_ENV = "FPHOMOTOPY_WORKERS"
KAPPA_TRACE_TIMES = tuple(round(0.1 * i, 1) for i in range(11))


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {env!r}") from exc
        if value < 1:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {env!r}")
        return value
    return os.cpu_count() or 1


@dataclass
class SolveOptions:
    certify: bool = False
    condition: bool = False
    polish: int = 0
    trace_paths: bool = False
    trace_kappa: bool = False


@dataclass
class SolveReport:
    eigenpairs: list[Eigenpair]
    path_results: list[PathResult]
    slices: SliceSet
    target: TargetConstraints
    starts: StartSet
    seed: int | None
    config: TrackerConfig
    wall_time: float = 0.0

    @property
    def n_paths(self) -> int:
        return len(self.path_results)

    @property
    def n_converged(self) -> int:
        return sum(r.converged for r in self.path_results)

    @property
    def n_divergent(self) -> int:
        return self.n_paths - self.n_converged

    @property
    def n_clustered(self) -> int:
        """Converged endpoints merged into another eigenpair."""
        return self.n_converged - len(self.eigenpairs)

    @property
    def max_path_time(self) -> float:
        return max((r.stats.wall_time for r in self.path_results), default=0.0)

    @property
    def newton_per_path(self) -> float:
        if not self.path_results:
            return 0.0
        return float(np.mean([r.stats.newton_iters for r in self.path_results]))

    @property
    def max_deviation(self) -> float:
        return max((p.diagnostics.deviation for p in self.eigenpairs), default=0.0)


def collapse_fiber_point(fp: FiberPoint) -> Eigenpair:
    """Report the first copy as the eigenvalue and unit-normalize the vectors."""
    lam = np.array(fp.lambdas[0])
    dev = max((float(np.abs(lam - row).sum()) for row in fp.lambdas[1:]), default=0.0)
    xs = tuple(np.asarray(x) / np.linalg.norm(x) for x in fp.xs)
    pair = Eigenpair(lam, xs, point=fp, inconsistent=dev > DEVIATION_FLAG)
    pair.diagnostics.deviation = dev
    return pair


def cluster_eigenvalues(pairs: list[Eigenpair], rel_tol: float = CLUSTER_TOL) -> list[Eigenpair]:
    """Merge near-coincident eigenvalues by single linkage.

    Two eigenvalues link when ``||a - b|| / (1 + max(||a||, ||b||)) < rel_tol``. Each
    cluster becomes one Eigenpair whose ``lam`` is the componentwise mean; the
    remaining fields come from the member with the smallest start index.
    """
    if not pairs:
        return []
    lams = np.array([p.lam for p in pairs])
    norms = np.linalg.norm(lams, axis=1)
    diff = np.linalg.norm(lams[:, None, :] - lams[None, :, :], axis=2)
    linked = diff / (1.0 + np.maximum(norms[:, None], norms[None, :])) < rel_tol
    n_comp, labels = connected_components(coo_matrix(linked), directed=False)
    out = []
    for c in range(n_comp):
        members = [pairs[i] for i in np.flatnonzero(labels == c)]
        first = min(members, key=lambda p: p.start_index)
        merged = replace(
            first,
            lam=np.mean([p.lam for p in members], axis=0),
            cluster_size=sum(p.cluster_size for p in members),
            inconsistent=any(p.inconsistent for p in members),
        )
        merged.diagnostics = replace(
            first.diagnostics, deviation=max(p.diagnostics.deviation for p in members)
        )
        out.append(merged)
    out.sort(key=lambda p: p.start_index)
    return out


def _track_task(args) -> PathResult:
    inst, slices, target, index, start, config, trace = args
    hom = FiberProductHomotopy(inst, slices, target)
    res = track_homotopy(hom, hom.from_point(start), config, trace=trace)
    res.start_index = tuple(index)
    return res


def _build_start_system(inst: MepInstance, seed):
    ss = np.random.SeedSequence(seed)
    slice_seq, target_seq = ss.spawn(2)
    target = sample_target(inst.k, target_seq)
    last_error = None
    for seq in slice_seq.spawn(RETRY_BUDGET):
        slices = sample_slices(inst, seq)
        try:
            return slices, target, start_solutions(inst, slices)
        except ChartDegenerateError as exc:
            last_error = exc
    raise RuntimeError(f"chart vectors stayed degenerate after {RETRY_BUDGET} draws: {last_error}")


def track_all(inst, slices, target, starts: StartSet, config, workers=1, trace=False, order=None):
    """Track every start point; results come back in start multi-index order."""
    indices = list(starts.indices())
    if order is not None:
        indices = [indices[i] for i in order]
    tasks = [(inst, slices, target, idx, starts.point(idx), config, trace) for idx in indices]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_track_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_track_task(t) for t in tasks]
    results.sort(key=lambda r: r.start_index)
    return results


def polish_point(hom: FiberProductHomotopy, point: FiberPoint, steps: int) -> FiberPoint:
    """Run exactly ``steps`` extra Newton iterations at ``t = 1``.

    Eigenvectors are first rescaled onto the charts of ``hom``; a path that
    switched charts ends on a different affine patch.
    """
    xs = tuple(x / (d @ x) for x, d in zip(point.xs, hom.slices.charts))
    z = hom.from_point(FiberPoint(point.lambdas, xs, point.t))
    for _ in range(steps):
        z, _, _, _ = newton_refine(hom, z, 1.0, 0.0, 1)
    return hom.to_point(z, 1.0)


def attach_diagnostics(
    inst: MepInstance,
    pairs: list[Eigenpair],
    hom: FiberProductHomotopy,
    options: SolveOptions,
    norms=None,
) -> None:
    norms = coefficient_norms(inst) if norms is None else norms
    for pair in pairs:
        d = pair.diagnostics
        d.backward_error = backward_error(inst, pair.lam, pair.xs, norms)
        if options.certify and pair.point is not None:
            point = polish_point(hom, pair.point, options.polish)
            res = alpha_number(hom, hom.from_point(point))
            d.alpha, d.certified = res.alpha, res.certified
        if options.condition:
            d.kappa_fp = kappa_fp(inst, pair.lam, pair.xs)
            ks = kappa_standard(inst, pair.lam, pair.xs, norms)
            d.kappa_std_lower, d.kappa_std_upper, d.kappa_std_estimate = (
                ks.lower,
                ks.upper,
                ks.estimate,
            )


def _kappa_traces(inst, slices, target, starts, results, config, pairs):
    by_index = {p.start_index: p for p in pairs}
    hom = FiberProductHomotopy(inst, slices, target)
    for res in results:
        pair = by_index.get(res.start_index)
        if pair is None:
            continue
        again = track_homotopy(
            hom, hom.from_point(starts.point(res.start_index)), config, checkpoints=KAPPA_TRACE_TIMES
        )
        trace = []
        for t in KAPPA_TRACE_TIMES:
            point = again.checkpoints.get(t)
            value = math.inf if point is None else kappa_along_path(inst, slices, target, point, t)
            trace.append((t, value))
        pair.diagnostics.kappa_trace = trace


def solve(
    inst: MepInstance,
    seed: int | None = 0,
    config: TrackerConfig | None = None,
    workers: int = 1,
    options: SolveOptions | None = None,
    order=None,
) -> SolveReport:
    """Compute all eigenpairs reachable by the fiber product homotopy.

    ``seed`` fixes the slices, charts and target matrices. ``workers > 1`` tracks
    paths in a process pool; the report does not depend on the worker count.
    ``order`` permutes the dispatch order of the start points (testing aid).
    """
    config = config or TrackerConfig()
    options = options or SolveOptions()
    t0 = time.perf_counter()
    slices, target, starts = _build_start_system(inst, seed)
    results = track_all(inst, slices, target, starts, config, workers, options.trace_paths, order)
    collapsed = []
    for res in results:
        if res.status is PathStatus.CONVERGED:
            pair = collapse_fiber_point(res.endpoint)
            pair.start_index = res.start_index
            pair.newton_iters = res.stats.newton_iters
            pair.path_status = res.status.value
            collapsed.append(pair)
    pairs = cluster_eigenvalues(collapsed)
    hom = FiberProductHomotopy(inst, slices, target)
    attach_diagnostics(inst, pairs, hom, options)
    if options.trace_kappa:
        _kappa_traces(inst, slices, target, starts, results, config, pairs)
    report = SolveReport(pairs, results, slices, target, starts, seed, config)
    report.wall_time = time.perf_counter() - t0
    return report


def residual_certificate(inst: MepInstance, pair: Eigenpair, tol: float = 1e-8, norms=None) -> bool:
    """``||H_i(lam) x_i|| < tol * theta_i`` for every i with unit ``x_i``."""
    return backward_error(inst, pair.lam, pair.xs, norms) < tol


def sorted_by_norm(pairs: list[Eigenpair]) -> list[Eigenpair]:
    """Sort by ``||lam||`` with start index as the tie-breaker."""
    return sorted(pairs, key=lambda p: (float(np.linalg.norm(p.lam)), p.start_index))
