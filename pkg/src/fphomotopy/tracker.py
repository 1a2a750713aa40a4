"""Euler-Newton predictor-corrector path tracking.

Two homotopies share the same tracking loop:

* :class:`FiberProductHomotopy` deforms only the ``k(k-1)`` linear constraint rows,
  from the random slices ``L_i`` to the fiber-diagonal constraints ``G_i``;
* :class:`DiagonalCoefficientHomotopy` deforms every bilinear row from a random
  diagonal start system, and is kept for comparison.

Variables are flattened as ``z = (vec(Lambda), x_1, ..., x_k)`` for the fiber
product system and ``z = (lam, x_1, ..., x_k)`` for the diagonal one.
"""

from __future__ import annotations

import enum
import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .core import FiberPoint, MepInstance
from .densela import IllConditionedError, lu_factor, lu_solve
from .startsys import SliceSet, complex_gaussian
from .targetsys import TargetConstraints


class PathStatus(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    STEP_FLOOR = "step_floor_hit"
    MAX_STEPS = "max_steps_hit"


@dataclass(frozen=True)
class TrackerConfig:
    h_init: float = 1e-3
    h_max: float = 1e-2
    h_min: float = 1e-6
    newton_tol: float = 1e-9
    max_newton_per_step: int = 8
    endgame_max_iters: int | None = None
    divergence_norm_cap: float = 1e10
    max_total_steps: int = 10000
    endpoint_tol: float = 1e-8
    # switch to a chart centred on x_i once an entry of x_i exceeds this
    rechart_norm: float = 1e2
    # corrector updates must shrink by this factor per iteration (None disables)
    newton_contraction: float | None = 0.5

    def __post_init__(self):
        if not (0 < self.h_min <= self.h_init <= self.h_max < 1):
            raise ValueError(
                f"need 0 < h_min <= h_init <= h_max < 1, got "
                f"{self.h_min}, {self.h_init}, {self.h_max}"
            )
        if self.newton_tol <= 0 or self.max_newton_per_step < 1:
            raise ValueError("newton_tol must be positive and max_newton_per_step >= 1")

    def endgame_iters(self, k: int, dims: Sequence[int]) -> int:
        if self.endgame_max_iters is not None:
            return self.endgame_max_iters
        return max(20, k * max(dims) + 5)


@dataclass
class PathStats:
    euler_steps: int = 0
    newton_iters: int = 0
    rejected_steps: int = 0
    h_min_used: float = math.inf
    h_max_used: float = 0.0
    final_corrector_norm: float = math.nan
    recharts: int = 0
    wall_time: float = 0.0


@dataclass
class PathResult:
    status: PathStatus
    endpoint: FiberPoint | None
    stats: PathStats
    last_point: FiberPoint | None = None
    start_index: tuple[int, ...] = ()
    checkpoints: dict[float, FiberPoint] = field(default_factory=dict)
    trace: list[tuple] | None = None

    @property
    def converged(self) -> bool:
        return self.status is PathStatus.CONVERGED


class _Homotopy:
    """Shared evaluation for both homotopies.

    Subclasses set ``k``, ``dims``, ``n_lambda`` and implement ``evaluate``,
    which returns the residual and (optionally) the Jacobian in one pass.
    """

    k: int
    dims: tuple[int, ...]
    n_lambda: int

    def _prepare(self, inst: MepInstance):
        self.inst = inst
        self.k = inst.k
        self.dims = inst.dims
        # A_i0..A_ik stacked as rows so one matvec yields every A_ij x_i
        self._rows = [inst.stack(i).reshape(-1, n) for i, n in enumerate(self.dims)]
        self._flat = [inst.stack(i)[1:].reshape(self.k, -1) for i in range(self.k)]
        offs = np.cumsum((self.n_lambda,) + self.dims)
        self._xslices = [slice(int(a), int(b)) for a, b in zip(offs[:-1], offs[1:])]
        self._eq_offsets = np.concatenate(([0], np.cumsum(self.dims)))
        self._n_eq = int(self._eq_offsets[-1])

    def _x_blocks(self, z):
        return [z[s] for s in self._xslices]

    def _h_matrix(self, i: int, lam_i: np.ndarray) -> np.ndarray:
        n = self.dims[i]
        return self.inst.stack(i)[0] - (lam_i @ self._flat[i]).reshape(n, n)

    def _products(self, i: int, x: np.ndarray) -> np.ndarray:
        """Rows ``A_i0 x, A_i1 x, ..., A_ik x``."""
        return (self._rows[i] @ x).reshape(self.k + 1, -1)

    @property
    def size(self) -> int:
        return self.n_lambda + self._n_eq

    def residual(self, z: np.ndarray, t: float) -> np.ndarray:
        return self.evaluate(z, t, jacobian=False)[0]

    def jacobian(self, z: np.ndarray, t: float) -> np.ndarray:
        return self.evaluate(z, t)[1]

    def lambda_norm(self, z: np.ndarray) -> float:
        return float(np.abs(z[: self.n_lambda]).max())

    def chart_scale(self, z: np.ndarray) -> float:
        """Largest eigenvector entry; grows when a chart is nearly orthogonal to ``x_i``."""
        return float(np.abs(z[self.n_lambda :]).max())

    def rechart(self, z: np.ndarray):
        """Move every eigenvector to the chart centred on it.

        The new chart of block i is ``conj(u_i)`` with ``u_i = x_i / ||x_i||``, so
        ``u_i`` satisfies it exactly. Returns the new homotopy and point; the path
        in projective space is unchanged.
        """
        z = z.copy()
        charts = []
        for s in self._xslices:
            u = z[s] / np.linalg.norm(z[s])
            z[s] = u
            charts.append(u.conj())
        return self.with_charts(charts), z


class FiberProductHomotopy(_Homotopy):
    """Square system ``F(z, t)`` of the fiber product homotopy with affine charts.

    Row blocks: ``H_i(lam_i) x_i`` for each i, then ``d_i^T x_i - 1``, then
    ``[(1-t) grad Lbar_i + t grad G_i] vec(Lambda) - (1-t) 1``. Only the last
    block depends on ``t``.
    """

    def __init__(self, inst: MepInstance, slices: SliceSet, target: TargetConstraints):
        if slices.k != inst.k or target.k != inst.k:
            raise ValueError("instance, slices and target disagree on k")
        self.n_lambda = inst.k * inst.k
        self._prepare(inst)
        self.slices = slices
        self.target = target
        self._charts = slices.charts
        self._lbar = slices.block_jacobian()
        self._grad_g = target.stacked_jacobian()
        self._template = np.zeros((self.size, self.size), dtype=complex)
        row = self._n_eq
        for i, sl in enumerate(self._xslices):
            self._template[row + i, sl] = self._charts[i]
        self._cached_t = None
        self._build_index_maps()

    def _build_index_maps(self):
        """Gather/scatter maps so one evaluation is a handful of vectorized operations."""
        k, nl, size = self.k, self.n_lambda, self.size
        # one matvec yields A_ij x_i for every (i, j)
        self._products_all = sla.block_diag(*self._rows)
        self._chart_rows = sla.block_diag(*(c[None, :] for c in self._charts))
        idx0, idx_j, lam_idx, b_pos, h_pos = [], [], [], [], []
        h_const, h_lin = [], np.zeros((nl, sum(n * n for n in self.dims)), dtype=complex)
        prod_off = h_off = 0
        for i, n in enumerate(self.dims):
            eq0 = int(self._eq_offsets[i])
            local = np.arange(n)
            idx0.append(prod_off + local)
            idx_j.append(np.array([prod_off + (j + 1) * n + local for j in range(k)]))
            lam_idx.append(np.repeat(i * k + np.arange(k), n).reshape(k, n))
            rows = eq0 + local
            b_pos.append(np.array([rows * size + i * k + j for j in range(k)]))
            r, c = np.divmod(np.arange(n * n), n)
            h_pos.append((eq0 + r) * size + nl + eq0 + c)
            stack = self.inst.stack(i)
            h_const.append(stack[0].ravel())
            h_lin[i * k : (i + 1) * k, h_off : h_off + n * n] = stack[1:].reshape(k, -1)
            prod_off += (k + 1) * n
            h_off += n * n
        self._idx0 = np.concatenate(idx0)
        self._idx_j = np.concatenate(idx_j, axis=1)
        self._lam_idx = np.concatenate(lam_idx, axis=1)
        self._b_pos = np.concatenate(b_pos, axis=1)
        self._h_pos = np.concatenate(h_pos)
        self._h_const = np.concatenate(h_const)
        self._h_lin = h_lin

    def with_charts(self, charts) -> "FiberProductHomotopy":
        slices = replace(self.slices, charts=tuple(np.asarray(c, dtype=complex) for c in charts))
        return FiberProductHomotopy(self.inst, slices, self.target)

    def constraint_jacobian(self, t: float) -> np.ndarray:
        return (1.0 - t) * self._lbar + t * self._grad_g

    def _template_at(self, t):
        if self._cached_t != t:
            self._cmat = self.constraint_jacobian(t)
            self._template[self._n_eq + self.k :, : self.n_lambda] = self._cmat
            self._cached_t = t
        return self._template

    def evaluate(self, z: np.ndarray, t: float, jacobian: bool = True):
        nl, neq = self.n_lambda, self._n_eq
        lam, x = z[:nl], z[nl:]
        template = self._template_at(t)
        ax = self._products_all @ x
        coupled = ax[self._idx_j]
        out = np.empty(self.size, dtype=complex)
        out[:neq] = ax[self._idx0] - (lam[self._lam_idx] * coupled).sum(axis=0)
        out[neq : neq + self.k] = self._chart_rows @ x - 1.0
        out[neq + self.k :] = self._cmat @ lam - (1.0 - t)
        if not jacobian:
            return out, None
        jac = template.copy()
        flat = jac.reshape(-1)
        # B_i(x_i) = -[A_i1 x_i, ..., A_ik x_i] and the blocks H_i(lam_i)
        flat[self._b_pos] = -coupled
        flat[self._h_pos] = self._h_const - lam @ self._h_lin
        return out, jac

    def dt(self, z: np.ndarray, t: float) -> np.ndarray:
        """Partial derivative of ``F`` in ``t``; nonzero only in the constraint rows."""
        out = np.zeros(self.size, dtype=complex)
        out[self._n_eq + self.k :] = (self._grad_g - self._lbar) @ z[: self.n_lambda] + 1.0
        return out

    def to_point(self, z: np.ndarray, t: float) -> FiberPoint:
        return FiberPoint.from_vector(z, self.k, self.dims, t)

    def from_point(self, point: FiberPoint) -> np.ndarray:
        return point.to_vector()


class DiagonalCoefficientHomotopy(_Homotopy):
    """Straight-line homotopy from ``(D_i0 + lam_i D_ii) x_i`` to ``H_i(lam) x_i``."""

    def __init__(self, inst: MepInstance, d0, d1, charts):
        self.n_lambda = inst.k
        self._prepare(inst)
        self.d0 = tuple(np.asarray(d, dtype=complex) for d in d0)
        self.d1 = tuple(np.asarray(d, dtype=complex) for d in d1)
        self._charts = tuple(np.asarray(c, dtype=complex) for c in charts)

    def with_charts(self, charts) -> "DiagonalCoefficientHomotopy":
        return DiagonalCoefficientHomotopy(self.inst, self.d0, self.d1, charts)

    def _start_rows(self, i, lam_i, x):
        return (self.d0[i] + lam_i * self.d1[i]) * x

    def evaluate(self, z, t, jacobian=True):
        k = self.k
        lam = z[:k]
        out = np.zeros(self.size, dtype=complex)
        jac = np.zeros((self.size, self.size), dtype=complex) if jacobian else None
        eo = self._eq_offsets
        for i, sl in enumerate(self._xslices):
            x = z[sl]
            rows = slice(eo[i], eo[i + 1])
            ax = self._products(i, x)
            out[rows] = (1.0 - t) * self._start_rows(i, lam[i], x) + t * (ax[0] - lam @ ax[1:])
            out[self._n_eq + i] = self._charts[i] @ x - 1.0
            if jacobian:
                jac[rows, :k] = -t * ax[1:].T
                jac[rows, i] += (1.0 - t) * self.d1[i] * x
                jac[rows, sl] = t * self._h_matrix(i, lam) + (1.0 - t) * np.diag(
                    self.d0[i] + lam[i] * self.d1[i]
                )
                jac[self._n_eq + i, sl] = self._charts[i]
        return out, jac

    def dt(self, z, t):
        lam = z[: self.k]
        out = np.zeros(self.size, dtype=complex)
        eo = self._eq_offsets
        for i, sl in enumerate(self._xslices):
            x = z[sl]
            ax = self._products(i, x)
            out[eo[i] : eo[i + 1]] = (ax[0] - lam @ ax[1:]) - self._start_rows(i, lam[i], x)
        return out

    def to_point(self, z, t):
        lam = z[: self.k]
        return FiberPoint(np.tile(lam, (self.k, 1)), tuple(self._x_blocks(z)), t)

    def start_points(self) -> list[tuple[tuple[int, ...], np.ndarray]]:
        """Closed-form starts: ``lam_i = -D_i0[j]/D_ii[j]``, ``x_i = e_j / d_i[j]``."""
        out = []
        for idx in itertools.product(*(range(n) for n in self.dims)):
            lam = np.array([-self.d0[i][j] / self.d1[i][j] for i, j in enumerate(idx)])
            xs = []
            for i, j in enumerate(idx):
                x = np.zeros(self.dims[i], dtype=complex)
                x[j] = 1.0 / self._charts[i][j]
                xs.append(x)
            out.append((idx, np.concatenate([lam, *xs])))
        return out


def euler_tangent(hom, z: np.ndarray, t: float) -> np.ndarray:
    """Solve ``J(z, t) dz/dt = -dF/dt`` for the path tangent."""
    return _solve(hom.jacobian(z, t), -hom.dt(z, t))


def _solve(jac, rhs):
    return lu_solve(lu_factor(jac), rhs)


def newton_refine(hom, z: np.ndarray, t: float, tol: float, max_iters: int):
    """Newton's method at fixed ``t``.

    Returns ``(z, iters, final_corrector_norm, converged)``; stops once the
    corrector's infinity norm drops below ``tol``.
    """
    return _newton(hom, z, t, tol, max_iters)[:4]


def _newton(hom, z, t, tol, max_iters, contraction=None):
    # also hands back the last LU so the caller can reuse it for the next tangent
    norm = math.inf
    for it in range(1, max_iters + 1):
        f, jac = hom.evaluate(z, t)
        try:
            factors = lu_factor(jac)
        except IllConditionedError:
            return z, max_iters, norm, False, None
        delta = lu_solve(factors, -f)
        z = z + delta
        prev, norm = norm, float(np.abs(delta).max())
        if not np.isfinite(norm):
            return z, max_iters, norm, False, None
        if norm < tol:
            return z, it, norm, True, factors
        if contraction is not None and norm > contraction * prev:
            # a corrector that stops contracting is drifting toward another path
            return z, max_iters, norm, False, None
    return z, max_iters, norm, False, None


def step_control(i_nt: int, converged: bool, h: float, config: TrackerConfig):
    """Return ``(new_h, accept)`` following the doubling/halving policy."""
    if not converged:
        return h / 2.0, False
    if i_nt <= 2:
        return min(2.0 * h, config.h_max), True
    return h, True


def _track(
    hom,
    z0: np.ndarray,
    config: TrackerConfig,
    checkpoints: Sequence[float] = (),
    trace: bool = False,
) -> PathResult:
    t0 = time.perf_counter()
    stats = PathStats()
    z = np.array(z0, dtype=complex)
    t = 0.0
    h = config.h_init
    pending = sorted(c for c in checkpoints if 0.0 < c <= 1.0)
    saved = {0.0: hom.to_point(z, 0.0)} if 0.0 in checkpoints else {}
    rows = [] if trace else None
    if trace:
        rows.append((0.0, 0.0, 0, float(np.max(np.abs(hom.residual(z, 0.0)))), z[: hom.n_lambda].copy()))
    endgame = config.endgame_iters(hom.k, hom.dims)
    status = None
    factors = None

    def finish(status):
        stats.wall_time = time.perf_counter() - t0
        point = hom.to_point(z, t)
        end = point if status is PathStatus.CONVERGED else None
        return PathResult(status, end, stats, point, checkpoints=saved, trace=rows)

    while status is None:
        if stats.euler_steps >= config.max_total_steps:
            return finish(PathStatus.MAX_STEPS)
        if h < config.h_min:
            return finish(PathStatus.STEP_FLOOR)
        step = min(h, 1.0 - t)
        if pending and t + step >= pending[0]:
            step = pending[0] - t
        t_new = t + step
        final = t_new >= 1.0 - 1e-15
        if final:
            t_new = 1.0
            step = 1.0 - t
        stats.euler_steps += 1
        try:
            if factors is None:
                factors = lu_factor(hom.jacobian(z, t))
            tangent = lu_solve(factors, -hom.dt(z, t))
        except IllConditionedError:
            stats.rejected_steps += 1
            h /= 2.0
            continue
        pred = z + step * tangent
        max_it = endgame if final else config.max_newton_per_step
        znew, it, cnorm, ok, new_factors = _newton(
            hom, pred, t_new, config.newton_tol, max_it, config.newton_contraction
        )
        stats.newton_iters += it
        _, accept = step_control(it, ok, h, config)
        if not accept:
            stats.rejected_steps += 1
            h = min(h, step) / 2.0
            continue
        stats.h_min_used = min(stats.h_min_used, step)
        stats.h_max_used = max(stats.h_max_used, step)
        stats.final_corrector_norm = cnorm
        z, t = znew, t_new
        # Jacobian from the last corrector iterate; it differs from J(z, t) by < newton_tol
        factors = new_factors
        if trace:
            rows.append((t, step, it, float(np.max(np.abs(hom.residual(z, t)))), z[: hom.n_lambda].copy()))
        if pending and t >= pending[0] - 1e-15:
            saved[pending.pop(0)] = hom.to_point(z, t)
        if hom.lambda_norm(z) > config.divergence_norm_cap:
            return finish(PathStatus.DIVERGED)
        if final:
            if np.max(np.abs(hom.residual(z, 1.0))) >= config.endpoint_tol:
                return finish(PathStatus.DIVERGED)
            status = PathStatus.CONVERGED
            break
        if hom.chart_scale(z) > config.rechart_norm:
            hom, z = hom.rechart(z)
            factors = None
            stats.recharts += 1
        h, _ = step_control(it, ok, h, config)
    return finish(status)


def track_path(
    inst: MepInstance,
    slices: SliceSet,
    target: TargetConstraints,
    start: FiberPoint,
    config: TrackerConfig | None = None,
    checkpoints: Sequence[float] = (),
    trace: bool = False,
) -> PathResult:
    """Track one start point of the fiber product homotopy from t=0 to t=1."""
    hom = FiberProductHomotopy(inst, slices, target)
    return track_homotopy(hom, hom.from_point(start), config, checkpoints, trace)


def track_homotopy(hom, z0, config=None, checkpoints=(), trace=False) -> PathResult:
    return _track(hom, z0, config or TrackerConfig(), checkpoints, trace)


def sample_diagonal_homotopy(inst: MepInstance, seed=None) -> DiagonalCoefficientHomotopy:
    rng = np.random.default_rng(seed)
    d0 = [complex_gaussian(rng, n) for n in inst.dims]
    d1 = [complex_gaussian(rng, n) for n in inst.dims]
    charts = []
    for n in inst.dims:
        d = complex_gaussian(rng, n)
        charts.append(d / np.linalg.norm(d))
    return DiagonalCoefficientHomotopy(inst, d0, d1, charts)


def track_path_diag_coeff(
    inst: MepInstance, seed=None, config: TrackerConfig | None = None
) -> list[PathResult]:
    """Track every start point of the diagonal coefficient homotopy."""
    hom = sample_diagonal_homotopy(inst, seed)
    results = []
    for idx, z0 in hom.start_points():
        res = track_homotopy(hom, z0, config)
        results.append(replace(res, start_index=idx))
    return results
