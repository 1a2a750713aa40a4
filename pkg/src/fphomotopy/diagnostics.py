"""Accuracy and conditioning measures for computed eigenpairs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FiberPoint, MepInstance
from .densela import (
    NoNullVectorError,
    norm2,
    null_space,
    null_vector,
    sin_smallest_principal_angle,
)
from .startsys import SliceSet
from .targetsys import TargetConstraints, build_dk, constraint_matrix_mt

ALPHA_THRESHOLD = (13.0 - 3.0 * math.sqrt(17.0)) / 4.0
TORUS_SAMPLES = 10_000
ANGLE_FLOOR = 1e-14


def coefficient_norms(inst: MepInstance) -> np.ndarray:
    """Operator 2-norms ``||A_ij||`` as a ``(k, k+1)`` array."""
    return np.array([[norm2(a) for a in inst.stack(i)] for i in range(inst.k)])


def theta_weights(inst: MepInstance, lam, norms: np.ndarray | None = None) -> np.ndarray:
    """``theta_i = ||A_i0|| + sum_j |lam_j| ||A_ij||``."""
    norms = coefficient_norms(inst) if norms is None else norms
    return norms[:, 0] + norms[:, 1:] @ np.abs(np.asarray(lam))


def backward_error(inst: MepInstance, lam, xs: Sequence[np.ndarray], norms=None) -> float:
    """Normwise backward error ``max_i ||H_i(lam) x_i|| / theta_i`` with unit ``x_i``."""
    lam = np.asarray(lam, dtype=complex)
    theta = theta_weights(inst, lam, norms)
    worst = 0.0
    for i, x in enumerate(xs):
        x = np.asarray(x, dtype=complex)
        nx = np.linalg.norm(x)
        if nx == 0:
            return math.inf
        r = np.linalg.norm(inst.H(i, lam) @ (x / nx))
        if r > 0:  # theta_i = 0 makes H_i(lam) exactly zero
            worst = max(worst, r / theta[i])
    return float(worst)


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    beta: float
    gamma: float
    certified: bool


def second_derivative_norm(inst: MepInstance) -> float:
    """Frobenius norm of the constant Hessian tensor of the bilinear rows.

    Each entry of ``A_ij`` (j >= 1) appears twice, once per ordering of the
    mixed partial in ``(lam_ij, x_i)``.
    """
    total = sum(np.vdot(s[1:], s[1:]).real for s in (inst.stack(i) for i in range(inst.k)))
    return math.sqrt(2.0 * total)


def alpha_number(hom, z: np.ndarray, t: float = 1.0) -> AlphaResult:
    """Smale's alpha for the square system ``hom`` at ``z``.

    The system has bilinear and affine rows only, so
    ``gamma <= ||J^-1|| ||D^2 F|| / 2`` with the Hessian bounded in Frobenius norm.
    """
    f, jac = hom.evaluate(np.asarray(z, dtype=complex), t)
    try:
        u, s, vh = np.linalg.svd(jac)
    except np.linalg.LinAlgError:
        return AlphaResult(math.inf, math.inf, math.inf, False)
    if s[-1] <= np.finfo(float).eps * s[0]:
        return AlphaResult(math.inf, math.inf, math.inf, False)
    step = vh.conj().T @ ((u.conj().T @ f) / s)
    beta = float(np.linalg.norm(step))
    gamma = 0.5 / s[-1] * second_derivative_norm(hom.inst)
    alpha = beta * gamma
    return AlphaResult(alpha, beta, gamma, alpha < ALPHA_THRESHOLD)


def _left_right_vectors(inst: MepInstance, lam_rows: np.ndarray, xs=None):
    """Right null vectors ``x_i`` of ``H_i(lam_i)`` and ``y_i`` with ``H_i^T y_i = 0``."""
    ys, xr = [], []
    for i in range(inst.k):
        h = inst.H(i, lam_rows[i])
        ys.append(null_vector(h.T))
        xr.append(null_vector(h) if xs is None else np.asarray(xs[i], dtype=complex))
    return ys, xr


def tangent_rows(inst: MepInstance, lam_rows: np.ndarray, xs=None, ys=None) -> np.ndarray:
    """The ``k x (1 + k^2)`` matrix with rows ``y_i^T [A_i0 x_i, B_i(x_i)]`` placed blockwise."""
    k = inst.k
    if ys is None:
        ys, xs = _left_right_vectors(inst, lam_rows, xs)
    jac = np.zeros((k, 1 + k * k), dtype=complex)
    for i in range(k):
        s = inst.stack(i)
        ax = s @ xs[i]
        jac[i, 0] = ys[i] @ ax[0]
        jac[i, 1 + i * k : 1 + (i + 1) * k] = -(ax[1:] @ ys[i])
    return jac


def _intersection_kappa(jac: np.ndarray, mt: np.ndarray) -> float:
    k = jac.shape[0]
    lam_part = jac[:, 1:]
    if np.linalg.matrix_rank(lam_part, tol=1e-12 * max(np.abs(lam_part).max(), 1e-300)) < k:
        return math.inf
    tangent = null_space(lam_part)
    linear = null_space(mt[:, 1:])
    s = sin_smallest_principal_angle(tangent, linear)
    if s < ANGLE_FLOOR:
        return math.inf
    return 1.0 / s


def kappa_fp(inst: MepInstance, lam, xs=None, target: TargetConstraints | None = None) -> float:
    """Intersection condition number at a collapsed eigenvalue ``lam``.

    The constraint space at ``t = 1`` is the fiber diagonal for any target
    matrices; passing ``target`` uses its gradient instead of ``D_k``.
    """
    k = inst.k
    lam_rows = np.tile(np.asarray(lam, dtype=complex), (k, 1))
    try:
        jac = tangent_rows(inst, lam_rows, xs)
    except NoNullVectorError:
        return math.inf
    if target is None:
        constraint = build_dk(k)
    else:
        constraint = target.stacked_jacobian()
    mt = np.hstack([np.zeros((constraint.shape[0], 1)), constraint])
    return _intersection_kappa(jac, mt)


def kappa_along_path(
    inst: MepInstance, slices: SliceSet, target: TargetConstraints, point: FiberPoint, t: float
) -> float:
    """Intersection condition number of the moving constraint space at parameter ``t``."""
    try:
        jac = tangent_rows(inst, np.asarray(point.lambdas), point.xs)
    except NoNullVectorError:
        return math.inf
    return _intersection_kappa(jac, constraint_matrix_mt(slices, target, t))


def kappa_fp_closed_form(inst: MepInstance, lam, xs=None) -> float:
    """``sqrt(k) / sigma_min(W)`` with W the unit-normalized tangent rows.

    For the diagonal constraint space this equals the principal-angle value; kept
    as an independent cross-check.
    """
    k = inst.k
    lam_rows = np.tile(np.asarray(lam, dtype=complex), (k, 1))
    rows = tangent_rows(inst, lam_rows, xs)[:, 1:]
    w = np.array([rows[i, i * k : (i + 1) * k] for i in range(k)])
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    smin = np.linalg.svd(w, compute_uv=False)[-1]
    return math.inf if smin == 0 else math.sqrt(k) / smin


@dataclass(frozen=True)
class KappaStandard:
    lower: float
    upper: float
    estimate: float


def theta_torus_norm(b: np.ndarray, samples: int = TORUS_SAMPLES, seed=0) -> float:
    """Estimate ``max ||b w||_2`` over ``|w_i| = 1`` from below.

    Combines random torus samples with a greedy phase choice that never falls
    under the Frobenius norm of ``b``.
    """
    k = b.shape[1]
    # greedy: fix w_j one at a time, maximizing the conditional expectation
    r = np.zeros(b.shape[0], dtype=complex)
    for j in range(k):
        c = np.vdot(b[:, j], r)
        r = r + b[:, j] * (c / abs(c) if abs(c) > 0 else 1.0)
    best = float(np.linalg.norm(r))
    rng = np.random.default_rng(seed)
    phases = np.exp(2j * np.pi * rng.random((samples, k)))
    vals = np.linalg.norm(phases @ b.T, axis=1)
    return max(best, float(vals.max()))


def standard_matrix(inst: MepInstance, lam, xs=None) -> np.ndarray:
    """``M_ij = u_i^* A_ij x_i`` with ``u_i^* H_i(lam) = 0`` (j >= 1)."""
    k = inst.k
    lam = np.asarray(lam, dtype=complex)
    m = np.zeros((k, k), dtype=complex)
    for i in range(k):
        h = inst.H(i, lam)
        y = null_vector(h.T)  # y^T H = 0, i.e. u = conj(y)
        x = null_vector(h) if xs is None else np.asarray(xs[i], dtype=complex)
        x = x / np.linalg.norm(x)
        m[i] = (inst.stack(i)[1:] @ x) @ y
    return m


def kappa_standard_from_matrix(m: np.ndarray, theta: np.ndarray, samples=TORUS_SAMPLES, seed=0):
    k = m.shape[0]
    try:
        b = np.linalg.solve(m, np.diag(theta))
    except np.linalg.LinAlgError:
        return KappaStandard(math.inf, math.inf, math.inf)
    if not np.all(np.isfinite(b)):
        return KappaStandard(math.inf, math.inf, math.inf)
    lower = norm2(b)
    upper = math.sqrt(k) * lower
    est = min(max(theta_torus_norm(b, samples, seed), lower), upper)
    return KappaStandard(lower, upper, est)


def kappa_standard(inst: MepInstance, lam, xs=None, norms=None, samples=TORUS_SAMPLES, seed=0):
    """``theta``-weighted condition number bracket ``(lower, upper, estimate)``."""
    try:
        m = standard_matrix(inst, lam, xs)
    except NoNullVectorError:
        return KappaStandard(math.inf, math.inf, math.inf)
    return kappa_standard_from_matrix(m, theta_weights(inst, lam, norms), samples, seed)


def perturbed_kappa_probe(
    inst: MepInstance, lam, xs, direction: np.ndarray, eps: float = 1e-6
) -> float:
    """``||d lam|| / eps`` after translating the diagonal constraint by ``eps * direction``.

    Re-solves the fiber system with the copies constrained to
    ``D_k vec(Lambda) = eps D_k v`` by Newton from the unperturbed solution.
    The ratio never exceeds kappa_fp and approaches it for the worst direction.
    """
    k = inst.k
    lam = np.asarray(lam, dtype=complex)
    v = np.asarray(direction, dtype=complex).reshape(k, k)
    dk = build_dk(k)
    dk_shift = dk @ v.ravel()
    charts = [np.asarray(x).conj() / np.vdot(x, x) for x in xs]
    lam_rows = np.tile(lam, (k, 1)).ravel()
    z = np.concatenate([lam_rows, *[np.asarray(x, dtype=complex) for x in xs]])
    n_eq = sum(inst.dims)

    def evaluate(zz):
        f = np.zeros(z.size, dtype=complex)
        jac = np.zeros((z.size, z.size), dtype=complex)
        off = k * k
        row = 0
        for i, n in enumerate(inst.dims):
            x = zz[off : off + n]
            s = inst.stack(i)
            li = zz[i * k : (i + 1) * k]
            ax = s @ x
            f[row : row + n] = ax[0] - li @ ax[1:]
            jac[row : row + n, i * k : (i + 1) * k] = -ax[1:].T
            jac[row : row + n, off : off + n] = s[0] - np.tensordot(li, s[1:], axes=1)
            f[n_eq + i] = charts[i] @ x - 1.0
            jac[n_eq + i, off : off + n] = charts[i]
            off += n
            row += n
        f[n_eq + k :] = dk @ zz[: k * k] - eps * dk_shift
        jac[n_eq + k :, : k * k] = dk
        return f, jac

    for _ in range(30):
        f, jac = evaluate(z)
        delta = np.linalg.solve(jac, -f)
        z = z + delta
        if np.abs(delta).max() < 1e-15 * (1 + np.abs(z).max()):
            break
    moved = z[: k * k].reshape(k, k) - np.tile(lam, (k, 1))
    return float(np.linalg.norm(moved) / (eps * np.linalg.norm(v)))
