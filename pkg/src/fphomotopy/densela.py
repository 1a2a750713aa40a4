"""Dense complex linear algebra kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import zgetrf, zgetrs

INFINITE_EIG_CUTOFF = 1e8
GEP_RESIDUAL_TOL = 1e-10
PIVOT_TOL = 1e-14
NULL_TOL = 1e-8


class IllConditionedError(np.linalg.LinAlgError):
    """A pivot of the LU factorization fell below the relative threshold."""


class DegeneratePencilError(np.linalg.LinAlgError):
    """``A - beta B`` is singular for every beta (or the eigen-extraction failed)."""


class NoNullVectorError(np.linalg.LinAlgError):
    pass


@dataclass
class GepSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: list[np.ndarray]
    n_infinite: int = 0
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.eigenvalues)


def svd(a: np.ndarray, full_matrices: bool = True):
    """Return ``(U, s, Vh)`` with ``s`` sorted descending."""
    return np.linalg.svd(np.asarray(a, dtype=complex), full_matrices=full_matrices)


def norm2(a: np.ndarray) -> float:
    """Operator 2-norm (largest singular value)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def lu_factor(a: np.ndarray):
    """LU factors of ``a``; raises IllConditionedError on a tiny pivot."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    lu, piv, info = zgetrf(a)
    scale = np.sqrt(np.vdot(a, a).real)
    if info < 0 or scale == 0 or np.abs(lu.diagonal()).min() < PIVOT_TOL * scale:
        raise IllConditionedError("pivot below 1e-14 * ||A||_F")
    return lu, piv


def lu_solve(factors, b: np.ndarray) -> np.ndarray:
    lu, piv = factors
    x, info = zgetrs(lu, piv, np.asarray(b, dtype=complex))
    if info != 0:
        raise np.linalg.LinAlgError(f"getrs failed with info={info}")
    return x


def solve_square(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` by partially pivoted LU."""
    return lu_solve(lu_factor(a), b)


def gep_finite_eigs(
    ahat: np.ndarray,
    bhat: np.ndarray,
    cutoff: float = INFINITE_EIG_CUTOFF,
    tol: float = GEP_RESIDUAL_TOL,
) -> GepSpectrum:
    """Finite eigenpairs of the pencil ``ahat - beta * bhat`` via QZ.

    Eigenvalues with ``|beta| > cutoff`` count as infinite and are dropped.
    Each returned eigenvector has unit 2-norm.
    """
    ahat = np.asarray(ahat, dtype=complex)
    bhat = np.asarray(bhat, dtype=complex)
    if ahat.shape != bhat.shape or ahat.ndim != 2 or ahat.shape[0] != ahat.shape[1]:
        raise ValueError(f"pencil shapes {ahat.shape} and {bhat.shape} are not square/equal")
    n = ahat.shape[0]
    na, nb = norm2(ahat), norm2(bhat)

    # an identically singular pencil is singular at a random shift too
    shift = np.exp(2j * np.pi * 0.3819660112501051) * (1 + na) / (1 + nb)
    smin = np.linalg.svd(ahat - shift * bhat, compute_uv=False)[-1]
    if smin < 1e-13 * (na + abs(shift) * nb):
        raise DegeneratePencilError("pencil is singular for every beta")

    (alpha, beta), vr = sla.eig(ahat, bhat, homogeneous_eigvals=True, check_finite=False)
    finite = np.abs(beta) * cutoff > np.abs(alpha)
    vals, vecs, res = [], [], []
    for idx in np.flatnonzero(finite):
        lam = alpha[idx] / beta[idx]
        v = vr[:, idx] / np.linalg.norm(vr[:, idx])
        r = np.linalg.norm(ahat @ v - lam * (bhat @ v))
        if r > tol * (na + abs(lam) * nb):
            raise DegeneratePencilError(
                f"eigenpair residual {r:.3e} exceeds tolerance for beta={lam:.6g}"
            )
        vals.append(lam)
        vecs.append(v)
        res.append(r)
    return GepSpectrum(np.array(vals, dtype=complex), vecs, int(n - len(vals)), np.array(res))


def null_vector(a: np.ndarray, tol: float = NULL_TOL) -> np.ndarray:
    """Unit vector minimizing ``||a v||``; requires numerical nullity >= 1."""
    a = np.asarray(a, dtype=complex)
    m, n = a.shape
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smin = s[-1] if m >= n else 0.0
    if s.size and s[0] > 0 and smin > tol * s[0]:
        raise NoNullVectorError(f"smallest singular value {smin:.3e} exceeds {tol:g} * {s[0]:.3e}")
    return vh[-1].conj()


def orthonormal_basis(a: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the column span of ``a``."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return a.reshape(a.shape[0], 0)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > rtol * max(s[0], 1e-300))) if s.size else 0
    return u[:, :rank]


def null_space(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the kernel of ``a`` (columns)."""
    a = np.asarray(a, dtype=complex)
    m, n = a.shape
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def smallest_principal_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Smallest principal angle between the column spans of ``u`` and ``v``.

    Inputs are re-orthonormalized. An empty basis gives pi/2.
    """
    qu = orthonormal_basis(u)
    qv = orthonormal_basis(v)
    if qu.shape[1] == 0 or qv.shape[1] == 0:
        return np.pi / 2
    smax = np.linalg.svd(qu.conj().T @ qv, compute_uv=False)[0]
    return float(np.arccos(np.clip(smax, 0.0, 1.0)))


def sin_smallest_principal_angle(u: np.ndarray, v: np.ndarray) -> float:
    """``sin`` of the smallest principal angle, computed without cancellation.

    Uses ``sin(theta_min) = min_{x in span(v), |x|=1} ||(I - P_u) x||``, which stays
    accurate for angles where ``arccos`` of a cosine near one would not.
    """
    qu = orthonormal_basis(u)
    qv = orthonormal_basis(v)
    if qu.shape[1] == 0 or qv.shape[1] == 0:
        return 1.0
    resid = qv - qu @ (qu.conj().T @ qv)
    s = np.linalg.svd(resid, compute_uv=False)
    return float(s[-1]) if qv.shape[1] <= qv.shape[0] else 0.0
