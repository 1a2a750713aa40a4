"""Fiber-diagonal target constraints and the moving constraint matrix ``M_t``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .startsys import RETRY_BUDGET, SliceSet, complex_gaussian


def build_dk(k: int) -> np.ndarray:
    """Block bidiagonal difference matrix ``[I -I; I -I; ...]`` of shape ``(k(k-1), k^2)``."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    dk = np.zeros((k * (k - 1), k * k), dtype=complex)
    eye = np.eye(k)
    for b in range(k - 1):
        dk[b * k : (b + 1) * k, b * k : (b + 1) * k] = eye
        dk[b * k : (b + 1) * k, (b + 1) * k : (b + 2) * k] = -eye
    return dk


@dataclass(frozen=True)
class TargetConstraints:
    """Linear maps ``G_i(Lambda) = R_i D_k vec(Lambda)``."""

    R: tuple[np.ndarray, ...]
    dk: np.ndarray
    seed: int | None = None

    @property
    def k(self) -> int:
        return len(self.R)

    @property
    def gradients(self) -> tuple[np.ndarray, ...]:
        return tuple(r @ self.dk for r in self.R)

    def stacked_jacobian(self) -> np.ndarray:
        """Stacked ``grad G`` of shape ``(k(k-1), k^2)``."""
        return np.vstack(self.gradients)

    def evaluate(self, lambdas: np.ndarray) -> np.ndarray:
        return self.stacked_jacobian() @ np.asarray(lambdas, dtype=complex).ravel()

    def to_dict(self) -> dict:
        cx = lambda a: np.stack([np.real(a), np.imag(a)], axis=-1).tolist()  # noqa: E731
        return {"seed": self.seed, "R": [cx(r) for r in self.R]}


def target_from_matrices(R, seed: int | None = None) -> TargetConstraints:
    R = tuple(np.asarray(r, dtype=complex) for r in R)
    k = len(R)
    for i, r in enumerate(R):
        if r.shape != (k - 1, k * (k - 1)):
            raise ValueError(f"R[{i}] has shape {r.shape}, expected ({k - 1}, {k * (k - 1)})")
        r.setflags(write=False)
    dk = build_dk(k)
    dk.setflags(write=False)
    return TargetConstraints(R, dk, seed)


def sample_target(k: int, seed=None) -> TargetConstraints:
    """Random Gaussian ``R_i``; resampled until the stacked gradient has full row rank."""
    rng = np.random.default_rng(seed)
    for _ in range(RETRY_BUDGET):
        R = [complex_gaussian(rng, k - 1, k * (k - 1)) for _ in range(k)]
        target = target_from_matrices(R, seed if isinstance(seed, int) else None)
        s = np.linalg.svd(target.stacked_jacobian(), compute_uv=False)
        if s[-1] > 1e-10 * s[0]:
            return target
    raise RuntimeError(f"stacked target gradient rank deficient after {RETRY_BUDGET} draws")


def constraint_matrix_mt(slices: SliceSet, target: TargetConstraints, t: float) -> np.ndarray:
    """Homogenized constraint matrix at ``t``; column 0 holds the constants."""
    k = slices.k
    m = np.zeros((k * (k - 1), k * k + 1), dtype=complex)
    m[:, 0] = -(1.0 - t)
    m[:, 1:] = (1.0 - t) * slices.block_jacobian() + t * target.stacked_jacobian()
    return m


def homotopy_constraint_residual(
    slices: SliceSet, target: TargetConstraints, lambdas: np.ndarray, t: float
) -> np.ndarray:
    """``(1-t) L_i(lam_i) + t G_i(Lambda)`` stacked over ``i``."""
    lambdas = np.asarray(lambdas, dtype=complex)
    g = target.evaluate(lambdas)
    k = slices.k
    out = np.empty(k * (k - 1), dtype=complex)
    for i in range(k):
        rows = slice(i * (k - 1), (i + 1) * (k - 1))
        out[rows] = (1.0 - t) * slices.residual(i, lambdas[i]) + t * g[rows]
    return out
