"""Random slices, associated pencils and the start solutions of the homotopy."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg as sla

from .core import FiberPoint, MepInstance
from .densela import gep_finite_eigs, null_space

RETRY_BUDGET = 5
START_RESIDUAL_TOL = 1e-9
CHART_TOL = 1e-12


class ChartDegenerateError(RuntimeError):
    """A start eigenvector is (numerically) orthogonal to its chart vector."""


def complex_gaussian(rng: np.random.Generator, *shape) -> np.ndarray:
    """Standard complex Gaussian samples (``E|z|^2 = 1``)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def canonical_phase(v: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Rescale ``v`` by a unit complex number so its first non-negligible entry is real positive."""
    v = np.asarray(v, dtype=complex)
    scale = np.max(np.abs(v)) if v.size else 0.0
    for i, c in enumerate(v):
        if abs(c) > tol * scale:
            w = v * (abs(c) / c)
            w[i] = abs(c)
            return w
    return v


@dataclass(frozen=True)
class SliceSet:
    """Affine slices ``L_i(lam) = a_i @ lam - 1`` together with charts ``d_i``.

    ``slice_rows[i]`` is ``(k-1, k)``; ``q[i]`` spans its kernel and ``p[i]`` solves
    ``slice_rows[i] @ p = 1``. Eigenvectors are normalized by ``d_i^T x_i = 1``.
    """

    slice_rows: tuple[np.ndarray, ...]
    q: tuple[np.ndarray, ...]
    p: tuple[np.ndarray, ...]
    charts: tuple[np.ndarray, ...]
    seed: int | None = None

    @property
    def k(self) -> int:
        return len(self.slice_rows)

    def residual(self, i: int, lam: np.ndarray) -> np.ndarray:
        """``L_i(lam)``."""
        return self.slice_rows[i] @ lam - 1.0

    def block_jacobian(self) -> np.ndarray:
        """``blockdiag(grad L_1, ..., grad L_k)`` of shape ``(k(k-1), k^2)``."""
        return sla.block_diag(*self.slice_rows)

    def to_dict(self) -> dict:
        cx = lambda a: np.stack([np.real(a), np.imag(a)], axis=-1).tolist()  # noqa: E731
        return {
            "seed": self.seed,
            "slice_rows": [cx(a) for a in self.slice_rows],
            "q": [cx(a) for a in self.q],
            "p": [cx(a) for a in self.p],
            "charts": [cx(a) for a in self.charts],
        }


def _null_direction(a: np.ndarray, convention: str) -> np.ndarray:
    if convention == "svd":
        # right singular vector of the smallest singular value, phase as LAPACK returns it
        _, _, vh = sla.svd(a)
        return vh[-1].conj()
    if convention == "canonical":
        basis = null_space(a)
        if basis.shape[1] != 1:
            raise np.linalg.LinAlgError(f"slice has nullity {basis.shape[1]}, expected 1")
        q = basis[:, 0]
        return canonical_phase(q / np.linalg.norm(q))
    raise ValueError(f"unknown null-direction convention {convention!r}")


def _particular_solution(a: np.ndarray, convention: str) -> np.ndarray:
    ones = np.ones(a.shape[0], dtype=complex)
    if convention == "minnorm":
        return np.linalg.pinv(a) @ ones
    if convention == "basic":
        # basic solution from column-pivoted QR: nonzeros only on pivot columns
        _, _, piv = sla.qr(a, pivoting=True, mode="economic")
        m = a.shape[0]
        sol = np.zeros(a.shape[1], dtype=complex)
        sol[piv[:m]] = np.linalg.solve(a[:, piv[:m]], ones)
        return sol
    raise ValueError(f"unknown particular-solution convention {convention!r}")


def slices_from_rows(
    slice_rows: Sequence[np.ndarray],
    charts: Sequence[np.ndarray],
    null_convention: str = "canonical",
    particular: str = "minnorm",
    seed: int | None = None,
) -> SliceSet:
    """Build a SliceSet from explicit slice coefficient rows (constants fixed at -1)."""
    rows, qs, ps = [], [], []
    k = len(slice_rows)
    for i, a in enumerate(slice_rows):
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        if a.shape != (k - 1, k):
            raise ValueError(f"slice {i} has shape {a.shape}, expected ({k - 1}, {k})")
        q = _null_direction(a, null_convention)
        p = _particular_solution(a, particular)
        if np.linalg.norm(a @ q) > 1e-12 or np.linalg.norm(a @ p - 1) > 1e-12:
            raise np.linalg.LinAlgError(f"slice {i} is numerically rank deficient")
        rows.append(a)
        qs.append(q)
        ps.append(p)
    charts = tuple(np.asarray(d, dtype=complex) for d in charts)
    for a in (*rows, *qs, *ps, *charts):
        a.setflags(write=False)
    return SliceSet(tuple(rows), tuple(qs), tuple(ps), charts, seed)


def sample_slices(inst: MepInstance, seed=None) -> SliceSet:
    """Random complex Gaussian slices and unit-norm Gaussian chart vectors."""
    rng = np.random.default_rng(seed)
    k = inst.k
    for _ in range(RETRY_BUDGET):
        rows = [complex_gaussian(rng, k - 1, k) for _ in range(k)]
        charts = []
        for n in inst.dims:
            d = complex_gaussian(rng, n)
            charts.append(d / np.linalg.norm(d))
        try:
            return slices_from_rows(rows, charts, seed=seed if isinstance(seed, int) else None)
        except np.linalg.LinAlgError:
            continue
    raise RuntimeError(f"could not draw a nondegenerate slice in {RETRY_BUDGET} attempts")


def associated_pencil(inst: MepInstance, i: int, q: np.ndarray, p: np.ndarray):
    """Return ``(Ahat, Bhat)`` with ``H_i(beta q + p) = Ahat - beta Bhat``."""
    s = inst.stack(i)
    ahat = s[0] - np.tensordot(p, s[1:], axes=1)
    bhat = np.tensordot(q, s[1:], axes=1)
    return ahat, bhat


@dataclass(frozen=True)
class StartSet:
    """Per-equation associated eigenpairs; the start set is their Cartesian product."""

    betas: tuple[np.ndarray, ...]
    lambdas: tuple[tuple[np.ndarray, ...], ...]
    xs: tuple[tuple[np.ndarray, ...], ...]
    n_infinite: tuple[int, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.betas)

    def __len__(self) -> int:
        return int(np.prod(self.sizes)) if self.sizes else 0

    def indices(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(s) for s in self.sizes))

    def point(self, index: Sequence[int]) -> FiberPoint:
        lam = np.array([self.lambdas[i][j] for i, j in enumerate(index)])
        xs = tuple(self.xs[i][j] for i, j in enumerate(index))
        return FiberPoint(lam, xs, 0.0)

    def __iter__(self) -> Iterator[FiberPoint]:
        for idx in self.indices():
            yield self.point(idx)


def start_solutions(inst: MepInstance, slices: SliceSet) -> StartSet:
    """Solve the k associated GEPs and chart-normalize their eigenvectors."""
    betas, lams, vecs, ninf = [], [], [], []
    for i in range(inst.k):
        ahat, bhat = associated_pencil(inst, i, slices.q[i], slices.p[i])
        spectrum = gep_finite_eigs(ahat, bhat)
        d = slices.charts[i]
        li, xi = [], []
        for beta, v in zip(spectrum.eigenvalues, spectrum.eigenvectors):
            s = d @ v
            if abs(s) < CHART_TOL:
                raise ChartDegenerateError(f"|d^T x| = {abs(s):.2e} for equation {i}")
            x = v / s
            lam = beta * slices.q[i] + slices.p[i]
            scale = np.max(np.abs(inst.stack(i))) * (1 + np.abs(lam).max()) * np.abs(x).max()
            r_eig = np.max(np.abs(inst.H(i, lam) @ x)) / max(scale, 1.0)
            r_slice = np.max(np.abs(slices.residual(i, lam)), initial=0.0)
            r = max(r_eig, r_slice)
            if r > START_RESIDUAL_TOL:
                raise np.linalg.LinAlgError(f"start point residual {r:.2e} too large")
            li.append(lam)
            xi.append(x)
        betas.append(spectrum.eigenvalues)
        lams.append(tuple(li))
        vecs.append(tuple(xi))
        ninf.append(spectrum.n_infinite)
    return StartSet(tuple(betas), tuple(lams), tuple(vecs), tuple(ninf))


def intrinsic_dimension(inst: MepInstance, seed=None) -> tuple[int, ...]:
    """Number of finite associated-GEP eigenvalues per equation for a random slice."""
    slices = sample_slices(inst, seed)
    dims = []
    for i in range(inst.k):
        ahat, bhat = associated_pencil(inst, i, slices.q[i], slices.p[i])
        dims.append(len(gep_finite_eigs(ahat, bhat)))
    return tuple(dims)
