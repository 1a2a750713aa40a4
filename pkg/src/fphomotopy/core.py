"""Problem and solution data model.

A k-parameter eigenvalue problem is given by matrices ``A[i][j]`` of size
``n_i x n_i`` (``i = 0..k-1`` equations, ``j = 0..k`` coefficients) and the
linear polynomial matrices

    H_i(lam) = A[i][0] - lam[0] A[i][1] - ... - lam[k-1] A[i][k].

Indices are zero based throughout the code base.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class MepInstance:
    """Coefficients of a k-parameter eigenvalue problem (immutable).

    Parameters
    ----------
    coeffs : nested sequence
        ``coeffs[i][j]`` is the square matrix multiplying ``lam_j`` in the
        i-th equation (``j = 0`` is the constant term).
    """

    def __init__(self, coeffs: Sequence[Sequence[np.ndarray]]):
        k = len(coeffs)
        if k < 2:
            raise ValueError(f"need k >= 2 parameters, got k={k}")
        stacks = []
        dims = []
        for i, row in enumerate(coeffs):
            if len(row) != k + 1:
                raise ValueError(
                    f"equation {i} has {len(row)} coefficient matrices, expected {k + 1}"
                )
            mats = [np.asarray(m, dtype=complex) for m in row]
            n = mats[0].shape[0] if mats[0].ndim == 2 else -1
            for j, m in enumerate(mats):
                if m.ndim != 2 or m.shape != (n, n):
                    raise ValueError(
                        f"A[{i}][{j}] has shape {m.shape}, expected ({n}, {n})"
                    )
                if not np.all(np.isfinite(m)):
                    raise ValueError(f"A[{i}][{j}] has non-finite entries")
            if n < 1:
                raise ValueError(f"equation {i} has empty matrices")
            stacks.append(_frozen(np.stack(mats)))
            dims.append(n)
        self._stacks = tuple(stacks)
        self.k = k
        self.dims = tuple(dims)

    def stack(self, i: int) -> np.ndarray:
        """All coefficients of equation ``i`` as a read-only ``(k+1, n_i, n_i)`` array."""
        return self._stacks[i]

    def coeff(self, i: int, j: int) -> np.ndarray:
        return self._stacks[i][j]

    @property
    def coeffs(self) -> list[list[np.ndarray]]:
        return [list(s) for s in self._stacks]

    def H(self, i: int, lam: np.ndarray) -> np.ndarray:
        """Evaluate ``H_i(lam) = A_i0 - sum_j lam_j A_ij``."""
        lam = np.asarray(lam, dtype=complex)
        if lam.shape != (self.k,):
            raise ValueError(f"lambda must have shape ({self.k},), got {lam.shape}")
        s = self._stacks[i]
        return s[0] - np.tensordot(lam, s[1:], axes=1)

    def __eq__(self, other):
        if not isinstance(other, MepInstance):
            return NotImplemented
        return self.dims == other.dims and all(
            np.array_equal(a, b) for a, b in zip(self._stacks, other._stacks)
        )

    def __repr__(self):
        return f"MepInstance(k={self.k}, dims={self.dims})"


@dataclass(frozen=True)
class FiberPoint:
    """A point of the fiber product system: k eigenvalue copies plus eigenvectors.

    ``lambdas`` has shape ``(k, k)``; row ``i`` is the copy used by equation ``i``.
    """

    lambdas: np.ndarray
    xs: tuple[np.ndarray, ...]
    t: float = 0.0

    def __post_init__(self):
        lam = _frozen(self.lambdas)
        k = lam.shape[0]
        if lam.shape != (k, k):
            raise ValueError(f"lambdas must be square (k, k), got {lam.shape}")
        if len(self.xs) != k:
            raise ValueError(f"expected {k} eigenvectors, got {len(self.xs)}")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "xs", tuple(_frozen(x) for x in self.xs))

    @property
    def k(self) -> int:
        return self.lambdas.shape[0]

    def to_vector(self) -> np.ndarray:
        """Flatten to ``(vec(Lambda), x_1, ..., x_k)``."""
        return np.concatenate([self.lambdas.ravel(), *self.xs])

    @classmethod
    def from_vector(cls, z: np.ndarray, k: int, dims: Sequence[int], t: float = 0.0):
        z = np.asarray(z, dtype=complex)
        lam = z[: k * k].reshape(k, k)
        xs = []
        off = k * k
        for n in dims:
            xs.append(z[off : off + n])
            off += n
        if off != z.size:
            raise ValueError(f"vector of length {z.size} does not match dims {tuple(dims)}")
        return cls(lam, tuple(xs), float(t))


@dataclass
class DiagnosticsRecord:
    backward_error: float = float("nan")
    deviation: float = float("nan")
    alpha: float = float("nan")
    certified: bool | None = None
    kappa_fp: float = float("nan")
    kappa_std_lower: float = float("nan")
    kappa_std_upper: float = float("nan")
    kappa_std_estimate: float = float("nan")
    kappa_trace: list[tuple[float, float]] | None = None


@dataclass
class Eigenpair:
    """A collapsed solution ``(lam, x_1, ..., x_k)`` with unit 2-norm eigenvectors."""

    lam: np.ndarray
    xs: tuple[np.ndarray, ...]
    cluster_size: int = 1
    start_index: tuple[int, ...] = ()
    inconsistent: bool = False
    path_status: str = "converged"
    newton_iters: int = 0
    point: FiberPoint | None = field(default=None, repr=False)
    diagnostics: DiagnosticsRecord = field(default_factory=DiagnosticsRecord)


def mep_residual(inst: MepInstance, lam: np.ndarray, i: int, x: np.ndarray) -> np.ndarray:
    """Return ``H_i(lam) @ x``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (inst.dims[i],):
        raise ValueError(f"x must have shape ({inst.dims[i]},), got {x.shape}")
    return inst.H(i, lam) @ x


def decoupled_check(inst: MepInstance) -> bool:
    """True iff ``A_ij = 0`` whenever ``j >= 1`` and ``j != i + 1``."""
    for i in range(inst.k):
        s = inst.stack(i)
        for j in range(1, inst.k + 1):
            if j != i + 1 and np.any(s[j] != 0):
                return False
    return True
