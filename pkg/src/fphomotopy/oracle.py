"""Independent k=2 reference solver based on Kronecker operator determinants.

Writing the problem as ``V_i0 x_i + lam_1 V_i1 x_i + lam_2 V_i2 x_i = 0`` with
``V_i0 = A_i0`` and ``V_ij = -A_ij``, the classical operator determinants

    V11 (x) V22 - V12 (x) V21,  V12 (x) V20 - V10 (x) V22,  V10 (x) V21 - V11 (x) V20

become, on ``z = x_1 (x) x_2``,

    D0 = A11 (x) A22 - A12 (x) A21
    D1 = A10 (x) A22 - A12 (x) A20
    D2 = A11 (x) A20 - A10 (x) A21

with ``D1 z = lam_1 D0 z`` and ``D2 z = lam_2 D0 z``. The commuting and
backward-error self-tests below guard these signs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MepInstance
from .densela import gep_finite_eigs

RANK_ONE_TOL = 1e-6
SINGULAR_TOL = 1e-10


class OracleDeclined(ValueError):
    """The reference solver does not apply (k != 2 or a singular D0)."""


@dataclass(frozen=True)
class DeltaMatrices:
    d0: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


@dataclass(frozen=True)
class OracleEigenpair:
    lam: np.ndarray
    xs: tuple[np.ndarray, np.ndarray]
    rank_ratio: float


def delta_matrices(inst: MepInstance) -> DeltaMatrices:
    if inst.k != 2:
        raise OracleDeclined(f"operator determinants are implemented for k=2 only (k={inst.k})")
    (a10, a11, a12), (a20, a21, a22) = inst.coeffs
    kr = np.kron
    return DeltaMatrices(
        kr(a11, a22) - kr(a12, a21),
        kr(a10, a22) - kr(a12, a20),
        kr(a11, a20) - kr(a10, a21),
    )


def _rank_one_factors(z: np.ndarray, n1: int, n2: int):
    u, s, vh = np.linalg.svd(z.reshape(n1, n2))
    ratio = s[1] / s[0] if s.size > 1 and s[0] > 0 else 0.0
    return u[:, 0], vh[0], float(ratio)


def delta_solve(inst: MepInstance) -> list[OracleEigenpair]:
    """All finite eigenpairs of a regular two-parameter problem.

    Raises OracleDeclined when ``D0`` is numerically singular.
    """
    dm = delta_matrices(inst)
    s = np.linalg.svd(dm.d0, compute_uv=False)
    if s[-1] <= SINGULAR_TOL * s[0]:
        raise OracleDeclined(f"D0 is singular (sigma_min/sigma_max = {s[-1] / s[0]:.2e})")
    n1, n2 = inst.dims
    spectrum = gep_finite_eigs(dm.d1, dm.d0)
    out = []
    for lam1, z in zip(spectrum.eigenvalues, spectrum.eigenvectors):
        d0z = dm.d0 @ z
        lam2 = np.vdot(d0z, dm.d2 @ z) / np.vdot(d0z, d0z)
        x1, x2, ratio = _rank_one_factors(z, n1, n2)
        if ratio > RANK_ONE_TOL:
            raise OracleDeclined(
                f"eigenvector for lam1={lam1:.6g} is not decomposable (ratio {ratio:.2e}); "
                "repeated eigenvalue"
            )
        out.append(OracleEigenpair(np.array([lam1, lam2]), (x1, x2), ratio))
    return out


def commutator_defect(inst: MepInstance) -> float:
    """Relative size of ``[D0^-1 D1, D0^-1 D2]``; near zero for a correct construction."""
    dm = delta_matrices(inst)
    g1 = np.linalg.solve(dm.d0, dm.d1)
    g2 = np.linalg.solve(dm.d0, dm.d2)
    return float(np.linalg.norm(g1 @ g2 - g2 @ g1) / (np.linalg.norm(g1) * np.linalg.norm(g2)))


_SELF_TEST_DONE = False


def self_test(seed: int = 20240101, n: int = 3) -> None:
    """Commuting and backward-error checks on a fixed random instance.

    Raises AssertionError when the construction is wrong; runs once per process
    via :func:`checked_delta_solve`.
    """
    from .diagnostics import backward_error
    from .problems import random_mep

    inst = random_mep(2, n, seed)
    defect = commutator_defect(inst)
    if defect > 1e-8:
        raise AssertionError(f"operator determinants do not commute (defect {defect:.2e})")
    pairs = delta_solve(inst)
    if len(pairs) != n * n:
        raise AssertionError(f"expected {n * n} oracle eigenpairs, got {len(pairs)}")
    worst = max(backward_error(inst, p.lam, p.xs) for p in pairs)
    if worst > 1e-8:
        raise AssertionError(f"oracle backward error {worst:.2e} exceeds 1e-8")


def checked_delta_solve(inst: MepInstance) -> list[OracleEigenpair]:
    global _SELF_TEST_DONE
    if not _SELF_TEST_DONE:
        self_test()
        _SELF_TEST_DONE = True
    return delta_solve(inst)
