import math

import numpy as np
import pytest

from fphomotopy.core import MepInstance
from fphomotopy.diagnostics import (
    ALPHA_THRESHOLD,
    alpha_number,
    backward_error,
    coefficient_norms,
    kappa_along_path,
    kappa_fp,
    kappa_fp_closed_form,
    kappa_standard,
    kappa_standard_from_matrix,
    perturbed_kappa_probe,
    second_derivative_norm,
    standard_matrix,
    theta_torus_norm,
    theta_weights,
)
from fphomotopy.problems import decoupled_mep, random_mep
from fphomotopy.solver import solve
from fphomotopy.startsys import complex_gaussian, slices_from_rows
from fphomotopy.targetsys import sample_target, target_from_matrices
from fphomotopy.tracker import FiberProductHomotopy


def exact_decoupled_point():
    """Integer diagonal problem whose t=1 fiber residual is exactly zero."""
    inst = decoupled_mep([(np.diag([1.0, 4.0]), np.eye(2)), (np.diag([-2.0, 3.0, 7.0]), np.eye(3))])
    sl = slices_from_rows([[[1.0, 2.0]], [[3.0, -1.0]]], [np.ones(2), np.ones(3)])
    hom = FiberProductHomotopy(inst, sl, target_from_matrices([[[1.0, -2.0]], [[2.0, 1.0]]]))
    lam = np.array([4.0, 3.0])
    z = np.concatenate([lam, lam, [0.0, 1.0], [0.0, 1.0, 0.0]]).astype(complex)
    return inst, hom, z


def test_theta_weights():
    inst = random_mep(2, 3, 0)
    norms = coefficient_norms(inst)
    lam = np.array([2.0, -1j])
    assert np.allclose(theta_weights(inst, lam), norms[:, 0] + 2 * norms[:, 1] + norms[:, 2])
    assert norms[0, 1] == pytest.approx(np.linalg.norm(inst.stack(0)[1], 2))


def test_backward_error_of_exact_pair_is_zero():
    inst, _, z = exact_decoupled_point()
    assert backward_error(inst, z[:2], (z[4:6], z[6:])) < 1e-14


def test_backward_error_is_scale_invariant_and_first_order_in_lambda():
    inst = random_mep(2, 3, 1)
    pair = solve(inst, seed=0).eigenpairs[0]
    eta = backward_error(inst, pair.lam, pair.xs)
    assert eta == pytest.approx(backward_error(inst, pair.lam, [3j * x for x in pair.xs]), abs=1e-16)
    delta = 1e-6
    moved = pair.lam + np.array([delta, 0])
    theta = theta_weights(inst, moved)
    norms = coefficient_norms(inst)
    bound = max(delta * norms[i, 1] / theta[i] for i in range(2))
    assert backward_error(inst, moved, pair.xs) <= bound + 1e-14
    assert backward_error(inst, moved, pair.xs) > 0.01 * bound


def test_backward_error_of_solver_output_three_parameters():
    inst = random_mep(3, 2, 3)
    report = solve(inst, seed=1)
    assert max(p.diagnostics.backward_error for p in report.eigenpairs) < 1e-14


def test_hessian_norm_matches_the_tensor_built_from_jacobian_differences():
    inst = random_mep(2, (2, 3), 5)
    hom = FiberProductHomotopy(inst, *_slices_and_target(inst))
    z = complex_gaussian(np.random.default_rng(0), hom.size)
    base = hom.jacobian(z, 1.0)
    # the Jacobian is affine in z, so unit differences give the Hessian exactly
    slabs = []
    for j in range(z.size):
        e = np.zeros(z.size, dtype=complex)
        e[j] = 1.0
        slabs.append(hom.jacobian(z + e, 1.0) - base)
    tensor = np.stack(slabs)
    assert np.linalg.norm(tensor.ravel()) == pytest.approx(second_derivative_norm(inst), rel=1e-12)


def _slices_and_target(inst):
    rng = np.random.default_rng(1)
    k = inst.k
    rows = [complex_gaussian(rng, k - 1, k) for _ in range(k)]
    charts = [complex_gaussian(rng, n) for n in inst.dims]
    return slices_from_rows(rows, charts), sample_target(k, 2)


def test_alpha_threshold_value():
    assert ALPHA_THRESHOLD == pytest.approx(0.157671, abs=1e-6)


def test_alpha_is_zero_at_an_exact_solution():
    _, hom, z = exact_decoupled_point()
    assert np.abs(hom.residual(z, 1.0)).max() == 0
    res = alpha_number(hom, z)
    assert res.alpha == 0 and res.beta == 0 and res.certified


def test_alpha_rejects_a_poor_approximation():
    inst = random_mep(2, 3, 6)
    report = solve(inst, seed=0)
    hom = FiberProductHomotopy(inst, report.slices, report.target)
    z = hom.from_point(report.path_results[0].endpoint)
    rng = np.random.default_rng(2)
    kick = complex_gaussian(rng, z.size)
    bad = alpha_number(hom, z + 0.1 * kick / np.abs(kick).max())
    assert bad.alpha > ALPHA_THRESHOLD and not bad.certified
    good = alpha_number(hom, z)
    assert good.alpha < bad.alpha


def test_kappa_fp_on_random_instances():
    pooled = []
    for seed in range(5):
        inst = random_mep(2, 5, seed)
        report = solve(inst, seed=seed)
        rng = np.random.default_rng(seed)
        ks = []
        for p in report.eigenpairs:
            k_fp = kappa_fp(inst, p.lam, p.xs)
            assert k_fp >= 1
            assert k_fp == pytest.approx(kappa_fp_closed_form(inst, p.lam, p.xs), rel=1e-10)
            ks.append(k_fp)
        pooled += ks
        assert max(ks) < 30
        worst = report.eigenpairs[int(np.argmax(ks))]
        probes = [
            perturbed_kappa_probe(inst, worst.lam, worst.xs, complex_gaussian(rng, 4))
            for _ in range(20)
        ]
        assert max(probes) <= max(ks) * (1 + 1e-4)
        assert max(probes) >= max(ks) / 10
    assert np.mean(np.array(pooled) < 3) > 0.5


def test_kappa_along_path_at_the_end_equals_kappa_fp():
    inst = random_mep(2, 3, 7)
    report = solve(inst, seed=3)
    for res in report.path_results:
        p = res.endpoint
        lam = p.lambdas[0]
        k_end = kappa_along_path(inst, report.slices, report.target, p, 1.0)
        assert k_end == pytest.approx(kappa_fp(inst, lam, p.xs), rel=1e-8)
        assert kappa_fp(inst, lam, p.xs, target=report.target) == pytest.approx(k_end, rel=1e-8)


def test_standard_matrix_uses_a_left_eigenvector():
    inst = random_mep(2, 3, 8)
    pair = solve(inst, seed=0).eigenpairs[0]
    m = standard_matrix(inst, pair.lam, pair.xs)
    # rebuild one row with an explicitly computed left null vector
    h = inst.H(1, pair.lam)
    u = np.linalg.svd(h)[0][:, -1]
    assert np.linalg.norm(u.conj() @ h) < 1e-10
    x = pair.xs[1] / np.linalg.norm(pair.xs[1])
    row = np.array([u.conj() @ inst.stack(1)[j] @ x for j in (1, 2)])
    assert abs(abs(np.vdot(row, m[1])) - np.linalg.norm(row) * np.linalg.norm(m[1])) < 1e-10


@pytest.mark.parametrize("k", [2, 3, 5])
def test_kappa_standard_on_diagonal_theta_is_sqrt_k(k):
    theta = np.linspace(1.0, 3.0, k)
    ks = kappa_standard_from_matrix(np.diag(theta), theta)
    assert ks.lower == pytest.approx(1.0)
    assert ks.estimate == pytest.approx(math.sqrt(k), rel=1e-2)
    assert ks.upper == pytest.approx(math.sqrt(k))


def test_kappa_standard_closed_form_two_by_two():
    theta = np.array([1.5, 0.7])
    ks = kappa_standard_from_matrix(np.diag([theta[0], 2 * theta[1]]), theta)
    exact = math.sqrt(1 + 0.25)
    assert ks.lower <= exact <= ks.upper
    assert ks.estimate == pytest.approx(exact, rel=1e-2)


def test_torus_estimate_never_falls_below_frobenius_norm():
    rng = np.random.default_rng(4)
    for _ in range(20):
        b = complex_gaussian(rng, 4, 4)
        assert theta_torus_norm(b, samples=10) >= np.linalg.norm(b) * (1 - 1e-12)


def test_kappa_standard_bracket_on_solver_output():
    inst = random_mep(3, 2, 9)
    for p in solve(inst, seed=0).eigenpairs:
        ks = kappa_standard(inst, p.lam, p.xs)
        assert ks.lower <= ks.estimate <= ks.upper <= math.sqrt(3) * ks.lower * (1 + 1e-12)


def test_near_singular_standard_matrix_dwarfs_the_intersection_condition():
    # scalar equations 1 - lam_1 = 0 and 1 - eps lam_2 = 0: orthogonal normals, tiny second row
    eps = 1e-6
    one, zero = np.ones((1, 1)), np.zeros((1, 1))
    inst = MepInstance([[one, one, zero], [one, zero, eps * one]])
    lam = np.array([1.0, 1 / eps])
    xs = (np.ones(1), np.ones(1))
    np.testing.assert_allclose(np.abs(standard_matrix(inst, lam, xs)), np.diag([1.0, eps]))
    assert kappa_fp(inst, lam, xs) == pytest.approx(math.sqrt(2))
    ks = kappa_standard(inst, lam, xs)
    assert ks.lower == pytest.approx(2 / eps)
    assert ks.lower > 1e5 * kappa_fp(inst, lam, xs)
