import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from fphomotopy.diagnostics import backward_error, kappa_standard_from_matrix, theta_torus_norm
from fphomotopy.problems import (
    decoupled_mep,
    fmt,
    instance_from_dict,
    instance_to_dict,
    random_mep,
)
from fphomotopy.solver import solve
from fphomotopy.startsys import associated_pencil, canonical_phase, complex_gaussian
from fphomotopy.targetsys import build_dk, sample_target
from conftest import match_sets

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 4)
finite = st.floats(-1e3, 1e3, allow_nan=False)
complexes = st.builds(complex, finite, finite)


@given(seed=seeds, n=sizes, scale=complexes.filter(lambda c: abs(c) > 1e-3))
def test_backward_error_is_a_scale_free_fraction(seed, n, scale):
    rng = np.random.default_rng(seed)
    inst = random_mep(2, n, seed)
    lam = complex_gaussian(rng, 2)
    xs = [complex_gaussian(rng, n) for _ in range(2)]
    eta = backward_error(inst, lam, xs)
    assert 0 <= eta <= 1 + 1e-12
    assert math.isclose(eta, backward_error(inst, lam, [scale * x for x in xs]), rel_tol=1e-9)


@given(seed=seeds, k=st.integers(2, 4))
def test_kappa_standard_bracket_invariants(seed, k):
    rng = np.random.default_rng(seed)
    m = complex_gaussian(rng, k, k)
    theta = rng.uniform(0.1, 10, k)
    ks = kappa_standard_from_matrix(m, theta, samples=16, seed=seed)
    assert ks.lower <= ks.estimate <= ks.upper
    assert math.isclose(ks.upper, math.sqrt(k) * ks.lower, rel_tol=1e-12)


@given(seed=seeds, k=st.integers(1, 5))
def test_torus_estimate_between_frobenius_and_its_upper_bound(seed, k):
    b = complex_gaussian(np.random.default_rng(seed), 3, k)
    est = theta_torus_norm(b, samples=8, seed=seed)
    assert np.linalg.norm(b) * (1 - 1e-12) <= est
    assert est <= math.sqrt(k) * np.linalg.norm(b, 2) * (1 + 1e-12)


@given(seed=seeds, n=st.integers(1, 6))
def test_canonical_phase_is_a_unit_rescaling(seed, n):
    v = complex_gaussian(np.random.default_rng(seed), n)
    w = canonical_phase(v)
    assert w[0].real > 0 and w[0].imag == 0
    ratio = w / v
    assert np.allclose(ratio, ratio[0]) and math.isclose(abs(ratio[0]), 1, rel_tol=1e-14)


@given(seed=seeds, k=st.integers(2, 4), lam=complexes)
def test_target_gradient_vanishes_exactly_on_equal_copies(seed, k, lam):
    tiled = np.tile(np.full(k, lam) + np.arange(k), k)
    assert np.abs(build_dk(k) @ tiled).max() == 0
    tg = sample_target(k, seed)
    assert np.abs(tg.stacked_jacobian() @ tiled).max() <= 1e-12 * (1 + abs(lam)) * k


@given(seed=seeds, beta=complexes)
def test_associated_pencil_restricts_the_equation_to_the_slice_line(seed, beta):
    rng = np.random.default_rng(seed)
    inst = random_mep(2, 2, seed)
    q, p, x = complex_gaussian(rng, 2), complex_gaussian(rng, 2), complex_gaussian(rng, 2)
    ahat, bhat = associated_pencil(inst, 0, q, p)
    lhs = inst.H(0, beta * q + p) @ x
    scale = 1 + abs(beta) * np.abs(bhat).max() + np.abs(ahat).max()
    assert np.abs(lhs - (ahat - beta * bhat) @ x).max() <= 1e-12 * scale * np.abs(x).max()


@given(seed=seeds, dims=st.lists(sizes, min_size=2, max_size=3))
def test_instance_dict_round_trip(seed, dims):
    inst = random_mep(len(dims), dims, seed)
    back = instance_from_dict(instance_to_dict(inst))
    for i in range(inst.k):
        np.testing.assert_array_equal(back.stack(i), inst.stack(i))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_formatting_round_trip(v):
    assert float(fmt(v)) == v


@settings(max_examples=10, deadline=None)
@given(
    a=st.lists(st.integers(-9, 9), min_size=2, max_size=3, unique=True),
    b=st.lists(st.integers(-9, 9), min_size=1, max_size=2, unique=True),
    seed=st.integers(0, 1000),
)
def test_decoupled_problems_return_the_cartesian_product(a, b, seed):
    inst = decoupled_mep([(np.diag(np.array(a, float)), np.eye(len(a))), (np.diag(np.array(b, float)), np.eye(len(b)))])
    report = solve(inst, seed=seed)
    expected = np.array([[x, y] for x in a for y in b], dtype=complex)
    assert report.n_divergent == 0 and len(report.eigenpairs) == len(expected)
    assert match_sets([p.lam for p in report.eigenpairs], expected).max() < 1e-8
