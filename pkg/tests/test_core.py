import numpy as np
import pytest

from fphomotopy.core import FiberPoint, MepInstance, decoupled_check, mep_residual
from fphomotopy.oracle import delta_solve
from fphomotopy.problems import decoupled_mep, random_mep, rank_one_example


def identity_instance():
    z = np.zeros((2, 2))
    eye = np.eye(2)
    return MepInstance([[z, eye, eye], [z, eye, eye]])


def test_residual_of_zero_constant_term_vanishes_at_origin():
    r = mep_residual(identity_instance(), np.zeros(2), 0, np.array([1.0, 0.0]))
    np.testing.assert_array_equal(r, [0, 0])


def test_residual_at_origin_is_first_column_of_constant_term():
    r = mep_residual(rank_one_example(), np.zeros(2), 0, np.array([1.0, 0.0]))
    np.testing.assert_array_equal(r, [2, 5])


def test_h_uses_minus_sign_convention():
    inst = rank_one_example()
    lam = np.array([0.5 - 1j, 2.0])
    a = inst.coeffs[1]
    expected = a[0] - lam[0] * a[1] - lam[1] * a[2]
    np.testing.assert_allclose(inst.H(1, lam), expected, rtol=0, atol=1e-14)


def test_residual_vanishes_at_oracle_eigenpairs():
    inst = random_mep(2, 3, 4)
    for pair in delta_solve(inst):
        for i, x in enumerate(pair.xs):
            assert np.linalg.norm(mep_residual(inst, pair.lam, i, x)) < 1e-10


def test_residual_rejects_wrong_vector_length():
    with pytest.raises(ValueError, match="shape"):
        mep_residual(identity_instance(), np.zeros(2), 0, np.ones(3))


def test_decoupled_check():
    assert decoupled_check(decoupled_mep([(np.eye(2), np.eye(2)), (np.eye(3), 2 * np.eye(3))]))
    assert not decoupled_check(rank_one_example())
    assert not any(decoupled_check(random_mep(2, 2, s)) for s in range(100))


@pytest.mark.parametrize(
    "coeffs, message",
    [
        ([[np.eye(2)] * 3], "k >= 2"),
        ([[np.eye(2)] * 3, [np.eye(2)] * 2], "expected 3"),
        ([[np.eye(2), np.eye(2), np.eye(3)], [np.eye(2)] * 3], "shape"),
        ([[np.eye(2) * np.nan] + [np.eye(2)] * 2, [np.eye(2)] * 3], "non-finite"),
    ],
)
def test_instance_validation(coeffs, message):
    with pytest.raises(ValueError, match=message):
        MepInstance(coeffs)


def test_instance_is_read_only_and_compares_by_value():
    inst = random_mep(2, 2, 0)
    with pytest.raises(ValueError):
        inst.stack(0)[0, 0, 0] = 1.0
    assert inst == random_mep(2, 2, 0)
    assert inst != random_mep(2, 2, 1)


def test_fiber_point_round_trip():
    rng = np.random.default_rng(0)
    lam = rng.standard_normal((3, 3)) + 1j
    xs = (rng.standard_normal(2), rng.standard_normal(4), rng.standard_normal(1))
    p = FiberPoint(lam, xs, 0.25)
    q = FiberPoint.from_vector(p.to_vector(), 3, (2, 4, 1), 0.25)
    np.testing.assert_array_equal(q.lambdas, p.lambdas)
    for a, b in zip(p.xs, q.xs):
        np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError, match="does not match"):
        FiberPoint.from_vector(p.to_vector(), 3, (2, 4, 2))
