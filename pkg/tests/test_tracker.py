import numpy as np
import pytest

from fphomotopy.densela import gep_finite_eigs
from fphomotopy.problems import decoupled_mep, qmep_linearize, random_mep, random_qmep
from fphomotopy.solver import solve
from fphomotopy.startsys import complex_gaussian, sample_slices, start_solutions
from fphomotopy.targetsys import sample_target
from fphomotopy.tracker import (
    FiberProductHomotopy,
    PathStatus,
    TrackerConfig,
    euler_tangent,
    newton_refine,
    sample_diagonal_homotopy,
    step_control,
    track_homotopy,
    track_path,
    track_path_diag_coeff,
)
from conftest import match_sets


def setup(k=2, n=2, seed=0):
    inst = random_mep(k, n, seed)
    sl, tg = sample_slices(inst, seed + 100), sample_target(k, seed + 200)
    return inst, sl, tg, start_solutions(inst, sl), FiberProductHomotopy(inst, sl, tg)


def corrector_norms(hom, z, t, iters):
    norms = []
    for _ in range(iters):
        z, _, norm, _ = newton_refine(hom, z, t, 0.0, 1)
        norms.append(norm)
    return z, norms


def test_step_control_policy():
    cfg = TrackerConfig()
    assert step_control(2, True, 1e-3, cfg) == (2e-3, True)
    assert step_control(1, True, 8e-3, cfg) == (1e-2, True)
    assert step_control(3, True, 1e-3, cfg) == (1e-3, True)
    assert step_control(8, False, 1e-3, cfg) == (5e-4, False)


@pytest.mark.parametrize(
    "kwargs",
    [dict(h_min=1e-2, h_init=1e-3), dict(h_max=1.5), dict(newton_tol=0.0), dict(max_newton_per_step=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        TrackerConfig(**kwargs)


def test_endgame_iteration_default():
    assert TrackerConfig().endgame_iters(2, (2, 3)) == 20
    assert TrackerConfig().endgame_iters(3, (9, 9, 9)) == 32
    assert TrackerConfig(endgame_max_iters=7).endgame_iters(3, (9,) * 3) == 7


def _fd_jacobian(fun, z, eps=1e-7):
    # complex-analytic maps: one real-direction difference per column
    cols = []
    for j in range(z.size):
        e = np.zeros(z.size, dtype=complex)
        e[j] = eps
        cols.append((fun(z + e) - fun(z - e)) / (2 * eps))
    return np.column_stack(cols)


def test_fiber_jacobian_and_time_derivative_match_finite_differences():
    inst, _, _, _, hom = setup(3, 2, 1)
    rng = np.random.default_rng(0)
    z, t = complex_gaussian(rng, hom.size), 0.37
    _, jac = hom.evaluate(z, t)
    fd = _fd_jacobian(lambda v: hom.residual(v, t), z)
    assert np.abs(jac - fd).max() < 1e-7
    fd_t = (hom.residual(z, t + 1e-7) - hom.residual(z, t - 1e-7)) / 2e-7
    assert np.abs(hom.dt(z, t) - fd_t).max() < 1e-7


def test_diagonal_jacobian_and_time_derivative_match_finite_differences():
    hom = sample_diagonal_homotopy(random_mep(2, (2, 3), 4), 4)
    rng = np.random.default_rng(1)
    z, t = complex_gaussian(rng, hom.size), 0.61
    fd = _fd_jacobian(lambda v: hom.residual(v, t), z)
    assert np.abs(hom.jacobian(z, t) - fd).max() < 1e-7
    fd_t = (hom.residual(z, t + 1e-7) - hom.residual(z, t - 1e-7)) / 2e-7
    assert np.abs(hom.dt(z, t) - fd_t).max() < 1e-7


def test_tangent_vanishes_when_the_constraints_do_not_move():
    inst, sl, tg, _, hom = setup(2, 3, 2)
    # pick vec(Lambda) with G(Lambda) = L(Lambda); then dF/dt = 0
    diff = tg.stacked_jacobian() - sl.block_jacobian()
    lam = np.linalg.lstsq(diff, -np.ones(diff.shape[0]), rcond=None)[0]
    rng = np.random.default_rng(3)
    z = np.concatenate([lam, complex_gaussian(rng, sum(inst.dims))])
    assert np.abs(hom.dt(z, 0.4)).max() < 1e-13
    assert np.abs(euler_tangent(hom, z, 0.4)).max() < 1e-12


def test_tangent_respects_charts_and_matches_path_derivative():
    inst, sl, _, starts, hom = setup(2, 2, 3)
    z = hom.from_point(starts.point((0, 1)))
    tangent = euler_tangent(hom, z, 0.0)
    for i, s in enumerate(hom._xslices):
        assert abs(sl.charts[i] @ tangent[s]) < 1e-12
    delta = 1e-6
    z_next, _, _, ok = newton_refine(hom, z + delta * tangent, delta, 1e-15, 10)
    assert ok or np.abs(hom.residual(z_next, delta)).max() < 1e-13
    fd = (z_next - z) / delta
    assert np.abs(fd - tangent).max() / max(1.0, np.abs(tangent).max()) < 1e-4


def test_newton_on_exact_point_and_basin():
    inst, sl, tg, starts, hom = setup(2, 3, 4)
    res = track_homotopy(hom, hom.from_point(starts.point((1, 2))))
    assert res.converged
    z = hom.from_point(res.endpoint)
    _, it, norm, ok = newton_refine(hom, z, 1.0, 1e-9, 5)
    assert ok and it <= 1 and norm < 1e-9
    rng = np.random.default_rng(5)
    kick = complex_gaussian(rng, z.size)
    z_pert = z + 1e-4 * kick / np.abs(kick).max()
    z_back, it, _, ok = newton_refine(hom, z_pert, 1.0, 1e-12, 5)
    assert ok and it <= 5
    assert np.abs(z_back - z).max() < 1e-10


def test_newton_converges_quadratically():
    inst, _, _, starts, hom = setup(2, 3, 6)
    res = track_homotopy(hom, hom.from_point(starts.point((0, 0))))
    z = hom.from_point(res.endpoint)
    rng = np.random.default_rng(7)
    kick = complex_gaussian(rng, z.size)
    _, norms = corrector_norms(hom, z + 1e-3 * kick / np.abs(kick).max(), 1.0, 6)
    above = [v for v in norms if v > 1e-13]
    assert len(above) >= 3
    for a, b in zip(above[-3:], above[-2:]):
        if a < 1e-4:
            assert b <= 10 * a * a


def test_decoupled_paths_keep_their_start_value():
    pairs = [(np.diag([1.0, -2.0]) + 0.1, np.eye(2)), (np.diag([3.0, 0.5j, -1.0]), np.diag([1.0, 2.0, 1j]))]
    inst = decoupled_mep(pairs)
    sl, tg = sample_slices(inst, 0), sample_target(2, 0)
    starts = start_solutions(inst, sl)
    spectra = [gep_finite_eigs(c, e).eigenvalues for c, e in pairs]
    for idx in starts.indices():
        start = starts.point(idx)
        res = track_path(inst, sl, tg, start)
        assert res.converged
        end = res.endpoint.lambdas[0]
        for i in range(2):
            # H_i only sees lambda_i, so that coordinate of copy i never moves
            assert abs(end[i] - start.lambdas[i, i]) < 1e-8
            assert np.min(np.abs(spectra[i] - end[i])) < 1e-8


def test_random_paths_converge_with_agreeing_copies():
    inst, sl, tg, starts, _ = setup(2, 2, 8)
    for point in starts:
        res = track_path(inst, sl, tg, point)
        assert res.status is PathStatus.CONVERGED
        lam = res.endpoint.lambdas
        assert np.abs(lam[0] - lam[1]).sum() < 1e-8


def test_singular_linearization_paths_all_converge():
    inst = qmep_linearize(random_qmep(2, 3))
    report = solve(inst, seed=1)
    assert report.n_paths == 16 and report.n_converged == 16


def test_terminal_statuses():
    inst, sl, tg, starts, hom = setup(2, 2, 9)
    z0 = hom.from_point(starts.point((0, 0)))
    assert track_homotopy(hom, z0, TrackerConfig(max_total_steps=5)).status is PathStatus.MAX_STEPS
    stuck = TrackerConfig(newton_tol=1e-300, max_newton_per_step=1)
    res = track_homotopy(hom, z0, stuck)
    assert res.status is PathStatus.STEP_FLOOR and res.endpoint is None
    assert res.last_point is not None
    capped = TrackerConfig(divergence_norm_cap=1e-6)
    assert track_homotopy(hom, z0, capped).status is PathStatus.DIVERGED


def test_trace_and_checkpoints():
    inst, sl, tg, starts, hom = setup(2, 2, 10)
    res = track_homotopy(hom, hom.from_point(starts.point((1, 1))), checkpoints=(0.0, 0.5, 1.0), trace=True)
    assert set(res.checkpoints) == {0.0, 0.5, 1.0}
    times = [row[0] for row in res.trace]
    assert times[0] == 0.0 and times[-1] == 1.0
    assert all(b > a for a, b in zip(times, times[1:]))
    assert all(row[3] < 1e-8 for row in res.trace)
    steps = [row[1] for row in res.trace[1:]]
    assert max(steps) <= TrackerConfig().h_max + 1e-15
    assert res.stats.euler_steps == len(res.trace) - 1 + res.stats.rejected_steps


def test_diagonal_homotopy_starts_and_regular_instance():
    inst = random_mep(2, 2, 12)
    hom = sample_diagonal_homotopy(inst, 3)
    starts = hom.start_points()
    assert len(starts) == 4
    for _, z0 in starts:
        assert np.abs(hom.residual(z0, 0.0)).max() < 1e-12
    results = track_path_diag_coeff(inst, 3)
    assert all(r.converged for r in results)
    diag = np.array([r.endpoint.lambdas[0] for r in results])
    fiber = np.array([p.lam for p in solve(inst, seed=3).eigenpairs])
    assert len(diag) == len(fiber) == 4
    assert match_sets(diag, fiber).max() < 1e-6


def test_chart_switch_rescues_a_path_whose_eigenvector_leaves_the_chart():
    inst = qmep_linearize(random_qmep(3, 2))
    report = solve(inst, seed=0)
    assert report.n_divergent == 0
    res = next(r for r in report.path_results if r.start_index == (0, 3))
    assert res.converged and res.stats.recharts >= 1
    fixed = TrackerConfig(rechart_norm=np.inf)
    again = track_path(inst, report.slices, report.target, report.starts.point((0, 3)), fixed)
    assert again.status is PathStatus.STEP_FLOOR
    assert np.abs(again.last_point.lambdas).max() < 10
    assert max(np.abs(x).max() for x in again.last_point.xs) > 1e3
