import math

import numpy as np
import pytest
from scipy.linalg import expm, solve_continuous_lyapunov

from conftest import random_params
from dwell import (
    DomainError,
    GaussianState,
    ModelParams,
    NoSteadyStateError,
    assemble_generators,
    closed_covariance,
    evolve,
    find_thermalisation_times,
    local_occupations_at,
    state_at,
    steady_state,
    steady_state_closed_form,
)
from dwell.dissipative import max_step, thermalisation_residual
from dwell.gaussian import OMEGA, thermal_covariance
from dwell.integrate import linear_rk4_map, rk4_step, sample_count, substeps


def test_free_drift_is_omega():
    np.testing.assert_array_equal(assemble_generators(ModelParams()).drift, OMEGA)


def test_damping_on_drift_diagonal():
    gen = assemble_generators(ModelParams(j=1, gamma1=0.4, gamma2=1.0))
    np.testing.assert_allclose(np.diag(gen.drift), [-0.2, -0.2, -0.5, -0.5])


def test_diffusion_example():
    gen = assemble_generators(ModelParams(gamma1=1, gamma2=1, nbar1=1, nbar2=2))
    np.testing.assert_array_equal(gen.diffusion, np.diag([3.0, 3, 5, 5]))


def test_rk4_step_exact_on_cubic():
    # RK4 integrates y' = 3t^2 exactly, written autonomously
    y = rk4_step(lambda v: np.array([1.0, 3 * v[0] ** 2]), np.array([0.0, 0.0]), 0.5)
    np.testing.assert_allclose(y, [0.5, 0.125])


def test_linear_rk4_map_converges_to_expm():
    G = np.array([[0.0, 1.0], [-1.0, -0.1]])
    n, h = substeps(2.0, 1e-3)
    np.testing.assert_allclose(linear_rk4_map(G, h, n), expm(2.0 * G), atol=1e-12)


@pytest.mark.parametrize("t_max, dt, count", [(10, 0.1, 101), (1, 0.3, 4), (5, 0.5, 11), (0.3, 0.1, 4)])
def test_sample_count(t_max, dt, count):
    assert sample_count(t_max, dt) == count


def test_max_step_bound():
    p = ModelParams(delta=10, j=5, gamma1=3, gamma2=3)
    assert max_step(p) <= 1e-3 / math.hypot(10, 10)


def test_evolve_undamped_matches_closed_form(rng):
    for _ in range(3):
        p = random_params(rng, damped=False)
        traj = evolve(p, 5.0, 0.5)
        assert len(traj) == 11
        for t, s in zip(traj.times, traj.states):
            np.testing.assert_allclose(s.cov, closed_covariance(p, t), atol=1e-8)


def test_evolve_relaxes_to_steady_state():
    p = ModelParams(delta=1.5, j=1.2, gamma1=0.7, gamma2=1.3, nbar1=0.5, nbar2=3)
    final = state_at(p, 30 / 0.7)
    np.testing.assert_allclose(final.cov, steady_state(p), atol=1e-6)


def test_equal_reservoirs_keep_block_zero():
    p = ModelParams(delta=3, j=2, gamma1=1, gamma2=1, nbar1=2, nbar2=2)
    for s in evolve(p, 5, 0.25).states:
        np.testing.assert_allclose(s.cov[:2, 2:], 0, atol=1e-10)


def test_evolve_oracle_expm():
    p = ModelParams(delta=0.5, j=1, gamma1=0.3, gamma2=0.8, nbar1=1, nbar2=0)
    A = assemble_generators(p).drift
    D = assemble_generators(p).diffusion
    s0 = thermal_covariance(1, 0)
    ss = solve_continuous_lyapunov(A, -D)
    traj = evolve(p, 4, 1)
    for t, cov in zip(traj.times, traj.covariances):
        E = expm(A * t)
        np.testing.assert_allclose(cov, E @ (s0 - ss) @ E.T + ss, atol=1e-9)


def test_displacement_decays():
    p = ModelParams(j=1, gamma1=1, gamma2=1)
    init = GaussianState(np.eye(4), np.array([1.0, 0, 0, 0]))
    final = state_at(p, 3.0, init)
    # both normal modes damp at gamma/2
    assert np.linalg.norm(final.displacement) == pytest.approx(math.exp(-1.5), rel=1e-8)


def test_evolve_rejects_bad_times():
    with pytest.raises(DomainError):
        evolve(ModelParams(), 0, 0.1)
    with pytest.raises(DomainError):
        state_at(ModelParams(), -1)


def test_steady_state_decoupled_is_thermal():
    p = ModelParams(delta=2, gamma1=1, gamma2=0.5, nbar1=1, nbar2=3)
    np.testing.assert_allclose(steady_state(p), thermal_covariance(1, 3), atol=1e-12)


def test_steady_state_example(ref_params):
    cov = steady_state(ref_params)
    np.testing.assert_allclose(np.diag(cov), [67 / 17, 67 / 17, 69 / 17, 69 / 17], atol=1e-12)
    assert cov[0, 3] == pytest.approx(-4 / 17, abs=1e-12)
    assert assemble_generators(ref_params).lyapunov_residual(cov) < 1e-10


def test_steady_state_thermal_like_for_equal_reservoirs():
    cov = steady_state(ModelParams(delta=4, j=2, gamma1=1, gamma2=1, nbar1=2, nbar2=2))
    np.testing.assert_allclose(cov, 5 * np.eye(4), atol=1e-12)


def test_steady_state_matches_closed_form(rng):
    for _ in range(20):
        p = random_params(rng)
        np.testing.assert_allclose(steady_state(p), steady_state_closed_form(p), atol=1e-10)


def test_steady_state_requires_damping():
    with pytest.raises(NoSteadyStateError):
        steady_state(ModelParams(j=1))
    with pytest.raises(NoSteadyStateError):
        steady_state(ModelParams(j=0, gamma1=1))


def test_symplectic_eigenvalues_of_decoupled_steady_state():
    from dwell import symplectic_eigenvalues

    cov = steady_state_closed_form(ModelParams(gamma1=1, gamma2=1, nbar1=1, nbar2=2))
    np.testing.assert_allclose(symplectic_eigenvalues(cov), (5, 3))


def test_thermalisation_roots():
    roots = find_thermalisation_times(1.0, 2.0, 5.0)
    np.testing.assert_allclose(roots, [1.03438, 1.33749], atol=1e-4)
    for r in roots:
        assert abs(thermalisation_residual(r, 1.0, 2.0)) < 1e-10


def test_no_roots_when_damping_dominates():
    assert find_thermalisation_times(10.0, 0.1, 100.0) == []


def test_roots_are_temperature_independent(ref_params):
    roots = find_thermalisation_times(1.0, 2.0, 5.0)
    for n1, n2 in [(1, 2), (0, 4), (3, 0.5)]:
        p = ref_params.replace(nbar1=n1, nbar2=n2)
        for r in roots:
            assert np.abs(state_at(p, r).cov[:2, 2:]).max() < 1e-9


def test_roots_against_dense_scan():
    gamma, j = 0.3, 4.0
    roots = find_thermalisation_times(gamma, j, 20)
    t = np.linspace(1e-6, 20, 400001)
    f = thermalisation_residual(t, gamma, j)
    assert len(roots) == int(np.sum(np.sign(f[:-1]) != np.sign(f[1:])))


def test_local_occupations_examples(ref_params):
    assert local_occupations_at(ref_params, 0.0) == (1.0, 2.0)
    np.testing.assert_allclose(local_occupations_at(ref_params, 1.03438), (1.597, 1.403), atol=2e-3)
    np.testing.assert_allclose(local_occupations_at(ref_params, 1.33749), (1.422, 1.578), atol=2e-3)


def test_single_well_blocks_stay_isotropic(ref_params):
    for s in evolve(ref_params, 5, 0.1).states:
        for blk in (s.cov[:2, :2], s.cov[2:, 2:]):
            assert abs(blk[0, 1]) < 1e-9 and abs(blk[0, 0] - blk[1, 1]) < 1e-9


def test_more_tunnelling_more_roots():
    assert len(find_thermalisation_times(1, 4, 5)) >= len(find_thermalisation_times(1, 2, 5))


def test_trajectories_stay_physical(rng):
    for _ in range(5):
        p = random_params(rng, equal=False)
        traj = evolve(p, 10, 0.5)
        assert all(s.is_physical() for s in traj.states)
        assert np.all(np.diff(traj.times) > 0)
