import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dwell import (
    DomainError,
    GaussianState,
    GlobalThermal,
    LocalThermal,
    ModelParams,
    UnsupportedRegimeError,
    evolve,
    evolve_fock,
    fock_uhlmann_fidelity,
    gaussian_discord,
    gaussian_fidelity,
    log_negativity,
    max_fidelity_thermal,
    state_at,
    steady_state,
    thermal_fock,
)
from dwell.gaussian import mixing_matrix, thermal_covariance
from dwell.measures import entropy_function

occ = st.floats(0, 5)


def tmsv(r):
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    cov = c * np.eye(4)
    cov[:2, 2:] = cov[2:, :2] = s * np.diag([1.0, -1.0])
    return cov


def test_fidelity_self_is_one():
    cov = thermal_covariance(1, 2)
    assert gaussian_fidelity(cov, cov) == pytest.approx(1, abs=1e-12)


def test_fidelity_vacuum_vs_thermal():
    assert gaussian_fidelity(np.eye(4), thermal_covariance(1, 1)) == pytest.approx(0.25, abs=1e-12)
    oracle = fock_uhlmann_fidelity(thermal_fock(0, 0, 30), thermal_fock(1, 1, 30))
    assert oracle == pytest.approx(0.25, abs=1e-6)


@given(occ, occ, occ, occ)
def test_fidelity_symmetric(a, b, c, d):
    s1, s2 = thermal_covariance(a, b), thermal_covariance(c, d)
    assert gaussian_fidelity(s1, s2) == pytest.approx(gaussian_fidelity(s2, s1), abs=1e-12)


@given(occ, occ, occ, occ)
def test_fidelity_of_products_factorises(a, b, c, d):
    # single-mode thermal fidelity: 1 / (sqrt((1+a)(1+c)) - sqrt(a c))^2
    def single(x, y):
        return 1 / (math.sqrt((1 + x) * (1 + y)) - math.sqrt(x * y)) ** 2

    s1, s2 = thermal_covariance(a, b), thermal_covariance(c, d)
    # occupations as stored; sub-eps occupations round to vacuum, and the
    # square-root cusp at purity would otherwise amplify that to ~1e-8
    a, b, c, d = ((s[i, i] - 1) / 2 for s in (s1, s2) for i in (0, 2))
    expected = single(a, c) * single(b, d)
    assert gaussian_fidelity(s1, s2) == pytest.approx(expected, rel=1e-9)


def test_fidelity_rejects_displaced_state():
    with pytest.raises(UnsupportedRegimeError):
        gaussian_fidelity(GaussianState(np.eye(4), np.ones(4)), np.eye(4))


def test_fidelity_matches_fock_oracle():
    p = ModelParams(delta=0.5, j=1.0, gamma1=0.5, gamma2=0.5, nbar1=0.1, nbar2=0.4)
    fock = evolve_fock(p, 18, 1.5, 0.5)
    gauss = evolve(p, 1.5, 0.5)
    for i in range(len(fock)):
        for k in range(i + 1, len(fock)):
            f_fock = fock_uhlmann_fidelity(fock[i][1], fock[k][1])
            f_gauss = gaussian_fidelity(gauss.covariances[i], gauss.covariances[k])
            assert f_gauss == pytest.approx(f_fock, abs=1e-4)


@pytest.mark.parametrize("mu", [0.0, 0.7, 3.0])
def test_max_fidelity_global_recovers(mu):
    target, f = max_fidelity_thermal((2 * mu + 1) * np.eye(4), "global")
    assert isinstance(target, GlobalThermal)
    assert target.mu == pytest.approx(mu, abs=1e-6)
    assert f == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("mu1, mu2", [(1.0, 2.0), (0.0, 0.3), (4.0, 0.0)])
def test_max_fidelity_local_recovers(mu1, mu2):
    target, f = max_fidelity_thermal(thermal_covariance(mu1, mu2), "local")
    assert isinstance(target, LocalThermal)
    assert (target.mu1, target.mu2) == pytest.approx((mu1, mu2), abs=1e-9)
    assert f == pytest.approx(1, abs=1e-12)


def test_max_fidelity_at_thermalisation_root(ref_params):
    _, f = max_fidelity_thermal(state_at(ref_params, 1.0343834677).cov, "local")
    assert f >= 0.999


@pytest.mark.parametrize("kind", ["global", "local"])
def test_max_fidelity_beats_grid_search(kind):
    cov = state_at(ModelParams(delta=2, j=1, gamma1=0.3, gamma2=0.3, nbar1=0.5, nbar2=3), 1.7).cov
    _, best = max_fidelity_thermal(cov, kind)
    grid = np.linspace(0, 6, 121)
    if kind == "global":
        oracle = max(gaussian_fidelity(cov, GlobalThermal(m).covariance) for m in grid)
    else:
        oracle = max(gaussian_fidelity(cov, LocalThermal(a, b).covariance) for a in grid for b in grid)
    assert best >= oracle - 1e-12


def test_max_fidelity_rejects_unknown_kind():
    with pytest.raises(DomainError):
        max_fidelity_thermal(np.eye(4), "partial")


def test_entropy_function():
    assert entropy_function(1.0) == 0.0
    assert entropy_function(3.0) == pytest.approx(2 * math.log(2))
    assert entropy_function(3.0, bits=True) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        entropy_function(0.5)


@given(occ, occ)
def test_discord_of_product_is_zero(a, b):
    assert abs(gaussian_discord(thermal_covariance(a, b)).value) < 1e-10


def test_discord_null_for_equal_reservoirs():
    cov = steady_state(ModelParams(delta=5, j=2, gamma1=1, gamma2=1, nbar1=2, nbar2=2))
    assert gaussian_discord(cov).value < 1e-12


def test_discord_positive_for_unequal_reservoirs():
    cov = steady_state(ModelParams(delta=5, j=2, gamma1=1, gamma2=1, nbar1=1, nbar2=5))
    res = gaussian_discord(cov)
    assert res.value > 1e-4
    assert res.branch in (1, 2)
    assert gaussian_discord(cov, swap=True).value > 1e-4


# the minimised conditional determinant loses digits to cancellation as r grows
@pytest.mark.parametrize("r, tol", [(0.1, 1e-9), (0.5, 1e-9), (1.2, 1e-6)])
def test_discord_of_pure_state_is_entanglement_entropy(r, tol):
    # pure states: discord equals the entropy of either reduced state
    cov = tmsv(r)
    expected = entropy_function(math.cosh(2 * r))
    assert gaussian_discord(cov).value == pytest.approx(expected, rel=tol)
    assert gaussian_discord(cov, swap=True).value == pytest.approx(expected, rel=tol)
    assert gaussian_discord(cov, bits=True).value == pytest.approx(expected / math.log(2), rel=tol)


def test_discord_rejects_unphysical():
    with pytest.raises(DomainError):
        gaussian_discord(0.5 * np.eye(4))


def test_log_negativity_examples():
    assert log_negativity(thermal_covariance(1, 2)) == 0.0
    assert log_negativity(tmsv(0.5)) == pytest.approx(1.0, abs=1e-12)


@given(occ, occ, st.floats(-3, 3))
def test_passive_mixing_of_thermal_is_separable(a, b, theta):
    T = mixing_matrix(theta)
    assert log_negativity(T @ thermal_covariance(a, b) @ T.T) == 0.0


def local_symplectic(r1, phi1, r2, phi2):
    from dwell.gaussian import rotation_matrix

    def single(r, phi):
        return rotation_matrix(1.0, phi) @ np.diag([math.exp(r), math.exp(-r)])

    S = np.zeros((4, 4))
    S[:2, :2] = single(r1, phi1)
    S[2:, 2:] = single(r2, phi2)
    return S


@given(st.floats(-1, 1), st.floats(-3, 3), st.floats(-1, 1), st.floats(-3, 3))
def test_discord_local_symplectic_invariance(r1, phi1, r2, phi2):
    cov = steady_state(ModelParams(delta=5, j=2, gamma1=1, gamma2=1, nbar1=1, nbar2=5))
    S = local_symplectic(r1, phi1, r2, phi2)
    for swap in (False, True):
        assert abs(gaussian_discord(S @ cov @ S.T, swap=swap).value - gaussian_discord(cov, swap=swap).value) < 1e-9


def test_discord_continuity(rng):
    cov = steady_state(ModelParams(delta=3, j=2, gamma1=1, gamma2=1, nbar1=1, nbar2=4))
    base = gaussian_discord(cov).value
    for _ in range(20):
        pert = rng.normal(size=(4, 4)) * 1e-8
        assert abs(gaussian_discord(cov + pert + pert.T).value - base) < 1e-5


def test_unitary_discord_is_periodic_and_vanishes():
    from dwell import closed_covariance

    p = ModelParams(j=2, nbar1=1, nbar2=5)
    period = 2 * math.pi / 4.0
    for k in range(4):
        assert gaussian_discord(closed_covariance(p, k * period)).value < 1e-9
    for t in np.linspace(0.1, 1.4, 6):
        a = gaussian_discord(closed_covariance(p, t)).value
        b = gaussian_discord(closed_covariance(p, t + period)).value
        assert a > 1e-6 and abs(a - b) < 1e-9


def test_steady_discord_positive_off_the_null_line():
    for delta in (0, 2, 5, 10):
        for j in (0.5, 2):
            for n1, n2 in [(0, 0.2), (1, 5), (3, 1)]:
                p = ModelParams(delta=delta, j=j, gamma1=1, gamma2=1, nbar1=n1, nbar2=n2)
                assert gaussian_discord(steady_state(p)).value > 1e-12


def test_fidelity_one_only_for_equal_states(rng):
    for _ in range(20):
        S = local_symplectic(*rng.uniform(-1, 1, 4)) @ mixing_matrix(rng.uniform(-3, 3))
        cov = S @ thermal_covariance(*rng.uniform(0, 3, 2)) @ S.T
        assert gaussian_fidelity(cov, cov) == pytest.approx(1, abs=1e-8)
        other = cov + 0.05 * np.eye(4)
        assert 0 <= gaussian_fidelity(cov, other) < 1 - 1e-8
