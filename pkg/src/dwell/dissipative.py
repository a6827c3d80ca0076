"""Damped Gaussian dynamics of the non-interacting dimer.

With U = 0 the master equation maps Gaussian states to Gaussian states, and
the covariance obeys the Lyapunov-type equation

    d sigma / dt = A sigma + sigma A^T + D,

with drift ``A = Omega W - diag(gamma1, gamma1, gamma2, gamma2) / 2`` (``W`` the
quadratic form of the Hamiltonian) and diffusion
``D = diag(gamma_j (2 nbar_j + 1))``. First moments obey ``d<P>/dt = A <P>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .closed import normal_modes
from .errors import DomainError, IntegrationError, NoSteadyStateError, UnsupportedRegimeError
from .gaussian import (
    HARD_TOL,
    OMEGA,
    GaussianState,
    ModelParams,
    occupations,
    symplectic_eigenvalues,
    thermal_covariance,
)
from .integrate import linear_rk4_map, sample_count, substeps


@dataclass(frozen=True)
class DriftDiffusion:
    drift: np.ndarray
    diffusion: np.ndarray

    def covariance_rate(self, cov: np.ndarray) -> np.ndarray:
        """Time derivative of the covariance matrix."""
        return self.drift @ cov + cov @ self.drift.T + self.diffusion

    def lyapunov_residual(self, cov: np.ndarray) -> float:
        return float(np.max(np.abs(self.covariance_rate(cov))))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: tuple[GaussianState, ...]
    params: ModelParams

    @property
    def covariances(self) -> np.ndarray:
        return np.array([s.cov for s in self.states])

    def __len__(self):
        return len(self.times)


def hamiltonian_matrix(params: ModelParams) -> np.ndarray:
    """Quadratic form ``W`` with ``H = P^T W P / 2`` in the ``(x1, p1, x2, p2)`` basis."""
    h = np.array([[params.omega1, -params.j], [-params.j, params.omega2]])
    return np.kron(h, np.eye(2))


def assemble_generators(params: ModelParams) -> DriftDiffusion:
    if params.u != 0:
        raise UnsupportedRegimeError("Gaussian dynamics requires u = 0; use the Fock engine")
    g1, g2 = params.gamma1, params.gamma2
    damping = np.diag([g1, g1, g2, g2])
    drift = OMEGA @ hamiltonian_matrix(params) - 0.5 * damping
    v1, v2 = 2 * params.nbar1 + 1, 2 * params.nbar2 + 1
    diffusion = np.diag([g1 * v1, g1 * v1, g2 * v2, g2 * v2])
    return DriftDiffusion(drift=drift, diffusion=diffusion)


def max_step(params: ModelParams) -> float:
    """RK4 step bound, resolving the fastest rotation of the covariance equation."""
    modes = normal_modes(params)
    scale = max(1.0, modes.gamma_cap, params.gamma1, params.gamma2,
                abs(modes.omega1_n), abs(modes.omega2_n))
    return min(1e-3, 1e-3 / scale)


def _augmented_generator(gen: DriftDiffusion) -> np.ndarray:
    # state z = (vec sigma [16, row-major], <P> [4], 1)
    A = gen.drift
    eye = np.eye(4)
    L = np.zeros((21, 21))
    L[:16, :16] = np.kron(A, eye) + np.kron(eye, A)
    L[:16, 20] = gen.diffusion.ravel()
    L[16:20, 16:20] = A
    return L


# extended precision keeps exact fixed points (e.g. equal temperatures) frozen
# to ~1e-15 through the thousands of composed steps
WORK_DTYPE = np.longdouble


def _pack(state: GaussianState) -> np.ndarray:
    return np.concatenate([state.cov.ravel(), state.displacement, [1.0]]).astype(WORK_DTYPE)


def _unpack(z: np.ndarray, t: float) -> GaussianState:
    if not np.all(np.isfinite(z)):
        raise IntegrationError("non-finite covariance", t)
    z = np.asarray(z, dtype=np.float64)
    cov = z[:16].reshape(4, 4)
    cov = 0.5 * (cov + cov.T)
    if symplectic_eigenvalues(cov)[1] < 1 - HARD_TOL:
        raise IntegrationError("covariance became unphysical", t)
    return GaussianState(cov=cov, displacement=z[16:20])


def thermal_state(params: ModelParams) -> GaussianState:
    return GaussianState(cov=thermal_covariance(params.nbar1, params.nbar2))


def evolve(params: ModelParams, t_max: float, dt_out: float,
           initial: GaussianState | None = None) -> Trajectory:
    """Integrate the covariance and first moments, sampling every ``dt_out``.

    The initial state defaults to the product of local thermal states at the
    reservoir occupations. Integration is classical RK4 with a fixed step below
    :func:`max_step`; because the system is linear the per-interval RK4 map is
    formed once and reused.
    """
    if t_max <= 0 or dt_out <= 0:
        raise DomainError("t_max and dt_out must be positive")
    gen = assemble_generators(params)
    state = thermal_state(params) if initial is None else initial
    n, h = substeps(dt_out, max_step(params))
    step = linear_rk4_map(_augmented_generator(gen), h, n, WORK_DTYPE)
    count = sample_count(t_max, dt_out)
    times = dt_out * np.arange(count)
    z = _pack(state)
    states = [state]
    for t in times[1:]:
        z = step @ z
        states.append(_unpack(z, float(t)))
    return Trajectory(times=times, states=tuple(states), params=params)


def state_at(params: ModelParams, t: float, initial: GaussianState | None = None) -> GaussianState:
    """Evolved Gaussian state at a single time t >= 0."""
    if t < 0:
        raise DomainError("t must be >= 0")
    state = thermal_state(params) if initial is None else initial
    if t == 0:
        return state
    gen = assemble_generators(params)
    n, h = substeps(t, max_step(params))
    return _unpack(linear_rk4_map(_augmented_generator(gen), h, n, WORK_DTYPE) @ _pack(state), t)


def local_occupations_at(params: ModelParams, t: float) -> tuple[float, float]:
    """Effective thermal occupations of the two wells at time t."""
    state = state_at(params, t)
    return occupations(state.cov)


def steady_state(params: ModelParams) -> np.ndarray:
    """Stationary covariance from a direct solve of ``A s + s A^T + D = 0``."""
    gen = assemble_generators(params)
    if params.gamma1 == 0 and params.gamma2 == 0:
        raise NoSteadyStateError("no damping: the dynamics has no steady state")
    A = gen.drift
    if np.max(np.linalg.eigvals(A).real) >= -1e-13:
        raise NoSteadyStateError("an undamped normal mode prevents relaxation")
    eye = np.eye(4)
    lyap = np.kron(A, eye) + np.kron(eye, A)
    cov = np.linalg.solve(lyap, -gen.diffusion.ravel()).reshape(4, 4)
    return 0.5 * (cov + cov.T)


def steady_state_closed_form(params: ModelParams) -> np.ndarray:
    """Analytic stationary covariance for equal damping rates.

    The bias-dependent correlations ``<x1 x2> = <p1 p2>`` enter with a positive
    sign times ``J delta (nbar1 - nbar2)``, as required by the equations of
    motion and by the time average of the undamped solution.
    """
    if params.gamma1 != params.gamma2:
        raise UnsupportedRegimeError("closed-form steady state needs gamma1 == gamma2")
    if params.u != 0:
        raise UnsupportedRegimeError("closed-form steady state needs u = 0")
    g, d, j = params.gamma1, params.delta, params.j
    if g == 0:
        raise NoSteadyStateError("no damping: the dynamics has no steady state")
    n1, n2 = params.nbar1, params.nbar2
    den = g**2 + d**2
    zeta = den / (4 * j**2 + den)
    a = 4 * j**2 * (n1 + n2 + 1) / den
    m1, m2 = a + 2 * n1 + 1, a + 2 * n2 + 1
    u = 2 * j * d * (n1 - n2) / den
    v = 2 * j * g * (n1 - n2) / den
    return zeta * np.array([
        [m1, 0.0, u, v],
        [0.0, m1, -v, u],
        [u, -v, m2, 0.0],
        [v, u, 0.0, m2],
    ])


def thermalisation_residual(t, gamma: float, j: float):
    """``cos(2Jt) - (2J/gamma) sin(2Jt) - exp(gamma t)``; zero where the wells decorrelate."""
    return np.cos(2 * j * t) - (2 * j / gamma) * np.sin(2 * j * t) - np.exp(gamma * t)


def find_thermalisation_times(gamma: float, j: float, t_max: float) -> list[float]:
    """Positive instants in ``(0, t_max]`` at which the inter-well correlations vanish.

    Valid for an unbiased dimer with equal damping on both wells. Roots do not
    depend on the reservoir temperatures.
    """
    if gamma <= 0 or j <= 0:
        raise DomainError("gamma and j must be positive")
    # past this time exp(gamma t) exceeds the oscillation amplitude
    t_bound = math.log(math.hypot(1.0, 2 * j / gamma)) / gamma
    t_end = min(t_max, t_bound)
    step = math.pi / (20 * j)
    grid = np.arange(1, max(1, math.ceil(t_end / step)) + 1) * step
    grid = grid[grid < t_end]
    grid = np.append(grid, t_end)
    f = thermalisation_residual(grid, gamma, j)
    roots = []
    for k in range(len(grid)):
        if f[k] == 0.0:
            roots.append(float(grid[k]))
        elif k + 1 < len(grid) and f[k] * f[k + 1] < 0:
            roots.append(brentq(thermalisation_residual, grid[k], grid[k + 1],
                                args=(gamma, j), xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return [t for t in roots if 0 < t <= t_max]
