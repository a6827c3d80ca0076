"""Heat fluxes and energy bookkeeping for Gaussian trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dissipative import Trajectory, assemble_generators, hamiltonian_matrix
from .errors import UnsupportedRegimeError
from .gaussian import GaussianState, ModelParams


@dataclass(frozen=True)
class FluxRecord:
    t: float
    qdot1: float
    qdot2: float
    qdot_tot: float
    q_tot: float


def mean_energy(state: GaussianState, params: ModelParams) -> float:
    """``<H>`` of the non-interacting dimer, zero-point energy included."""
    W = hamiltonian_matrix(params)
    d = state.displacement
    return float(0.25 * np.trace(W @ state.cov) + 0.5 * d @ W @ d)


def _local_energy_rate(cov_rate, cov_disp, disp_rate, k, omega):
    blk = slice(2 * k, 2 * k + 2)
    return omega * (0.25 * np.trace(cov_rate[blk, blk]) + cov_disp[blk] @ disp_rate[blk])


def flux_record(t: float, state: GaussianState, params: ModelParams) -> FluxRecord:
    """Fluxes at one instant, using the generator for the time derivatives."""
    gen = assemble_generators(params)
    W = hamiltonian_matrix(params)
    cov_rate = gen.covariance_rate(state.cov)
    d = state.displacement
    d_rate = gen.drift @ d
    qdot1 = _local_energy_rate(cov_rate, d, d_rate, 0, params.omega1)
    qdot2 = _local_energy_rate(cov_rate, d, d_rate, 1, params.omega2)
    qdot_tot = 0.25 * np.trace(W @ cov_rate) + d @ W @ d_rate
    return FluxRecord(t=float(t), qdot1=float(qdot1), qdot2=float(qdot2),
                      qdot_tot=float(qdot_tot), q_tot=mean_energy(state, params))


def fluxes_from_trajectory(traj: Trajectory) -> list[FluxRecord]:
    """Single-well and total heat fluxes at every sample of a trajectory.

    ``qdot_j`` is the rate of change of ``omega_j (<n_j> + 1/2)``; ``qdot_tot``
    the rate of change of the full energy, tunnelling term included.
    """
    return [flux_record(t, s, traj.params) for t, s in zip(traj.times, traj.states)]


def closed_form_flux(params: ModelParams, t: float) -> tuple[float, float, float]:
    """Analytic fluxes for equal damping and a local thermal initial state.

    Returns ``(qdot1, qdot2, qdot_tot)`` with
    ``qdot1 = exp(-gamma t) 2 J^2 (nbar2 - nbar1) sin(Gamma t) / Gamma``,
    ``qdot2 = -(1 + delta) qdot1`` and zero total flux.
    """
    if params.gamma1 != params.gamma2:
        raise UnsupportedRegimeError("closed-form fluxes need gamma1 == gamma2")
    if params.u != 0:
        raise UnsupportedRegimeError("closed-form fluxes need u = 0")
    gamma_cap = math.hypot(2 * params.j, params.delta)
    if gamma_cap == 0:
        return 0.0, 0.0, 0.0
    amp = 2 * params.j**2 * (params.nbar2 - params.nbar1) / gamma_cap
    qdot1 = math.exp(-params.gamma1 * t) * amp * math.sin(gamma_cap * t)
    return qdot1, -(1 + params.delta) * qdot1, 0.0


def total_energy(params: ModelParams) -> float:
    """Conserved energy of the local thermal initial state (U = 0)."""
    if params.u != 0:
        raise UnsupportedRegimeError("energy is conserved only for u = 0")
    return 1 + params.delta / 2 + params.nbar1 + (1 + params.delta) * params.nbar2
