"""Unitary dynamics of the non-interacting dimer (no damping, U = 0)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedRegimeError
from .gaussian import ModelParams, mixing_matrix, rotation_matrix, thermal_covariance


@dataclass(frozen=True)
class NormalModes:
    """Decoupled oscillators of the tunnelling Hamiltonian.

    ``theta`` is the mixing angle, ``gamma_cap = sqrt(delta^2 + 4 J^2)`` the
    splitting, and ``omega1_n``, ``omega2_n`` the two normal-mode frequencies.
    """

    theta: float
    gamma_cap: float
    omega1_n: float
    omega2_n: float


def normal_modes(params: ModelParams) -> NormalModes:
    delta, j = params.delta, params.j
    gamma_cap = math.hypot(delta, 2 * j)
    # atan2 takes the delta -> 0 limit continuously (theta = -pi/4 for J > 0)
    # and keeps cos(2 theta) = delta / Gamma for negative bias
    theta = -0.5 * math.atan2(2 * j, delta)
    return NormalModes(
        theta=theta,
        gamma_cap=gamma_cap,
        omega1_n=1 + (delta - gamma_cap) / 2,
        omega2_n=1 + (delta + gamma_cap) / 2,
    )


def _require_free(params: ModelParams):
    if params.u != 0:
        raise UnsupportedRegimeError("Gaussian dynamics requires u = 0; use the Fock engine")


def propagator(params: ModelParams, t: float) -> np.ndarray:
    """Symplectic propagator ``M(t) = T R1 R2 T^T`` of the quadrature vector."""
    _require_free(params)
    modes = normal_modes(params)
    T = mixing_matrix(modes.theta)
    R = np.zeros((4, 4))
    R[:2, :2] = rotation_matrix(modes.omega1_n, t)
    R[2:, 2:] = rotation_matrix(modes.omega2_n, t)
    return T @ R @ T.T


def closed_covariance(params: ModelParams, t: float) -> np.ndarray:
    """Closed-form covariance at time t, starting from the local thermal product.

    The in-phase correlation ``c1`` oscillates as ``sin^2(Gamma t / 2)``; this is
    what ``M sigma(0) M^T`` gives and is checked against the propagator in the
    tests.
    """
    _require_free(params)
    delta, j = params.delta, params.j
    n1b, n2b = params.nbar1, params.nbar2
    gamma_cap = math.hypot(delta, 2 * j)
    g2 = gamma_cap**2
    if g2 == 0:
        return thermal_covariance(n1b, n2b)
    diff = n1b - n2b
    cos_t = math.cos(gamma_cap * t)
    base = 4 * j**2 * (n1b + n2b + 1)
    n1 = (4 * j**2 * diff * cos_t + base + delta**2 * (2 * n1b + 1)) / g2
    n2 = (-4 * j**2 * diff * cos_t + base + delta**2 * (2 * n2b + 1)) / g2
    c1 = 4 * j * delta * diff * math.sin(gamma_cap * t / 2) ** 2 / g2
    c2 = 2 * j * diff * math.sin(gamma_cap * t) / gamma_cap
    return np.array([
        [n1, 0.0, c1, c2],
        [0.0, n1, -c2, c1],
        [c1, -c2, n2, 0.0],
        [c2, c1, 0.0, n2],
    ])
