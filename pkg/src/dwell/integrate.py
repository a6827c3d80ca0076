"""Fixed-step classical Runge-Kutta helpers."""

from __future__ import annotations

import math

import numpy as np


def rk4_step(f, y, h):
    """One classical fourth-order Runge-Kutta step of the autonomous ODE ``y' = f(y)``."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def substeps(interval: float, h_max: float) -> tuple[int, float]:
    """Split ``interval`` into the fewest equal steps no longer than ``h_max``."""
    n = max(1, math.ceil(interval / h_max - 1e-12))
    return n, interval / n


def linear_rk4_map(generator: np.ndarray, h: float, n: int = 1, dtype=np.float64) -> np.ndarray:
    """Matrix of ``n`` RK4 steps of size h for the linear ODE ``y' = generator @ y``.

    Applying :func:`rk4_step` to the identity gives the single-step matrix
    exactly; repeated squaring then composes the n steps. ``dtype`` selects the
    working precision of the composition.
    """
    generator = np.asarray(generator, dtype=dtype)
    step = rk4_step(lambda y: generator @ y, np.eye(generator.shape[0], dtype=dtype), dtype(h))
    return np.linalg.matrix_power(step, n)


def sample_count(t_max: float, dt_out: float) -> int:
    """Number of output samples ``floor(t_max / dt_out) + 1`` robust to round-off."""
    return int(math.floor(t_max / dt_out * (1 + 1e-12) + 1e-12)) + 1
