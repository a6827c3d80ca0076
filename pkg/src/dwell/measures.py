"""Fidelity, quantum-correlation and entanglement measures for two-mode Gaussian states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, UnsupportedRegimeError
from .gaussian import (
    OMEGA,
    PHYSICAL_TOL,
    GaussianState,
    check_physical,
    occupations,
    symplectic_eigenvalues,
)


@dataclass(frozen=True)
class GlobalThermal:
    """Thermal state of both wells at a common occupation ``mu``."""

    mu: float

    @property
    def covariance(self) -> np.ndarray:
        return (2 * self.mu + 1) * np.eye(4)


@dataclass(frozen=True)
class LocalThermal:
    """Product of local thermal states with occupations ``mu1`` and ``mu2``."""

    mu1: float
    mu2: float

    @property
    def covariance(self) -> np.ndarray:
        v1, v2 = 2 * self.mu1 + 1, 2 * self.mu2 + 1
        return np.diag([v1, v1, v2, v2])


ThermalTarget = GlobalThermal | LocalThermal


@dataclass(frozen=True)
class DiscordResult:
    """Gaussian discord together with the invariants it was computed from.

    ``i1``..``i4`` are the determinants of the measured block, the other block,
    the correlation block and the full matrix; ``branch`` is 1 or 2 depending on
    which expression for the minimised conditional determinant applied.
    """

    value: float
    i1: float
    i2: float
    i3: float
    i4: float
    d_minus: float
    d_plus: float
    branch: int


def _as_cov(sigma) -> np.ndarray:
    if isinstance(sigma, GaussianState):
        if np.any(sigma.displacement != 0):
            raise UnsupportedRegimeError("fidelity is implemented for zero-mean states only")
        sigma = sigma.cov
    return check_physical(sigma)


def _det(m: np.ndarray):
    """Determinant by partial-pivot elimination, in the dtype of ``m``.

    LAPACK has no extended-precision path; near-pure states need it because
    the fidelity has a square-root singularity at purity.
    """
    a = m.copy()
    n = a.shape[0]
    det = a.dtype.type(1)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0:
            return a.dtype.type(0)
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        a[k + 1:, k:] -= np.outer(a[k + 1:, k] / a[k, k], a[k, k:])
    return det


def gaussian_fidelity(sigma1, sigma2) -> float:
    """Uhlmann fidelity between two zero-mean two-mode Gaussian states.

    Accepts covariance matrices (vacuum = identity) or :class:`GaussianState`
    objects with zero displacement. Determinants are taken in extended
    precision.
    """
    s1 = _as_cov(sigma1).astype(np.longdouble)
    s2 = _as_cov(sigma2).astype(np.longdouble)
    om = OMEGA.astype(np.longdouble)
    eye = np.eye(4, dtype=np.longdouble)
    det_sum = _det(s1 + s2)
    gam = max(np.longdouble(0), _det(om @ s1 @ om @ s2 - eye))
    lam = (_det(s1 + 1j * om) * _det(s2 + 1j * om)).real
    lam = max(np.longdouble(0), lam)
    root = np.sqrt(det_sum)
    s = (np.sqrt(gam) + np.sqrt(lam)) / root
    f = 4 * (s + np.sqrt(max(np.longdouble(0), s * s - 1))) / root
    return float(min(np.longdouble(1), max(np.longdouble(0), f)))


# fidelity is flat at its maximum; smaller gains are rounding noise
_GAIN_TOL = 1e-13


def _maximise(fun, upper: float, start: float) -> tuple[float, float]:
    """Bounded scalar search on ``[0, upper]``, keeping ``start`` unless beaten."""
    res = minimize_scalar(lambda mu: -fun(mu), bounds=(0.0, upper), method="bounded",
                          options={"xatol": 1e-10, "maxiter": 500})
    best_mu, best_f = start, fun(start)
    # the bounded search never samples the endpoint itself
    for mu, f in ((float(res.x), -float(res.fun)), (0.0, fun(0.0))):
        if f > best_f + _GAIN_TOL:
            best_mu, best_f = mu, f
    return best_mu, best_f


def max_fidelity_thermal(sigma, target_kind: str = "local") -> tuple[ThermalTarget, float]:
    """Closest globally or locally thermal state to ``sigma`` in fidelity.

    The occupation search runs over ``[0, 4 (n1 + n2 + 1)]`` with ``n_j`` the
    local occupations of ``sigma``, starting from the moment-matched guess. The
    two-parameter local search uses coordinate ascent with a bounded scalar
    search along each axis.
    """
    cov = _as_cov(sigma)
    n1, n2 = (max(n, 0.0) for n in occupations(cov))
    upper = 4 * (n1 + n2 + 1)
    if target_kind == "global":
        mu, f = _maximise(lambda m: gaussian_fidelity(cov, GlobalThermal(m).covariance), upper,
                          (n1 + n2) / 2)
        return GlobalThermal(mu), f
    if target_kind != "local":
        raise DomainError(f"target_kind must be 'global' or 'local', got {target_kind!r}")

    mu1, mu2 = n1, n2
    best = gaussian_fidelity(cov, LocalThermal(mu1, mu2).covariance)
    for _ in range(200):
        prev = best
        mu1, best = _maximise(lambda m: gaussian_fidelity(cov, LocalThermal(m, mu2).covariance), upper, mu1)
        mu2, best = _maximise(lambda m: gaussian_fidelity(cov, LocalThermal(mu1, m).covariance), upper, mu2)
        if best - prev <= _GAIN_TOL:
            break
    return LocalThermal(mu1, mu2), best


def entropy_function(x: float, bits: bool = False) -> float:
    """Von Neumann entropy of a single-mode thermal state with symplectic eigenvalue x."""
    if x < 1 - PHYSICAL_TOL:
        raise DomainError(f"symplectic eigenvalue {x!r} below 1")
    if x - 1 < 1e-12:
        return 0.0
    a, b = (x + 1) / 2, (x - 1) / 2
    value = a * math.log(a) - b * math.log(b)
    return value / math.log(2) if bits else value


def _blocks(cov: np.ndarray, swap: bool):
    if swap:
        perm = [2, 3, 0, 1]
        cov = cov[np.ix_(perm, perm)]
    return cov[:2, :2], cov[2:, 2:], cov[:2, 2:], cov


def gaussian_discord(sigma, swap: bool = False, bits: bool = False) -> DiscordResult:
    """Gaussian quantum discord of a two-mode covariance matrix.

    The Gaussian measurement acts on the mode whose block is ``A`` (top-left,
    well 1); ``swap=True`` exchanges the wells so that well 2 is measured.
    Entropies are in nats unless ``bits`` is set.
    """
    cov = check_physical(sigma.cov if isinstance(sigma, GaussianState) else sigma)
    A, B, C, S = _blocks(cov, swap)
    i1, i2, i3, i4 = (float(np.linalg.det(m)) for m in (A, B, C, S))

    # symplectic spectrum from iOmega S; better conditioned than the invariant Lambda
    d_plus, d_minus = symplectic_eigenvalues(S)
    if d_minus < 1 - PHYSICAL_TOL:
        raise DomainError(f"unphysical partial spectrum: d- = {d_minus!r}")

    if (i4 - i1 * i2) ** 2 <= i3**2 * (i2 + i4) * (i1 + 1):
        branch = 1
        if abs(i1 - 1) < 1e-12 or not np.any(C):
            # product state: measuring one mode leaves the other untouched
            e_min = i2
        else:
            inner = max(0.0, i3**2 + (i1 - 1) * (i4 - i2))
            e_min = (2 * i3**2 + (i1 - 1) * (i4 - i2) + 2 * abs(i3) * math.sqrt(inner)) / (i1 - 1) ** 2
    else:
        branch = 2
        inner = max(0.0, i3**4 + (i4 - i1 * i2) ** 2 - 2 * i3**2 * (i1 * i2 + i4))
        e_min = (i1 * i2 - i3**2 + i4 - math.sqrt(inner)) / (2 * i1)

    def h(x):
        return entropy_function(max(x, 1.0), bits)

    value = h(math.sqrt(i1)) - h(d_minus) - h(d_plus) + h(math.sqrt(max(e_min, 0.0)))
    if -1e-12 < value < 0:
        value = 0.0
    return DiscordResult(value=value, i1=i1, i2=i2, i3=i3, i4=i4,
                         d_minus=d_minus, d_plus=d_plus, branch=branch)


def log_negativity(sigma) -> float:
    """Logarithmic negativity from the partially transposed covariance (p2 -> -p2).

    Values of the smallest transposed symplectic eigenvalue within the
    physicality tolerance of one count as separable.
    """
    cov = check_physical(sigma.cov if isinstance(sigma, GaussianState) else sigma)
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    pt = flip @ cov @ flip
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ pt)))
    nu_min = 0.5 * (ev[0] + ev[1])
    if nu_min >= 1 - PHYSICAL_TOL:
        return 0.0
    return -math.log(nu_min)
