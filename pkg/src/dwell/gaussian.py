"""Two-mode Gaussian states and symplectic algebra.

Quadratures are ordered as ``(x1, p1, x2, p2)`` with ``x = (a + a^dag)/sqrt(2)``
and ``p = i (a^dag - a)/sqrt(2)``, so the vacuum covariance matrix is the
identity and a thermal mode with occupation ``n`` has covariance
``(2n + 1) * I2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

#: Symplectic form on a single mode.
OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
#: Symplectic form on two modes, ``OMEGA1 (+) OMEGA1``.
OMEGA = np.kron(np.eye(2), OMEGA1)

SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10
# symplectic eigenvalues in (1 - HARD_TOL, 1 - PHYSICAL_TOL) are integration noise
PHYSICAL_TOL = 1e-9
HARD_TOL = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless model constants, frequencies in units of ``omega1``.

    Attributes:
        delta: bias, ``omega2 / omega1 = 1 + delta``.
        j: tunnelling rate.
        u: on-site self-interaction.
        gamma1, gamma2: damping rates of the two wells.
        nbar1, nbar2: thermal occupations of the two reservoirs.
    """

    delta: float = 0.0
    j: float = 0.0
    u: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    nbar1: float = 0.0
    nbar2: float = 0.0

    def __post_init__(self):
        for name in ("delta", "j", "u", "gamma1", "gamma2", "nbar1", "nbar2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("gamma1", "gamma2", "nbar1", "nbar2"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.delta <= -1:
            raise DomainError("delta must be > -1 (omega2 > 0)")

    @property
    def omega1(self) -> float:
        return 1.0

    @property
    def omega2(self) -> float:
        return 1.0 + self.delta

    def replace(self, **changes) -> ModelParams:
        fields = {name: getattr(self, name) for name in self.__dataclass_fields__}
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class GaussianState:
    """First moments and covariance matrix of a two-mode Gaussian state."""

    cov: np.ndarray
    displacement: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        disp = np.array(self.displacement, dtype=float)
        if cov.shape != (4, 4) or disp.shape != (4,):
            raise DomainError("expected a 4x4 covariance and a 4-vector displacement")
        if not np.all(np.isfinite(disp)):
            raise DomainError("displacement must be finite")
        cov.setflags(write=False)
        disp.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "displacement", disp)

    def is_physical(self, tol: float = PHYSICAL_TOL) -> bool:
        return is_physical(self.cov, tol)


def thermal_covariance(nbar1: float, nbar2: float) -> np.ndarray:
    """Covariance matrix of the product of two thermal modes."""
    if nbar1 < 0 or nbar2 < 0:
        raise DomainError("thermal occupations must be >= 0")
    v1, v2 = 2 * nbar1 + 1, 2 * nbar2 + 1
    return np.diag([v1, v1, v2, v2]).astype(float)


def rotation_matrix(omega: float, t: float) -> np.ndarray:
    """Single-mode phase rotation generated by ``omega * a^dag a`` over time t."""
    c, s = math.cos(omega * t), math.sin(omega * t)
    return np.array([[c, s], [-s, c]])


def mixing_matrix(theta: float) -> np.ndarray:
    """Two-mode mixing (beam-splitter) transformation ``T(theta)``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.kron(np.array([[c, s], [-s, c]]), np.eye(2))


def symplectic_residual(S: np.ndarray) -> float:
    """Max-norm of ``S^T Omega S - Omega``."""
    S = np.asarray(S, dtype=float)
    return float(np.max(np.abs(S.T @ OMEGA @ S - OMEGA)))


def is_symplectic(S: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    return np.shape(S) == (4, 4) and symplectic_residual(S) < tol


def check_symmetric(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4):
        raise DomainError(f"covariance must be 4x4, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise DomainError("covariance has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
        raise DomainError("covariance matrix is not symmetric")
    return cov


def symplectic_eigenvalues(cov: np.ndarray) -> tuple[float, float]:
    """Symplectic eigenvalues of a two-mode covariance matrix, largest first.

    These are the moduli of the eigenvalues of ``i Omega sigma``, which come in
    +/- pairs.
    """
    cov = check_symmetric(cov)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ cov)))
    # each modulus appears twice
    return float(0.5 * (ev[2] + ev[3])), float(0.5 * (ev[0] + ev[1]))


def is_physical(cov: np.ndarray, tol: float = PHYSICAL_TOL) -> bool:
    return symplectic_eigenvalues(cov)[1] >= 1 - tol


def check_physical(cov: np.ndarray, tol: float = HARD_TOL) -> np.ndarray:
    """Return ``cov`` as an array or raise if it violates the uncertainty principle.

    Symplectic eigenvalues slightly below one (down to ``1 - tol``) are accepted
    as integration round-off.
    """
    cov = check_symmetric(cov)
    nu_min = symplectic_eigenvalues(cov)[1]
    if nu_min < 1 - tol:
        raise DomainError(f"unphysical covariance: smallest symplectic eigenvalue {nu_min:.12g}")
    return cov


def apply_symplectic(S: np.ndarray, state: GaussianState) -> GaussianState:
    """Transform a Gaussian state by the symplectic map ``S``."""
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S):
        raise DomainError("transformation is not symplectic")
    return GaussianState(cov=S @ state.cov @ S.T, displacement=S @ state.displacement)


def mode_block(cov: np.ndarray, mode: int) -> np.ndarray:
    """2x2 reduced covariance of well ``mode`` (1 or 2)."""
    k = 2 * (mode - 1)
    return np.asarray(cov)[k:k + 2, k:k + 2]


def occupations(cov: np.ndarray, displacement=None) -> tuple[float, float]:
    """Mean boson numbers ``<a_j^dag a_j>`` of the two wells."""
    cov = np.asarray(cov)
    n1 = (cov[0, 0] + cov[1, 1]) / 4 - 0.5
    n2 = (cov[2, 2] + cov[3, 3]) / 4 - 0.5
    if displacement is not None:
        d = np.asarray(displacement)
        n1 += (d[0] ** 2 + d[1] ** 2) / 2
        n2 += (d[2] ** 2 + d[3] ** 2) / 2
    return float(n1), float(n2)


def upper_triangle(cov: np.ndarray) -> list[float]:
    """The 10 independent covariance entries, row-major upper triangle."""
    rows, cols = np.triu_indices(4)
    return [float(v) for v in np.asarray(cov)[rows, cols]]


COV_COLUMNS = [f"s{i + 1}{j + 1}" for i, j in zip(*np.triu_indices(4))]
