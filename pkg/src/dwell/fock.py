"""Truncated Fock-space Lindblad engine for the two-site Bose-Hubbard dimer.

Basis states ``|n1, n2>`` are indexed by ``n1 * cutoff + n2`` (well 1 is the
slow index). Ladder operators are truncated at ``cutoff`` levels per well.

The master equation conserves the charge ``N_ket - N_bra`` of a density
matrix element (``N = n1 + n2``), so evolution only involves the charge
sectors present in the initial state. Thermal inputs live entirely in the
zero-charge sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, IntegrationError, TruncationError
from .gaussian import GaussianState, ModelParams
from .integrate import rk4_step, sample_count, substeps
from .thermo import FluxRecord

DEFAULT_CUTOFF = 25
TAIL_TOL = 1e-6
TRACE_TOL = 1e-9
MAX_CUTOFF = 60


@lru_cache(maxsize=8)
def _operators(cutoff: int):
    a = sp.diags(np.sqrt(np.arange(1, cutoff)), 1, format="csr")
    eye = sp.identity(cutoff, format="csr")
    a1 = sp.kron(a, eye, format="csr")
    a2 = sp.kron(eye, a, format="csr")
    levels = np.arange(cutoff)
    n1 = np.repeat(levels, cutoff).astype(float)
    n2 = np.tile(levels, cutoff).astype(float)
    return a1, a2, n1, n2


def _check_cutoff(cutoff: int):
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 2:
        raise DomainError(f"cutoff must be an integer >= 2, got {cutoff!r}")
    if cutoff > MAX_CUTOFF:
        raise DomainError(f"cutoff above {MAX_CUTOFF} is not supported")


def ladder_operators(cutoff: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Truncated annihilation operators of wells 1 and 2."""
    _check_cutoff(cutoff)
    a1, a2, _, _ = _operators(cutoff)
    return a1, a2


def number_diagonals(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    _check_cutoff(cutoff)
    _, _, n1, n2 = _operators(cutoff)
    return n1, n2


def hamiltonian(params: ModelParams, cutoff: int) -> sp.csr_matrix:
    """Free, self-interaction and tunnelling terms, zero-point energy included."""
    a1, a2, n1, n2 = _operators(cutoff)
    diag = (params.omega1 * (n1 + 0.5) + params.omega2 * (n2 + 0.5)
            + 0.5 * params.u * (n1 * (n1 - 1) + n2 * (n2 - 1)))
    hop = a1.T @ a2
    return (sp.diags(diag) - params.j * (hop + hop.T)).tocsr()


def local_hamiltonian_diagonal(params: ModelParams, cutoff: int, well: int) -> np.ndarray:
    """Diagonal of ``omega_j (n_j + 1/2)`` embedded in the two-well space."""
    n1, n2 = number_diagonals(cutoff)
    if well == 1:
        return params.omega1 * (n1 + 0.5)
    return params.omega2 * (n2 + 0.5)


@dataclass(frozen=True)
class FockDensityMatrix:
    """Two-well density matrix in the truncated number basis."""

    cutoff: int
    rho: np.ndarray

    def __post_init__(self):
        _check_cutoff(self.cutoff)
        dim = self.cutoff**2
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (dim, dim):
            raise DomainError(f"rho must be {dim}x{dim} for cutoff {self.cutoff}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.cutoff**2

    @property
    def trace_error(self) -> float:
        return float(abs(np.trace(self.rho) - 1))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    @property
    def populations(self) -> np.ndarray:
        """Joint number distribution as a ``cutoff x cutoff`` array indexed ``[n1, n2]``."""
        return np.real(np.diag(self.rho)).reshape(self.cutoff, self.cutoff)

    @property
    def tail_mass(self) -> float:
        """Population with either well in its highest retained level."""
        pops = self.populations
        top = self.cutoff - 1
        return float(pops[top, :].sum() + pops[:, top].sum() - pops[top, top])

    @property
    def truncation_safe(self) -> bool:
        return self.tail_mass < TAIL_TOL

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])

    def reduced(self, well: int) -> np.ndarray:
        """Reduced density matrix of one well."""
        r = self.rho.reshape(self.cutoff, self.cutoff, self.cutoff, self.cutoff)
        if well == 1:
            return np.einsum("ikjk->ij", r)
        return np.einsum("kikj->ij", r)

    def expect(self, op) -> complex:
        """``Tr[op rho]`` for a sparse or dense operator."""
        if sp.issparse(op):
            return complex(op.multiply(self.rho.T).sum())
        return complex(np.sum(np.asarray(op) * self.rho.T))

    def check(self):
        """Raise :class:`DomainError` if the state violates the density-matrix invariants."""
        if self.trace_error > TRACE_TOL:
            raise DomainError(f"trace deviates from 1 by {self.trace_error:.3g}")
        if self.hermiticity_error > 1e-10:
            raise DomainError("density matrix is not Hermitian")
        if self.min_eigenvalue() < -1e-8:
            raise DomainError("density matrix has a negative eigenvalue")


def thermal_populations(nbar: float, cutoff: int) -> np.ndarray:
    """Geometric populations with ratio ``nbar / (nbar + 1)``, normalised on the cutoff."""
    if nbar < 0:
        raise DomainError("occupation must be >= 0")
    q = nbar / (nbar + 1)
    p = q ** np.arange(cutoff)
    return p / p.sum()


def product_fock(p1: np.ndarray, p2: np.ndarray) -> FockDensityMatrix:
    """Diagonal product state from the populations of each well."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    if p1.shape != p2.shape:
        raise DomainError("population vectors must share the cutoff")
    return FockDensityMatrix(cutoff=len(p1), rho=np.diag(np.kron(p1, p2)))


def thermal_fock(nbar1: float, nbar2: float, cutoff: int = DEFAULT_CUTOFF) -> FockDensityMatrix:
    """Product of free-oscillator thermal states of the two wells."""
    _check_cutoff(cutoff)
    return product_fock(thermal_populations(nbar1, cutoff), thermal_populations(nbar2, cutoff))


class _PairSpace:
    """Density-matrix elements ``(i, j)`` whose charge lies in a given set."""

    def __init__(self, cutoff: int, charges):
        dim = cutoff**2
        n1, n2 = number_diagonals(cutoff)
        total = (n1 + n2).astype(int)
        charge = total[:, None] - total[None, :]
        mask = np.isin(charge, sorted(charges))
        self.cutoff = cutoff
        self.dim = dim
        self.flat = np.flatnonzero(mask.ravel())
        self.left = self.flat // dim
        self.right = self.flat % dim
        self.position = np.full(dim * dim, -1, dtype=np.int64)
        self.position[self.flat] = np.arange(len(self.flat))
        self.diagonal = self.position[np.arange(dim) * (dim + 1)]

    def __len__(self):
        return len(self.flat)

    def gather(self, rho: np.ndarray) -> np.ndarray:
        return np.asarray(rho).ravel()[self.flat]

    def scatter(self, vec: np.ndarray) -> np.ndarray:
        rho = np.zeros(self.dim * self.dim, dtype=complex)
        rho[self.flat] = vec
        return rho.reshape(self.dim, self.dim)


def _expand_columns(mat: sp.csc_matrix, cols: np.ndarray):
    """Nonzeros of ``mat`` in the given columns: (owner index, row, value)."""
    starts = mat.indptr[cols]
    counts = mat.indptr[cols + 1] - starts
    owner = np.repeat(np.arange(len(cols)), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    ptr = np.repeat(starts, counts) + offsets
    return owner, mat.indices[ptr], mat.data[ptr]


class Liouvillian:
    """Generator of the master equation for given parameters and cutoff.

    Calling the object on a dense density matrix returns its time derivative.
    :meth:`superoperator` gives the sparse matrix acting on the vectorised
    elements of selected charge sectors.
    """

    def __init__(self, params: ModelParams, cutoff: int):
        _check_cutoff(cutoff)
        self.params = params
        self.cutoff = cutoff
        self.H = hamiltonian(params, cutoff)
        a1, a2 = ladder_operators(cutoff)
        p = params
        jumps = [
            (p.gamma1 * (p.nbar1 + 1), a1),
            (p.gamma1 * p.nbar1, a1.T.tocsr()),
            (p.gamma2 * (p.nbar2 + 1), a2),
            (p.gamma2 * p.nbar2, a2.T.tocsr()),
        ]
        self.jumps = [(rate, op) for rate, op in jumps if rate > 0]
        # non-Hermitian effective Hamiltonian part: -i H - sum rate A^dag A / 2
        damp = sum((rate * (op.T @ op) for rate, op in self.jumps), sp.csr_matrix(self.H.shape))
        self._left = (-1j * self.H - 0.5 * damp).tocsr()
        self._right = (1j * self.H - 0.5 * damp).tocsr()

    def __call__(self, rho) -> np.ndarray:
        if isinstance(rho, FockDensityMatrix):
            rho = rho.rho
        rho = np.asarray(rho)
        out = self._left @ rho + (self._right.T @ rho.T).T
        for rate, op in self.jumps:
            out += rate * (op @ (op @ rho.conj().T).conj().T)
        return out

    def superoperator(self, charges=(0,)):
        """Sparse generator restricted to the given charge sectors.

        Returns ``(matrix, space)``; ``space`` maps between dense density
        matrices and the restricted vectors.
        """
        space = _PairSpace(self.cutoff, charges)
        rows, cols, vals = [], [], []
        dim = space.dim

        def add(row_left, row_right, col, val):
            pos = space.position[row_left * dim + row_right]
            if np.any(pos < 0):
                raise AssertionError("charge sector not closed under the generator")
            rows.append(pos)
            cols.append(col)
            vals.append(val)

        # M rho: element (i, j) <- M[i, k] rho[k, j]
        owner, r, v = _expand_columns(self._left.tocsc(), space.left)
        add(r, space.right[owner], owner, v)
        # rho M: element (i, j) <- rho[i, l] M[l, j]; row l of M is column l of M^T
        owner, r, v = _expand_columns(self._right.T.tocsc(), space.right)
        add(space.left[owner], r, owner, v)
        # A rho A^dag: element (i, j) <- A[i, k] rho[k, l] conj(A[j, l])
        for rate, op in self.jumps:
            csc = op.tocsc()
            o1, r1, v1 = _expand_columns(csc, space.left)
            o2, r2, v2 = _expand_columns(csc.conj(), space.right[o1])
            add(r1[o2], r2, o1[o2], rate * v1[o2] * v2)
        n = len(space)
        mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(n, n)).tocsr()
        return mat, space


def build_liouvillian(params: ModelParams, cutoff: int = DEFAULT_CUTOFF) -> Liouvillian:
    return Liouvillian(params, cutoff)


def _charges(rho: np.ndarray, cutoff: int) -> set[int]:
    n1, n2 = number_diagonals(cutoff)
    total = (n1 + n2).astype(int)
    rows, cols = np.nonzero(rho)
    return set(np.unique(total[rows] - total[cols]).tolist()) or {0}


def iter_fock(params: ModelParams, cutoff: int = DEFAULT_CUTOFF, t_max: float = 10.0,
              dt_out: float = 0.1, initial: FockDensityMatrix | None = None,
              method: str = "rk4", step: float = 1e-3, strict: bool = False):
    """Yield ``(t, FockDensityMatrix)`` every ``dt_out`` up to ``t_max``.

    ``method="rk4"`` integrates with fixed-step classical RK4 of size at most
    ``step``; ``method="expm"`` uses the dense propagator of one output
    interval and is limited to cutoffs of 12 or less. With ``strict`` a
    :class:`TruncationError` is raised as soon as a sample's tail mass reaches
    the tolerance; otherwise the flag is carried by each sample's
    ``truncation_safe``.
    """
    if t_max <= 0 or dt_out <= 0:
        raise DomainError("t_max and dt_out must be positive")
    state = thermal_fock(params.nbar1, params.nbar2, cutoff) if initial is None else initial
    if state.cutoff != cutoff:
        raise DomainError("initial state cutoff does not match")
    gen, space = build_liouvillian(params, cutoff).superoperator(_charges(state.rho, cutoff))
    vec = space.gather(state.rho)

    if method == "rk4":
        n, h = substeps(dt_out, step)

        def advance(v):
            for _ in range(n):
                v = rk4_step(gen.dot, v, h)
            return v
    elif method == "expm":
        if cutoff > 12:
            raise DomainError("dense propagator is limited to cutoff <= 12")
        prop = scipy.linalg.expm(gen.toarray() * dt_out)

        def advance(v):
            return prop @ v
    else:
        raise DomainError(f"unknown method {method!r}")

    for k in range(sample_count(t_max, dt_out)):
        t = k * dt_out
        if k:
            vec = advance(vec)
            if not np.all(np.isfinite(vec)):
                raise IntegrationError("non-finite density matrix", t)
            sample = FockDensityMatrix(cutoff, space.scatter(vec))
        else:
            sample = state
        if sample.trace_error > TRACE_TOL:
            raise IntegrationError(f"trace drifted by {sample.trace_error:.3g}", t)
        if strict and not sample.truncation_safe:
            raise TruncationError(f"tail mass {sample.tail_mass:.3g} exceeds {TAIL_TOL:g}", t)
        yield t, sample


def evolve_fock(params: ModelParams, cutoff: int = DEFAULT_CUTOFF, t_max: float = 10.0,
                dt_out: float = 0.1, **kwargs) -> list[tuple[float, FockDensityMatrix]]:
    """List form of :func:`iter_fock`."""
    return list(iter_fock(params, cutoff, t_max, dt_out, **kwargs))


def fock_steady_state(params: ModelParams, cutoff: int = DEFAULT_CUTOFF) -> FockDensityMatrix:
    """Stationary state in the zero-charge sector by a sparse direct solve."""
    gen, space = build_liouvillian(params, cutoff).superoperator((0,))
    n = len(space)
    # the diagonal rows sum to zero, so row 0 (element (0, 0)) is replaced by the trace condition
    keep = np.ones(n)
    keep[space.diagonal[0]] = 0.0
    trace_row = sp.coo_matrix((np.ones(len(space.diagonal)),
                               (np.full(len(space.diagonal), space.diagonal[0]), space.diagonal)),
                              shape=(n, n))
    system = (sp.diags(keep) @ gen + trace_row).tocsc()
    rhs = np.zeros(n, dtype=complex)
    rhs[space.diagonal[0]] = 1.0
    vec = spla.spsolve(system, rhs)
    rho = space.scatter(vec)
    return FockDensityMatrix(cutoff, 0.5 * (rho + rho.conj().T))


def fock_occupations(state: FockDensityMatrix) -> tuple[float, float]:
    n1, n2 = number_diagonals(state.cutoff)
    pops = np.real(np.diag(state.rho))
    return float(pops @ n1), float(pops @ n2)


def extract_covariance(state: FockDensityMatrix, strict: bool = False) -> GaussianState:
    """First and second quadrature moments of an arbitrary truncated state.

    Moments are assembled from ``<a_j>``, ``<a_j^dag a_k>`` and ``<a_j a_k>``
    with the canonical commutator applied analytically, so the top truncated
    level does not bias the symmetrised products.
    """
    if strict and not state.truncation_safe:
        raise TruncationError(f"tail mass {state.tail_mass:.3g} exceeds {TAIL_TOL:g}", math.nan)
    ops = ladder_operators(state.cutoff)
    alpha = np.array([state.expect(a) for a in ops])
    N = np.array([[state.expect(aj.T @ ak) for ak in ops] for aj in ops])
    M = np.array([[state.expect(aj @ ak) for ak in ops] for aj in ops])
    disp = np.sqrt(2) * np.array([alpha[0].real, alpha[0].imag, alpha[1].real, alpha[1].imag])
    cov = np.empty((4, 4))
    for j in range(2):
        for k in range(2):
            delta = 1.0 if j == k else 0.0
            xx = 2 * M[j, k].real + 2 * N[j, k].real + delta
            pp = -2 * M[j, k].real + 2 * N[j, k].real + delta
            xp = 2 * N[j, k].imag + 2 * M[j, k].imag
            cov[2 * j, 2 * k] = xx
            cov[2 * j + 1, 2 * k + 1] = pp
            cov[2 * j, 2 * k + 1] = xp
            cov[2 * k + 1, 2 * j] = xp
    cov -= 2 * np.outer(disp, disp)
    return GaussianState(cov=0.5 * (cov + cov.T), displacement=disp)


def _charge_blocks(state: FockDensityMatrix):
    n1, n2 = number_diagonals(state.cutoff)
    total = (n1 + n2).astype(int)
    groups = [np.flatnonzero(total == n) for n in range(total.max() + 1)]
    return groups


def _is_block_diagonal(state: FockDensityMatrix, groups) -> bool:
    inside = sum(np.abs(state.rho[np.ix_(g, g)]).sum() for g in groups)
    return np.abs(state.rho).sum() - inside == 0.0


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fock_uhlmann_fidelity(rho1: FockDensityMatrix, rho2: FockDensityMatrix) -> float:
    """Uhlmann fidelity ``(Tr |sqrt(rho1) sqrt(rho2)|)^2`` from Hermitian eigendecompositions."""
    if rho1.cutoff != rho2.cutoff:
        raise DomainError("states have different cutoffs")
    groups = _charge_blocks(rho1)
    if _is_block_diagonal(rho1, groups) and _is_block_diagonal(rho2, groups):
        pairs = [(rho1.rho[np.ix_(g, g)], rho2.rho[np.ix_(g, g)]) for g in groups]
    else:
        pairs = [(rho1.rho, rho2.rho)]
    total = 0.0
    for r1, r2 in pairs:
        total += scipy.linalg.svdvals(_sqrtm_psd(r1) @ _sqrtm_psd(r2)).sum()
    return float(min(1.0, total**2))


def fluxes_fock(traj, params: ModelParams) -> list[FluxRecord]:
    """Heat fluxes along a Fock trajectory, with ``d rho/dt`` from the generator."""
    records = []
    liouv = None
    for t, state in traj:
        if liouv is None:
            liouv = build_liouvillian(params, state.cutoff)
            h1 = local_hamiltonian_diagonal(params, state.cutoff, 1)
            h2 = local_hamiltonian_diagonal(params, state.cutoff, 2)
        rate = liouv(state.rho)
        drate = np.real(np.diag(rate))
        records.append(FluxRecord(
            t=float(t),
            qdot1=float(h1 @ drate),
            qdot2=float(h2 @ drate),
            qdot_tot=float(np.real(liouv.H.multiply(rate.T).sum())),
            q_tot=float(np.real(state.expect(liouv.H))),
        ))
    return records
