"""Superoperator algebra over column-stacked density matrices.

The generators built here conserve total electron number, so the steady state
and everything traced against it live on the charge-block-diagonal part of the
density matrix.  ``Space`` restricts vec(rho) to those blocks (dimension
sum_s m_s^2 over charge sectors of size m_s instead of d^2), which is what
keeps dense LU factorizations affordable at large reaction-coordinate
truncations.  A trivial single-sector ``Space`` recovers the full d^2 layout.

Superoperator terms are stored in factorized form, coef * (A . B), i.e.
rho -> coef * A @ rho @ B, and materialized blockwise via
vec(A rho B) = (B^T kron A) vec(rho) only when a dense matrix is needed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

TAGS = ("none", "right_lead_plus", "right_lead_minus", "left_lead_plus", "left_lead_minus")


class NonUniqueSteadyState(Exception):
    """The generator's stationary space is degenerate (no unique steady state)."""


class ConvergenceFailure(Exception):
    """A solve finished but its certificate failed the requested tolerance."""


class Space:
    """Charge-sector-restricted vectorization of d x d matrices.

    Parameters
    ----------
    numbers : array_like
        Conserved quantum number (electron count) per Hilbert basis index.
        Basis indices with equal number form a sector; the restricted space
        keeps exactly the same-sector blocks rho[S, S].
    """

    def __init__(self, numbers):
        numbers = np.asarray(numbers)
        self.dim = len(numbers)
        self.sectors = [np.flatnonzero(numbers == v) for v in np.unique(numbers)]
        self.offsets = []
        off = 0
        for s in self.sectors:
            self.offsets.append(off)
            off += len(s) ** 2
        self.n = off
        t = np.zeros(self.n)
        for s, off in zip(self.sectors, self.offsets):
            m = len(s)
            t[off : off + m * m : m + 1] = 1.0
        self.trace_vec = t

    @classmethod
    def full(cls, dim: int) -> "Space":
        """Unrestricted space (single sector): plain column stacking."""
        return cls(np.zeros(dim))

    def vec(self, rho: np.ndarray) -> np.ndarray:
        """Restrict and column-stack a d x d matrix."""
        out = np.empty(self.n, dtype=complex)
        for s, off in zip(self.sectors, self.offsets):
            m = len(s)
            out[off : off + m * m] = rho[np.ix_(s, s)].flatten("F")
        return out

    def devec(self, x: np.ndarray) -> np.ndarray:
        """Inverse of ``vec``; unrestricted blocks are zero."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        for s, off in zip(self.sectors, self.offsets):
            m = len(s)
            rho[np.ix_(s, s)] = x[off : off + m * m].reshape((m, m), order="F")
        return rho


@dataclass
class TaggedTerm:
    """One factorized superoperator term: rho -> coef * A @ rho @ B.

    ``left``/``right`` default to the identity.  ``tag`` marks counting
    status (which lead gains/loses an electron when this sandwich fires);
    ``bath`` records which environment the term came from, for energy-current
    bookkeeping.
    """

    coef: complex
    left: np.ndarray | None = None
    right: np.ndarray | None = None
    tag: str = "none"
    bath: str = "coherent"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = rho if self.left is None else self.left @ rho
        if self.right is not None:
            out = out @ self.right
        return self.coef * out

    def block(self, space: Space) -> np.ndarray:
        """Materialize the restricted dense superoperator of this term alone."""
        out = np.zeros((space.n, space.n), dtype=complex)
        _add_term(out, space, self)
        return out


def _add_term(L: np.ndarray, space: Space, term: TaggedTerm) -> None:
    d = space.dim
    eye = np.eye(d, dtype=complex)
    A = eye if term.left is None else term.left
    B = eye if term.right is None else term.right
    for sa, offa in zip(space.sectors, space.offsets):
        ma = len(sa)
        for sc, offc in zip(space.sectors, space.offsets):
            mc = len(sc)
            Ablk = A[np.ix_(sa, sc)]
            Bblk = B[np.ix_(sc, sa)]
            if not (Ablk.any() and Bblk.any()):
                continue
            L[offa : offa + ma * ma, offc : offc + mc * mc] += term.coef * np.kron(Bblk.T, Ablk)


def assemble(space: Space, terms) -> np.ndarray:
    """Sum the factorized terms into a dense restricted superoperator."""
    L = np.zeros((space.n, space.n), dtype=complex)
    for t in terms:
        _add_term(L, space, t)
    return L


def apply_terms(terms, space: Space, x: np.ndarray) -> np.ndarray:
    """Apply a list of factorized terms to a restricted vector (matrix-free)."""
    rho = space.devec(x)
    out = np.zeros_like(rho)
    for t in terms:
        out += t.apply(rho)
    return space.vec(out)


def coherent_terms(H: np.ndarray):
    """Factorized terms of the coherent part -i[H, .]."""
    return [TaggedTerm(-1j, left=H), TaggedTerm(1j, right=H)]


@dataclass
class Liouvillian:
    """Dense restricted generator plus its factorized term decomposition.

    ``hamiltonian`` is the operator whose commutator forms the coherent part
    (used again for energy-current traces); ``energy_op`` may override it for
    bookkeeping (additive methods trace energy against the bare electronic
    Hamiltonian).  The bordered LU factorization backing ``steady_state`` and
    the pseudo-inverse is built once on first use and cached.
    """

    space: Space
    terms: list
    basis: str = ""
    method: str = ""
    hamiltonian: np.ndarray | None = None
    energy_op: np.ndarray | None = None
    matrix: np.ndarray | None = None
    _lu: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.matrix is None:
            self.matrix = assemble(self.space, self.terms)
        if self.energy_op is None:
            self.energy_op = self.hamiltonian

    def tagged(self, *tags):
        return [t for t in self.terms if t.tag in tags]

    def bath(self, *baths):
        return [t for t in self.terms if t.bath in baths]

    def trace_defect(self) -> float:
        """Infinity norm of the trace functional acting from the left, 1^dag L."""
        return float(np.max(np.abs(self.space.trace_vec @ self.matrix)))

    def bordered_lu(self):
        """LU of [[L, t^dag], [t, 0]]; shared by steady state and pseudo-inverse."""
        if self._lu is None:
            n = self.space.n
            t = self.space.trace_vec
            A = np.zeros((n + 1, n + 1), dtype=complex)
            A[:n, :n] = self.matrix
            A[:n, n] = t
            A[n, :n] = t
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(A, overwrite_a=True, check_finite=False)
            du = np.abs(np.diag(lu))
            if du.min() <= (n + 1) * np.finfo(float).eps * du.max():
                raise NonUniqueSteadyState(
                    "stationary space is degenerate (singular bordered system)"
                )
            self._lu = (lu, piv)
        return self._lu


@dataclass
class SteadyState:
    """Normalized stationary density matrix with its solve certificate."""

    rho: np.ndarray
    vec: np.ndarray
    residual: float
    hermiticity_defect: float
    min_population: float


def steady_state(L: Liouvillian, tol: float = 1e-9) -> SteadyState:
    """Solve L vec(rho) = 0 with unit trace via the bordered system.

    Raises ``NonUniqueSteadyState`` when the stationary direction is
    degenerate and ``ConvergenceFailure`` when the residual certificate
    ``max|L vec(rho)|`` exceeds ``tol`` or populations go below -1e-3.
    """
    n = L.space.n
    lu = L.bordered_lu()
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[n] = 1.0
    x = sla.lu_solve(lu, rhs, check_finite=False)[:n]
    if not np.all(np.isfinite(x)):
        raise NonUniqueSteadyState("bordered solve returned non-finite entries")
    rho = L.space.devec(x)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-300:
        raise ConvergenceFailure("steady-state trace vanished")
    rho /= tr
    x = L.space.vec(rho)
    residual = float(np.max(np.abs(L.matrix @ x)))
    if residual > tol:
        raise ConvergenceFailure(f"steady-state residual {residual:.3e} > tol {tol:.1e}")
    pops = np.diag(rho).real
    minpop = float(pops.min())
    # second-order generators are not completely positive: negative
    # populations grow from ~1e-8 at weak coupling to ~1e-5 deep in the
    # blockade and are structural, not numerical.  Only an order-one dip
    # means the solve itself broke (the residual check above catches most
    # of those first).
    if minpop < -1e-3:
        raise ConvergenceFailure(f"steady-state population {minpop:.3e} below -1e-3")
    if minpop < -1e-10:
        warnings.warn(f"slightly negative steady-state population {minpop:.3e}")
    return SteadyState(rho=rho, vec=x, residual=residual,
                       hermiticity_defect=herm, min_population=minpop)


def restricted_pseudo_inverse_apply(L: Liouvillian, ss: SteadyState, y: np.ndarray) -> np.ndarray:
    """Apply R = Q L^{-1} Q to a restricted vector.

    Q projects out the stationary direction: Q y = y - vec(rho_ss) (1^dag y).
    The solve reuses the bordered LU; the trace row pins 1^dag (R y) = 0.
    """
    n = L.space.n
    t = L.space.trace_vec
    qy = y - ss.vec * (t @ y)
    rhs = np.empty(n + 1, dtype=complex)
    rhs[:n] = qy
    rhs[n] = 0.0
    x = sla.lu_solve(L.bordered_lu(), rhs, check_finite=False)[:n]
    if not np.all(np.isfinite(x)):
        raise ConvergenceFailure("pseudo-inverse solve returned non-finite entries")
    return x - ss.vec * (t @ x)
