"""Electronic model: parameters, basis, coupling operators, bath functions.

The junction is a two-site system (left dot L, right dot R) between two
wideband fermionic leads, with the inter-site coherence coupled to a bosonic
environment of Drude-Lorentz form.  After the Jordan-Wigner transformation the
electronic Hilbert space is spanned by {G, L, R, D} (empty, left-occupied,
right-occupied, doubly occupied); the lead coupling operators pick up a sign
on the G<->L transitions from the string operator.

All energies are in units of the reference inverse temperature (hbar = k_B = 1),
and the chemical-potential gauge is mu_L = 0, mu_R = V.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

LABELS_FULL = ("G", "L", "R", "D")


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the junction and its environments.

    Energies and rates are dimensionless (units of the reference inverse
    temperature).  ``Delta`` and ``V`` are derived accessors, not fields.
    """

    eps_L: float = 1.0
    Delta_: float = 2.0          # eps_R - eps_L
    U: float = 1e3
    mu_L: float = 0.0
    mu_R: float = 0.1            # = V in the mu_L = 0 gauge
    beta_L: float = 1.0
    beta_R: float = 1.0
    beta_ph: float = 1.0
    Gamma_L: float = 0.1
    Gamma_R: float = 0.1
    lam: float = 3.0             # reorganisation energy
    omega0: float = 100.0
    gamma: float = 100.0

    def __post_init__(self):
        if min(self.beta_L, self.beta_R, self.beta_ph) <= 0:
            raise ValueError("inverse temperatures must be positive")
        if self.Gamma_L < 0 or self.Gamma_R < 0:
            raise ValueError("lead rates must be non-negative")
        if self.lam < 0:
            raise ValueError("reorganisation energy must be non-negative")
        if self.omega0 <= 0 or self.gamma <= 0:
            raise ValueError("spectral density needs omega0 > 0 and gamma > 0")
        if self.U < 0:
            raise ValueError("Coulomb energy must be non-negative")

    @property
    def eps_R(self) -> float:
        return self.eps_L + self.Delta_

    @property
    def Delta(self) -> float:
        """Inter-site detuning eps_R - eps_L."""
        return self.Delta_

    @property
    def V(self) -> float:
        """Bias voltage mu_R - mu_L."""
        return self.mu_R - self.mu_L

    def with_bias(self, V: float) -> "ModelParams":
        """Return a copy at bias V (gauge mu_L fixed)."""
        return replace(self, mu_R=self.mu_L + V)

    def spectral_density(self) -> "SpectralDensity":
        return SpectralDensity(self.lam, self.omega0, self.gamma)


def regime_params(which: int, **overrides) -> ModelParams:
    """Convenience constructor for the two operating regimes.

    Regime 1 ("lead resource"): hot left lead, beta_L = 0.1, beta_R = beta_ph = 1.
    Regime 2 ("phonon resource"): hot phonons, beta_L = beta_R = 1, beta_ph = 0.1.
    """
    if which == 1:
        base = dict(beta_L=0.1, beta_R=1.0, beta_ph=1.0)
    elif which == 2:
        base = dict(beta_L=1.0, beta_R=1.0, beta_ph=0.1)
    else:
        raise ValueError("regime must be 1 or 2")
    base.update(overrides)
    return ModelParams(**base)


@dataclass(frozen=True)
class ElectronicBasis:
    """Ordered electronic basis {G, L, R, D}, optionally without |D>.

    With ``project_out_double`` the working space is {G, L, R}: the hard
    Coulomb-blockade limit where double occupancy is excluded exactly.
    """

    project_out_double: bool = False

    @property
    def labels(self) -> tuple:
        return LABELS_FULL[:3] if self.project_out_double else LABELS_FULL

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @property
    def electron_numbers(self) -> np.ndarray:
        """Electron count per basis state (G:0, L:1, R:1, D:2)."""
        n = {"G": 0, "L": 1, "R": 1, "D": 2}
        return np.array([n[s] for s in self.labels])


@dataclass
class Operator:
    """Dense complex matrix on a labeled Hilbert space."""

    matrix: np.ndarray
    basis: str
    hermitian: bool = False

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("operator matrix must be square")
        if self.hermitian:
            defect = np.max(np.abs(self.matrix - self.matrix.conj().T))
            if defect > 1e-12:
                raise ValueError(f"operator declared Hermitian has defect {defect:.2e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.basis)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def _ket_bra(b: ElectronicBasis, i: str, j: str) -> np.ndarray:
    m = np.zeros((b.dim, b.dim), dtype=complex)
    m[b.index(i), b.index(j)] = 1.0
    return m


def build_system_hamiltonian(p: ModelParams, b: ElectronicBasis) -> Operator:
    """Electronic Hamiltonian diag(0, eps_L, eps_R[, eps_L+eps_R+U])."""
    energies = [0.0, p.eps_L, p.eps_R]
    if not b.project_out_double:
        energies.append(p.eps_L + p.eps_R + p.U)
    return Operator(np.diag(np.array(energies, dtype=complex)), repr(b), hermitian=True)


def build_lead_coupling_ops(b: ElectronicBasis):
    """Lead coupling operators (A1, A2, A3, A4) after Jordan-Wigner.

    A1 = -|G><L| + |R><D| and A3 = |G><R| + |L><D| remove an electron from
    the system (into the left/right lead respectively); A2 = A1^dag and
    A4 = A3^dag add one.  The minus sign on the G<->L transition is the
    Jordan-Wigner string sign and is load-bearing for interference terms.
    """
    A1 = -_ket_bra(b, "G", "L")
    A3 = _ket_bra(b, "G", "R")
    if not b.project_out_double:
        A1 = A1 + _ket_bra(b, "R", "D")
        A3 = A3 + _ket_bra(b, "L", "D")
    tag = repr(b)
    A1 = Operator(A1, tag)
    A3 = Operator(A3, tag)
    return A1, A1.dag(), A3, A3.dag()


def build_phonon_coupling_op(b: ElectronicBasis) -> Operator:
    """Inter-site coherence operator s = |L><R| + |R><L| (phonon coupling)."""
    return Operator(_ket_bra(b, "L", "R") + _ket_bra(b, "R", "L"), repr(b), hermitian=True)


@dataclass(frozen=True)
class SpectralDensity:
    """Drude-Lorentz spectral density peaked near omega0 with width gamma.

    J(w) = (2/pi) * lam * w * omega0^2 * gamma / ((omega0^2 - w^2)^2 + gamma^2 w^2),
    normalized so that the reorganisation energy is lam = int_0^inf J(w)/w dw.
    """

    lam: float
    omega0: float
    gamma: float

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        num = 2.0 / np.pi * self.lam * w * self.omega0**2 * self.gamma
        den = (self.omega0**2 - w**2) ** 2 + (self.gamma * w) ** 2
        return num / den

    @property
    def slope0(self) -> float:
        """dJ/dw at w = 0; sets the finite emission rate at vanishing splitting."""
        return 2.0 / np.pi * self.lam * self.gamma / self.omega0**2


def drude_lorentz(sd: SpectralDensity, omega: float) -> float:
    """Evaluate J(omega) for omega >= 0 (domain error otherwise)."""
    if np.any(np.asarray(omega) < 0):
        raise ValueError("drude_lorentz is defined for omega >= 0")
    return sd(omega)


def fermi(beta: float, mu: float, omega):
    """Fermi-Dirac occupation f = 1/(exp(beta*(omega-mu)) + 1), overflow-safe."""
    return expit(-beta * (np.asarray(omega, dtype=float) - mu))


def bose(beta: float, omega):
    """Bose-Einstein occupation n = 1/(exp(beta*omega) - 1), overflow-safe.

    Negative omega returns the analytic continuation n(-w) = -(1 + n(w));
    omega = 0 is a domain error (the occupation diverges).
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w == 0):
        raise ValueError("bose occupation diverges at omega = 0")
    return 1.0 / np.expm1(beta * w)


def occupations(beta: float, mu: float, omega: float):
    """Return (fermi, bose) occupations at a transition energy."""
    return float(fermi(beta, mu, omega)), float(bose(beta, omega))
