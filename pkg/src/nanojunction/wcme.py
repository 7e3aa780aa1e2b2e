"""Weak-coupling (Born-Markov, non-secular) master equation for the junction.

The dissipators are assembled in the energy eigenbasis of the system
Hamiltonian by elementwise filtering of the coupling operators: every matrix
element A_jk is weighted by the bath response at its own transition frequency
eta_jk = psi_j - psi_k.  For the diagonal electronic Hamiltonian used here,
that reproduces the golden-rule lead rates Gamma*f / Gamma*(1-f) at the
single-particle addition energies and the phonon rates pi*J(Delta)*n and
pi*J(Delta)*(n+1) across the inter-site splitting, while keeping the
non-secular coupling between coherences and populations.  Lamb shifts are
dropped throughout.

Lead sandwich terms are tagged with the direction of electron transfer so the
same term lists drive counting statistics downstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ElectronicBasis,
    ModelParams,
    build_lead_coupling_ops,
    build_phonon_coupling_op,
    build_system_hamiltonian,
    fermi,
)
from .superop import Liouvillian, Space, TaggedTerm, coherent_terms


@dataclass(frozen=True)
class RedfieldHalfTransform:
    """One-sided filtered coupling operator.

    ``chi`` carries the occupied-bath weight (quanta available to absorb),
    ``phi`` the complementary weight; both are the bare operator with its
    matrix elements scaled by the bath response at each transition frequency.
    """

    chi: np.ndarray
    phi: np.ndarray


def fermi_half(A: np.ndarray, evals: np.ndarray, beta: float, mu: float,
               remove: bool) -> RedfieldHalfTransform:
    """Filter a lead coupling operator with Fermi factors.

    ``remove=True`` treats A as removing an electron from the system (the
    quantum enters the lead at -eta_jk); ``remove=False`` as adding one.
    """
    eta = np.subtract.outer(evals, evals)
    occ = fermi(beta, mu, -eta if remove else eta)
    return RedfieldHalfTransform(chi=occ * A, phi=(1.0 - occ) * A)


def bose_half(A: np.ndarray, evals: np.ndarray, J, slope0: float,
              beta: float) -> RedfieldHalfTransform:
    """Filter a Hermitian coupling operator with bosonic response functions.

    ``chi`` picks up (pi/2) J(eta) coth(beta eta / 2) (even in eta, finite at
    eta -> 0 for the linear-in-frequency densities used here, where it limits
    to 2*slope0/beta), ``phi`` picks up (pi/2) J(eta) continued oddly.
    """
    eta = np.subtract.outer(evals, evals)
    jodd = np.sign(eta) * np.asarray(J(np.abs(eta)), dtype=float)
    x = 0.5 * beta * eta
    small = np.abs(x) < 1e-7
    K = np.where(small, 2.0 * slope0 / beta, jodd / np.tanh(np.where(small, 1.0, x)))
    return RedfieldHalfTransform(chi=(np.pi / 2) * K * A, phi=(np.pi / 2) * jodd * A)


def build_wcme_lead_dissipator(A_rem: np.ndarray, evals: np.ndarray, Gamma: float,
                               beta: float, mu: float, side: str) -> list:
    """Factorized Redfield dissipator of one wideband lead.

    ``A_rem`` removes an electron from the system into the lead; terms that
    move one electron into/out of the lead are tagged ``<side>_lead_plus`` /
    ``<side>_lead_minus``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    A_add = A_rem.conj().T
    rem = fermi_half(A_rem, evals, beta, mu, remove=True)
    add = fermi_half(A_add, evals, beta, mu, remove=False)
    g = 0.5 * Gamma
    plus, minus = f"{side}_lead_plus", f"{side}_lead_minus"
    return [
        TaggedTerm(-g, left=A_rem @ add.chi, bath=side),
        TaggedTerm(-g, right=add.phi @ A_rem, bath=side),
        TaggedTerm(-g, left=A_add @ rem.phi, bath=side),
        TaggedTerm(-g, right=rem.chi @ A_add, bath=side),
        TaggedTerm(g, left=A_rem, right=add.phi, tag=plus, bath=side),
        TaggedTerm(g, left=rem.phi, right=A_add, tag=plus, bath=side),
        TaggedTerm(g, left=add.chi, right=A_rem, tag=minus, bath=side),
        TaggedTerm(g, left=A_add, right=rem.chi, tag=minus, bath=side),
    ]


def bosonic_dissipator_terms(s: np.ndarray, half: RedfieldHalfTransform) -> list:
    """Factorized bosonic dissipator -[s, [chi, rho]] + [s, {phi, rho}]."""
    chi, phi = half.chi, half.phi
    return [
        TaggedTerm(-1.0, left=s @ chi, bath="phonon"),
        TaggedTerm(1.0, left=s, right=chi, bath="phonon"),
        TaggedTerm(1.0, left=chi, right=s, bath="phonon"),
        TaggedTerm(-1.0, right=chi @ s, bath="phonon"),
        TaggedTerm(1.0, left=s @ phi, bath="phonon"),
        TaggedTerm(1.0, left=s, right=phi, bath="phonon"),
        TaggedTerm(-1.0, left=phi, right=s, bath="phonon"),
        TaggedTerm(-1.0, right=phi @ s, bath="phonon"),
    ]


def build_wcme_phonon_dissipator(s: np.ndarray, evals: np.ndarray, J, slope0: float,
                                 beta: float) -> list:
    """Redfield dissipator of the bosonic environment with density J."""
    return bosonic_dissipator_terms(s, bose_half(s, evals, J, slope0, beta))


def assemble_wcme(p: ModelParams, basis: ElectronicBasis | None = None) -> Liouvillian:
    """Full weak-coupling generator: coherent part, both leads, phonons.

    Defaults to the four-state basis (double occupancy suppressed by the
    large U rather than projected out).  The phonon dissipator needs a
    non-degenerate inter-site transition, so Delta = 0 is rejected.
    """
    if basis is None:
        basis = ElectronicBasis(project_out_double=False)
    if p.Delta == 0.0:
        raise ValueError("inter-site transition is degenerate (Delta = 0)")
    H = build_system_hamiltonian(p, basis).matrix
    evals = np.diag(H).real
    A1, _, A3, _ = build_lead_coupling_ops(basis)
    s = build_phonon_coupling_op(basis).matrix
    sd = p.spectral_density()
    terms = coherent_terms(H)
    terms += build_wcme_lead_dissipator(A1.matrix, evals, p.Gamma_L, p.beta_L, p.mu_L, "left")
    terms += build_wcme_lead_dissipator(A3.matrix, evals, p.Gamma_R, p.beta_R, p.mu_R, "right")
    terms += build_wcme_phonon_dissipator(s, evals, sd, sd.slope0, p.beta_ph)
    space = Space(basis.electron_numbers)
    return Liouvillian(space=space, terms=terms, basis=",".join(basis.labels),
                       method="wcme", hamiltonian=H)
