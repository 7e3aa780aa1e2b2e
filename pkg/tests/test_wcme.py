"""Golden-rule content of the weak-coupling generator.

In this model every coupling operator connects states of different charge (or
the two singly occupied states), so the population dynamics closes on itself
and must reproduce an ordinary classical rate equation exactly: lead
transitions at the four addition energies with Fermi weights, phonon
absorption/emission across the inter-site splitting with Bose weights.  That
classical chain, built independently here, is the oracle for the full
non-secular generator.
"""
import numpy as np
import pytest

from nanojunction.model import (
    ElectronicBasis,
    ModelParams,
    bose,
    fermi,
    regime_params,
)
from nanojunction.superop import apply_terms, assemble, steady_state
from nanojunction.wcme import assemble_wcme


def _classical_rates(p):
    """Transition rates of the equivalent 4-state classical chain."""
    fL1 = fermi(p.beta_L, p.mu_L, p.eps_L)
    fL2 = fermi(p.beta_L, p.mu_L, p.eps_L + p.U)
    fR1 = fermi(p.beta_R, p.mu_R, p.eps_R)
    fR2 = fermi(p.beta_R, p.mu_R, p.eps_R + p.U)
    J = p.spectral_density()(p.Delta)
    n = bose(p.beta_ph, p.Delta)
    absorb = 2.0 * np.pi * J * n          # L -> R, quantum taken from the bath
    emit = 2.0 * np.pi * J * (n + 1.0)    # R -> L
    return fL1, fL2, fR1, fR2, absorb, emit


def _classical_generator(p):
    """Column-stochastic rate matrix on populations (G, L, R, D)."""
    fL1, fL2, fR1, fR2, absorb, emit = _classical_rates(p)
    G, L, R, D = range(4)
    K = np.zeros((4, 4))

    def move(i, j, rate):  # j -> i
        K[i, j] += rate
        K[j, j] -= rate

    move(L, G, p.Gamma_L * fL1)
    move(G, L, p.Gamma_L * (1.0 - fL1))
    move(R, G, p.Gamma_R * fR1)
    move(G, R, p.Gamma_R * (1.0 - fR1))
    move(D, R, p.Gamma_L * fL2)            # left lead works the R <-> D pair
    move(R, D, p.Gamma_L * (1.0 - fL2))
    move(D, L, p.Gamma_R * fR2)            # right lead works the L <-> D pair
    move(L, D, p.Gamma_R * (1.0 - fR2))
    move(R, L, absorb)
    move(L, R, emit)
    return K


def _classical_steady(K):
    A = np.vstack([K, np.ones(4)])
    b = np.zeros(5)
    b[4] = 1.0
    pop, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pop


# generic parameters that exercise every channel at comparable strength
P_MIXED = ModelParams(U=0.8, mu_R=0.35, beta_L=0.7, beta_R=1.3, beta_ph=0.9,
                      Gamma_L=0.13, Gamma_R=0.07, lam=2.0)


def test_populations_match_classical_chain():
    L = assemble_wcme(P_MIXED)
    ss = steady_state(L)
    pop = _classical_steady(_classical_generator(P_MIXED))
    assert np.allclose(np.diag(ss.rho).real, pop, atol=1e-12)


def test_counted_current_matches_classical_chain():
    from nanojunction.fcs import mean_current
    p = P_MIXED
    L = assemble_wcme(p)
    ss = steady_state(L)
    pop = _classical_steady(_classical_generator(p))
    _, _, fR1, fR2, _, _ = _classical_rates(p)
    iG, iL, iR, iD = range(4)
    expect = p.Gamma_R * ((1.0 - fR1) * pop[iR] + (1.0 - fR2) * pop[iD]
                          - fR1 * pop[iG] - fR2 * pop[iL])
    assert mean_current(L, ss) == pytest.approx(expect, rel=1e-10)
    assert mean_current(L, ss, "left") == pytest.approx(expect, rel=1e-10)


def _dissipator_action(L, baths, rho):
    return L.space.devec(apply_terms(L.bath(*baths), L.space, L.space.vec(rho)))


def test_lead_rates_with_and_without_interaction_shift():
    p = P_MIXED
    L = assemble_wcme(p)
    b = ElectronicBasis()
    G, Lx, R, D = (b.index(s) for s in "GLRD")
    fL1, fL2, _, _, _, _ = _classical_rates(p)
    proj = np.zeros((4, 4), dtype=complex)
    proj[G, G] = 1.0
    out = _dissipator_action(L, ("left",), proj)
    assert out[Lx, Lx].real == pytest.approx(p.Gamma_L * fL1, rel=1e-12)
    proj = np.zeros((4, 4), dtype=complex)
    proj[R, R] = 1.0
    out = _dissipator_action(L, ("left",), proj)
    assert out[D, D].real == pytest.approx(p.Gamma_L * fL2, rel=1e-12)
    # feeding |L><L| back: hole-weighted decay to G
    proj = np.zeros((4, 4), dtype=complex)
    proj[Lx, Lx] = 1.0
    out = _dissipator_action(L, ("left",), proj)
    assert out[G, G].real == pytest.approx(p.Gamma_L * (1.0 - fL1), rel=1e-12)


def test_phonon_rates_and_detailed_balance():
    p = P_MIXED
    L = assemble_wcme(p)
    b = ElectronicBasis()
    Lx, R = b.index("L"), b.index("R")
    *_, absorb, emit = _classical_rates(p)
    projR = np.zeros((4, 4), dtype=complex)
    projR[R, R] = 1.0
    projL = np.zeros((4, 4), dtype=complex)
    projL[Lx, Lx] = 1.0
    gain_L = _dissipator_action(L, ("phonon",), projR)[Lx, Lx].real
    gain_R = _dissipator_action(L, ("phonon",), projL)[R, R].real
    assert gain_L == pytest.approx(emit, rel=1e-12)
    assert gain_R == pytest.approx(absorb, rel=1e-12)
    assert gain_L / gain_R == pytest.approx(np.exp(p.beta_ph * p.Delta), rel=1e-12)


def test_decoupled_baths_leave_no_trace():
    p = ModelParams(Gamma_L=0.0, lam=0.0)
    L = assemble_wcme(p)
    assert np.max(np.abs(assemble(L.space, L.bath("left")))) == 0.0
    assert np.max(np.abs(assemble(L.space, L.bath("phonon")))) == 0.0
    assert np.max(np.abs(assemble(L.space, L.bath("right")))) > 0.0


def test_equilibrium_carries_no_current():
    from nanojunction.fcs import mean_current
    p = ModelParams(mu_R=0.0)  # all temperatures equal, no bias
    L = assemble_wcme(p)
    ss = steady_state(L)
    assert abs(mean_current(L, ss)) < 1e-13
    # and the state is Gibbs at the common temperature
    e = np.diag(L.hamiltonian).real
    w = np.exp(-1.0 * (e - e.min()))
    assert np.allclose(np.diag(ss.rho).real, w / w.sum(), atol=1e-10)


def test_filled_bands_pin_single_occupancy():
    p = ModelParams(mu_L=30.0, mu_R=30.0, beta_L=2.0, beta_R=2.0)
    L = assemble_wcme(p)
    ss = steady_state(L)
    pops = np.diag(ss.rho).real
    assert pops[0] < 1e-12          # empty state frozen out
    assert pops[3] < 1e-12          # U = 1e3 keeps D empty even at high mu
    assert pops[1] + pops[2] == pytest.approx(1.0, abs=1e-11)


def test_degenerate_transition_rejected():
    with pytest.raises(ValueError):
        assemble_wcme(ModelParams(Delta_=0.0))


def test_tag_partition_reassembles_generator():
    L = assemble_wcme(regime_params(2))
    total = np.zeros_like(L.matrix)
    for tag in ("none", "left_lead_plus", "left_lead_minus",
                "right_lead_plus", "right_lead_minus"):
        total += assemble(L.space, L.tagged(tag))
    assert np.allclose(total, L.matrix, atol=1e-14)
    for t in L.terms:
        if t.tag != "none":
            assert t.bath in ("left", "right")


def test_generator_preserves_hermiticity():
    L = assemble_wcme(P_MIXED)
    rng = np.random.default_rng(11)
    for _ in range(5):
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = L.space.devec(L.space.vec(x + x.conj().T))
        out = L.space.devec(L.matrix @ L.space.vec(rho))
        assert np.max(np.abs(out - out.conj().T)) < 1e-13
    assert L.trace_defect() < 1e-13


def test_projected_basis_supported():
    L = assemble_wcme(regime_params(2), ElectronicBasis(project_out_double=True))
    assert L.space.dim == 3 and L.space.n == 5
    ss = steady_state(L)
    assert np.trace(ss.rho).real == pytest.approx(1.0, abs=1e-12)
