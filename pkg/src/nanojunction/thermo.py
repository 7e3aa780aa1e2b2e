"""Energy flows, output power, efficiency and the stopping voltage.

Sign convention: every energy current is the flow *into* the system from the
named environment, IE_X = tr(E D_X rho_ss), so in steady state the three
contributions sum to zero.  ``E`` is the generator's bookkeeping Hamiltonian:
the full dynamical one for the non-additive method, the bare electronic one
for the additive methods (whose lead channels neither see nor dress the
mode, so their energy quanta are the bare addition energies; the phonon flow
is then fixed by energy balance).

The machine is judged as an engine: output power P = V * c1 against the heat
drawn from the hot resource (hot left lead in regime 1, hot phonons in
regime 2).  ``efficiency`` refuses to divide by a non-positive heat intake
-- that is not an engine, and pretending otherwise produces spurious
super-Carnot numbers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fcs import Cumulants, cumulants, mean_current
from .model import ElectronicBasis, ModelParams
from .superop import ConvergenceFailure, Liouvillian, SteadyState, apply_terms, steady_state


class NotAnEngine(Exception):
    """Efficiency is undefined: the device is not drawing heat from the hot bath."""


class BracketError(Exception):
    """The stopping-voltage bracket does not enclose a sign change."""


def bath_energy_current(L: Liouvillian, ss: SteadyState, bath: str) -> float:
    """Energy current into the system from one environment, tr(E D_bath rho)."""
    dv = apply_terms(L.bath(bath), L.space, ss.vec)
    drho = L.space.devec(dv)
    return float(np.trace(L.energy_op @ drho).real)


def energy_currents(L: Liouvillian, ss: SteadyState):
    """(IE_L, IE_R, IE_ph) with the method's bookkeeping.

    For the additive methods the lead channels carry sharp bare energies and
    the phonon intake follows from steady-state energy balance; the
    non-additive method gets all three from independent traces (their sum
    vanishing is then a real check, not an identity).
    """
    IE_L = bath_energy_current(L, ss, "left")
    IE_R = bath_energy_current(L, ss, "right")
    if L.method == "arcme":
        IE_ph = -(IE_L + IE_R)
    else:
        IE_ph = bath_energy_current(L, ss, "phonon")
    return IE_L, IE_R, IE_ph


def efficiency(P: float, Q_in: float) -> float:
    """Engine efficiency P / Q_in; raises ``NotAnEngine`` for Q_in <= 0."""
    if Q_in <= 0.0:
        raise NotAnEngine(f"heat intake from the hot resource is {Q_in:.3e} <= 0")
    return P / Q_in


def carnot_efficiency(p: ModelParams, regime: int) -> float:
    """1 - beta_hot/beta_cold for the regime's hot resource."""
    if regime == 1:
        return 1.0 - p.beta_L / p.beta_R
    if regime == 2:
        return 1.0 - p.beta_ph / p.beta_L
    raise ValueError("regime must be 1 or 2")


@dataclass
class TransportReport:
    """One operating point: cumulants, energy flows and engine figures.

    ``eta`` and ``upsilon`` are ``None`` where undefined (no heat intake /
    no mean current).  ``carnot_violated`` records eta > eta_carnot without
    erring: the additive method really does produce such points, and they
    are data, not exceptions.
    """

    params: ModelParams
    method: str
    regime: int
    M: int | None
    c1: float
    c2: float
    upsilon: float | None
    P: float
    IE_L: float
    IE_R: float
    IE_ph: float
    Q_in: float
    eta: float | None
    eta_carnot: float
    carnot_violated: bool
    converged: bool
    residual: float
    V_S: float | None = None


def _build(p: ModelParams, method: str, M: int | None,
           basis: ElectronicBasis | None) -> Liouvillian:
    from .rc import assemble_arcme, assemble_rcme
    from .wcme import assemble_wcme

    if method == "wcme":
        return assemble_wcme(p, basis)
    if method == "rcme":
        return assemble_rcme(p, M, basis)
    if method == "arcme":
        return assemble_arcme(p, M, basis)
    raise ValueError(f"unknown method {method!r}")


def transport_report(p: ModelParams, method: str, regime: int, M: int | None = None,
                     basis: ElectronicBasis | None = None,
                     converged: bool = True) -> TransportReport:
    """Solve one operating point and assemble the full report."""
    if method != "wcme" and M is None:
        raise ValueError("reaction-coordinate methods need a Fock truncation M")
    L = _build(p, method, M, basis)
    ss = steady_state(L)
    cum = cumulants(L, ss)
    IE_L, IE_R, IE_ph = energy_currents(L, ss)
    P = p.V * cum.c1
    Q_in = IE_L - p.mu_L * cum.c1 if regime == 1 else IE_ph
    if regime not in (1, 2):
        raise ValueError("regime must be 1 or 2")
    try:
        eta = efficiency(P, Q_in)
    except NotAnEngine:
        eta = None
    eta_c = carnot_efficiency(p, regime)
    violated = eta is not None and eta > eta_c + 1e-12
    return TransportReport(params=p, method=method, regime=regime,
                           M=None if method == "wcme" else M,
                           c1=cum.c1, c2=cum.c2, upsilon=cum.upsilon, P=P,
                           IE_L=IE_L, IE_R=IE_R, IE_ph=IE_ph, Q_in=Q_in,
                           eta=eta, eta_carnot=eta_c, carnot_violated=violated,
                           converged=converged, residual=ss.residual)


def bisect_root(f, a: float, b: float, tol: float = 1e-8, max_iter: int = 200) -> float:
    """Plain bisection for a decreasing sign change of f on [a, b]."""
    fa, fb = f(a), f(b)
    if fa <= 0.0:
        raise BracketError(f"f({a}) = {fa:.3e} is not positive at the lower bracket")
    if fb >= 0.0:
        raise BracketError(f"f({b}) = {fb:.3e} is not negative at the upper bracket")
    for _ in range(max_iter):
        if b - a <= tol:
            return 0.5 * (a + b)
        m = 0.5 * (a + b)
        fm = f(m)
        if fm > 0.0:
            a = m
        elif fm < 0.0:
            b = m
        else:
            return m
    raise ConvergenceFailure("bisection exceeded its iteration budget")


def default_bracket(p: ModelParams) -> float:
    """Generous upper bracket for the stopping voltage, 5 Delta eta_carnot."""
    beta_cold = max(p.beta_L, p.beta_R, p.beta_ph)
    beta_hot = min(p.beta_L, p.beta_R, p.beta_ph)
    return 5.0 * p.Delta * (beta_cold - beta_hot) / beta_cold


def stopping_voltage(p: ModelParams, method: str = "wcme", M: int | None = None,
                     basis: ElectronicBasis | None = None, tol: float = 1e-8,
                     v_max: float | None = None) -> float:
    """Bias where the mean current reverses, located by bisection to tol."""
    if v_max is None:
        v_max = default_bracket(p)

    def current_at(V: float) -> float:
        L = _build(p.with_bias(V), method, M, basis)
        return mean_current(L, steady_state(L))

    return bisect_root(current_at, 0.0, v_max, tol=tol)
