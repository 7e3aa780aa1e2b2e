"""Steady-state transport and counting statistics for a two-site nanojunction.

Three Born-Markov treatments of the same junction between two fermionic
leads and a phonon environment:

* ``assemble_wcme``   -- weak coupling to the phonons (golden-rule rates);
* ``assemble_rcme``   -- the phonon mode absorbed into the system as a
  reaction coordinate, leads filtered at the dressed frequencies;
* ``assemble_arcme``  -- same augmented space, but strictly additive lead
  dissipators built on the bare electronic problem.

On top of any of the three generators: steady states with solve
certificates, the first two counting cumulants at either lead, energy flows,
engine efficiency and the stopping voltage.
"""

__version__ = "0.1.0"

from .fcs import Cumulants, OracleError, counting_field_oracle, cumulants
from .fcs import mean_current, zero_frequency_noise
from .model import ElectronicBasis, ModelParams, SpectralDensity
from .model import bose, drude_lorentz, fermi, regime_params
from .rc import AugmentedSystem, LadderCertificate, RcParams
from .rc import assemble_arcme, assemble_rcme, build_augmented_hamiltonian
from .rc import converge_current, converge_in_levels, rc_map
from .superop import ConvergenceFailure, Liouvillian, NonUniqueSteadyState
from .superop import Space, SteadyState, TaggedTerm
from .superop import restricted_pseudo_inverse_apply, steady_state
from .thermo import BracketError, NotAnEngine, TransportReport
from .thermo import carnot_efficiency, efficiency, energy_currents
from .thermo import stopping_voltage, transport_report
from .wcme import RedfieldHalfTransform, assemble_wcme

__all__ = [
    "AugmentedSystem", "BracketError", "ConvergenceFailure", "Cumulants",
    "ElectronicBasis", "LadderCertificate", "Liouvillian", "ModelParams",
    "NonUniqueSteadyState", "NotAnEngine", "OracleError", "RcParams",
    "RedfieldHalfTransform", "Space", "SpectralDensity", "SteadyState",
    "TaggedTerm", "TransportReport", "assemble_arcme", "assemble_rcme",
    "assemble_wcme", "bose", "build_augmented_hamiltonian",
    "carnot_efficiency", "converge_current", "converge_in_levels",
    "counting_field_oracle", "cumulants", "drude_lorentz", "efficiency",
    "energy_currents", "fermi", "mean_current", "rc_map", "regime_params",
    "restricted_pseudo_inverse_apply", "steady_state", "stopping_voltage",
    "transport_report", "zero_frequency_noise",
]
