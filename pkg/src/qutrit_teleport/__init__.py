"""Teleportation fidelity bounds for the Horodecki bound-entangled qutrit family."""

from .linalg_core import Spectrum, eig_hermitian, gell_mann_basis, kron
from .schmidt_rep import SchmidtComponents, adjoint_orbit, decompose, reconstruct
from .state_zoo import (
    MeasurementProtocol,
    PureQutritState,
    hat,
    horodecki_rho,
    interchange,
    partial_transpose,
    pure_state,
    sample_haar,
    standard_protocol,
)
from .telefidelity import (
    BoundReport,
    FidelityEstimate,
    Verdict,
    classical_fidelity,
    closed_form_fidelity,
    fidelity_bound,
    mc_teleport_fidelity,
    rho_tilde,
)

__version__ = "0.1.0"
