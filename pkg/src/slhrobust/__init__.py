"""Robust stability analysis of uncertain linear quantum stochastic networks.

Networks are described by SLH triples ``(S, L, H)``.  An uncertain network is
split into a nominal part and a perturbation, and robust mean-square
stability is certified by a small-gain test or a Lyapunov/Riccati
certificate.
"""

__version__ = "0.1.0"

from .doubled import (DoubledMatrix, HamiltonianSpec, SlhTriple, canonical_hamiltonian,
                      delta, flat, imag_quadratic, re_flat, series_product)
from .errors import (ConsistencyError, DimensionError, DomainError, InfeasibleError,
                     InvalidModelError, NumericalError, SlhError, ValidationError)
from .realization import (StateSpaceRealization, is_mean_square_stable, spectral_abscissa,
                          to_state_space)
from .robust import (LyapunovCertificate, MarginResult, instability_distance,
                     marginal_destabilization, minimize_zeta, smallgain_verdict,
                     synthesize_witness, verify_lyapunov_condition)
from .uncertainty import (DecompositionResult, UncertainModel, UncertaintySample,
                          additive_perturbation, decompose, eta_bound, perturbed_triple,
                          theta_scale)

__all__ = [
    "DoubledMatrix", "HamiltonianSpec", "SlhTriple", "canonical_hamiltonian", "delta",
    "flat", "imag_quadratic", "re_flat", "series_product",
    "ConsistencyError", "DimensionError", "DomainError", "InfeasibleError",
    "InvalidModelError", "NumericalError", "SlhError", "ValidationError",
    "StateSpaceRealization", "is_mean_square_stable", "spectral_abscissa", "to_state_space",
    "LyapunovCertificate", "MarginResult", "instability_distance", "marginal_destabilization",
    "minimize_zeta", "smallgain_verdict", "synthesize_witness", "verify_lyapunov_condition",
    "DecompositionResult", "UncertainModel", "UncertaintySample", "additive_perturbation",
    "decompose", "eta_bound", "perturbed_triple", "theta_scale", "cavity_fixture",
]


def cavity_fixture() -> str:
    """Path of the bundled three-channel cavity model."""
    from importlib.resources import files
    return str(files(__name__) / "data" / "cavity.slhnet")
