"""Cooperative relay beamforming from second-order channel statistics.

Solvers for destination-SNR maximization in amplify-and-forward relay
networks under either a joint source+relay power budget or per-relay
power caps, driven entirely by the channel covariance triple (D, R, Q).
"""

from .channel import (BeamformingSolution, ChannelStats, RicianParams,
                      build_stats, monte_carlo_stats, powers, snr)
from .errors import (ConvergenceError, DegenerateSpectrumError, DispatchError,
                     InputError, ModelError, RelayBeamError, ScopeError,
                     SingularityError)
from .linalg import (EigenDecomposition, hermitian, hermitian_eig, is_psd,
                     psd_inv_sqrt)
from .problems import IndivPowerProblem, TotalPowerProblem
from .sdp import (CertificateReport, SdpProblem, SdpSolution,
                  dual_certificate_residuals, solve_relaxation)
from .trace import SolverTrace

__all__ = [
    "BeamformingSolution", "ChannelStats", "RicianParams", "build_stats",
    "monte_carlo_stats", "powers", "snr",
    "ConvergenceError", "DegenerateSpectrumError", "DispatchError",
    "InputError", "ModelError", "RelayBeamError", "ScopeError",
    "SingularityError",
    "EigenDecomposition", "hermitian", "hermitian_eig", "is_psd",
    "psd_inv_sqrt",
    "IndivPowerProblem", "TotalPowerProblem",
    "CertificateReport", "SdpProblem", "SdpSolution",
    "dual_certificate_residuals", "solve_relaxation",
    "SolverTrace",
]

__version__ = "0.1.0"
