"""Pumped photon transport between two photonic leads.

Landauer-type cycle-averaged currents for leads coupled through a
parametrically modulated tunnelling term, split into a particle-conserving
(normal) and a pair-creation (anomalous) part, with a time-domain Gaussian
covariance simulation as an independent check.
"""

__version__ = "0.1.0"

from .current import (
    CurrentBreakdown,
    GoldenRuleRates,
    SideCurrent,
    SweepPoint,
    TransportProblem,
    current_left,
    current_right,
    golden_rule_rates,
    problem_at,
    sweep,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    NumericalError,
    PhotonLandauerError,
)
from .oracle import (
    CovarianceState,
    OracleReport,
    OracleSettings,
    OracleSystem,
    compare,
    initial_covariance,
    measure_current,
    propagate,
)
from .quadrature import QuadResult, integrate
from .spectra import (
    BathState,
    ConstantCoupling,
    ConstantDOS,
    EnergyGrid,
    LeadSpectrum,
    PowerLawDOS,
    PumpDrive,
    Side,
    TabulatedCoupling,
    TabulatedDOS,
    bose_occupation,
    dos,
    truncation_energy,
)
from .transmission import (
    CenterKernel,
    CenterModel,
    TabulatedPairCoupling,
    TrivialKernel,
    center_greens_retarded,
    lambda_matrix,
    transmission_center,
    transmission_trivial,
)

__all__ = [name for name in dir() if not name.startswith("_")]
