"""Lead spectra, thermal occupations and unit conventions.

Natural units are used throughout: hbar = k_B = 1 and every energy is a
multiple of a reference energy Omega_0 = 1, so frequencies and energies are
interchangeable and currents come out in photons per unit time 1/Omega_0.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

# exp(-40) < 5e-18: Bose tails beyond 40 k_B T are dropped
TAIL_FACTOR = 40.0


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class EnergyGrid:
    """Truncated energy axis [0, cutoff] in natural units."""

    cutoff: float
    units: str = "natural"

    def __post_init__(self):
        if not (self.cutoff > 0 and math.isfinite(self.cutoff)):
            raise ConfigurationError(f"truncation energy must be finite and > 0, got {self.cutoff}")
        if self.units != "natural":
            raise ConfigurationError("only natural units (hbar = k_B = 1) are supported")

    def contains(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        return (eps >= 0.0) & (eps <= self.cutoff)


# ---------------------------------------------------------------------------
# density-of-states models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantDOS:
    rho0: float = 1.0

    def __post_init__(self):
        if self.rho0 < 0:
            raise ConfigurationError("density of states must be non-negative")

    @property
    def zero_order(self) -> float:
        """Order of the zero of rho(eps) at eps -> 0."""
        return 0.0

    def __call__(self, eps):
        return np.full(np.shape(eps), float(self.rho0))


@dataclass(frozen=True)
class PowerLawDOS:
    """rho(eps) = rho0 * eps**exponent with exponent in {0, 1, 2}.

    exponent = 2 is the three-dimensional reservoir that keeps the
    low-energy end of the current integrals finite.
    """

    rho0: float = 1.0
    exponent: int = 2

    def __post_init__(self):
        if self.rho0 < 0:
            raise ConfigurationError("density of states must be non-negative")
        if self.exponent not in (0, 1, 2):
            raise ConfigurationError(f"power-law exponent must be 0, 1 or 2, got {self.exponent}")

    @property
    def zero_order(self) -> float:
        return float(self.exponent)

    def __call__(self, eps):
        return self.rho0 * np.asarray(eps, dtype=float) ** self.exponent


@dataclass(frozen=True)
class TabulatedDOS:
    """Piecewise-linear density of states through (energies, values)."""

    energies: tuple
    values: tuple

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or e.shape != v.shape or e.size < 2:
            raise ConfigurationError("tabulated DOS needs matching 1-D energy/value arrays of length >= 2")
        if np.any(np.diff(e) <= 0):
            raise ConfigurationError("tabulated DOS energies must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ConfigurationError("tabulated DOS values must be finite and non-negative")
        object.__setattr__(self, "energies", tuple(e.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    @property
    def support(self) -> tuple[float, float]:
        return self.energies[0], self.energies[-1]

    @property
    def zero_order(self) -> float:
        # linear interpolation through (0, 0) vanishes linearly
        if self.energies[0] == 0.0 and self.values[0] == 0.0:
            return 1.0
        return 0.0

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        lo, hi = self.support
        if np.any((eps < lo) | (eps > hi)):
            raise DomainError(f"tabulated DOS queried outside its table support [{lo}, {hi}]")
        return np.interp(eps, self.energies, self.values)


# ---------------------------------------------------------------------------
# energy-dependent coupling amplitudes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantCoupling:
    value: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ConfigurationError("coupling amplitude must be finite")

    def __call__(self, eps):
        return np.full(np.shape(eps), float(self.value))


@dataclass(frozen=True)
class TabulatedCoupling:
    """Piecewise-linear coupling amplitude, held constant beyond the table ends."""

    energies: tuple
    values: tuple

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or e.shape != v.shape or e.size < 2:
            raise ConfigurationError("tabulated coupling needs matching 1-D arrays of length >= 2")
        if np.any(np.diff(e) <= 0):
            raise ConfigurationError("tabulated coupling energies must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("tabulated coupling values must be finite")
        object.__setattr__(self, "energies", tuple(e.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    def __call__(self, eps):
        return np.interp(np.asarray(eps, dtype=float), self.energies, self.values)


def coupling_knots(coupling) -> tuple:
    """Energies where a coupling model has kinks (for quadrature breakpoints)."""
    return tuple(getattr(coupling, "energies", ()))


# ---------------------------------------------------------------------------
# leads, baths, pump
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LeadSpectrum:
    """Spectral data of one semi-infinite photonic lead.

    Args:
        side: which lead this is.
        band_min, band_max: band edges; ``band_max`` may be ``math.inf``.
        dos: density-of-states model. Defaults to ``PowerLawDOS(1, 2)`` when
            the band touches zero and to ``ConstantDOS(1)`` otherwise.
        coupling: energy-dependent coupling amplitude lambda(eps).
        allow_ir_divergence: accept a DOS that does not vanish at eps -> 0 on
            a band starting at zero. Emits a warning; current integrals that
            reach eps = 0 will still refuse to run.
    """

    side: Side
    band_min: float
    band_max: float = math.inf
    dos: object = None
    coupling: object = field(default_factory=ConstantCoupling)
    allow_ir_divergence: bool = False

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        lo, hi = float(self.band_min), float(self.band_max)
        if not (0.0 <= lo < hi) or math.isnan(hi):
            raise ConfigurationError(f"band must satisfy 0 <= min < max, got [{lo}, {hi}]")
        object.__setattr__(self, "band_min", lo)
        object.__setattr__(self, "band_max", hi)
        if self.dos is None:
            object.__setattr__(self, "dos", PowerLawDOS(1.0, 2) if lo == 0.0 else ConstantDOS(1.0))
        if isinstance(self.dos, TabulatedDOS) and math.isinf(hi):
            raise ConfigurationError("a tabulated DOS needs a finite band")
        if lo == 0.0 and self.dos.zero_order < 1.0:
            if not self.allow_ir_divergence:
                raise ConfigurationError(
                    f"{self.side.value} band touches eps = 0 but its DOS does not vanish there; "
                    "use a power-law DOS with exponent >= 1 (default 2) or set allow_ir_divergence"
                )
            warnings.warn(
                f"{self.side.value} lead: infrared-divergent DOS accepted on request", RuntimeWarning, stacklevel=2
            )

    @property
    def band(self) -> tuple[float, float]:
        return self.band_min, self.band_max

    @property
    def ir_regularized(self) -> bool:
        return self.band_min > 0.0 or self.dos.zero_order >= 1.0

    def in_band(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        return (eps >= self.band_min) & (eps <= self.band_max)

    def density(self, eps) -> np.ndarray:
        """rho(eps), exactly zero outside the band."""
        eps = np.asarray(eps, dtype=float)
        inside = self.in_band(eps)
        out = np.zeros(eps.shape)
        if np.any(inside):
            out[inside] = self.dos(eps[inside])
        return out

    def coupling_at(self, eps) -> np.ndarray:
        """lambda(eps) inside the band, zero outside (never evaluated there)."""
        eps = np.asarray(eps, dtype=float)
        inside = self.in_band(eps)
        out = np.zeros(eps.shape)
        if np.any(inside):
            out[inside] = self.coupling(eps[inside])
        return out

    def knots(self) -> tuple:
        """Interior kinks of the DOS or coupling tables."""
        pts = set(getattr(self.dos, "energies", ())) | set(coupling_knots(self.coupling))
        return tuple(sorted(p for p in pts if self.band_min < p < self.band_max))


@dataclass(frozen=True)
class BathState:
    """Thermal reservoir; photons carry zero chemical potential."""

    temperature: float
    chemical_potential: float = 0.0

    def __post_init__(self):
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ConfigurationError(f"temperature must be finite and > 0, got {self.temperature}")
        if self.chemical_potential != 0.0:
            raise ConfigurationError("photon chemical potential is fixed to 0")


@dataclass(frozen=True)
class PumpDrive:
    frequency: float

    def __post_init__(self):
        if not (self.frequency >= 0 and math.isfinite(self.frequency)):
            raise ConfigurationError(f"pump frequency must be finite and >= 0, got {self.frequency}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def bose_occupation(eps, bath: BathState):
    """Bose-Einstein occupation 1/(exp((eps - mu)/T) - 1).

    Raises:
        DomainError: if any ``eps <= 0``; the occupation has a pole at zero.
    """
    eps_arr = np.asarray(eps, dtype=float)
    if np.any(~(eps_arr > 0.0)):
        raise DomainError("Bose occupation requires eps > 0 (pole at eps = mu = 0)")
    x = (eps_arr - bath.chemical_potential) / bath.temperature
    # exp(-x)/(1 - exp(-x)) never overflows for x > 0
    n = np.exp(-x) / -np.expm1(-x)
    return float(n) if np.ndim(eps) == 0 else n


def dos(eps, lead: LeadSpectrum):
    """Density of states of ``lead`` at ``eps``; zero outside the band."""
    out = lead.density(eps)
    return float(out) if np.ndim(eps) == 0 else out


def truncation_energy(leads, baths, pump: PumpDrive) -> EnergyGrid:
    """Upper cut for semi-infinite integrals: max(finite band edges, 40 T + w_p)."""
    edges = [e for lead in leads for e in lead.band if math.isfinite(e)]
    t_max = max(b.temperature for b in baths)
    return EnergyGrid(max(edges + [TAIL_FACTOR * t_max + pump.frequency]))
