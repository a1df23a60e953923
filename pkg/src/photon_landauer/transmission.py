"""Transmission kernels for the trivial scatterer and for a harmonic center.

Both kernels are vectorised callables ``kernel(eps_left, eps_right)`` that
broadcast over numpy arrays. The first argument is always the left-lead
energy and the second the right-lead energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigurationError, DomainError, NumericalError
from .spectra import ConstantCoupling, LeadSpectrum, Side

PREFACTOR = math.pi / 8.0
# beyond this amplification of rounding errors g is treated as singular
_SINGULAR_COND = 1e13


def _require_positive(*energies):
    for e in energies:
        if np.any(~(np.asarray(e, dtype=float) > 0.0)):
            raise DomainError("transmission functions need strictly positive energies")


# ---------------------------------------------------------------------------
# trivial scatterer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TabulatedPairCoupling:
    """Bilinear table lambda(eps_left, eps_right); clamped outside the grid."""

    left_energies: tuple
    right_energies: tuple
    values: tuple

    def __post_init__(self):
        e1 = np.asarray(self.left_energies, dtype=float)
        e2 = np.asarray(self.right_energies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (e1.size, e2.size) or e1.size < 2 or e2.size < 2:
            raise ConfigurationError("pair-coupling table must have shape (len(e1), len(e2)), both >= 2")
        if np.any(np.diff(e1) <= 0) or np.any(np.diff(e2) <= 0):
            raise ConfigurationError("pair-coupling grids must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("pair-coupling values must be finite")
        object.__setattr__(self, "left_energies", tuple(e1.tolist()))
        object.__setattr__(self, "right_energies", tuple(e2.tolist()))
        object.__setattr__(self, "values", tuple(map(tuple, v.tolist())))

    def __call__(self, e1, e2):
        g1 = np.asarray(self.left_energies)
        g2 = np.asarray(self.right_energies)
        interp = RegularGridInterpolator((g1, g2), np.asarray(self.values))
        x = np.clip(np.asarray(e1, dtype=float), g1[0], g1[-1])
        y = np.clip(np.asarray(e2, dtype=float), g2[0], g2[-1])
        x, y = np.broadcast_arrays(x, y)
        return interp(np.stack([x, y], axis=-1))


@dataclass(frozen=True)
class TrivialKernel:
    """T(e1, e2) = (pi/8) lambda^2(e1, e2) rho_L(e1) rho_R(e2) / (e1 e2).

    ``coupling`` selects lambda(e1, e2): ``None`` uses the separable product
    of the two leads' own coupling models, a number is a constant pair
    coupling and a ``TabulatedPairCoupling`` is a full 2-D table. ``scale``
    multiplies lambda.
    """

    left: LeadSpectrum
    right: LeadSpectrum
    coupling: object = None
    scale: float = 1.0

    def __post_init__(self):
        if self.left.side is not Side.LEFT or self.right.side is not Side.RIGHT:
            raise ConfigurationError("kernel needs a left and a right lead")
        if isinstance(self.coupling, (int, float)):
            object.__setattr__(self, "coupling", float(self.coupling))

    def pair_coupling(self, e1, e2):
        if self.coupling is None:
            lam = self.left.coupling_at(e1) * self.right.coupling_at(e2)
        elif isinstance(self.coupling, float):
            lam = np.full(np.broadcast_shapes(np.shape(e1), np.shape(e2)), self.coupling)
        else:
            lam = self.coupling(e1, e2)
        return self.scale * lam

    def scaled(self, s: float) -> "TrivialKernel":
        return replace(self, scale=self.scale * s)

    def resonances(self) -> tuple:
        return ()

    def knots(self) -> tuple:
        if isinstance(self.coupling, TabulatedPairCoupling):
            return self.left.knots() + tuple(self.coupling.left_energies), self.right.knots() + tuple(
                self.coupling.right_energies
            )
        return self.left.knots(), self.right.knots()

    def __call__(self, e1, e2):
        _require_positive(e1, e2)
        e1 = np.asarray(e1, dtype=float)
        e2 = np.asarray(e2, dtype=float)
        rho = self.left.density(e1) * self.right.density(e2)
        out = np.zeros(np.broadcast_shapes(e1.shape, e2.shape))
        live = np.broadcast_to(rho != 0.0, out.shape)
        if np.any(live):
            x = np.broadcast_to(e1, out.shape)[live]
            y = np.broadcast_to(e2, out.shape)[live]
            lam = self.pair_coupling(x, y)
            out[live] = PREFACTOR * lam**2 * np.broadcast_to(rho, out.shape)[live] / (x * y)
        return out


def transmission_trivial(e1, e2, left: LeadSpectrum, right: LeadSpectrum, coupling=None):
    """Trivial-scatterer transmission T(e1, e2); zero outside either band."""
    out = TrivialKernel(left, right, coupling)(e1, e2)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# harmonic center
# ---------------------------------------------------------------------------


def _as_coupling(c):
    if isinstance(c, (int, float)):
        return ConstantCoupling(float(c))
    return c


@dataclass(frozen=True)
class CenterModel:
    """Non-interacting center of ``n_c`` coupled oscillators.

    Args:
        spring_matrix: real symmetric positive-definite K_C (omega_gamma^2 on
            the diagonal, hoppings off the diagonal), displacement basis.
        left_coupling: n_c coupling models lambda_gamma(eps) to the left lead
            (numbers are promoted to constants).
        right_coupling: n_c coupling models to the right lead.
        eta: broadening of the bare retarded Green's function.
    """

    spring_matrix: tuple
    left_coupling: tuple
    right_coupling: tuple
    eta: float = 1e-6

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.spring_matrix, dtype=float))
        n = k.shape[0]
        if k.shape != (n, n) or not np.all(np.isfinite(k)):
            raise ConfigurationError("spring matrix must be a finite square matrix")
        if not np.allclose(k, k.T, rtol=0, atol=1e-12 * max(1.0, np.abs(k).max())):
            raise ConfigurationError("spring matrix must be symmetric")
        k = 0.5 * (k + k.T)
        if np.linalg.eigvalsh(k).min() <= 0:
            raise ConfigurationError("spring matrix must be positive definite (stable oscillators)")
        left = tuple(_as_coupling(c) for c in self.left_coupling)
        right = tuple(_as_coupling(c) for c in self.right_coupling)
        if len(left) != n or len(right) != n:
            raise ConfigurationError(f"need {n} left and {n} right coupling entries")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigurationError("broadening eta must be > 0")
        object.__setattr__(self, "spring_matrix", tuple(map(tuple, k.tolist())))
        object.__setattr__(self, "left_coupling", left)
        object.__setattr__(self, "right_coupling", right)

    @property
    def n_modes(self) -> int:
        return len(self.spring_matrix)

    @property
    def K(self) -> np.ndarray:
        return np.asarray(self.spring_matrix)

    def mode_frequencies(self) -> np.ndarray:
        return np.sqrt(np.linalg.eigvalsh(self.K))

    def coupling_vector(self, eps, which: Side) -> np.ndarray:
        """Couplings evaluated at ``eps``; shape ``eps.shape + (n_c,)``."""
        funcs = self.left_coupling if Side(which) is Side.LEFT else self.right_coupling
        eps = np.asarray(eps, dtype=float)
        return np.stack([np.broadcast_to(f(eps), eps.shape) for f in funcs], axis=-1)


def center_greens_retarded(omega, center: CenterModel, self_energy=None):
    """Bare retarded Green's function [(w + i eta)^2 I - K_C]^-1.

    ``omega`` may be an array; the result then has shape ``omega.shape +
    (n_c, n_c)``. An optional retarded ``self_energy`` of the same shape is
    subtracted from the inverse. The advanced function is the conjugate
    transpose of the result.

    Raises:
        NumericalError: if the matrix is singular in double precision, i.e.
            eta is too small for ``omega`` this close to a center resonance.
    """
    w = np.asarray(omega, dtype=float)
    n = center.n_modes
    z = (w + 1j * center.eta) ** 2
    a = z[..., None, None] * np.eye(n) - center.K
    if self_energy is not None:
        a = a - self_energy
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            g = np.linalg.inv(a)
            # rounding in z - K is ~ eps * max(|z|, |K|); relative error of g grows by |g| times that
            scale = np.maximum(np.abs(z), np.linalg.norm(center.K, 2))
            amplification = scale * np.linalg.norm(g, axis=(-2, -1))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"center Green's function singular at omega={omega}") from exc
    if not np.all(np.isfinite(g)) or not np.all(amplification <= _SINGULAR_COND):
        raise NumericalError("center Green's function numerically singular; increase eta or use dressed mode")
    return g


def lambda_matrix(eps, which: Side, lead: LeadSpectrum, center: CenterModel, scale: float = 1.0):
    """Level-width matrix rho(eps) lambda(eps) lambda(eps)^T / eps (rank <= 1)."""
    _require_positive(eps)
    eps = np.asarray(eps, dtype=float)
    lam = scale * center.coupling_vector(eps, which)
    rho = lead.density(eps)
    return (rho / eps)[..., None, None] * lam[..., :, None] * lam[..., None, :]


@dataclass(frozen=True)
class CenterKernel:
    """T_C(ea, eb) = (pi/8) Tr[g^r(eb) Lambda_R(eb) g^a(eb) Lambda_L(ea)].

    The center Green's function is evaluated at the right-lead energy for
    every transport direction. With ``dressed=True`` the dissipative parts of
    the lead self-energies (including the two pump sidebands of the left lead)
    are added to the bare function; their real parts are taken as already
    absorbed in the spring matrix.
    """

    left: LeadSpectrum
    right: LeadSpectrum
    center: CenterModel
    scale: float = 1.0
    dressed: bool = False
    pump_frequency: float = 0.0

    def __post_init__(self):
        if self.left.side is not Side.LEFT or self.right.side is not Side.RIGHT:
            raise ConfigurationError("kernel needs a left and a right lead")

    def scaled(self, s: float) -> "CenterKernel":
        return replace(self, scale=self.scale * s)

    def resonances(self) -> tuple:
        return tuple(self.center.mode_frequencies().tolist())

    def knots(self) -> tuple:
        return self.left.knots(), self.right.knots()

    def _lambda_left(self, eps):
        # Lambda_L at arbitrary (possibly non-positive) energies, zero there
        eps = np.asarray(eps, dtype=float)
        out = np.zeros(eps.shape + (self.center.n_modes,) * 2)
        ok = eps > 0
        if np.any(ok):
            out[ok] = lambda_matrix(eps[ok], Side.LEFT, self.left, self.center, self.scale)
        return out

    def self_energy(self, omega):
        """Dissipative retarded self-energy -i(pi/2)[Lambda_R(w) + (Lambda_L(w+wp) +- Lambda_L(|w-wp|))/4]."""
        w = np.asarray(omega, dtype=float)
        lam_r = lambda_matrix(w, Side.RIGHT, self.right, self.center, self.scale)
        wp = self.pump_frequency
        shifted = w - wp
        side = np.sign(shifted)[..., None, None] * self._lambda_left(np.abs(shifted))
        gamma = lam_r + 0.25 * (self._lambda_left(w + wp) + side)
        return -0.5j * math.pi * gamma

    def greens(self, omega):
        sigma = self.self_energy(omega) if self.dressed else None
        return center_greens_retarded(omega, self.center, sigma)

    def trace(self, ea, eb):
        """Complex trace Tr[g^r Lambda_R g^a Lambda_L] before taking the real part."""
        _require_positive(ea, eb)
        ea, eb = np.broadcast_arrays(np.asarray(ea, dtype=float), np.asarray(eb, dtype=float))
        out = np.zeros(ea.shape, dtype=complex)
        live = (self.left.density(ea) != 0.0) & (self.right.density(eb) != 0.0)
        if not np.any(live):
            return out
        x, y = ea[live], eb[live]
        g = self.greens(y)
        lam_r = lambda_matrix(y, Side.RIGHT, self.right, self.center, self.scale)
        lam_l = lambda_matrix(x, Side.LEFT, self.left, self.center, self.scale)
        ga = np.conj(np.swapaxes(g, -1, -2))
        prod = g @ lam_r @ ga
        out[live] = np.einsum("...ij,...ji->...", prod, lam_l)
        return out

    def __call__(self, ea, eb):
        return PREFACTOR * self.trace(ea, eb).real


def transmission_center(ea, eb, kernel: CenterKernel):
    """Center transmission T_C(ea, eb); zero outside either band."""
    out = kernel(ea, eb)
    return float(out) if np.ndim(out) == 0 else out
