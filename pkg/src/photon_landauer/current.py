"""Cycle-averaged photon currents and their normal/anomalous decomposition.

For a left-lead energy x and a right-lead energy y the pumped coupling allows
the transitions y = x + w_p, y = x - w_p (transport, photons cross) and
x + y = w_p (pair creation/annihilation, one photon into each lead). The right
current collects

    term1 = int T(e, e - w_p) [n_L(e) - n_R(e - w_p)]          e >= w_p
    term2 = int T(e - w_p, e) [n_L(e - w_p) - n_R(e)]          e >= w_p
    term3 = int T(e, w_p - e) [n_L(e) + n_R(w_p - e) + 1]      0 <= e <= w_p

and the left current is the same construction with the leads' roles swapped.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigurationError, ConvergenceError, PhotonLandauerError
from .quadrature import ZERO, QuadResult, integrate
from .spectra import BathState, PumpDrive, bose_occupation, truncation_energy
from .transmission import CenterKernel

THREADS_ENV = "PHOTON_LANDAUER_THREADS"
SWEEP_AXES = ("pump_frequency", "temperature", "coupling_scale")


@dataclass(frozen=True)
class TransportProblem:
    kernel: object
    left_bath: BathState
    right_bath: BathState
    pump: PumpDrive
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 500

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ConfigurationError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise ConfigurationError("max_subdivisions must be >= 1")

    @property
    def left(self):
        return self.kernel.left

    @property
    def right(self):
        return self.kernel.right

    def cutoff(self) -> float:
        return truncation_energy((self.left, self.right), (self.left_bath, self.right_bath), self.pump).cutoff


@dataclass(frozen=True)
class SideCurrent:
    """Current into one lead with its three contributions."""

    J: float
    terms: tuple
    errors: tuple
    converged: bool

    @property
    def error(self) -> float:
        return float(sum(self.errors))


@dataclass(frozen=True)
class GoldenRuleRates:
    R_c: float
    R_a: float
    R_c_error: float = 0.0
    R_a_error: float = 0.0
    converged: bool = True

    def __iter__(self):
        return iter((self.R_c, self.R_a))


@dataclass(frozen=True)
class CurrentBreakdown:
    J_R: float
    J_L: float
    J_N: float
    J_A: float
    term1: float
    term2: float
    term3: float
    R_c: float
    R_a: float
    term1_error: float
    term2_error: float
    term3_error: float
    J_R_error: float
    J_L_error: float
    R_c_error: float
    R_a_error: float
    converged: bool = True

    def as_record(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ---------------------------------------------------------------------------
# integration supports
# ---------------------------------------------------------------------------


def _intersect(*intervals):
    lo = max(i[0] for i in intervals)
    hi = min(i[1] for i in intervals)
    return lo, hi


def _mapped(points, shift, sign):
    """Values of e solving  sign * e + shift = p  for each p."""
    return [(p - shift) / sign for p in points]


class _Term:
    """One integral of the current formula.

    The left-lead energy is ``x(e) = sx * e + cx`` and the right-lead energy
    ``y(e) = sy * e + cy``; ``occupation(nl, nr)`` combines the two Bose
    factors.
    """

    def __init__(self, problem, sx, cx, sy, cy, occupation, e_range):
        self.p = problem
        self.sx, self.cx, self.sy, self.cy = sx, cx, sy, cy
        self.occupation = occupation
        left, right = problem.left, problem.right
        self.cut = problem.cutoff()
        # band intervals pulled back onto the integration variable
        bx = sorted(_mapped(left.band, cx, sx))
        by = sorted(_mapped(right.band, cy, sy))
        lo, hi = _intersect(e_range, bx, by)
        self.clipped = hi > self.cut
        self.lo, self.hi = lo, min(hi, self.cut)

    def energies(self, e):
        return self.sx * e + self.cx, self.sy * e + self.cy

    def __call__(self, e):
        x, y = self.energies(e)
        t = self.p.kernel(x, y)
        out = np.zeros_like(e)
        live = t != 0.0
        if np.any(live):
            nl = bose_occupation(x[live], self.p.left_bath)
            nr = bose_occupation(y[live], self.p.right_bath)
            out[live] = t[live] * self.occupation(nl, nr)
        return out

    def breakpoints(self):
        kx, ky = self.p.kernel.knots()
        pts = _mapped(kx, self.cx, self.sx) + _mapped(ky, self.cy, self.sy)
        pts += _mapped(self.p.kernel.resonances(), self.cy, self.sy)
        return [q for q in pts if self.lo < q < self.hi]

    def touches_zero(self):
        x, y = self.energies(np.array([self.lo, self.hi]))
        return bool(np.any(np.isclose(np.concatenate([x, y]), 0.0, atol=0.0)))

    def _check_infrared(self):
        width = self.hi - self.lo
        for end, inward in ((self.lo, 1.0), (self.hi, -1.0)):
            x, y = self.energies(np.array([end]))
            at_zero = [lead for lead, v in ((self.p.left, x[0]), (self.p.right, y[0])) if v == 0.0]
            if not at_zero:
                continue
            if not all(lead.ir_regularized for lead in at_zero):
                raise ConfigurationError(
                    "integration support reaches eps = 0 on a lead without infrared regularisation"
                )
            probe = end + inward * width * np.array([1e-4, 1e-7, 1e-10])
            vals = np.abs(self(probe))
            if vals[2] > 1e2 * vals[0] + 1e-300:
                raise ConfigurationError("integrand diverges at eps -> 0; the lead DOS must vanish faster")

    def integrate(self) -> QuadResult:
        if not self.hi > self.lo:
            return ZERO
        if self.touches_zero():
            self._check_infrared()
        res = integrate(
            self,
            self.lo,
            self.hi,
            breakpoints=self.breakpoints(),
            abs_tol=self.p.abs_tol,
            rel_tol=self.p.rel_tol,
            limit=self.p.max_subdivisions,
        )
        if self.clipped:
            # Bose tail beyond the truncation energy, bounded by decay over ~T
            t_max = max(self.p.left_bath.temperature, self.p.right_bath.temperature)
            tail = 2.0 * t_max * float(abs(self(np.array([self.cut]))[0]))
            res = replace(res, error=res.error + tail)
        return res


def _right_terms(p):
    wp = p.pump.frequency
    inf = math.inf
    return (
        _Term(p, 1.0, 0.0, 1.0, -wp, lambda nl, nr: nl - nr, (wp, inf)),
        _Term(p, 1.0, -wp, 1.0, 0.0, lambda nl, nr: nl - nr, (wp, inf)),
        _Term(p, 1.0, 0.0, -1.0, wp, lambda nl, nr: nl + nr + 1.0, (0.0, wp)),
    )


def _left_terms(p):
    # integration variable is the first-listed energy of the mirrored formula
    wp = p.pump.frequency
    inf = math.inf
    return (
        _Term(p, 1.0, -wp, 1.0, 0.0, lambda nl, nr: nr - nl, (wp, inf)),
        _Term(p, 1.0, 0.0, 1.0, -wp, lambda nl, nr: nr - nl, (wp, inf)),
        _Term(p, -1.0, wp, 1.0, 0.0, lambda nl, nr: nr + nl + 1.0, (0.0, wp)),
    )


def _side(terms) -> SideCurrent:
    results = [t.integrate() for t in terms]
    values = tuple(r.value for r in results)
    return SideCurrent(
        J=float(sum(values)),
        terms=values,
        errors=tuple(r.error for r in results),
        converged=all(r.converged for r in results),
    )


def _raise_if_unconverged(result, what):
    if not result.converged:
        raise ConvergenceError(f"{what}: quadrature did not reach the requested tolerance", best=result)
    return result


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def right_side(p: TransportProblem) -> SideCurrent:
    """The three right-lead integrals without rates or the left current."""
    return _side(_right_terms(p))


def current_left(p: TransportProblem) -> SideCurrent:
    """Cycle-averaged current into the left lead (mirror of the right formula).

    Raises:
        ConvergenceError: carrying the unconverged ``SideCurrent`` as ``best``.
    """
    return _raise_if_unconverged(_side(_left_terms(p)), "left current")


def golden_rule_rates(p: TransportProblem) -> GoldenRuleRates:
    """Pair creation and annihilation rates (R_c, R_a) from the golden rule."""
    wp = p.pump.frequency
    creation = _Term(p, 1.0, 0.0, -1.0, wp, lambda nl, nr: (nl + 1.0) * (nr + 1.0), (0.0, wp)).integrate()
    annihilation = _Term(p, 1.0, 0.0, -1.0, wp, lambda nl, nr: nl * nr, (0.0, wp)).integrate()
    rates = GoldenRuleRates(
        creation.value,
        annihilation.value,
        creation.error,
        annihilation.error,
        creation.converged and annihilation.converged,
    )
    return _raise_if_unconverged(rates, "golden-rule rates")


def _breakdown(p: TransportProblem) -> CurrentBreakdown:
    right = right_side(p)
    left = _side(_left_terms(p))
    try:
        rates = golden_rule_rates(p)
    except ConvergenceError as exc:
        rates = exc.best
    return CurrentBreakdown(
        J_R=right.J,
        J_L=left.J,
        J_N=0.5 * (right.J - left.J),
        J_A=0.5 * (right.J + left.J),
        term1=right.terms[0],
        term2=right.terms[1],
        term3=right.terms[2],
        R_c=rates.R_c,
        R_a=rates.R_a,
        term1_error=right.errors[0],
        term2_error=right.errors[1],
        term3_error=right.errors[2],
        J_R_error=right.error,
        J_L_error=left.error,
        R_c_error=rates.R_c_error,
        R_a_error=rates.R_a_error,
        converged=right.converged and left.converged and rates.converged,
    )


def current_right(p: TransportProblem) -> CurrentBreakdown:
    """Right current with the full normal/anomalous breakdown and pair rates.

    Raises:
        ConvergenceError: carrying the unconverged ``CurrentBreakdown`` as ``best``.
    """
    return _raise_if_unconverged(_breakdown(p), "current")


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    value: float
    breakdown: CurrentBreakdown | None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.breakdown is not None and self.breakdown.converged and self.error is None


def problem_at(p: TransportProblem, axis: str, value: float) -> TransportProblem:
    """Copy of ``p`` with one sweep parameter set to ``value``."""
    if axis == "pump_frequency":
        kernel = p.kernel
        if isinstance(kernel, CenterKernel):
            kernel = replace(kernel, pump_frequency=float(value))
        return replace(p, pump=PumpDrive(float(value)), kernel=kernel)
    if axis == "temperature":
        bath = BathState(float(value))
        return replace(p, left_bath=bath, right_bath=bath)
    if axis == "coupling_scale":
        return replace(p, kernel=p.kernel.scaled(float(value)))
    raise ConfigurationError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _sweep_point(args) -> SweepPoint:
    p, axis, value = args
    try:
        return SweepPoint(value, _breakdown(problem_at(p, axis, value)))
    except PhotonLandauerError as exc:
        return SweepPoint(value, None, f"{type(exc).__name__}: {exc}")


def worker_count(requested: int | None = None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError as exc:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {cap!r}") from exc
    return max(1, n)


def sweep(p: TransportProblem, axis: str, grid, workers: int | None = None) -> list:
    """Evaluate the breakdown at every grid value, preserving grid order.

    Failures at one point are recorded on that point's ``SweepPoint.error``
    instead of aborting; unconverged points carry ``converged=False``.
    """
    grid = [float(v) for v in grid]
    if not grid:
        raise ConfigurationError("sweep grid must be non-empty")
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    jobs = [(p, axis, v) for v in grid]
    n = min(worker_count(workers), len(jobs))
    if n == 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_sweep_point, jobs))
