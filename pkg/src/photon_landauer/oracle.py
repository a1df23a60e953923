"""Brute-force time-domain check of the analytic currents.

Each lead is replaced by a finite set of harmonic modes, the full quadratic
model H = p.p/2 + u.K(t).u/2 is propagated exactly at the level of the
Gaussian covariance matrix, and the photon-number slope in a lead is fitted
over whole pump cycles once the drive has been switched on.

A lead discretised on a midpoint grid with spacing d_eps represents the
continuum through the weights sqrt(rho(eps) d_eps): the pair coupling between
modes a and b is lambda(eps_a, eps_b) sqrt(rho_L d_eps_L) sqrt(rho_R d_eps_R).
The analytic current is evaluated on the same continuum problem, so the
comparison carries no free parameter.

Two integrators share the same normal-mode frame. The default is a Strang
splitting (exact free rotation, coupling kick, exact free rotation), which is
symplectic and so keeps the covariance a valid Gaussian state to rounding
error. The alternative is RK4 on the interaction-frame equations, where only
the weak coupling is integrated numerically. Both conserve every mode
occupation exactly when the coupling is off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .current import TransportProblem, current_right
from .errors import ConfigurationError, IntegrationError
from .spectra import BathState, Side, bose_occupation
from .transmission import CenterKernel, TrivialKernel

LEFT, RIGHT, CENTER = "L", "R", "C"
STEPS_PER_PERIOD_MIN = 20
PHYSICALITY_TOL = 1e-9
RECURRENCE_FILL = 0.9
MIN_WINDOW_CYCLES = 5
MAX_WINDOW_CYCLES = 20
_BLOWUP = 1e8


def ramp(t, t_ramp):
    """Smooth switch-on sin^2(pi t / 2 t_ramp), equal to 1 after ``t_ramp``."""
    if t_ramp <= 0 or t >= t_ramp:
        return 1.0
    if t <= 0:
        return 0.0
    return math.sin(0.5 * math.pi * t / t_ramp) ** 2


@dataclass(frozen=True)
class OracleSystem:
    """Discretised quadratic model K(t) = K0 + ramp(t) [V_static + cos(w_p t) V_pump].

    Args:
        spring: bare spring matrix K0; diagonal w_i^2 on lead modes, the
            center's own spring matrix on center modes.
        sides: one tag per mode, ``"L"``, ``"R"`` or ``"C"``.
        pumped: amplitude matrix of the parametrically modulated couplings.
        static: amplitude matrix of time-independent couplings (center-right).
        pump_frequency: w_p.
        t_ramp, dt, t_end: switch-on time, time step, final time.
        level_spacing: smallest lead mode spacing; sets the recurrence time.
    """

    spring: np.ndarray
    sides: tuple
    pumped: np.ndarray
    static: np.ndarray
    pump_frequency: float
    t_ramp: float
    dt: float
    t_end: float
    level_spacing: float = math.inf
    _normal: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k0 = np.asarray(self.spring, dtype=float)
        n = k0.shape[0]
        vp = np.asarray(self.pumped, dtype=float)
        vs = np.asarray(self.static, dtype=float)
        if k0.shape != (n, n) or vp.shape != (n, n) or vs.shape != (n, n) or len(self.sides) != n:
            raise ConfigurationError("oracle matrices and side tags must agree in size")
        for name, m in (("spring", k0), ("pumped", vp), ("static", vs)):
            if not np.allclose(m, m.T, rtol=0, atol=1e-14 * max(1.0, np.abs(m).max())):
                raise ConfigurationError(f"{name} matrix must be symmetric")
        if set(self.sides) - {LEFT, RIGHT, CENTER}:
            raise ConfigurationError("side tags must be 'L', 'R' or 'C'")
        object.__setattr__(self, "spring", 0.5 * (k0 + k0.T))
        object.__setattr__(self, "pumped", 0.5 * (vp + vp.T))
        object.__setattr__(self, "static", 0.5 * (vs + vs.T))
        object.__setattr__(self, "sides", tuple(self.sides))
        if not (self.pump_frequency >= 0 and self.dt > 0 and self.t_end >= 0 and self.t_ramp >= 0):
            raise ConfigurationError("need w_p >= 0, dt > 0, t_end >= 0, t_ramp >= 0")
        # convex hull of K(t) is spanned by these three matrices
        for m in (self.spring, self.spring + self.static + self.pumped, self.spring + self.static - self.pumped):
            if np.linalg.eigvalsh(m).min() <= 0:
                raise ConfigurationError("K(t) is not positive definite at the extremes of the drive")
        object.__setattr__(self, "_normal", _block_normal_modes(self.spring, self.sides))
        if self.dt > self.max_dt() * (1 + 1e-12):
            raise IntegrationError(
                f"time step {self.dt:g} too coarse; resolution rule needs dt <= {self.max_dt():g}"
            )

    @property
    def n_modes(self) -> int:
        return len(self.sides)

    @property
    def frequencies(self) -> np.ndarray:
        """Bare mode frequencies sqrt(K0_ii)."""
        return np.sqrt(np.diag(self.spring))

    @property
    def normal_frequencies(self) -> np.ndarray:
        return self._normal[0]

    @property
    def period(self) -> float:
        """Pump period, or the fastest mode period for an undriven system."""
        return cycle_period(self.pump_frequency, self.normal_frequencies.max())

    @property
    def recurrence_time(self) -> float:
        return 2 * math.pi / self.level_spacing if self.level_spacing > 0 else math.inf

    def max_dt(self) -> float:
        top = max(self.normal_frequencies.max(), self.pump_frequency)
        return 2 * math.pi / (STEPS_PER_PERIOD_MIN * top)

    def mask(self, side: str) -> np.ndarray:
        return np.array([s == side for s in self.sides])

    def coupling(self, t: float) -> np.ndarray:
        return ramp(t, self.t_ramp) * (self.static + math.cos(self.pump_frequency * t) * self.pumped)


def _block_normal_modes(spring, sides):
    """Normal modes of K0, diagonalised subsystem by subsystem so modes never mix sides."""
    tags = np.array(sides)
    n = len(sides)
    w = np.zeros(n)
    u = np.zeros((n, n))
    for tag in (LEFT, RIGHT, CENTER):
        idx = np.flatnonzero(tags == tag)
        if idx.size == 0:
            continue
        others = np.flatnonzero(tags != tag)
        if others.size and np.any(spring[np.ix_(idx, others)] != 0):
            raise ConfigurationError("bare spring matrix must not couple different subsystems")
        w2, vecs = np.linalg.eigh(spring[np.ix_(idx, idx)])
        w[idx] = np.sqrt(np.clip(w2, 0, None))
        u[np.ix_(idx, idx)] = vecs
    return w, u


def cycle_period(pump_frequency: float, top_frequency: float) -> float:
    if pump_frequency > 0:
        return 2 * math.pi / pump_frequency
    return 2 * math.pi / top_frequency


@dataclass(frozen=True)
class CovarianceState:
    """Symmetrised second moments of x = (u, p) at time ``t``."""

    matrix: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.matrix, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2:
            raise ConfigurationError("covariance must be a square 2n x 2n matrix")
        object.__setattr__(self, "matrix", 0.5 * (c + c.T))

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def physicality(self) -> float:
        """Smallest eigenvalue of C + (i/2) Omega; >= 0 for a physical state."""
        return physicality(self.matrix)

    def occupations(self, frequencies) -> np.ndarray:
        n = self.n_modes
        w = np.asarray(frequencies, dtype=float)
        d = np.diag(self.matrix)
        return d[n:] / (2 * w) + w * d[:n] / 2 - 0.5


def symplectic_form(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def physicality(c) -> float:
    n = c.shape[0] // 2
    return float(np.linalg.eigvalsh(c + 0.5j * symplectic_form(n)).min())


# ---------------------------------------------------------------------------
# initial state
# ---------------------------------------------------------------------------


def _thermal_occupation(w, bath):
    if bath is None:
        return np.zeros_like(w)
    return bose_occupation(w, bath)


def initial_covariance(system: OracleSystem, baths: dict) -> CovarianceState:
    """Product of thermal states, one per subsystem.

    ``baths`` maps side tags (``"L"``, ``"R"``, ``"C"``) to a ``BathState``;
    a missing entry or ``None`` means the vacuum. Center modes are thermal
    with respect to their own spring matrix.
    """
    n = system.n_modes
    w, u = system._normal
    if np.any(w <= 0):
        raise ConfigurationError("all oscillator frequencies must be > 0")
    nbar = np.zeros(n)
    for k, owner in enumerate(system.sides):
        # column k of u lives entirely inside subsystem ``owner``
        nbar[k] = _thermal_occupation(np.array([w[k]]), baths.get(owner))[0]
    cuu = u @ np.diag((2 * nbar + 1) / (2 * w)) @ u.T
    cpp = u @ np.diag(w * (2 * nbar + 1) / 2) @ u.T
    zero = np.zeros((n, n))
    return CovarianceState(np.block([[cuu, zero], [zero, cpp]]), 0.0)


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------


def _to_normal(c, u):
    n = u.shape[0]
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = u
    big[n:, n:] = u
    return big.T @ c @ big, big


def _rotation(w, t):
    """Free propagator per normal mode: u(t) = a u0 + b p0, p(t) = -w^2 b u0 + a p0."""
    return np.cos(w * t), np.sin(w * t) / w


def _to_frame(c, w, t, inverse=False):
    """Move a normal-mode covariance into (or out of) the rotating frame."""
    a, b = _rotation(w, -t if not inverse else t)
    n = w.size
    top = a[:, None] * c[:n] + b[:, None] * c[n:]
    bot = -(w**2 * b)[:, None] * c[:n] + a[:, None] * c[n:]
    rows = np.vstack([top, bot])
    left = rows[:, :n] * a[None, :] + rows[:, n:] * b[None, :]
    right = -rows[:, :n] * (w**2 * b)[None, :] + rows[:, n:] * a[None, :]
    return np.hstack([left, right])


class _Stepper:
    """One-step schemes on the normal-mode covariance."""

    def __init__(self, system: OracleSystem, method: str):
        self.sys = system
        self.w, self.u = system._normal
        self.n = self.w.size
        # couplings rotated into the normal-mode basis once
        self.vs = self.u.T @ system.static @ self.u
        self.vp = self.u.T @ system.pumped @ self.u
        if method not in ("rk4", "splitting"):
            raise ConfigurationError(f"unknown integrator {method!r}; use 'rk4' or 'splitting'")
        self.method = method

    def coupling(self, t):
        return ramp(t, self.sys.t_ramp) * (self.vs + math.cos(self.sys.pump_frequency * t) * self.vp)

    def _rhs(self, t, cy):
        # d/dt C_y = B C_y + (B C_y)^T with B the coupling seen from the rotating frame
        n = self.n
        a, b = _rotation(self.w, t)
        m = self.coupling(t)
        y = a[:, None] * cy[:n] + b[:, None] * cy[n:]
        my = m @ y
        bc = np.vstack([b[:, None] * my, -a[:, None] * my])
        return bc + bc.T

    def rk4(self, t, cy, dt):
        k1 = self._rhs(t, cy)
        k2 = self._rhs(t + 0.5 * dt, cy + 0.5 * dt * k1)
        k3 = self._rhs(t + 0.5 * dt, cy + 0.5 * dt * k2)
        k4 = self._rhs(t + dt, cy + dt * k3)
        out = cy + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return 0.5 * (out + out.T)

    def strang(self, t, c, dt):
        # lab-frame normal-mode covariance: half drift, kick, half drift
        n = self.n
        c = _to_frame(c, self.w, 0.5 * dt, inverse=True)
        m = self.coupling(t + 0.5 * dt) * dt
        cuu, cup, cpp = c[:n, :n], c[:n, n:], c[n:, n:]
        mc = m @ cuu
        new_up = cup - cuu @ m
        new_pp = cpp - m @ cup - cup.T @ m + mc @ m
        c = np.block([[cuu, new_up], [new_up.T, new_pp]])
        c = _to_frame(c, self.w, 0.5 * dt, inverse=True)
        return 0.5 * (c + c.T)


@dataclass(frozen=True)
class Trajectory:
    """Recorded history of a propagation.

    ``occupations`` has one row per entry of ``times`` and one column per
    mode (original basis); ``min_physicality`` is the smallest eigenvalue of
    C + (i/2) Omega over all checkpoints.
    """

    times: np.ndarray
    occupations: np.ndarray
    min_physicality: float
    final: CovarianceState
    steps_per_period: int


def _occupations_from_normal(c_lab_normal, system):
    n = system.n_modes
    u = system._normal[1]
    cuu = u @ c_lab_normal[:n, :n] @ u.T
    cpp = u @ c_lab_normal[n:, n:] @ u.T
    w = system.frequencies
    return np.diag(cpp) / (2 * w) + w * np.diag(cuu) / 2 - 0.5


def _lab_from_normal(c, system):
    n = system.n_modes
    u = system._normal[1]
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = u
    big[n:, n:] = u
    return big @ c @ big.T


def run(
    state: CovarianceState,
    system: OracleSystem,
    t_final: float,
    method: str = "splitting",
    record_from: float = math.inf,
    check_every: int | None = None,
) -> Trajectory:
    """Propagate ``state`` to ``t_final`` and record occupations from ``record_from`` on.

    The state is stepped with ``system.dt`` (the last step is shortened to
    land on ``t_final``). Physicality is checked every ``check_every`` steps
    (default: once per cycle) and at the end.

    Raises:
        IntegrationError: if the covariance blows up or stops being finite.
    """
    if t_final < state.t:
        raise ConfigurationError("t_final must not precede the state's time")
    stepper = _Stepper(system, method)
    w = stepper.w
    c_normal, _ = _to_normal(state.matrix, stepper.u)
    scale = float(np.trace(c_normal))
    per = max(1, int(round(system.period / system.dt)))
    check_every = check_every or per
    t0 = state.t
    n_steps = int(math.ceil((t_final - t0) / system.dt - 1e-9))

    # rk4 state lives in the rotating frame, splitting state in the lab frame
    cur = _to_frame(c_normal, w, t0) if method == "rk4" else c_normal

    def lab(cur, t):
        return _to_frame(cur, w, t, inverse=True) if method == "rk4" else cur

    times, occs = [], []
    worst = math.inf

    def observe(cur, t, step):
        nonlocal worst
        need_occ = t >= record_from - 1e-9 * system.dt
        need_check = step % check_every == 0 or step == n_steps
        if not (need_occ or need_check):
            return
        c_lab = lab(cur, t)
        if need_occ:
            times.append(t)
            occs.append(_occupations_from_normal(c_lab, system))
        if need_check:
            worst = min(worst, physicality(c_lab))

    observe(cur, t0, 0)
    t = t0
    for k in range(n_steps):
        dt = min(system.dt, t_final - t) if k == n_steps - 1 else system.dt
        cur = stepper.rk4(t, cur, dt) if method == "rk4" else stepper.strang(t, cur, dt)
        t = t0 + (k + 1) * system.dt if k < n_steps - 1 else t_final
        if not np.all(np.isfinite(cur)) or np.trace(cur) > _BLOWUP * scale:
            raise IntegrationError(f"covariance integration unstable at t = {t:g}")
        observe(cur, t, k + 1)

    final_normal = lab(cur, t)
    final = CovarianceState(_lab_from_normal(final_normal, system), t)
    return Trajectory(
        times=np.asarray(times),
        occupations=np.asarray(occs).reshape(len(times), system.n_modes),
        min_physicality=worst,
        final=final,
        steps_per_period=per,
    )


def propagate(
    state: CovarianceState, system: OracleSystem, t_final: float, method: str = "splitting"
) -> CovarianceState:
    """Covariance at ``t_final`` under C' = A(t) C + C A(t)^T."""
    return run(state, system, t_final, method=method).final


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Measurement:
    current: float
    uncertainty: float
    cycles: int


def photon_number(trajectory: Trajectory, system: OracleSystem, side: str) -> np.ndarray:
    """N_side(t) = sum over the side's modes of <p^2>/2w + w<u^2>/2 - 1/2."""
    return trajectory.occupations[:, system.mask(side)].sum(axis=1)


def measure_current(trajectory: Trajectory, system: OracleSystem, side: str) -> Measurement:
    """Cycle-averaged dN/dt of one lead over the post-ramp window.

    N(t) is averaged over each complete pump cycle after ``t_ramp`` and a
    straight line is fitted through the cycle means; the standard error of
    the slope is reported as the uncertainty.

    Raises:
        ConfigurationError: if fewer than five complete cycles were recorded.
    """
    if side not in (LEFT, RIGHT):
        raise ConfigurationError("current is measured on side 'L' or 'R'")
    per = trajectory.steps_per_period
    t = trajectory.times
    keep = t >= system.t_ramp - 1e-9 * system.dt
    t = t[keep]
    n_side = photon_number(trajectory, system, side)[keep]
    cycles = (t.size - 1) // per
    if cycles < MIN_WINDOW_CYCLES:
        raise ConfigurationError(
            f"measurement window holds {cycles} pump cycles after the ramp; need >= {MIN_WINDOW_CYCLES}"
        )
    # each cycle averaged over its left endpoint samples: per samples span exactly one period
    tc = np.array([t[i * per : (i + 1) * per].mean() for i in range(cycles)])
    nc = np.array([n_side[i * per : (i + 1) * per].mean() for i in range(cycles)])
    design = np.vstack([tc - tc.mean(), np.ones_like(tc)]).T
    coef, *_ = np.linalg.lstsq(design, nc, rcond=None)
    resid = nc - design @ coef
    dof = max(cycles - 2, 1)
    stderr = math.sqrt(float(resid @ resid) / dof / float((tc - tc.mean()) @ (tc - tc.mean())))
    return Measurement(float(coef[0]), stderr, cycles)


# ---------------------------------------------------------------------------
# discretisation of a continuum problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleSettings:
    modes_per_lead: int = 40
    ramp_cycles: float = 10.0
    measure_cycles: int | None = None
    method: str = "splitting"
    dt: float | None = None
    center_temperature: str = RIGHT

    def __post_init__(self):
        if self.modes_per_lead < 1:
            raise ConfigurationError("modes_per_lead must be >= 1")
        if self.ramp_cycles < 10:
            raise ConfigurationError("ramp must last at least 10 pump cycles")
        if self.measure_cycles is not None and not (
            MIN_WINDOW_CYCLES <= self.measure_cycles <= MAX_WINDOW_CYCLES
        ):
            raise ConfigurationError(
                f"measure_cycles must lie in [{MIN_WINDOW_CYCLES}, {MAX_WINDOW_CYCLES}]"
            )


def lead_grid(lead, n_modes: int, cutoff: float):
    """Midpoint grid over the (truncated) band and the continuum weights sqrt(rho d_eps)."""
    hi = min(lead.band_max, cutoff)
    d = (hi - lead.band_min) / n_modes
    eps = lead.band_min + (np.arange(n_modes) + 0.5) * d
    return eps, np.sqrt(lead.density(eps) * d), d


@dataclass(frozen=True)
class Schedule:
    t_ramp: float
    t_end: float
    cycles: int
    recurrence_exceeded: bool


def schedule(period: float, recurrence: float, settings: OracleSettings) -> Schedule:
    """Place a 5-20 cycle window after a >= 10 cycle ramp, inside the recurrence time.

    The window is pushed as late as the recurrence time allows, lengthening
    the ramp, so the drive is switched on as adiabatically as possible.
    """
    ramp_min = settings.ramp_cycles * period
    budget = RECURRENCE_FILL * recurrence
    wanted = settings.measure_cycles or MAX_WINDOW_CYCLES
    fit = int(math.floor((budget - ramp_min) / period)) if math.isfinite(budget) else wanted
    cycles = max(MIN_WINDOW_CYCLES, min(wanted, fit))
    if math.isfinite(budget):
        n_ramp = max(math.ceil(settings.ramp_cycles), int(math.floor(budget / period)) - cycles)
    else:
        n_ramp = math.ceil(settings.ramp_cycles)
    t_ramp = n_ramp * period
    t_end = t_ramp + cycles * period
    return Schedule(t_ramp, t_end, cycles, t_end > recurrence)


def discretize(problem: TransportProblem, settings: OracleSettings = OracleSettings()):
    """Build the finite oracle model that represents ``problem``.

    Returns:
        (OracleSystem, baths dict, Schedule)
    """
    kernel = problem.kernel
    cutoff = problem.cutoff()
    n = settings.modes_per_lead
    eps_l, wt_l, d_l = lead_grid(problem.left, n, cutoff)
    eps_r, wt_r, d_r = lead_grid(problem.right, n, cutoff)
    wp = problem.pump.frequency

    if isinstance(kernel, TrivialKernel):
        lam = kernel.pair_coupling(eps_l[:, None], eps_r[None, :])
        block = lam * wt_l[:, None] * wt_r[None, :]
        size = 2 * n
        spring = np.diag(np.concatenate([eps_l, eps_r]) ** 2)
        pumped = np.zeros((size, size))
        pumped[:n, n:] = block
        pumped[n:, :n] = block.T
        static = np.zeros((size, size))
        sides = (LEFT,) * n + (RIGHT,) * n
    elif isinstance(kernel, CenterKernel):
        c = kernel.center
        nc = c.n_modes
        size = 2 * n + nc
        lam_l = kernel.scale * c.coupling_vector(eps_l, Side.LEFT) * wt_l[:, None]
        lam_r = kernel.scale * c.coupling_vector(eps_r, Side.RIGHT) * wt_r[:, None]
        spring = np.zeros((size, size))
        spring[:n, :n] = np.diag(eps_l**2)
        spring[n : 2 * n, n : 2 * n] = np.diag(eps_r**2)
        spring[2 * n :, 2 * n :] = c.K
        pumped = np.zeros((size, size))
        pumped[:n, 2 * n :] = lam_l
        pumped[2 * n :, :n] = lam_l.T
        static = np.zeros((size, size))
        static[n : 2 * n, 2 * n :] = lam_r
        static[2 * n :, n : 2 * n] = lam_r.T
        sides = (LEFT,) * n + (RIGHT,) * n + (CENTER,) * nc
    else:
        raise ConfigurationError(f"kernel {type(kernel).__name__} cannot be discretised")

    top = max(math.sqrt(np.linalg.eigvalsh(spring).max()), wp)
    period = cycle_period(wp, top)
    spacing = min(d_l, d_r)
    plan = schedule(period, 2 * math.pi / spacing, settings)
    if settings.dt is None:
        steps = math.ceil(STEPS_PER_PERIOD_MIN * top * period / (2 * math.pi) - 1e-12)
        dt = period / steps
    else:
        dt = settings.dt
    system = OracleSystem(
        spring=spring,
        sides=sides,
        pumped=pumped,
        static=static,
        pump_frequency=wp,
        t_ramp=plan.t_ramp,
        dt=dt,
        t_end=plan.t_end,
        level_spacing=spacing,
    )
    baths = {LEFT: problem.left_bath, RIGHT: problem.right_bath}
    baths[CENTER] = problem.right_bath if settings.center_temperature == RIGHT else problem.left_bath
    return system, baths, plan


@dataclass(frozen=True)
class OracleReport:
    analytic: float
    simulated: float
    relative_deviation: float
    analytic_left: float
    simulated_left: float
    uncertainty: float
    uncertainty_left: float
    min_physicality: float
    recurrence_exceeded: bool
    parameters: dict

    def as_record(self) -> dict:
        return {
            "analytic": self.analytic,
            "simulated": self.simulated,
            "relative_deviation": self.relative_deviation,
            "analytic_left": self.analytic_left,
            "simulated_left": self.simulated_left,
            "uncertainty": self.uncertainty,
            "uncertainty_left": self.uncertainty_left,
            "min_physicality": self.min_physicality,
            "recurrence_exceeded": self.recurrence_exceeded,
            "parameters": dict(self.parameters),
        }


def simulate(problem: TransportProblem, settings: OracleSettings = OracleSettings()):
    """Run the oracle for ``problem``; returns (system, trajectory, right, left) measurements."""
    system, baths, plan = discretize(problem, settings)
    state = initial_covariance(system, baths)
    traj = run(state, system, system.t_end, method=settings.method, record_from=system.t_ramp)
    if traj.min_physicality < -PHYSICALITY_TOL:
        raise IntegrationError(f"covariance lost physicality (min eigenvalue {traj.min_physicality:.3e})")
    return system, plan, traj, measure_current(traj, system, RIGHT), measure_current(traj, system, LEFT)


def relative_deviation(analytic: float, simulated: float, floor: float) -> float:
    """|sim - ana| / |ana|, with both values below ``floor`` counting as agreement."""
    if abs(analytic) <= floor:
        return 0.0 if abs(simulated) <= floor else math.inf
    return abs(simulated - analytic) / abs(analytic)


def compare(problem: TransportProblem, settings: OracleSettings = OracleSettings()) -> OracleReport:
    """Analytic right current against the time-domain simulation of the same problem."""
    analytic = current_right(problem)
    system, plan, traj, right, left = simulate(problem, settings)
    floor = max(5 * right.uncertainty, problem.abs_tol, 1e-12)
    params = {
        "modes_per_lead": settings.modes_per_lead,
        "method": settings.method,
        "dt": system.dt,
        "t_ramp": system.t_ramp,
        "t_end": system.t_end,
        "window_cycles": right.cycles,
        "level_spacing": system.level_spacing,
        "recurrence_time": system.recurrence_time,
        "pump_frequency": system.pump_frequency,
    }
    return OracleReport(
        analytic=analytic.J_R,
        simulated=right.current,
        relative_deviation=relative_deviation(analytic.J_R, right.current, floor),
        analytic_left=analytic.J_L,
        simulated_left=left.current,
        uncertainty=right.uncertainty,
        uncertainty_left=left.uncertainty,
        min_physicality=traj.min_physicality,
        recurrence_exceeded=plan.recurrence_exceeded,
        parameters=params,
    )
