import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from builders import GAPPED_J_R, center_problem, gapped, squeezing, ungapped
from photon_landauer import (
    BathState,
    ConfigurationError,
    ConstantDOS,
    ConvergenceError,
    LeadSpectrum,
    PumpDrive,
    Side,
    TransportProblem,
    TrivialKernel,
    current_left,
    current_right,
    golden_rule_rates,
    problem_at,
    sweep,
)
from photon_landauer.current import THREADS_ENV, worker_count


def bose(e, t):
    return 1.0 / math.expm1(e / t)


class TestGapped:
    def test_frozen_value(self):
        b = current_right(gapped(abs_tol=1e-14, rel_tol=1e-12))
        assert b.J_R == pytest.approx(GAPPED_J_R, rel=1e-11)

    def test_structure(self):
        b = current_right(gapped())
        assert b.term3 == 0.0 and b.R_c == 0.0 and b.R_a == 0.0
        assert b.term1 == 0.0  # right band lies above the left one
        assert b.J_R > 0

    def test_trapezoid_oracle(self):
        # only term2 is live: left energy e - w_p in [0.5, 1.5], right energy e in [2.0, 3.0]
        wp, t, lam = 1.6, 0.5, 0.1
        e = np.arange(2.1, 3.0 + 5e-7, 1e-6)
        f = math.pi / 8 * lam**2 / ((e - wp) * e) * (1 / np.expm1((e - wp) / t) - 1 / np.expm1(e / t))
        ref = np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(e))
        assert current_right(gapped()).J_R == pytest.approx(ref, rel=1e-9)

    def test_conservation(self):
        b = current_right(gapped())
        assert abs(b.J_R + b.J_L) <= 2 * (b.J_R_error + b.J_L_error)

    def test_current_left_matches_breakdown(self):
        p = gapped()
        left = current_left(p)
        assert left.J == current_right(p).J_L
        assert left.J == pytest.approx(-GAPPED_J_R, rel=1e-9)

    def test_rates_vanish_when_pump_below_right_band(self):
        assert tuple(golden_rule_rates(gapped(wp=1.6))) == (0.0, 0.0)


class TestTrivialLimits:
    @pytest.mark.parametrize("make", [gapped, ungapped, squeezing])
    def test_zero_coupling_is_exactly_zero(self, make):
        b = current_right(make(coupling=0.0))
        rec = b.as_record()
        assert all(v == 0.0 for k, v in rec.items() if k != "converged")
        assert b.converged

    @pytest.mark.parametrize("make", [gapped, ungapped, squeezing])
    def test_zero_bias(self, make):
        p = make(wp=0.0)
        p = replace(p, right_bath=p.left_bath)
        b = current_right(p)
        assert abs(b.J_R) <= p.abs_tol
        assert abs(b.J_L) <= p.abs_tol

    def test_rates_vanish_without_pump(self):
        assert tuple(golden_rule_rates(ungapped(wp=0.0))) == (0.0, 0.0)


class TestUngapped:
    def test_anomalous_identity(self):
        b = current_right(ungapped())
        assert b.term3 == pytest.approx(b.R_c - b.R_a, rel=1e-12)
        assert b.J_A == pytest.approx(b.term3, rel=1e-12)

    def test_left_plus_right_is_twice_anomalous(self):
        b = current_right(ungapped())
        assert b.J_L + b.J_R == pytest.approx(2 * b.J_A, rel=1e-12)
        assert b.J_A > 0

    def test_normal_current_definition(self):
        b = current_right(ungapped())
        assert b.J_N == pytest.approx(0.5 * (b.J_R - b.J_L), rel=1e-14)

    def test_against_scipy_quad(self):
        lam, wp, tl, tr = 0.3, 2.0, 1.0, 0.7
        b = current_right(ungapped(coupling=lam, wp=wp, tl=tl, tr=tr, abs_tol=1e-13, rel_tol=1e-11))

        # rho = e^2 so T(x, y) = (pi/8) lam^2 x y
        def t(x, y):
            return math.pi / 8 * lam**2 * x * y

        cut = 40 * tl + wp
        opts = dict(epsabs=1e-14, epsrel=1e-12, limit=500)
        term1 = sp_integrate.quad(lambda e: t(e, e - wp) * (bose(e, tl) - bose(e - wp, tr)), wp, cut, **opts)[0]
        term2 = sp_integrate.quad(lambda e: t(e - wp, e) * (bose(e - wp, tl) - bose(e, tr)), wp, cut, **opts)[0]
        term3 = sp_integrate.quad(
            lambda e: t(e, wp - e) * (bose(e, tl) + bose(wp - e, tr) + 1), 0, wp, **opts
        )[0]
        assert b.term1 == pytest.approx(term1, rel=1e-9)
        assert b.term2 == pytest.approx(term2, rel=1e-9)
        assert b.term3 == pytest.approx(term3, rel=1e-10)

    def test_hot_left_pushes_photons_right(self):
        b = current_right(ungapped(wp=0.0, tl=1.0, tr=0.5))
        assert b.J_R > 0 and b.J_L == pytest.approx(-b.J_R, rel=1e-12)

    def test_vacuum_gives_pure_pair_creation(self):
        b = current_right(squeezing())
        assert b.J_R == pytest.approx(b.J_L, rel=1e-6)
        assert b.R_a < 1e-300 + 1e-12 * b.R_c


class TestCenterKernel:
    def test_center_breakdown_identities(self):
        b = current_right(center_problem())
        assert b.converged
        assert b.term3 == pytest.approx(b.R_c - b.R_a, rel=1e-9)
        assert b.J_L + b.J_R == pytest.approx(2 * b.J_A, rel=1e-12)

    def test_quartic_scaling(self):
        bare = current_right(center_problem(dressed=False, eta=1e-3, abs_tol=1e-16, rel_tol=1e-12))
        bare2 = current_right(center_problem(scale=2.0, dressed=False, eta=1e-3, abs_tol=1e-16, rel_tol=1e-12))
        assert bare2.J_R / bare.J_R == pytest.approx(16, rel=1e-8)

    def test_dressed_resonance_scales_slower(self):
        # the resonance width grows like s^2, so the resonant current is ~ s^2, not s^4
        base = current_right(center_problem())
        doubled = current_right(center_problem(scale=2.0))
        assert 3.0 < doubled.J_R / base.J_R < 16.0


class TestInfrared:
    def test_unregularised_lead_at_zero_refused(self):
        with pytest.warns(RuntimeWarning):
            left = LeadSpectrum(Side.LEFT, 0.0, 3.0, ConstantDOS(1.0), allow_ir_divergence=True)
        right = LeadSpectrum(Side.RIGHT, 0.0, 3.0)
        p = TransportProblem(TrivialKernel(left, right, 0.1), BathState(1.0), BathState(1.0), PumpDrive(1.0))
        with pytest.raises(ConfigurationError, match="infrared"):
            current_right(p)

    def test_linear_dos_is_log_divergent(self):
        # rho ~ eps makes T finite at eps -> 0 while n ~ T/eps: a log divergence
        with pytest.raises(ConfigurationError, match="diverges"):
            current_right(ungapped(k=1))

    def test_quadratic_dos_converges(self):
        b = current_right(ungapped(k=2))
        assert b.converged and np.isfinite(b.J_R)


class TestConvergence:
    def test_unconverged_raises_with_best_estimate(self):
        p = ungapped(abs_tol=1e-30, rel_tol=1e-16, max_subdivisions=2)
        with pytest.raises(ConvergenceError) as info:
            current_right(p)
        best = info.value.best
        assert best is not None and not best.converged
        assert best.J_R == pytest.approx(current_right(ungapped()).J_R, rel=1e-3)

    def test_tolerances_validated(self):
        with pytest.raises(ConfigurationError):
            gapped(abs_tol=0.0)


class TestSweep:
    def test_below_threshold_all_zero(self):
        # threshold for up-conversion is 2.0 - 1.5 = 0.5
        pts = sweep(gapped(), "pump_frequency", [0.1, 0.3, 0.45], workers=1)
        assert [pt.breakdown.J_R for pt in pts] == [0.0, 0.0, 0.0]

    def test_crossing_threshold_monotone(self):
        grid = [0.4, 0.7, 1.0]
        pts = sweep(gapped(), "pump_frequency", grid, workers=1)
        j = [pt.breakdown.J_R for pt in pts]
        assert j[0] == 0.0 and j[0] <= j[1] <= j[2]
        # dense fixed-grid check of the same three values
        for wp, val in zip(grid, j):
            lo, hi = max(0.5 + wp, 2.0), min(1.5 + wp, 3.0)
            if hi <= lo:
                assert val == 0.0
                continue
            e = np.linspace(lo, hi, 400001)
            f = math.pi / 8 * 0.01 / ((e - wp) * e) * (1 / np.expm1((e - wp) / 0.5) - 1 / np.expm1(e / 0.5))
            ref = np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(e))
            assert val == pytest.approx(ref, rel=1e-8)

    def test_coupling_scale_square_law(self):
        pts = sweep(gapped(), "coupling_scale", [1.0, 2.0, 4.0], workers=1)
        j = np.array([pt.breakdown.J_R for pt in pts])
        assert j / j[0] == pytest.approx([1.0, 4.0, 16.0], rel=1e-12)

    def test_descending_order_preserved(self):
        grid = [1.2, 0.9, 0.6]
        pts = sweep(gapped(), "pump_frequency", grid, workers=1)
        assert [pt.value for pt in pts] == grid

    def test_worker_pool_matches_serial(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "2")
        grid = [0.8, 0.5, 1.1]
        parallel = sweep(gapped(), "pump_frequency", grid, workers=4)
        serial = sweep(gapped(), "pump_frequency", grid, workers=1)
        assert [p.breakdown for p in parallel] == [s.breakdown for s in serial]

    def test_temperature_axis_sets_both_baths(self):
        p = problem_at(ungapped(), "temperature", 0.3)
        assert p.left_bath.temperature == p.right_bath.temperature == 0.3

    def test_failed_point_is_recorded(self):
        pts = sweep(gapped(), "temperature", [0.5, -1.0], workers=1)
        assert pts[0].converged and not pts[1].converged
        assert "ConfigurationError" in pts[1].error

    def test_unknown_axis(self):
        with pytest.raises(ConfigurationError):
            sweep(gapped(), "voltage", [1.0])

    def test_thread_cap(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert worker_count(8) == 3
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(ConfigurationError):
            worker_count(2)
