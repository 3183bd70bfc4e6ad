"""Sinusoid fitting, phase referencing, unwrapping, line fitting."""

import numpy as np
import pytest

from spinrot import (
    fit_phase_vs_frequency,
    fit_sinusoid,
    relative_phase,
    unwrap_phases,
    wrap_angle,
)
from spinrot.analysis import FitResult


def sinusoid(chi, offset, amplitude, phase):
    return offset + amplitude * np.cos(chi + phase)


CHI16 = np.linspace(0.0, 4 * np.pi, 16, endpoint=False)


class TestWrapAngle:
    def test_interval_convention(self):
        assert wrap_angle(np.pi) == pytest.approx(np.pi)
        assert wrap_angle(-np.pi) == pytest.approx(np.pi)
        assert wrap_angle(3 * np.pi) == pytest.approx(np.pi)
        assert wrap_angle(0.3) == pytest.approx(0.3, abs=1e-15)
        assert wrap_angle(6.0) == pytest.approx(6.0 - 2 * np.pi, abs=1e-12)


class TestFitSinusoid:
    def test_exact_recovery(self):
        data = sinusoid(CHI16, 250.0, 150.0, 0.3)
        fit = fit_sinusoid((CHI16, data))
        assert fit.offset == pytest.approx(250.0, abs=1e-9)
        assert fit.amplitude == pytest.approx(150.0, abs=1e-9)
        assert fit.phase == pytest.approx(0.3, abs=1e-12)
        assert fit.phase_constrained

    def test_constant_data_unconstrained(self):
        fit = fit_sinusoid((CHI16, np.full(16, 100.0)))
        assert fit.amplitude == pytest.approx(0.0, abs=1e-9)
        assert not fit.phase_constrained

    def test_shift_equivariance(self):
        data = sinusoid(CHI16, 300.0, 120.0, -1.1)
        base = fit_sinusoid((CHI16, data)).phase
        for delta in (0.4, 1.9, -2.5):
            shifted = fit_sinusoid((CHI16 + delta, data)).phase
            # data attached to shifted chi: fitted phase moves by -delta
            assert wrap_angle(shifted - (base - delta)) == pytest.approx(0.0, abs=1e-9)

    def test_count_scaling(self):
        data = sinusoid(CHI16, 300.0, 120.0, 0.77)
        a = fit_sinusoid((CHI16, data))
        b = fit_sinusoid((CHI16, 7.0 * data))
        assert b.offset == pytest.approx(7.0 * a.offset, rel=1e-12)
        assert b.amplitude == pytest.approx(7.0 * a.amplitude, rel=1e-12)
        assert b.phase == pytest.approx(a.phase, abs=1e-12)

    def test_poisson_three_sigma_coverage(self):
        # peak 400 expected counts, 16 points: the fitted phase must fall
        # within 3 standard errors of the truth in at least 99% of trials
        truth = 0.6
        expected = sinusoid(CHI16, 250.0, 150.0, truth)
        rng = np.random.default_rng(2024)
        hits = 0
        trials = 1000
        for _ in range(trials):
            fit = fit_sinusoid((CHI16, rng.poisson(expected)))
            if abs(wrap_angle(fit.phase - truth)) <= 3.0 * fit.phase_err:
                hits += 1
        assert hits >= 990

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError, match="at least 4"):
            fit_sinusoid((CHI16[:3], np.ones(3)))

    def test_insufficient_span_rejected(self):
        chi = np.linspace(0, np.pi, 8)
        with pytest.raises(ValueError, match="span"):
            fit_sinusoid((chi, np.ones(8)))

    def test_errors_positive_and_finite(self):
        data = sinusoid(CHI16, 250.0, 150.0, 1.0)
        rng = np.random.default_rng(7)
        fit = fit_sinusoid((CHI16, rng.poisson(data)))
        for err in (fit.offset_err, fit.amplitude_err, fit.phase_err):
            assert np.isfinite(err) and err > 0


class TestRelativePhase:
    def fit_with_phase(self, phase, err=0.01):
        return FitResult(
            offset=100.0,
            amplitude=50.0,
            phase=phase,
            offset_err=1.0,
            amplitude_err=1.0,
            phase_err=err,
            chisq_red=1.0,
            phase_constrained=True,
        )

    def test_self_is_zero(self):
        fit = self.fit_with_phase(1.3)
        value, err = relative_phase(fit, fit)
        assert value == 0.0
        assert err == pytest.approx(np.sqrt(2) * 0.01)

    def test_wrap_convention(self):
        # 3.0 - (-3.0) = 6.0 wraps to -(2*pi - 6.0), not 6.0
        value, _ = relative_phase(self.fit_with_phase(3.0), self.fit_with_phase(-3.0))
        assert value == pytest.approx(6.0 - 2 * np.pi, abs=1e-12)

    def test_antisymmetry(self):
        a, b = self.fit_with_phase(0.9), self.fit_with_phase(2.2)
        assert relative_phase(a, b)[0] == pytest.approx(-relative_phase(b, a)[0], abs=1e-12)

    def test_unconstrained_rejected(self):
        good = self.fit_with_phase(0.5)
        bad = FitResult(100.0, 0.0, 0.0, 1.0, 1.0, np.pi, 1.0, False)
        with pytest.raises(ValueError, match="unconstrained"):
            relative_phase(good, bad)


class TestUnwrapPhases:
    def test_low_slope_unchanged(self):
        f = np.linspace(0, 20e3, 9)
        p = 1e-5 * f - 0.4
        np.testing.assert_allclose(unwrap_phases(f, p), p, atol=1e-15)

    def test_wrapped_line_restored(self):
        f = np.linspace(0, 20e3, 21)
        slope = np.pi * 6e-5  # wraps twice across the band
        truth = slope * f + 0.2
        wrapped = np.array([wrap_angle(x) for x in truth])
        np.testing.assert_allclose(unwrap_phases(f, wrapped), truth, atol=1e-12)

    def test_single_point_unchanged(self):
        np.testing.assert_allclose(unwrap_phases([5.0], [2.9]), [2.9])

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError, match="sorted"):
            unwrap_phases([1.0, 0.5], [0.0, 0.0])


class TestFitPhaseVsFrequency:
    def test_two_points_exact(self):
        line = fit_phase_vs_frequency([0.0, 1e4], [0.1, 0.5])
        assert line.slope == pytest.approx(0.4 / 1e4, rel=1e-12)
        assert line.intercept == pytest.approx(0.1, abs=1e-12)
        assert np.isnan(line.chisq_red)

    def test_weighted_recovery(self):
        rng = np.random.default_rng(31)
        f = np.linspace(0, 20e3, 9)
        sigma = np.full(9, 0.02)
        truth_slope, truth_icpt = 3e-5, 0.05
        pulls = []
        for _ in range(400):
            p = truth_slope * f + truth_icpt + rng.normal(0, sigma)
            line = fit_phase_vs_frequency(f, p, sigma)
            pulls.append((line.slope - truth_slope) / line.slope_err)
        pulls = np.array(pulls)
        # standard-normal pulls confirm both the estimate and its error
        assert abs(np.mean(pulls)) < 0.2
        assert 0.85 < np.std(pulls) < 1.15

    def test_covariance_symmetric_psd(self):
        line = fit_phase_vs_frequency([0.0, 1e4, 2e4], [0.0, 0.3, 0.61], [0.01, 0.01, 0.01])
        cov = line.covariance
        assert cov.shape == (2, 2)
        assert cov[0, 1] == pytest.approx(cov[1, 0], rel=1e-12)
        assert np.all(np.linalg.eigvalsh(cov) >= 0)

    def test_fewer_than_two_distinct_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            fit_phase_vs_frequency([1e3, 1e3], [0.1, 0.2])
