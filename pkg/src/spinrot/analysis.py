"""Phase extraction from interferograms.

The interferogram model is I(chi) = c + a*cos(chi) + b*sin(chi) with the
fringe frequency in chi known to be one cycle per 2*pi, so the fit is
linear in (c, a, b): no starting guess, a global optimum, and closed-form
standard errors from the normal equations. Points are weighted by the
Poisson variance of the counts, floored at one count for empty bins.

Phases follow the convention I = c + A*cos(chi + phi) with A >= 0 and
phi = atan2(-b, a) in (-pi, pi]. Fitted phases are referenced to the
static-case interferogram, unwrapped along the frequency axis, and
finally fitted with a weighted straight line whose slope measures the
per-hertz phase accumulated in one cyclic evolution.
"""

from dataclasses import dataclass

import numpy as np


def wrap_angle(x: float) -> float:
    """Wrap to the interval (-pi, pi]."""
    r = float(np.remainder(x + np.pi, 2.0 * np.pi) - np.pi)
    if r <= -np.pi:
        r += 2.0 * np.pi
    return r


@dataclass(frozen=True)
class FitResult:
    """Sinusoid fit: counts offset, fringe amplitude, fringe phase.

    ``phase_constrained`` is False when the amplitude is smaller than
    twice its own standard error; the phase (and anything derived from
    it) is meaningless in that case.
    """

    offset: float
    amplitude: float
    phase: float
    offset_err: float
    amplitude_err: float
    phase_err: float
    chisq_red: float
    phase_constrained: bool


@dataclass(frozen=True)
class LinearFit:
    """Weighted straight-line fit of phase versus frequency."""

    slope: float
    intercept: float
    slope_err: float
    intercept_err: float
    covariance: np.ndarray
    chisq_red: float


def _interferogram_arrays(data):
    if hasattr(data, "chi"):
        return np.asarray(data.chi, dtype=float), data.data()
    chi, y = data
    return np.asarray(chi, dtype=float), np.asarray(y, dtype=float)


def fit_sinusoid(data) -> FitResult:
    """Weighted linear least squares of c + a*cos(chi) + b*sin(chi).

    Parameters
    ----------
    data : Interferogram or (chi, counts) pair
        At least 4 points whose chi values span at least one fringe
        period (up to the trailing grid gap).

    Returns
    -------
    FitResult with errors propagated from the normal equations, using
    the Poisson weights as known variances (no rescaling by chi^2).
    """
    chi, y = _interferogram_arrays(data)
    n = len(chi)
    if n < 4:
        raise ValueError("need at least 4 interferogram points")
    span = float(np.max(chi) - np.min(chi))
    if span < 2.0 * np.pi * (1.0 - 1.0 / n) - 1e-9:
        raise ValueError("chi values must span at least one fringe period")

    w = 1.0 / np.maximum(y, 1.0)
    design = np.column_stack([np.ones(n), np.cos(chi), np.sin(chi)])
    a_mat = design.T @ (w[:, None] * design)
    b_vec = design.T @ (w * y)
    try:
        params = np.linalg.solve(a_mat, b_vec)
        cov = np.linalg.inv(a_mat)
    except np.linalg.LinAlgError as exc:
        raise ValueError("rank-deficient interferogram design (chi values coincide?)") from exc

    c, a, b = params
    resid = y - design @ params
    chisq_red = float(np.sum(w * resid**2) / (n - 3))

    amp = float(np.hypot(a, b))
    caa, cab, cbb = cov[1, 1], cov[1, 2], cov[2, 2]
    if amp > 0.0:
        phase = wrap_angle(np.arctan2(-b, a))
        amp_err = float(np.sqrt(max(a**2 * caa + 2 * a * b * cab + b**2 * cbb, 0.0)) / amp)
        phase_err = float(np.sqrt(max(b**2 * caa - 2 * a * b * cab + a**2 * cbb, 0.0)) / amp**2)
    else:
        phase = 0.0
        amp_err = float(np.sqrt(0.5 * (caa + cbb)))
        phase_err = np.pi
    constrained = amp >= 2.0 * amp_err and phase_err < np.pi
    return FitResult(
        offset=float(c),
        amplitude=amp,
        phase=phase,
        offset_err=float(np.sqrt(cov[0, 0])),
        amplitude_err=amp_err,
        phase_err=min(phase_err, np.pi),
        chisq_red=chisq_red,
        phase_constrained=constrained,
    )


def relative_phase(fit: FitResult, reference: FitResult) -> tuple:
    """Fitted phase relative to a reference fit.

    Returns (phase, sigma): the difference wrapped to (-pi, pi] and the
    quadrature sum of the two phase errors.
    """
    for which, f in (("fit", fit), ("reference", reference)):
        if not f.phase_constrained:
            raise ValueError(f"{which} has an unconstrained phase; cannot reference it")
    return (
        wrap_angle(fit.phase - reference.phase),
        float(np.hypot(fit.phase_err, reference.phase_err)),
    )


def unwrap_phases(frequencies, phases) -> np.ndarray:
    """Continuity-restored phases along an ascending frequency series.

    The first point is kept; each later phase is shifted by the multiple
    of 2*pi that brings it closest to the linear extrapolation of the two
    previous unwrapped points (or to the previous point alone while only
    one exists).
    """
    f = np.asarray(frequencies, dtype=float)
    p = np.asarray(phases, dtype=float)
    if f.shape != p.shape or f.ndim != 1:
        raise ValueError("frequencies and phases must be equal-length 1-d arrays")
    if len(f) > 1 and not np.all(np.diff(f) > 0):
        raise ValueError("series must be sorted by strictly increasing frequency")
    out = p.copy()
    for k in range(1, len(p)):
        if k == 1:
            target = out[0]
        else:
            slope = (out[k - 1] - out[k - 2]) / (f[k - 1] - f[k - 2])
            target = out[k - 1] + slope * (f[k] - f[k - 1])
        out[k] = p[k] + 2.0 * np.pi * np.round((target - p[k]) / (2.0 * np.pi))
    return out


def fit_phase_vs_frequency(frequencies, phases, sigma=None) -> LinearFit:
    """Weighted least-squares line through (frequency, phase) points.

    ``sigma`` gives per-point phase standard errors; omitted, all points
    weigh equally. Errors come from the normal equations with the given
    sigmas treated as known. With exactly two points the line is exact
    and the reduced chi-square is undefined (NaN).
    """
    f = np.asarray(frequencies, dtype=float)
    p = np.asarray(phases, dtype=float)
    if len(np.unique(f)) < 2:
        raise ValueError("need at least 2 distinct frequencies")
    w = np.ones_like(f) if sigma is None else 1.0 / np.asarray(sigma, dtype=float) ** 2
    design = np.column_stack([f, np.ones_like(f)])
    a_mat = design.T @ (w[:, None] * design)
    params = np.linalg.solve(a_mat, design.T @ (w * p))
    cov = np.linalg.inv(a_mat)
    resid = p - design @ params
    dof = len(f) - 2
    chisq_red = float(np.sum(w * resid**2) / dof) if dof > 0 else float("nan")
    return LinearFit(
        slope=float(params[0]),
        intercept=float(params[1]),
        slope_err=float(np.sqrt(cov[0, 0])),
        intercept_err=float(np.sqrt(cov[1, 1])),
        covariance=cov,
        chisq_red=chisq_red,
    )


def sweep_phase_fit(interferograms) -> tuple:
    """Reference, unwrap and line-fit a whole sweep of interferograms.

    Returns (per_fit, rel_phases, rel_sigmas, linear_fit_or_None): the
    per-interferogram FitResults sorted by frequency, the unwrapped
    phases relative to the lowest-frequency (static) interferogram, their
    errors, and the straight-line fit when at least two distinct
    frequencies are present.
    """
    grams = sorted(interferograms, key=lambda g: g.frequency)
    fits = [fit_sinusoid(g) for g in grams]
    freqs = np.array([g.frequency for g in grams])
    reference = fits[0]
    rel = np.empty(len(fits))
    sig = np.empty(len(fits))
    for k, fit in enumerate(fits):
        rel[k], sig[k] = relative_phase(fit, reference)
    rel = unwrap_phases(freqs, rel)
    line = None
    if len(np.unique(freqs)) >= 2:
        line = fit_phase_vs_frequency(freqs, rel, sig)
    return fits, rel, sig, line
