"""Virtual runs of the measurement protocol.

This module reproduces, on the simulated beamline, the adjustment and
measurement sequence used at the instrument: position scans that align
the guide-field precession between the preparation coil, the RFG and the
analysis coil; the Larmor-accelerator scan that re-aligns the spins of
the two paths; the amplitude scan that sets the cyclic condition for each
rotation frequency; and finally interferogram acquisition with optional
seeded Poisson counting noise.

The single-beam adjustment scans model the DC1 / DC2 coils as ideal pi/2
rotators about x and the supermirror as a +z projective filter, which is
the arrangement used while the absorber blocks one path. Distances enter
only through the Larmor phase accumulated in the guide field, so "auto"
geometry resolves every stretch to exactly one precession period, the
same condition the position scans lock onto.
"""

from dataclasses import dataclass, replace

import numpy as np

from .constants import CODATA, PhysicalConstants
from . import spinor as sp
from .beamline import (
    Analyzer,
    BeamlineConfig,
    DCRotator,
    NeutronKinematics,
    RotatingField,
    StaticField,
    TwoPathState,
    analyzer_intensity,
    detected_intensity,
    propagate_beamline,
    propagate_segment,
)


class PhysicsError(Exception):
    """A physically impossible request (precondition violation)."""


def mashhoon_phase(omega: float, t1: float) -> float:
    """Phase W*t1/2 acquired by the spin state over one cyclic evolution."""
    return 0.5 * omega * t1


def cyclic_amplitude_closed_form(
    omega: float, t1: float, constants: PhysicalConstants = CODATA
) -> float:
    """Field amplitude that closes the spin path in exactly the dwell time.

    Solves t1*sqrt(w1^2 + W^2) = 2*pi for w1 and converts to tesla. The
    required amplitude decreases strictly with the rotation frequency and
    reaches zero when the field rotation alone completes a full turn.
    """
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    if omega * t1 >= 2.0 * np.pi:
        raise PhysicsError(
            f"no cyclic amplitude for omega={omega:.6g} rad/s, t1={t1:.6g} s: "
            "field rotation alone already exceeds one cycle"
        )
    w1 = np.sqrt((2.0 * np.pi / t1) ** 2 - omega**2)
    return w1 / constants.gyromagnetic


@dataclass(frozen=True)
class Instrument:
    """Instrument parameters, SI units, with 'auto' geometry as None.

    ``rfg_length`` (and with it the dwell time t1) is a free design
    choice of the simulated instrument, not a documented property of the
    real one. ``rfg_path`` selects which interferometer path holds the
    RFG ("II" as in the beamline sketch, "I" as in the adjustment-
    procedure description; both occur). ``x_imbalance`` feeds the
    elliptical-field systematic through to the RFG segment.
    """

    wavelength: float = 1.9e-10
    guide_field: float = 9e-4
    rfg_length: float = 0.02
    rfg_path: str = "II"
    arm_guide_length: float | None = None
    dc1_plate_distance: float | None = None
    plate_dc2_distance: float | None = None
    b_loc: float | None = None
    precession_mismatch: float = 0.0
    contrast: float = 0.75
    analyzer_t_pass: float = 0.4
    analyzer_t_block: float = 0.0
    x_imbalance: float = 0.0
    rfg_steps: int = 4096
    constants: PhysicalConstants = CODATA

    def __post_init__(self):
        if self.rfg_path not in ("I", "II"):
            raise ValueError("rfg_path must be 'I' or 'II'")
        if not self.guide_field > 0:
            raise ValueError("guide_field must be positive")

    @property
    def kinematics(self) -> NeutronKinematics:
        return NeutronKinematics(self.wavelength, self.constants)

    @property
    def velocity(self) -> float:
        return self.kinematics.velocity

    @property
    def t1(self) -> float:
        """Dwell time in the rotating-field region (s)."""
        return self.kinematics.dwell_time(self.rfg_length)

    @property
    def omega0(self) -> float:
        """Guide-field Larmor frequency (rad/s)."""
        return sp.larmor_frequency(self.guide_field, self.constants)

    @property
    def larmor_period_length(self) -> float:
        """Flight distance per full guide-field precession, 2*pi*v/w0 (m)."""
        return 2.0 * np.pi * self.velocity / self.omega0

    def _resolve(self, value: float | None) -> float:
        return self.larmor_period_length if value is None else value

    @property
    def arm_guide(self) -> float:
        return self._resolve(self.arm_guide_length)

    @property
    def dc1_rfg_distance(self) -> float:
        """Preparation-coil to RFG flight distance (scanned during setup)."""
        return self._resolve(self.dc1_plate_distance) + self.arm_guide

    @property
    def rfg_dc2_distance(self) -> float:
        return self.arm_guide + self._resolve(self.plate_dc2_distance)

    @property
    def b_loc_resolved(self) -> float:
        """Larmor-accelerator field (T); auto picks the smallest value that
        brings the two paths' precession difference to a multiple of 2*pi."""
        if self.b_loc is not None:
            return self.b_loc
        deficit = (-(self.omega0 * self.t1 + self.precession_mismatch)) % (2.0 * np.pi)
        return (deficit / self.t1) / self.constants.gyromagnetic

    @property
    def analyzer(self) -> Analyzer:
        """Exit analyzer for the spin-analyzed variant: the DC2 +
        supermirror pair acts as a projective filter along +y."""
        return Analyzer((0.0, 1.0, 0.0), self.analyzer_t_pass, self.analyzer_t_block)


def measurement_config(
    instrument: Instrument, b1: float, omega: float, analyzer: bool = False
) -> BeamlineConfig:
    """Two-path beamline for an interferogram at the given RFG setting.

    The RFG path holds guide / RFG / guide; the reference path mirrors it
    with the Larmor accelerator facing the RFG (and, if configured, the
    injected precession mismatch). Both paths share the arm guide
    lengths, so only the RFG / accelerator stretch differs.
    """
    ins = instrument
    g = ins.arm_guide
    guide = StaticField((0.0, 0.0, ins.guide_field), g)
    rfg = RotatingField(
        b1, omega, -ins.guide_field, ins.rfg_length, x_imbalance=ins.x_imbalance
    )
    accel = StaticField((0.0, 0.0, ins.guide_field + ins.b_loc_resolved), ins.rfg_length)
    rfg_path = (guide, rfg, guide)
    ref_path = [guide, accel]
    if ins.precession_mismatch != 0.0:
        ref_path.append(DCRotator((0.0, 0.0, 1.0), ins.precession_mismatch))
    ref_path.append(guide)
    ref_path = tuple(ref_path)
    path_i, path_ii = (ref_path, rfg_path) if ins.rfg_path == "II" else (rfg_path, ref_path)
    return BeamlineConfig(
        kinematics=ins.kinematics,
        path_i=path_i,
        path_ii=path_ii,
        guide_field=ins.guide_field,
        rfg_length=ins.rfg_length,
        contrast=ins.contrast,
        analyzer=ins.analyzer if analyzer else None,
        rfg_steps=ins.rfg_steps,
    )


# ---------------------------------------------------------------------------
# adjustment scans


@dataclass(frozen=True)
class ScanResult:
    """Sampled intensity curve with its located extremum.

    ``extremum`` is the parabolic refinement of the selected discrete
    extremum; ``minima`` lists every refined interior minimum in grid
    order. ``at_boundary`` flags scans whose best point sits on the grid
    edge (or whose curve is flat), in which case ``extremum`` is just the
    raw grid location of that point.
    """

    parameter: str
    values: np.ndarray
    intensities: np.ndarray
    extremum: float
    extremum_kind: str
    at_boundary: bool
    minima: tuple = ()


def _refine_parabolic(x, y, i: int) -> float:
    """Vertex of the parabola through points i-1, i, i+1."""
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0.0:
        return float(x1)
    return float(x1 - 0.5 * num / den)


def _locate_minima(values: np.ndarray, intensities: np.ndarray) -> ScanResult | tuple:
    """All refined interior minima plus a boundary verdict."""
    y = intensities
    scale = float(np.max(y) - np.min(y))
    if scale <= 1e-14 * max(1.0, float(np.max(np.abs(y)))):
        return (), True, float(values[int(np.argmin(y))])
    idx = [
        i
        for i in range(1, len(y) - 1)
        if y[i] < y[i - 1] and y[i] <= y[i + 1] and (y[i - 1] - y[i]) > 1e-14 * scale
    ]
    minima = tuple(_refine_parabolic(values, y, i) for i in idx)
    if not minima:
        return (), True, float(values[int(np.argmin(y))])
    return minima, False, minima[0]


def _check_grid(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 3:
        raise ValueError("scan grid must be a 1-d array with at least 3 points")
    if not np.all(np.diff(values) > 0):
        raise ValueError("scan grid must be strictly increasing")
    return values


_Z_ANALYZER = Analyzer((0.0, 0.0, 1.0), 0.4, 0.0)
_PI_HALF_X = DCRotator((1.0, 0.0, 0.0), np.pi / 2)


def distance_scan(
    instrument: Instrument, distances, dc_angle: float = np.pi / 2
) -> ScanResult:
    """Intensity versus preparation-coil-to-RFG distance, one path open.

    Both coils act as rotators by ``dc_angle`` about x (the RFG runs in
    its static mode); the transmitted +z intensity oscillates with the
    guide-field precession accumulated in between, one period per
    2*pi*v/w0 of distance, with minima where the precession is a multiple
    of 2*pi. Those minima are where the real coils get bolted down.
    """
    distances = _check_grid(distances)
    ins = instrument
    kin = ins.kinematics
    rot = DCRotator((1.0, 0.0, 0.0), dc_angle)
    out = np.empty(len(distances))
    for k, d in enumerate(distances):
        state = propagate_segment(sp.PLUS_Z, rot, kin)
        state = propagate_segment(state, StaticField((0.0, 0.0, ins.guide_field), d), kin)
        state = propagate_segment(state, rot, kin)
        out[k] = analyzer_intensity(state, _Z_ANALYZER)
    minima, boundary, first = _locate_minima(distances, out)
    return ScanResult("dc1_rfg_distance_m", distances, out, first, "min", boundary, minima)


def bloc_scan(instrument: Instrument, b_loc_grid) -> ScanResult:
    """Intensity versus Larmor-accelerator field with the RFG path blocked.

    With both DC rotators at pi/2, the +z intensity is minimal when the
    total guide precession between them (accelerator segment included,
    plus any injected mismatch) is a multiple of 2*pi: the setting that
    re-aligns the spins of the two paths at the last plate.
    """
    b_loc_grid = _check_grid(b_loc_grid)
    ins = instrument
    kin = ins.kinematics
    pre = StaticField((0.0, 0.0, ins.guide_field), ins.dc1_rfg_distance)
    post = StaticField((0.0, 0.0, ins.guide_field), ins.rfg_dc2_distance)
    out = np.empty(len(b_loc_grid))
    for k, b in enumerate(b_loc_grid):
        state = propagate_segment(sp.PLUS_Z, _PI_HALF_X, kin)
        state = propagate_segment(state, pre, kin)
        state = propagate_segment(
            state, StaticField((0.0, 0.0, ins.guide_field + b), ins.rfg_length), kin
        )
        if ins.precession_mismatch != 0.0:
            state = propagate_segment(
                state, DCRotator((0.0, 0.0, 1.0), ins.precession_mismatch), kin
            )
        state = propagate_segment(state, post, kin)
        state = propagate_segment(state, _PI_HALF_X, kin)
        out[k] = analyzer_intensity(state, _Z_ANALYZER)
    minima, boundary, first = _locate_minima(b_loc_grid, out)
    return ScanResult("b_loc_t", b_loc_grid, out, first, "min", boundary, minima)


def amplitude_scan(instrument: Instrument, omega: float, b1_grid) -> ScanResult:
    """Intensity versus RFG amplitude at a fixed rotation frequency.

    Raising the amplitude from zero drives the spin away from its entry
    orientation and back; the transmitted intensity returns to its
    minimum exactly when the rotating-frame angle accumulates to 2*pi.
    The first interior minimum therefore marks the cyclic amplitude.
    """
    b1_grid = _check_grid(b1_grid)
    ins = instrument
    kin = ins.kinematics
    pre = StaticField((0.0, 0.0, ins.guide_field), ins.dc1_rfg_distance)
    post = StaticField((0.0, 0.0, ins.guide_field), ins.rfg_dc2_distance)
    entry = propagate_segment(propagate_segment(sp.PLUS_Z, _PI_HALF_X, kin), pre, kin)

    if ins.x_imbalance == 0.0:
        exits = [
            sp.evolve_rotating_frame(entry, b1, omega, ins.t1, ins.constants)
            for b1 in b1_grid
        ]
    else:
        # batch the numeric fallback over the grid; one lock-step RK4 run
        n = len(b1_grid)
        b1x = b1_grid * (1.0 + ins.x_imbalance)

        def field(tt):
            return np.stack(
                [b1x * np.cos(omega * tt), np.zeros(n), b1_grid * np.sin(omega * tt)],
                axis=-1,
            )

        batch = sp.numeric_integrate(
            np.tile(entry, (n, 1)), field, np.full(n, ins.t1), ins.rfg_steps
        )
        exits = [row / np.linalg.norm(row) for row in batch]

    out = np.empty(len(b1_grid))
    for k, state in enumerate(exits):
        state = propagate_segment(state, post, kin)
        state = propagate_segment(state, _PI_HALF_X, kin)
        out[k] = analyzer_intensity(state, _Z_ANALYZER)
    minima, boundary, first = _locate_minima(b1_grid, out)
    return ScanResult("b1_t", b1_grid, out, first, "min", boundary, minima)


# ---------------------------------------------------------------------------
# calibration table


@dataclass(frozen=True)
class CalibrationTable:
    """Per-frequency cyclic amplitudes.

    ``b1_cyclic`` holds the closed-form solution consumed by the sweep;
    ``b1_scan`` the amplitude-scan minimum located for the same
    frequency, kept as a cross-check (it must sit within one grid step of
    the closed form), together with the local grid step.
    """

    frequencies: tuple
    b1_cyclic: tuple
    b1_scan: tuple = ()
    scan_step: tuple = ()

    def __post_init__(self):
        if len(self.frequencies) != len(self.b1_cyclic):
            raise ValueError("frequencies and b1_cyclic must have equal length")
        diffs = np.diff(self.b1_cyclic)
        forward = np.diff(self.frequencies)
        if np.any(forward <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(diffs >= 0):
            raise ValueError("b1_cyclic must be strictly decreasing in frequency")

    def b1_for(self, frequency: float) -> float:
        for f, b1 in zip(self.frequencies, self.b1_cyclic):
            if f == frequency or np.isclose(f, frequency, rtol=1e-12, atol=1e-9):
                return b1
        raise PhysicsError(f"no calibration row for frequency {frequency!r} Hz")


def _closed_form_for_frequency(instrument: Instrument, f: float) -> float:
    try:
        return cyclic_amplitude_closed_form(
            2.0 * np.pi * f, instrument.t1, instrument.constants
        )
    except PhysicsError as exc:
        raise PhysicsError(f"f = {f} Hz: {exc}") from exc


def calibration_from_closed_form(
    instrument: Instrument, frequencies
) -> CalibrationTable:
    """Calibration table straight from the cyclic-condition closed form."""
    freqs = tuple(float(f) for f in frequencies)
    b1 = tuple(_closed_form_for_frequency(instrument, f) for f in freqs)
    return CalibrationTable(freqs, b1)


def run_amplitude_calibration(
    instrument: Instrument, frequencies, grid_points: int = 301, grid_margin: float = 1.25
) -> CalibrationTable:
    """Amplitude scans for every frequency in the sweep.

    The scan grid spans [0, grid_margin * B1(0)]. For balanced coil
    currents the located minimum must agree with the cyclic-condition
    closed form within one grid step (anything else means the simulated
    protocol and the analytic condition disagree), and the closed form is
    stored as the calibrated amplitude. With an x-amplitude imbalance the
    closed form no longer applies, so the calibration is empirical: the
    scan minimum itself is stored, exactly as the bench procedure would.
    """
    freqs = tuple(float(f) for f in frequencies)
    b1_top = grid_margin * cyclic_amplitude_closed_form(0.0, instrument.t1, instrument.constants)
    grid = np.linspace(0.0, b1_top, grid_points)
    step = grid[1] - grid[0]
    balanced = instrument.x_imbalance == 0.0
    calibrated, located = [], []
    for f in freqs:
        omega = 2.0 * np.pi * f
        b1_cf = _closed_form_for_frequency(instrument, f)
        scan = amplitude_scan(instrument, omega, grid)
        if scan.at_boundary:
            raise PhysicsError(f"amplitude scan at f={f} Hz found no interior minimum")
        if balanced and abs(scan.extremum - b1_cf) > step:
            raise PhysicsError(
                f"amplitude scan minimum at f={f} Hz is {scan.extremum!r} T, "
                f"more than one grid step from the closed form {b1_cf!r} T"
            )
        calibrated.append(b1_cf if balanced else scan.extremum)
        located.append(scan.extremum)
    return CalibrationTable(freqs, tuple(calibrated), tuple(located), (step,) * len(freqs))


# ---------------------------------------------------------------------------
# interferograms


@dataclass(frozen=True)
class Interferogram:
    """Counts versus phase-shifter setting at one rotation frequency.

    ``expected`` holds the noiseless mean counts per point; ``counts``
    the Poisson sample, or None in noiseless mode. The generator behind
    seeded acquisition is numpy's PCG64, so a (seed, grid) pair pins the
    counts bit for bit.
    """

    frequency: float
    chi: np.ndarray
    expected: np.ndarray
    counts: np.ndarray | None
    counting_time: float
    rate: float
    seed: int | None
    b1: float
    t1: float
    analyzer: bool = False

    def data(self) -> np.ndarray:
        """Counts if sampled, expected counts otherwise."""
        return self.expected if self.counts is None else self.counts.astype(float)


def default_chi_grid(points: int = 16, cycles: float = 2.0) -> np.ndarray:
    """Evenly spaced phase-shifter settings over ``cycles`` fringes."""
    if points < 4:
        raise ValueError("need at least 4 phase-shifter settings")
    return np.linspace(0.0, 2.0 * np.pi * cycles, points, endpoint=False)


def record_interferogram(
    instrument: Instrument,
    omega: float,
    b1: float,
    chi_grid,
    rate: float,
    counting_time: float,
    seed: int | None = None,
    analyzer: bool = False,
) -> Interferogram:
    """Acquire one interferogram at fixed RFG settings.

    The spin propagation does not depend on the phase-shifter setting, so
    the two-path state is computed once and chi is applied per point as
    the pure amplitude phase it is; this is exactly equivalent to
    propagating the beamline separately at every chi.
    """
    chi_grid = np.asarray(chi_grid, dtype=float)
    if chi_grid.size == 0:
        raise ValueError("chi grid must not be empty")
    if not (rate > 0 and counting_time > 0):
        raise ValueError("count rate and counting time must be positive")
    config = measurement_config(instrument, b1, omega, analyzer=analyzer)
    base = propagate_beamline(config, 0.0)
    intens = np.array(
        [
            detected_intensity(
                TwoPathState(base.amp_i, base.spin_i, base.amp_ii * np.exp(1j * chi), base.spin_ii),
                config,
            )
            for chi in chi_grid
        ]
    )
    expected = rate * counting_time * intens
    counts = None
    if seed is not None:
        counts = np.random.default_rng(seed).poisson(expected)
    return Interferogram(
        frequency=omega / (2.0 * np.pi),
        chi=chi_grid,
        expected=expected,
        counts=counts,
        counting_time=counting_time,
        rate=rate,
        seed=seed,
        b1=b1,
        t1=instrument.t1,
        analyzer=analyzer,
    )


def frequency_sweep(
    instrument: Instrument,
    frequencies,
    calibration: CalibrationTable,
    rate: float,
    counting_time: float,
    seed: int | None = None,
    analyzer: bool = False,
    chi_grid=None,
) -> list:
    """One interferogram per frequency, each at its calibrated amplitude.

    The f = 0 entry is the static case (a plain 2*pi rotation about x)
    and provides the phase reference for the rest of the sweep. With a
    seed, each frequency draws from its own child generator spawned from
    the master seed, so the sweep is reproducible as a whole and per
    frequency.
    """
    if chi_grid is None:
        chi_grid = default_chi_grid()
    freqs = [float(f) for f in frequencies]
    child_seeds = [None] * len(freqs)
    if seed is not None:
        child_seeds = np.random.SeedSequence(seed).spawn(len(freqs))
    out = []
    for f, child in zip(freqs, child_seeds):
        b1 = calibration.b1_for(f)
        gram = record_interferogram(
            instrument,
            2.0 * np.pi * f,
            b1,
            chi_grid,
            rate,
            counting_time,
            seed=None,
            analyzer=analyzer,
        )
        if child is not None:
            counts = np.random.default_rng(child).poisson(gram.expected)
            gram = replace(gram, counts=counts, seed=seed)
        out.append(gram)
    return out
