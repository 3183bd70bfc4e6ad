"""Ordered-segment model of the polarized-neutron interferometer.

A beamline path is a list of field segments traversed at the neutron's
de Broglie velocity. Interferometer plates are ideal lossless 50/50
splitters; every non-ideality of the real crystal is absorbed into a
single empirical contrast factor on the interference term. The phase
shifter is an abstract phase chi applied to path II, and the optional
spin analyzer is a projective filter with independent transmissions for
the pass and block components.

Static segments state the total field the neutron experiences (guide
field included); the rotating-field generator (RFG) segment states the
coil's own field and is combined with the ambient guide field at
propagation time, because the interplay of its z-offset with the guide
field decides whether the exact rotating-frame solution applies.
"""

from dataclasses import dataclass

import numpy as np

from .constants import CODATA, PhysicalConstants
from . import spinor as sp


def velocity_from_wavelength(wavelength: float, constants: PhysicalConstants = CODATA) -> float:
    """de Broglie velocity h/(m*lambda) in m/s."""
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    return constants.h / (constants.neutron_mass * wavelength)


@dataclass(frozen=True)
class NeutronKinematics:
    """Wavelength (m) and the derived flight velocity (m/s)."""

    wavelength: float
    constants: PhysicalConstants = CODATA

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def velocity(self) -> float:
        return velocity_from_wavelength(self.wavelength, self.constants)

    def dwell_time(self, length: float) -> float:
        """Time of flight through a segment of the given length (s)."""
        if not length > 0:
            raise ValueError("segment length must be positive")
        return length / self.velocity


def dwell_time(length: float, kinematics: NeutronKinematics) -> float:
    return kinematics.dwell_time(length)


@dataclass(frozen=True)
class StaticField:
    """Uniform field segment; ``b`` is the total field vector in tesla."""

    b: tuple
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("segment length must be positive")
        if len(self.b) != 3 or not all(np.isfinite(self.b)):
            raise ValueError("b must be a finite 3-vector in tesla")


@dataclass(frozen=True)
class RotatingField:
    """RFG coil segment: B1*(cos(W t), 0, sin(W t)) plus a DC z-offset.

    ``z_offset`` is the coil's static z-field; setting it to the negative
    of the guide field (the instrument default) cancels the guide field
    inside the coil, so the neutron sees the pure rotating field.
    ``x_imbalance`` scales the x-amplitude to B1*(1 + x_imbalance) and
    models a misadjusted pair of coil currents (elliptical field); it is
    one plausible mechanism for the systematic deviations such hardware
    shows, not a measured property.
    """

    b1: float
    omega: float
    z_offset: float
    length: float
    x_imbalance: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("segment length must be positive")
        if self.b1 < 0:
            raise ValueError("b1 must be nonnegative")


@dataclass(frozen=True)
class DCRotator:
    """Idealized spin rotator applying a fixed rotation, axis in lab frame."""

    axis: tuple
    angle: float
    length: float = 1e-3

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("segment length must be positive")


@dataclass(frozen=True)
class FieldFree:
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("segment length must be positive")


FieldSegment = StaticField | RotatingField | DCRotator | FieldFree


@dataclass(frozen=True)
class Analyzer:
    """Projective spin filter (supermirror plus its matching DC rotator).

    Transmits the component along ``axis`` with probability ``t_pass``
    and the orthogonal component with ``t_block``.
    """

    axis: tuple
    t_pass: float
    t_block: float = 0.0

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        if ax.shape != (3,) or abs(np.linalg.norm(ax) - 1.0) > 1e-9:
            raise ValueError("analyzer axis must be a unit 3-vector")
        for t in (self.t_pass, self.t_block):
            if not 0.0 <= t <= 1.0:
                raise ValueError("transmissions must lie in [0, 1]")


@dataclass(frozen=True)
class TwoPathState:
    """Amplitude and spinor of each interferometer path."""

    amp_i: complex
    spin_i: np.ndarray
    amp_ii: complex
    spin_ii: np.ndarray


@dataclass(frozen=True)
class BeamlineConfig:
    """Validated in-memory beamline: kinematics, per-path segments, optics.

    ``path_i``/``path_ii`` start at the first interferometer plate, where
    the incoming state is |+y> by convention (the upstream preparation
    coil and guide-field stretch are common to both paths and drop out of
    every interference observable). The phase shifter chi multiplies the
    amplitude of path II.
    """

    kinematics: NeutronKinematics
    path_i: tuple
    path_ii: tuple
    guide_field: float
    rfg_length: float
    contrast: float = 1.0
    analyzer: Analyzer | None = None
    rfg_steps: int = 4096

    def __post_init__(self):
        if not 0.0 <= self.contrast <= 1.0:
            raise ValueError("contrast must lie in [0, 1]")
        if not self.rfg_length > 0:
            raise ValueError("rfg_length must be positive")
        for name, segs in (("path_i", self.path_i), ("path_ii", self.path_ii)):
            for idx, seg in enumerate(segs):
                if not isinstance(seg, (StaticField, RotatingField, DCRotator, FieldFree)):
                    raise ValueError(f"{name}[{idx}]: not a field segment: {seg!r}")


def propagate_segment(
    state: np.ndarray,
    segment: FieldSegment,
    kinematics: NeutronKinematics,
    guide_field: float = 0.0,
    steps: int = 4096,
) -> np.ndarray:
    """Evolve a spinor through one segment at the flight velocity.

    ``guide_field`` is the ambient z-field the segment is immersed in; it
    only matters for ``RotatingField``, whose coil field adds to it.
    Static segments already state their total field, DC rotators are
    ideal, and field-free segments are the identity.

    The rotating segment uses the exact rotating-frame propagator when
    the net static z-component vanishes and the coil currents are
    balanced; any residual offset or imbalance falls back to fixed-step
    integration of the full time-dependent field.
    """
    state = sp.check_normalized(state)
    constants = kinematics.constants

    if isinstance(segment, FieldFree):
        return state.copy()

    if isinstance(segment, DCRotator):
        return sp.rotation_unitary(segment.axis, segment.angle) @ state

    t = kinematics.dwell_time(segment.length)

    if isinstance(segment, StaticField):
        b = np.asarray(segment.b, dtype=float)
        mag = np.linalg.norm(b)
        if mag == 0.0:
            return state.copy()
        return sp.rotation_unitary(b / mag, sp.larmor_frequency(mag, constants) * t) @ state

    if isinstance(segment, RotatingField):
        net_z = segment.z_offset + guide_field
        if net_z == 0.0 and segment.x_imbalance == 0.0:
            return sp.evolve_rotating_frame(state, segment.b1, segment.omega, t, constants)
        b1x = segment.b1 * (1.0 + segment.x_imbalance)

        def field(tt):
            return np.array(
                [b1x * np.cos(segment.omega * tt), 0.0, segment.b1 * np.sin(segment.omega * tt) + net_z]
            )

        out = sp.numeric_integrate(state, field, t, steps)
        return out / np.linalg.norm(out)

    raise TypeError(f"unknown segment type: {segment!r}")


def propagate_beamline(
    config: BeamlineConfig, chi: float, block: str | None = None
) -> TwoPathState:
    """Split |+y> 50/50, propagate both paths, apply chi to path II.

    ``block`` = "I" or "II" zeroes that path's amplitude (Cd absorber
    inserted); the spinor is still propagated for diagnostics.
    """
    if block not in (None, "I", "II"):
        raise ValueError("block must be None, 'I' or 'II'")
    amp = 1.0 / np.sqrt(2.0)
    spins = []
    for name, segs in (("path_i", config.path_i), ("path_ii", config.path_ii)):
        state = sp.PLUS_Y
        for idx, seg in enumerate(segs):
            try:
                state = propagate_segment(
                    state, seg, config.kinematics, config.guide_field, config.rfg_steps
                )
            except ValueError as exc:
                raise ValueError(f"{name}[{idx}]: {exc}") from exc
        spins.append(state)
    amp_i = 0.0 if block == "I" else amp
    amp_ii = 0.0 if block == "II" else amp * np.exp(1j * chi)
    return TwoPathState(amp_i, spins[0], amp_ii, spins[1])


def analyzer_intensity(state: np.ndarray, analyzer: Analyzer) -> float:
    """Transmitted intensity of a single normalized spinor through the filter."""
    ax = np.asarray(analyzer.axis, dtype=float)
    proj = 0.5 * (np.eye(2, dtype=complex) + ax[0] * sp.SIGMA_X + ax[1] * sp.SIGMA_Y + ax[2] * sp.SIGMA_Z)
    p_pass = float(np.vdot(proj @ state, proj @ state).real)
    return analyzer.t_pass * p_pass + analyzer.t_block * (float(np.vdot(state, state).real) - p_pass)


def detected_intensity(state: TwoPathState, config: BeamlineConfig) -> float:
    """O-beam intensity in [0, 1] with contrast on the interference term.

    Without the analyzer this is ||c_I xi_I + c_II xi_II||^2 / 2 with the
    cross term scaled by the contrast. With the analyzer, the recombined
    state is split along the analyzer axis and the two components are
    weighted by their transmissions, contrast again applied to the cross
    terms only.
    """
    ci, cii = complex(state.amp_i), complex(state.amp_ii)
    xi, xii = state.spin_i, state.spin_ii
    v = config.contrast

    if config.analyzer is None:
        projectors = ((np.eye(2, dtype=complex), 1.0),)
    else:
        ax = np.asarray(config.analyzer.axis, dtype=float)
        n_sigma = ax[0] * sp.SIGMA_X + ax[1] * sp.SIGMA_Y + ax[2] * sp.SIGMA_Z
        projectors = (
            (0.5 * (np.eye(2, dtype=complex) + n_sigma), config.analyzer.t_pass),
            (0.5 * (np.eye(2, dtype=complex) - n_sigma), config.analyzer.t_block),
        )

    total = 0.0
    for proj, weight in projectors:
        pi, pii = proj @ xi, proj @ xii
        direct = abs(ci) ** 2 * np.vdot(pi, pi).real + abs(cii) ** 2 * np.vdot(pii, pii).real
        cross = 2.0 * (np.conjugate(ci) * cii * np.vdot(pi, pii)).real
        total += weight * (direct + v * cross)
    return 0.5 * float(total)
