"""Spin-rotation coupling in a simulated polarized-neutron interferometer.

The package evolves spin-1/2 states through a configurable beamline
containing a rotating magnetic field, reruns the instrument's calibration
and interferogram protocols virtually, and recovers the linear
phase-versus-frequency signature of the coupling with the same sinusoid
and line fits used on real count data.
"""

from .constants import CODATA, PhysicalConstants
from .spinor import (
    MINUS_Y,
    MINUS_Z,
    PLUS_X,
    PLUS_Y,
    PLUS_Z,
    alpha_magnitude,
    bloch_vector,
    evolve_rotating_frame,
    larmor_frequency,
    numeric_integrate,
    overlap,
    rotation_unitary,
)
from .beamline import (
    Analyzer,
    BeamlineConfig,
    DCRotator,
    FieldFree,
    NeutronKinematics,
    RotatingField,
    StaticField,
    TwoPathState,
    analyzer_intensity,
    detected_intensity,
    dwell_time,
    propagate_beamline,
    propagate_segment,
    velocity_from_wavelength,
)
from .experiment import (
    CalibrationTable,
    Instrument,
    Interferogram,
    PhysicsError,
    ScanResult,
    amplitude_scan,
    bloc_scan,
    calibration_from_closed_form,
    cyclic_amplitude_closed_form,
    default_chi_grid,
    distance_scan,
    frequency_sweep,
    mashhoon_phase,
    measurement_config,
    record_interferogram,
    run_amplitude_calibration,
)
from .analysis import (
    FitResult,
    LinearFit,
    fit_phase_vs_frequency,
    fit_sinusoid,
    relative_phase,
    sweep_phase_fit,
    unwrap_phases,
    wrap_angle,
)

__version__ = "0.1.0"
