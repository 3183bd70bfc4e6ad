"""Physical constants pinned to CODATA values.

The constants are frozen at build time and echoed into the metadata of
every output file, so that archived data remains interpretable even if a
future CODATA adjustment shifts the recommended values.
"""

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class PhysicalConstants:
    """Neutron constants in SI units.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant (J s).
    h : float
        Planck constant (J s).
    neutron_mass : float
        Neutron rest mass (kg).
    neutron_moment : float
        Neutron magnetic moment (J/T). Negative: the moment is
        antiparallel to the spin.
    """

    hbar: float = 1.054571817e-34
    h: float = 6.62607015e-34
    neutron_mass: float = 1.67492749804e-27
    neutron_moment: float = -9.6623651e-27

    def __post_init__(self):
        if self.neutron_moment >= 0:
            raise ValueError("neutron magnetic moment must be negative")
        if min(self.hbar, self.h, self.neutron_mass) <= 0:
            raise ValueError("hbar, h and the neutron mass must be positive")

    @property
    def gyromagnetic(self) -> float:
        """Spin-flip angular frequency per tesla, -2*mu/hbar (rad/s/T).

        Positive for the neutron because mu < 0.
        """
        return -2.0 * self.neutron_moment / self.hbar

    def as_dict(self) -> dict:
        return asdict(self)


CODATA = PhysicalConstants()
