"""The three adjustment scans that set up the virtual instrument.

1. Distance scan: with both spin rotators at pi/2, the transmitted
   intensity oscillates with the guide-field precession accumulated
   between them; the coils are fixed at a minimum, one Larmor period
   apart.
2. Larmor-accelerator scan: with the RFG path blocked, the z-coil
   current in the other path is scanned until the two paths' precession
   difference is a multiple of 2*pi.
3. Amplitude scan: for each rotation frequency, the RFG amplitude is
   raised from zero until the entry minimum reappears, which happens
   exactly at the cyclic condition. The required amplitude falls with
   frequency.

Run:  python demos/02_calibration_scans.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from spinrot import (
    Instrument,
    amplitude_scan,
    bloc_scan,
    cyclic_amplitude_closed_form,
    distance_scan,
)

OUT = "demos/output"


def main():
    ins = Instrument()
    fig, axes = plt.subplots(1, 3, figsize=(14, 4))

    dist = distance_scan(ins, np.linspace(0.002, 0.2, 500))
    axes[0].plot(dist.values * 100, dist.intensities)
    for m in dist.minima:
        axes[0].axvline(m * 100, color="gray", ls=":")
    axes[0].set_xlabel("DC1-RFG distance (cm)")
    axes[0].set_ylabel("analyzer intensity")
    axes[0].set_title("distance scan")
    print(f"distance-scan minima at {[f'{m*100:.2f} cm' for m in dist.minima]}")
    print(f"  spacing {np.diff(dist.minima)[0]*100:.3f} cm, "
          f"2*pi*v/w0 = {ins.larmor_period_length*100:.3f} cm")

    bloc = bloc_scan(ins, np.linspace(0.0, 4e-3, 400))
    axes[1].plot(bloc.values * 1e4, bloc.intensities)
    axes[1].axvline(bloc.extremum * 1e4, color="gray", ls=":")
    axes[1].set_xlabel("Larmor accelerator field (G)")
    axes[1].set_title("accelerator scan")
    print(f"accelerator minimum at {bloc.extremum*1e4:.3f} G "
          f"(auto value {ins.b_loc_resolved*1e4:.3f} G)")

    grid = np.linspace(0.0, 1.25 * cyclic_amplitude_closed_form(0.0, ins.t1), 400)
    for f in (0.0, 10e3, 20e3):
        scan = amplitude_scan(ins, 2 * np.pi * f, grid)
        axes[2].plot(grid * 1e3, scan.intensities, label=f"{f/1e3:.0f} kHz")
        closed = cyclic_amplitude_closed_form(2 * np.pi * f, ins.t1)
        print(f"amplitude minimum at f = {f/1e3:5.1f} kHz: scan {scan.extremum*1e3:.4f} mT, "
              f"closed form {closed*1e3:.4f} mT")
    axes[2].set_xlabel("B1 (mT)")
    axes[2].set_title("amplitude scans (minimum = cyclic condition)")
    axes[2].legend()

    fig.tight_layout()
    fig.savefig(f"{OUT}/02_calibration_scans.png", dpi=120)
    print(f"wrote {OUT}/02_calibration_scans.png")


if __name__ == "__main__":
    import os

    os.makedirs(OUT, exist_ok=True)
    main()
