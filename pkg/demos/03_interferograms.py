"""Interferograms at four rotation frequencies, with counting noise.

Counts versus phase-shifter setting for 2.5, 7.5, 12.5 and 17.5 kHz,
each at its calibrated cyclic amplitude. As the frequency rises the
fringes shift continuously: that shift is the phase W*t1/2 the spinor
acquires in one closed loop, invisible to any polarization analysis.

Run:  python demos/03_interferograms.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from spinrot import (
    Instrument,
    calibration_from_closed_form,
    fit_sinusoid,
    frequency_sweep,
)

OUT = "demos/output"


def main():
    ins = Instrument()
    freqs = [2.5e3, 7.5e3, 12.5e3, 17.5e3]
    table = calibration_from_closed_form(ins, freqs)
    chi = np.linspace(0.0, 4 * np.pi, 16, endpoint=False)
    noisy = frequency_sweep(ins, freqs, table, rate=25.0, counting_time=20.0,
                            seed=20260811, chi_grid=chi)
    smooth_chi = np.linspace(0.0, 4 * np.pi, 400)

    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True, sharey=True)
    for ax, gram in zip(axes.ravel(), noisy):
        fit = fit_sinusoid(gram)
        ax.errorbar(gram.chi, gram.counts, yerr=np.sqrt(gram.counts), fmt="o", ms=4)
        ax.plot(smooth_chi, fit.offset + fit.amplitude * np.cos(smooth_chi + fit.phase), "-")
        ax.set_title(f"f = {gram.frequency/1e3:.1f} kHz, fitted phase {fit.phase:+.3f} rad")
        print(f"f = {gram.frequency/1e3:4.1f} kHz: phase {fit.phase:+.4f} +/- {fit.phase_err:.4f} rad, "
              f"amplitude {fit.amplitude:.1f} counts, chisq_red {fit.chisq_red:.2f}")
    for ax in axes[1]:
        ax.set_xlabel("phase shifter chi (rad)")
    for ax in axes[:, 0]:
        ax.set_ylabel("counts / 20 s")
    fig.tight_layout()
    fig.savefig(f"{OUT}/03_interferograms.png", dpi=120)
    print(f"wrote {OUT}/03_interferograms.png")


if __name__ == "__main__":
    import os

    os.makedirs(OUT, exist_ok=True)
    main()
