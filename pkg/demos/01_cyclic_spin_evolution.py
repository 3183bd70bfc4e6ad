"""Spin evolution inside the rotating field and the cyclic phase.

A neutron flying along +y enters a field that rotates in the x-z plane.
When the field amplitude is tuned so the rotating-frame angle reaches
exactly 2*pi during the flight, the spin traces a closed loop on the
Bloch sphere, returning to +y, while the spinor itself picks up the
phase pi + W*t1/2: the polarization is blind to the rotation frequency
but the quantum phase is not.

Run:  python demos/01_cyclic_spin_evolution.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from spinrot import (
    Instrument,
    PLUS_Y,
    bloch_vector,
    cyclic_amplitude_closed_form,
    evolve_rotating_frame,
    mashhoon_phase,
    overlap,
)

OUT = "demos/output"


def main():
    ins = Instrument()
    t1 = ins.t1
    print(f"dwell time through the rotating-field region: t1 = {t1 * 1e6:.3f} us")

    # Bloch trajectory over one cyclic evolution at 10 kHz
    f = 10e3
    omega = 2 * np.pi * f
    b1 = cyclic_amplitude_closed_form(omega, t1)
    times = np.linspace(0.0, t1, 400)
    traj = np.array([bloch_vector(evolve_rotating_frame(PLUS_Y, b1, omega, t)) for t in times])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for comp, label in zip(traj.T, ("<sx>", "<sy>", "<sz>")):
        ax1.plot(times * 1e6, comp, label=label)
    ax1.set_xlabel("time (us)")
    ax1.set_ylabel("spin expectation")
    ax1.set_title(f"closed spin path at f = {f/1e3:.0f} kHz, B1 = {b1*1e3:.3f} mT")
    ax1.legend()

    # the phase of the final state versus rotation frequency
    freqs = np.linspace(0.0, 20e3, 41)
    phases = []
    for fk in freqs:
        wk = 2 * np.pi * fk
        out = evolve_rotating_frame(PLUS_Y, cyclic_amplitude_closed_form(wk, t1), wk, t1)
        phases.append(np.angle(overlap(PLUS_Y, out)) % (2 * np.pi))
    phases = np.array(phases)
    ax2.plot(freqs / 1e3, phases, ".", label="arg <+y|final>")
    ax2.plot(freqs / 1e3, np.pi + mashhoon_phase(2 * np.pi * freqs, t1), "-",
             label="pi + W*t1/2")
    ax2.set_xlabel("rotation frequency (kHz)")
    ax2.set_ylabel("phase (rad)")
    ax2.set_title("cyclic-state phase")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(f"{OUT}/01_cyclic_spin_evolution.png", dpi=120)
    print(f"wrote {OUT}/01_cyclic_spin_evolution.png")

    # numbers worth seeing once
    final = evolve_rotating_frame(PLUS_Y, b1, omega, t1)
    got = np.angle(overlap(PLUS_Y, final)) % (2 * np.pi)
    print(f"final Bloch vector: {np.round(bloch_vector(final), 12)}")
    print(f"final phase: {got:.6f} rad, "
          f"pi + W*t1/2 = {(np.pi + mashhoon_phase(omega, t1)) % (2 * np.pi):.6f} rad")


if __name__ == "__main__":
    import os

    os.makedirs(OUT, exist_ok=True)
    main()
