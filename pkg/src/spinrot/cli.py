"""Command-line front end: calibrate, sweep, fit, selftest.

The pipeline mirrors the instrument's workflow: ``calibrate`` reruns the
adjustment scans and writes the per-frequency cyclic amplitudes;
``sweep`` records one interferogram file per frequency (noiseless, or
Poisson-sampled under an explicit seed); ``fit`` extracts the fringe
phases and the phase-versus-frequency line. Outputs are plain text with
full metadata headers and are byte-reproducible from (config, seed).

Exit codes: 0 success, 2 config error, 3 precondition or physics error,
4 I/O error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import fit_sinusoid, sweep_phase_fit
from .config import ConfigError, RunConfig, load_config
from .constants import CODATA
from .experiment import (
    CalibrationTable,
    Instrument,
    Interferogram,
    PhysicsError,
    bloc_scan,
    cyclic_amplitude_closed_form,
    default_chi_grid,
    distance_scan,
    frequency_sweep,
    run_amplitude_calibration,
)
from .io import (
    DataFileError,
    append_comment_block,
    interferogram_filename,
    read_table,
    write_manifest,
    write_table,
)
from .spinor import PLUS_Y, evolve_rotating_frame, numeric_integrate, overlap


def _constants_metadata() -> dict:
    return {f"constant_{key}": val for key, val in CODATA.as_dict().items()}


def _base_manifest(command: str, cfg: RunConfig | None) -> dict:
    manifest = {
        "tool": {"name": "spinrot", "version": __version__},
        "command": command,
        "constants": CODATA.as_dict(),
    }
    if cfg is not None:
        manifest["config"] = cfg.si_dict()
        manifest["config_sha256"] = cfg.sha256()
    return manifest


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# calibrate


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    ins = cfg.instrument
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    scans = cfg.scans
    dist = distance_scan(
        ins, np.linspace(scans.distance_min, scans.distance_max, scans.distance_points)
    )
    if dist.at_boundary:
        _warn("distance scan found no interior minimum (grid too narrow?)")
    bloc = bloc_scan(ins, np.linspace(scans.b_loc_min, scans.b_loc_max, scans.b_loc_points))
    if bloc.at_boundary:
        _warn("b_loc scan found no interior minimum (grid too narrow?)")

    table = run_amplitude_calibration(
        ins,
        cfg.acquisition.frequencies,
        grid_points=scans.amplitude_points,
        grid_margin=scans.amplitude_margin,
    )

    meta = {
        "tool_version": __version__,
        "config_sha256": cfg.sha256(),
        "t1_s": ins.t1,
        "velocity_m_s": ins.velocity,
        "dc1_rfg_distance_m": ins.dc1_rfg_distance,
        "b_loc_t": ins.b_loc_resolved,
        "distance_scan_first_minimum_m": dist.extremum,
        "distance_scan_boundary": dist.at_boundary,
        "b_loc_scan_minimum_t": bloc.extremum,
        "b_loc_scan_boundary": bloc.at_boundary,
        **_constants_metadata(),
    }

    write_table(
        out_dir / "distance_scan.tsv",
        {"tool_version": __version__, "config_sha256": cfg.sha256(), **_constants_metadata()},
        ["distance_m", "intensity"],
        zip(dist.values, dist.intensities),
    )
    write_table(
        out_dir / "bloc_scan.tsv",
        {"tool_version": __version__, "config_sha256": cfg.sha256(), **_constants_metadata()},
        ["b_loc_t", "intensity"],
        zip(bloc.values, bloc.intensities),
    )
    write_table(
        out_dir / "calibration.tsv",
        meta,
        ["f_hz", "b1_cyclic_t", "b1_scan_t", "scan_grid_step_t"],
        zip(table.frequencies, table.b1_cyclic, table.b1_scan, table.scan_step),
    )

    manifest = _base_manifest("calibrate", cfg)
    manifest["outputs"] = {
        "calibration": "calibration.tsv",
        "distance_scan": "distance_scan.tsv",
        "bloc_scan": "bloc_scan.tsv",
    }
    write_manifest(out_dir / "manifest_calibrate.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# sweep


def _read_calibration(path) -> CalibrationTable:
    _, columns, rows = read_table(path)
    try:
        fi = columns.index("f_hz")
        bi = columns.index("b1_cyclic_t")
    except ValueError as exc:
        raise DataFileError(f"{path}: missing f_hz / b1_cyclic_t columns") from exc
    freqs, b1 = [], []
    for row in rows:
        freqs.append(float(row[fi]))
        b1.append(float(row[bi]))
    return CalibrationTable(tuple(freqs), tuple(b1))


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    ins = cfg.instrument
    acq = cfg.acquisition
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.noiseless and args.seed is not None:
        raise ConfigError("--noiseless and --seed are mutually exclusive")
    seed = None if args.noiseless else args.seed

    calibration = _read_calibration(args.calibration)
    chi = default_chi_grid(acq.chi_points, acq.chi_cycles)
    grams = frequency_sweep(
        ins,
        acq.frequencies,
        calibration,
        rate=acq.count_rate,
        counting_time=acq.counting_time,
        seed=seed,
        analyzer=args.analyzer,
        chi_grid=chi,
    )

    outputs = []
    for gram in grams:
        name = interferogram_filename(gram.frequency)
        meta = {
            "tool_version": __version__,
            "config_sha256": cfg.sha256(),
            "f_hz": gram.frequency,
            "omega_rad_s": 2.0 * np.pi * gram.frequency,
            "b1_t": gram.b1,
            "t1_s": gram.t1,
            "counting_time_s": gram.counting_time,
            "count_rate_cps": gram.rate,
            "analyzer": gram.analyzer,
            "contrast": ins.contrast,
            "seed": gram.seed,
            "rng_algorithm": "pcg64" if gram.seed is not None else None,
            **_constants_metadata(),
        }
        counts = gram.counts if gram.counts is not None else [None] * len(chi)
        write_table(
            out_dir / name,
            meta,
            ["chi_rad", "expected_counts", "sampled_counts"],
            zip(gram.chi, gram.expected, counts),
        )
        outputs.append(name)

    manifest = _base_manifest("sweep", cfg)
    manifest["seed"] = seed
    manifest["rng_algorithm"] = "pcg64" if seed is not None else None
    manifest["analyzer"] = bool(args.analyzer)
    manifest["calibration_file"] = str(args.calibration)
    manifest["outputs"] = {"interferograms": outputs}
    write_manifest(out_dir / "manifest_sweep.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# fit


def _load_interferogram(path) -> Interferogram:
    metadata, columns, rows = read_table(path)
    try:
        ci = columns.index("chi_rad")
        ei = columns.index("expected_counts")
        si = columns.index("sampled_counts")
    except ValueError as exc:
        raise DataFileError(f"{path}: missing interferogram columns") from exc
    chi, expected, counts = [], [], []
    sampled = True
    for row in rows:
        chi.append(float(row[ci]))
        expected.append(float(row[ei]))
        if row[si] == "":
            sampled = False
        else:
            counts.append(int(row[si]))
    if sampled and len(counts) != len(chi):
        raise DataFileError(f"{path}: sampled_counts column is partially empty")
    for key in ("f_hz", "counting_time_s", "count_rate_cps", "t1_s", "b1_t"):
        if key not in metadata:
            raise DataFileError(f"{path}: missing metadata entry {key!r}")
    return Interferogram(
        frequency=float(metadata["f_hz"]),
        chi=np.array(chi),
        expected=np.array(expected),
        counts=np.array(counts, dtype=int) if sampled else None,
        counting_time=float(metadata["counting_time_s"]),
        rate=float(metadata["count_rate_cps"]),
        seed=None if metadata.get("seed", "") in ("", "None") else int(metadata["seed"]),
        b1=float(metadata["b1_t"]),
        t1=float(metadata["t1_s"]),
        analyzer=metadata.get("analyzer", "false") == "true",
    )


def cmd_fit(args) -> int:
    if not args.files:
        raise ConfigError("fit: need at least one interferogram file")
    grams = [_load_interferogram(path) for path in args.files]
    grams.sort(key=lambda g: g.frequency)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    fits, rel, sig, line = sweep_phase_fit(grams)
    rows = [
        (
            gram.frequency,
            fit.offset,
            fit.offset_err,
            fit.amplitude,
            fit.amplitude_err,
            fit.phase,
            fit.phase_err,
            rel[k],
            sig[k],
            fit.chisq_red,
        )
        for k, (gram, fit) in enumerate(zip(grams, fits))
    ]
    out_path = out_dir / "fit_results.tsv"
    write_table(
        out_path,
        {"tool_version": __version__, "reference_f_hz": grams[0].frequency, **_constants_metadata()},
        [
            "f_hz",
            "offset_counts",
            "offset_err",
            "amplitude_counts",
            "amplitude_err",
            "phase_rad",
            "phase_err",
            "phase_rel_rad",
            "phase_rel_err",
            "chisq_red",
        ],
        rows,
    )
    if line is not None:
        append_comment_block(
            out_path,
            {
                "linear_slope_rad_per_hz": line.slope,
                "linear_slope_err": line.slope_err,
                "linear_intercept_rad": line.intercept,
                "linear_intercept_err": line.intercept_err,
                "linear_cov_slope_intercept": line.covariance[0, 1],
                "linear_chisq_red": line.chisq_red,
                "t1_estimate_s": line.slope / np.pi,
            },
        )

    manifest = _base_manifest("fit", None)
    manifest["inputs"] = sorted(str(p) for p in args.files)
    manifest["outputs"] = {"fit_results": "fit_results.tsv"}
    write_manifest(out_dir / "manifest_fit.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# selftest


def cmd_selftest(args) -> int:
    ok = True
    rng = np.random.default_rng(20260811)
    n = args.cases
    b1 = rng.uniform(0.0, 10e-3, n)
    freq = rng.uniform(0.0, 20e3, n)
    t_end = rng.uniform(0.0, 20e-6, n)
    omega = 2.0 * np.pi * freq
    zeros = np.zeros(n)

    def field(tt):
        return np.stack([b1 * np.cos(omega * tt), zeros, b1 * np.sin(omega * tt)], axis=-1)

    numeric = numeric_integrate(np.tile(PLUS_Y, (n, 1)), field, t_end, 20000)
    closed = np.array(
        [evolve_rotating_frame(PLUS_Y, b, w, t) for b, w, t in zip(b1, omega, t_end)]
    )
    err = float(np.max(np.abs(numeric - closed)))
    passed = err < 1e-9
    ok &= passed
    print(f"selftest oracle: {n} cases, max component error {err:.3e} "
          f"{'PASS' if passed else 'FAIL'}")

    ins = Instrument()
    worst = 0.0
    for f in np.linspace(0.0, 20e3, 9):
        w = 2.0 * np.pi * f
        amp = cyclic_amplitude_closed_form(w, ins.t1)
        final = evolve_rotating_frame(PLUS_Y, amp, w, ins.t1)
        ov = overlap(PLUS_Y, final)
        phase_err = abs(
            (np.angle(ov) - (np.pi + 0.5 * w * ins.t1) + np.pi) % (2.0 * np.pi) - np.pi
        )
        worst = max(worst, abs(abs(ov) - 1.0), phase_err)
    passed = worst < 1e-10
    ok &= passed
    print(f"selftest cyclic law: worst deviation {worst:.3e} {'PASS' if passed else 'FAIL'}")
    return 0 if ok else 3


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinrot",
        description="Simulated spin-rotation-coupling interferometry: "
        "calibrate, sweep, fit, selftest.",
    )
    parser.add_argument("--version", action="version", version=f"spinrot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="run adjustment scans, write the calibration table")
    cal.add_argument("--config", required=True, help="YAML config file")
    cal.add_argument("--out-dir", required=True, help="output directory")
    cal.set_defaults(func=cmd_calibrate)

    sweep = sub.add_parser("sweep", help="record one interferogram per frequency")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--calibration", required=True, help="calibration.tsv from 'calibrate'")
    sweep.add_argument("--seed", type=int, default=None, help="Poisson seed; omit for noiseless")
    sweep.add_argument("--noiseless", action="store_true", help="store expected counts only")
    sweep.add_argument("--analyzer", action="store_true", help="insert the exit spin analyzer")
    sweep.add_argument("--out-dir", required=True)
    sweep.set_defaults(func=cmd_sweep)

    fit = sub.add_parser("fit", help="fit interferograms and the phase-frequency line")
    fit.add_argument("files", nargs="+", help="interferogram .tsv files")
    fit.add_argument("--out-dir", required=True)
    fit.set_defaults(func=cmd_fit)

    self_p = sub.add_parser("selftest", help="run the built-in oracle equivalence checks")
    self_p.add_argument("--cases", type=int, default=100)
    self_p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataFileError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except (PhysicsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
