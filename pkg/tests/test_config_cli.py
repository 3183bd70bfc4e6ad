"""Config parsing, unit handling and the four CLI subcommands."""

import shutil
from pathlib import Path

import numpy as np
import pytest

from spinrot.cli import main
from spinrot.config import ConfigError, load_config, parse_quantity, resolve_config

TEST_CONFIG = """\
beamline:
  wavelength: 1.9 angstrom
  guide_field: 9 G
  rfg_length: 0.02 m
  contrast: 0.75

acquisition:
  frequencies: {start: 0 kHz, stop: 20 kHz, step: 5 kHz}
  chi_points: 16
  counting_time: 20 s
  count_rate: 25 cps

scans:
  amplitude_points: 201
  distance_points: 150
  b_loc_points: 151
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.yaml"
    config.write_text(TEST_CONFIG)
    assert main(["calibrate", "--config", str(config), "--out-dir", str(root / "cal")]) == 0
    return root


class TestQuantityParsing:
    def test_gauss_to_tesla(self):
        assert parse_quantity("9 G", "tesla", "x") == pytest.approx(9e-4)
        assert parse_quantity("3.5 mT", "tesla", "x") == pytest.approx(3.5e-3)

    def test_angstrom(self):
        assert parse_quantity("1.9 angstrom", "meter", "x") == pytest.approx(1.9e-10)

    def test_kilohertz_and_deg(self):
        assert parse_quantity("2.5 kHz", "hertz", "x") == pytest.approx(2500.0)
        assert parse_quantity("90 deg", "radian", "x") == pytest.approx(np.pi / 2)

    def test_no_space_allowed(self):
        assert parse_quantity("20kHz", "hertz", "x") == pytest.approx(20e3)

    def test_bare_number_rejected(self):
        with pytest.raises(ConfigError, match="unit"):
            parse_quantity(9, "tesla", "beamline.guide_field")

    def test_unknown_unit_rejected(self):
        with pytest.raises(ConfigError, match="unknown tesla unit"):
            parse_quantity("9 Gs", "tesla", "x")

    def test_garbage_rejected(self):
        with pytest.raises(ConfigError, match="cannot parse"):
            parse_quantity("about nine G", "tesla", "x")


class TestResolveConfig:
    def test_defaults(self):
        cfg = resolve_config({})
        ins = cfg.instrument
        assert ins.wavelength == pytest.approx(1.9e-10)
        assert ins.guide_field == pytest.approx(9e-4)
        assert ins.velocity == pytest.approx(2082.12, rel=1e-4)
        assert cfg.acquisition.frequencies == tuple(np.arange(0, 20001, 2500.0))

    def test_unknown_section_named(self):
        with pytest.raises(ConfigError, match="beamlines"):
            resolve_config({"beamlines": {}})

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="beamline.wavelenght"):
            resolve_config({"beamline": {"wavelenght": "1.9 angstrom"}})

    def test_unitless_physical_quantity_named(self):
        with pytest.raises(ConfigError, match="beamline.guide_field"):
            resolve_config({"beamline": {"guide_field": 9}})

    def test_frequency_list_form(self):
        cfg = resolve_config({"acquisition": {"frequencies": ["0 Hz", "2.5 kHz"]}})
        assert cfg.acquisition.frequencies == (0.0, 2500.0)

    def test_sha256_stable(self):
        assert resolve_config({}).sha256() == resolve_config({}).sha256()


class TestCalibrateCommand:
    def test_outputs_exist(self, workdir):
        cal = workdir / "cal"
        for name in ("calibration.tsv", "distance_scan.tsv", "bloc_scan.tsv", "manifest_calibrate.json"):
            assert (cal / name).exists()

    def test_table_strictly_decreasing(self, workdir):
        rows = [
            line.split("\t")
            for line in (workdir / "cal" / "calibration.tsv").read_text().splitlines()
            if line and not line.startswith("#")
        ]
        b1 = [float(r[1]) for r in rows]
        assert len(b1) == 5
        assert all(x > y for x, y in zip(b1, b1[1:]))

    def test_rerun_byte_identical(self, workdir, tmp_path):
        config = workdir / "config.yaml"
        assert main(["calibrate", "--config", str(config), "--out-dir", str(tmp_path)]) == 0
        for name in ("calibration.tsv", "distance_scan.tsv", "bloc_scan.tsv", "manifest_calibrate.json"):
            assert (tmp_path / name).read_bytes() == (workdir / "cal" / name).read_bytes()

    def test_unsolvable_frequency_exits_3(self, tmp_path, capsys):
        config = tmp_path / "bad.yaml"
        config.write_text(TEST_CONFIG.replace("0.02 m", "0.12 m"))
        rc = main(["calibrate", "--config", str(config), "--out-dir", str(tmp_path / "out")])
        assert rc == 3
        assert "20000" in capsys.readouterr().err

    def test_boundary_scan_warns_but_succeeds(self, tmp_path, capsys):
        config = tmp_path / "narrow.yaml"
        config.write_text(
            TEST_CONFIG
            + "  b_loc_min: 0 G\n  b_loc_max: 1 G\n"  # minimum lies far outside
        )
        rc = main(["calibrate", "--config", str(config), "--out-dir", str(tmp_path / "out")])
        assert rc == 0
        assert "warning" in capsys.readouterr().err

    def test_default_config_file_gives_nine_rows(self, tmp_path):
        shipped = Path(__file__).resolve().parents[1] / "configs" / "default.yaml"
        rc = main(
            ["calibrate", "--config", str(shipped), "--out-dir", str(tmp_path / "out")]
        )
        assert rc == 0
        rows = [
            l
            for l in (tmp_path / "out" / "calibration.tsv").read_text().splitlines()
            if l and not l.startswith("#")
        ]
        assert len(rows) == 9


class TestSweepCommand:
    def sweep(self, workdir, out, extra):
        config = workdir / "config.yaml"
        cal = workdir / "cal" / "calibration.tsv"
        return main(
            ["sweep", "--config", str(config), "--calibration", str(cal), "--out-dir", str(out)]
            + extra
        )

    def test_seeded_sweep_deterministic(self, workdir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self.sweep(workdir, a, ["--seed", "42"]) == 0
        assert self.sweep(workdir, b, ["--seed", "42"]) == 0
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_noiseless_leaves_sample_column_empty(self, workdir, tmp_path):
        out = tmp_path / "nl"
        assert self.sweep(workdir, out, []) == 0  # seed omitted -> noiseless
        body = (out / "interferogram_000000Hz.tsv").read_text()
        data_lines = [l for l in body.splitlines() if l and not l.startswith("#")]
        assert all(l.split("\t")[2] == "" for l in data_lines)

    def test_seed_and_noiseless_conflict(self, workdir, tmp_path, capsys):
        rc = self.sweep(workdir, tmp_path / "x", ["--seed", "1", "--noiseless"])
        assert rc == 2
        assert "exclusive" in capsys.readouterr().err

    def test_missing_calibration_row_exits_3(self, workdir, tmp_path, capsys):
        config = tmp_path / "more.yaml"
        config.write_text(TEST_CONFIG.replace("step: 5 kHz", "step: 2.5 kHz"))
        rc = main(
            [
                "sweep",
                "--config",
                str(config),
                "--calibration",
                str(workdir / "cal" / "calibration.tsv"),
                "--out-dir",
                str(tmp_path / "out"),
            ]
        )
        assert rc == 3
        assert "2500" in capsys.readouterr().err


class TestFitCommand:
    def test_noiseless_t1_recovery(self, workdir, tmp_path):
        sweep_dir = tmp_path / "sweep"
        out = tmp_path / "fit"
        TestSweepCommand().sweep(workdir, sweep_dir, [])
        files = sorted(str(p) for p in sweep_dir.glob("interferogram_*.tsv"))
        assert main(["fit", *files, "--out-dir", str(out)]) == 0
        text = (out / "fit_results.tsv").read_text()
        t1_line = [l for l in text.splitlines() if "t1_estimate_s" in l][0]
        t1_est = float(t1_line.split("=")[1])
        t1 = 0.02 / load_config(workdir / "config.yaml").instrument.velocity
        assert abs(t1_est - t1) / t1 < 1e-9
        # noiseless fringe visibility equals the configured contrast at every f
        rows = [
            l.split("\t") for l in text.splitlines() if l and not l.startswith("#")
        ]
        for row in rows:
            assert float(row[3]) / float(row[1]) == pytest.approx(0.75, abs=1e-9)

    def test_shuffled_input_order_identical(self, workdir, tmp_path):
        sweep_dir = tmp_path / "sweep"
        TestSweepCommand().sweep(workdir, sweep_dir, ["--seed", "5"])
        files = sorted(str(p) for p in sweep_dir.glob("interferogram_*.tsv"))
        a, b = tmp_path / "fa", tmp_path / "fb"
        assert main(["fit", *files, "--out-dir", str(a)]) == 0
        assert main(["fit", *files[::-1], "--out-dir", str(b)]) == 0
        assert (a / "fit_results.tsv").read_bytes() == (b / "fit_results.tsv").read_bytes()

    def test_single_interferogram_no_linear_section(self, workdir, tmp_path):
        sweep_dir = tmp_path / "sweep"
        TestSweepCommand().sweep(workdir, sweep_dir, [])
        one = sorted(sweep_dir.glob("interferogram_*.tsv"))[0]
        out = tmp_path / "single"
        assert main(["fit", str(one), "--out-dir", str(out)]) == 0
        text = (out / "fit_results.tsv").read_text()
        assert "linear_slope" not in text
        assert len([l for l in text.splitlines() if l and not l.startswith("#")]) == 1

    def test_analyzer_scales_amplitudes_not_phases(self, workdir, tmp_path):
        plain_dir, an_dir = tmp_path / "plain", tmp_path / "an"
        TestSweepCommand().sweep(workdir, plain_dir, [])
        TestSweepCommand().sweep(workdir, an_dir, ["--analyzer"])
        fp, fa = tmp_path / "fp", tmp_path / "fa2"
        main(["fit", *sorted(str(p) for p in plain_dir.glob("*.tsv")), "--out-dir", str(fp)])
        main(["fit", *sorted(str(p) for p in an_dir.glob("*.tsv")), "--out-dir", str(fa)])

        def rows(path):
            return [
                l.split("\t")
                for l in (path / "fit_results.tsv").read_text().splitlines()
                if l and not l.startswith("#")
            ]

        for rp, ra in zip(rows(fp), rows(fa)):
            assert float(ra[3]) / float(rp[3]) == pytest.approx(0.4, rel=1e-6)
            assert float(ra[5]) == pytest.approx(float(rp[5]), abs=1e-9)

    def test_malformed_file_exits_4_with_line_number(self, workdir, tmp_path, capsys):
        sweep_dir = tmp_path / "sweep"
        TestSweepCommand().sweep(workdir, sweep_dir, [])
        source = sorted(sweep_dir.glob("interferogram_*.tsv"))[0]
        broken = tmp_path / "broken.tsv"
        lines = source.read_text().splitlines()
        lines[-1] = "not\tenough"
        broken.write_text("\n".join(lines) + "\n")
        rc = main(["fit", str(broken), "--out-dir", str(tmp_path / "out")])
        assert rc == 4
        err = capsys.readouterr().err
        assert f":{len(lines)}:" in err

    def test_missing_file_exits_4(self, tmp_path, capsys):
        rc = main(["fit", str(tmp_path / "nope.tsv"), "--out-dir", str(tmp_path)])
        assert rc == 4


class TestErrorExits:
    def test_bad_config_exits_2_with_field_path(self, tmp_path, capsys):
        config = tmp_path / "bad.yaml"
        config.write_text("beamline:\n  guide_field: 9\n")
        rc = main(["calibrate", "--config", str(config), "--out-dir", str(tmp_path / "o")])
        assert rc == 2
        assert "beamline.guide_field" in capsys.readouterr().err

    def test_missing_config_exits_4(self, tmp_path):
        rc = main(["calibrate", "--config", str(tmp_path / "nope.yaml"), "--out-dir", str(tmp_path)])
        assert rc == 4


class TestSelftest:
    def test_passes(self, capsys):
        assert main(["selftest", "--cases", "40"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 2


class TestConsoleScript:
    def test_entry_point_installed(self):
        assert shutil.which("spinrot") is not None
