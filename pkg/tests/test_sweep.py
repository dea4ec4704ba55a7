from unittest import TestCase
from unittest.mock import patch
from pathlib import Path
import csv
import io
import os
import tempfile

cur_dir = Path(os.path.abspath(__file__)).parent
src_path = cur_dir.parent / "src"

from crnase.config import load_preset, load_preset_text, parse_config_text
from crnase.core import GridPointError, NonConvergence
from crnase.io.base import BaseCrnIO
from crnase.sweep import (
    ASE_HEADER,
    POLICY_HEADER,
    build_scenario,
    emit_csv,
    format_csv,
    run_sweep,
)


class CollectingCrnIO(BaseCrnIO):
    """Keeps user output in memory."""

    def __init__(self):
        self.texts = []

    def user_info_text(self, message: str, **kwargs):
        self.texts.append(message)


def with_grid(name: str, start: float, stop: float, step: float):
    text = load_preset_text(name)
    lines = []
    for line in text.splitlines():
        key = line.split("=")[0].strip()
        if key == "start_db":
            line = f"start_db = {start}"
        elif key == "stop_db":
            line = f"stop_db = {stop}"
        elif key == "step_db":
            line = f"step_db = {step}"
        lines.append(line)
    return parse_config_text("\n".join(lines))


class AseSweepTestCase(TestCase):
    def test_09_x_column_has_no_float_noise(self):
        result = run_sweep(with_grid("osa_cr", 0, 1, 0.1))
        x_column = [line.split(",")[0] for line in format_csv(result).splitlines()[1:]]
        self.assertEqual(x_column[3], "0.3")
        self.assertEqual(len(x_column), 11)
        self.assertEqual(x_column[-1], "1.0")

    def test_01_osa_preset(self):
        result = run_sweep(load_preset("osa_cr"))
        self.assertEqual(len(result.rows), 31)
        self.assertEqual(result.column("x_db"), [float(x) for x in range(31)])
        ase = result.column("ase_bps_hz")
        self.assertTrue(all(b > a for a, b in zip(ase, ase[1:])))
        self.assertTrue(all(0 < d < 1 for d in result.column("band_factor_gain")))
        self.assertEqual(set(result.column("throughput_bps_hz")), {None})

    def test_02_single_point(self):
        result = run_sweep(with_grid("osa_cr", 10, 10, 1))
        self.assertEqual(len(result.rows), 1)
        self.assertEqual(result.rows[0].x_db, 10.0)

    def test_03_csv_layout(self):
        result = run_sweep(with_grid("osa_dr5", 0, 20, 10))
        text = format_csv(result)
        self.assertTrue(text.endswith("\n"))
        self.assertNotIn("\r", text)
        lines = text.splitlines()
        self.assertEqual(len(lines), 4)
        self.assertEqual(lines[0], ",".join(ASE_HEADER))
        rows = list(csv.reader(io.StringIO(text)))
        for row in rows[1:]:
            self.assertEqual(len(row), 6)
            self.assertEqual(row[4], "")
            self.assertEqual(row[5], "")

    def test_04_deterministic(self):
        cfg = with_grid("osa_cr_strict", 0, 30, 5)
        self.assertEqual(format_csv(run_sweep(cfg)), format_csv(run_sweep(cfg)))

    def test_05_sensing_throughput(self):
        result = run_sweep(with_grid("sensing_cr", 0, 4, 2))
        for row in result.rows:
            self.assertAlmostEqual(row.throughput, 0.98 * row.ase, delta=1e-12)
            self.assertGreaterEqual(row.truncated_fraction, 0.0)
            self.assertLessEqual(row.truncated_fraction, 1.0)
            self.assertIsNone(row.band_factor_gain)

    def test_06_shared_band_plateau(self):
        result = run_sweep(with_grid("ss_cr", 12, 30, 6))
        ase = result.column("ase_bps_hz")
        slopes = [(b - a) / 6.0 for a, b in zip(ase, ase[1:])]
        self.assertTrue(all(abs(s) < 0.02 for s in slopes), slopes)

    def test_07_parallel_matches_serial(self):
        cfg = with_grid("osa_dr5", 0, 20, 10)
        self.assertEqual(format_csv(run_sweep(cfg, jobs=2)), format_csv(run_sweep(cfg)))

    def test_08_failed_point(self):
        cfg = with_grid("osa_cr", 0, 2, 1)
        with patch("crnase.osa.solve_cutoff", side_effect=NonConvergence("stuck")):
            with self.assertRaises(GridPointError) as ctx:
                run_sweep(cfg)
        self.assertEqual(ctx.exception.x_db, 0.0)
        self.assertIsInstance(ctx.exception.cause, NonConvergence)


class ScenarioBuildTestCase(TestCase):
    def test_01_tied_links(self):
        cfg = load_preset("ss_cr")
        scn = build_scenario(cfg, 20.0)
        self.assertAlmostEqual(scn.link_ss.mean, 100.0, delta=1e-9)
        self.assertAlmostEqual(scn.link_sp.mean, 100.0, delta=1e-9)
        self.assertAlmostEqual(scn.i_pk, 1.0, delta=1e-15)

    def test_02_sensing(self):
        scn = build_scenario(load_preset("sensing_dr5"), 10.0)
        self.assertAlmostEqual(scn.config.tau, 2e-3, delta=1e-15)
        self.assertAlmostEqual(scn.config.frame, 0.1, delta=1e-15)
        self.assertEqual(scn.config.detection, 0.8)
        self.assertAlmostEqual(scn.ss.link_sp.mean, 1.0, delta=1e-15)


class PolicySweepTestCase(TestCase):
    def test_01_osa_policy(self):
        result = run_sweep(load_preset("osa_cr_policy_0db"))
        self.assertEqual(result.header, POLICY_HEADER)
        self.assertEqual(len(result.rows), 71)
        power = result.column("power_ratio")
        cutoffs = set(result.column("cutoff_linear"))
        self.assertEqual(len(cutoffs), 1)
        self.assertEqual(power[0], 0.0)
        self.assertTrue(all(b >= a for a, b in zip(power, power[1:])))
        self.assertGreater(power[-1], 0.0)

    def test_02_sensing_policy(self):
        result = run_sweep(with_grid("sensing_cr_policy", -10, 30, 10))
        power = result.column("power_ratio")
        self.assertEqual(power[0], 0.0)
        self.assertTrue(all(p >= 0 for p in power))
        self.assertEqual(format_csv(result).splitlines()[0], ",".join(POLICY_HEADER))


class EmitCsvTestCase(TestCase):
    def test_01_to_file_and_stdio(self):
        result = run_sweep(with_grid("osa_cr", 0, 2, 1))
        stdio = CollectingCrnIO()
        emit_csv(result, stdio=stdio)
        self.assertEqual(stdio.texts, [format_csv(result)])

        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "out.csv"
            emit_csv(result, path)
            self.assertEqual(path.read_bytes(), format_csv(result).encode("utf-8"))
