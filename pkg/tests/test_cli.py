import asyncio
import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from cli import main


def run_cli(*argv):
    """Run the CLI and return its exit code with the parsed stdout report, if any."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = asyncio.run(main(list(argv)))
    text = out.getvalue()
    try:
        report = json.loads(text) if text.strip() else None
    except json.JSONDecodeError:
        report = None
    return code, report


class ClassifyCommandTests(unittest.TestCase):
    def test_catalog_model(self):
        code, report = run_cli("classify", "--catalog", "serre", "--order", "32")
        self.assertEqual(code, 0)
        self.assertEqual(report["case"], "II")
        self.assertEqual(report["ueda_type"], {"index": 1, "kind": "alpha"})

    def test_expression_pair(self):
        code, report = run_cli("c", "--f", "id", "--g", "rot(golden)", "--order", "32")
        self.assertEqual(code, 0)
        self.assertEqual((report["case"], report["ueda_type"]["kind"]), ("III", "beta"))

    def test_report_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "report.json")
            code, report = run_cli("classify", "--catalog", "trivial", "--output", path, "--quiet")
            self.assertEqual(code, 0)
            with open(path, "r", encoding="utf-8") as f:
                self.assertEqual(json.load(f), report)

    def test_undetermined_exit_code(self):
        code, report = run_cli("classify", "--f", "id", "--g", "poly(rot(golden),1)", "--order", "32")
        self.assertEqual(code, 3)
        self.assertEqual(report["ueda_type"]["kind"], "undetermined")

    def test_error_exit_codes(self):
        self.assertEqual(run_cli("classify", "--f", "poly(1,1)", "--g", "poly(1,0,1)")[0], 4)
        self.assertEqual(run_cli("classify")[0], 2)
        self.assertEqual(run_cli("classify", "--catalog", "missing")[0], 2)
        self.assertEqual(run_cli("classify", "--catalog", "serre", "--order", "4")[0], 2)
        self.assertEqual(run_cli("classify", "--f", "id", "--g", "mobius(1,0)")[0], 2)
        self.assertEqual(run_cli("classify", "--f", "id", "--g", "id", "--tau", "-i")[0], 2)


class LinearizeCommandTests(unittest.TestCase):
    def test_koenigs_series(self):
        code, report = run_cli("linearize", "--f", "poly(2,1)", "--order", "32")
        self.assertEqual(code, 0)
        self.assertEqual(report["field"], "exact")
        self.assertEqual(report["defect"], 0.0)
        self.assertEqual(report["multiplier"]["kind"], "non_unitary")

    def test_resonance(self):
        code, report = run_cli("lin", "--f", "poly(-1,1)", "--order", "16")
        self.assertEqual(code, 3)
        self.assertEqual(report["obstruction"], 3)


class HedgehogCommandTests(unittest.TestCase):
    def test_rotation_disk(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            stem = os.path.join(tmpdir, "disk")
            args = ("hedgehog", "--map", "rot(golden)", "--grid", "33", "--iters", "50",
                    "--workers", "1", "--output", stem)
            code, report = run_cli(*args, "--csv", os.path.join(tmpdir, "cells.csv"))
            self.assertEqual(code, 0)
            self.assertEqual(len(report["files"]), 3)
            self.assertTrue(os.path.exists(stem + ".pgm"))
            self.assertEqual(report["zero_position"]["kind"], "interior")
            self.assertTrue(report["invariance"]["passed"])
            _, again = run_cli(*args)
        self.assertEqual(report["grid"]["checksum"], again["grid"]["checksum"])

    def test_inadmissible_disk(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            code, _ = run_cli("hedgehog", "--map", "mobius(1,0,-1,1)", "--radius", "1", "--grid", "9",
                              "--workers", "1", "--output", os.path.join(tmpdir, "hh"))
        self.assertEqual(code, 5)


class ExperimentCommandTests(unittest.TestCase):
    def test_cycles(self):
        code, report = run_cli("cycles", "--map", "poly(-1,1)", "--periods", "1", "--search-radius", "3",
                               "--precision", "128", "--workers", "1")
        self.assertEqual(code, 0)
        self.assertEqual(report["found_periods"], [1])
        self.assertTrue(report["cycles"][0]["certified"])
        self.assertAlmostEqual(report["cycles"][0]["radius"], 2.0, places=12)

    def test_cycles_need_a_polynomial(self):
        self.assertEqual(run_cli("cycles", "--map", "rot(golden)")[0], 2)
        self.assertEqual(run_cli("cycles")[0], 2)

    def test_orbit(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            csv_path = os.path.join(tmpdir, "orbit.csv")
            code, report = run_cli("orbit", "--map", "rot(golden)", "--seed", "0.5", "--n", "50",
                                   "--precision", "128", "--delta", "0.1", "--csv", csv_path)
            self.assertEqual(code, 0)
            with open(csv_path, "r", encoding="utf-8") as f:
                self.assertEqual(len(f.read().splitlines()), 52)
        self.assertAlmostEqual(report["min_modulus"], 0.5, places=12)
        self.assertEqual(report["first_return"], 21)
        self.assertTrue(report["empirical"])

    def test_orbit_needs_a_seed(self):
        self.assertEqual(run_cli("orbit", "--map", "rot(golden)")[0], 2)


class TopLevelTests(unittest.TestCase):
    def test_catalog_listing(self):
        code, report = run_cli("catalog")
        self.assertEqual(code, 0)
        self.assertEqual(len(report["models"]), 6)
        code, report = run_cli("cat", "--catalog", "serre")
        self.assertEqual([m["name"] for m in report["models"]], ["serre"])

    def test_version_and_usage(self):
        self.assertEqual(run_cli("--version")[0], 0)
        self.assertEqual(run_cli()[0], 2)
        self.assertEqual(run_cli("help")[0], 0)
        self.assertEqual(run_cli("frobnicate")[0], 2)
        self.assertEqual(run_cli("classify", "--grid", "many")[0], 2)


if __name__ == "__main__":
    unittest.main()
