"""
Unit tests for the run_orderings script.

Runs subcommands end to end through main() and checks exit codes, written
files and the report contents.
"""

import io
import json
import os
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest.mock import patch

# Add parent directory to path
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from scripts.run_orderings import (  # noqa: E402
    EXIT_INPUT,
    EXIT_NUMERIC,
    EXIT_OK,
    main,
    parse_args,
)
from app.core.reports import REPORT_FILE, ReportDocument  # noqa: E402

EXP1 = "family=exponential param.rate=1"
EXP2 = "family=exponential param.rate=2"
UNIFORM = "family=uniform param.upper=1"
GAMMA = "family=gamma param.shape=2 param.rate=1"
WEIBULL2 = "family=weibull param.shape=2 param.scale=1"
SAMPLE = str(Path(__file__).parent.parent / "data" / "sample_lifetimes.csv")


def run_main(argv):
    """Run main() and return (exit code, stdout text)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue()


class TestParseArgs(unittest.TestCase):
    """Test command line parsing."""

    def test_repeatable_flags(self):
        args = parse_args(
            ["order", "--dist", EXP1, "--dist", EXP2, "--window", "0.01", "0.99", "--format", "csv"]
        )
        self.assertEqual(args.subcommand, "order")
        self.assertEqual(args.dist, [EXP1, EXP2])
        self.assertEqual(args.window, [0.01, 0.99])
        self.assertEqual(args.fmt, "csv")
        self.assertIsNone(args.levels)

    def test_curve_kinds(self):
        args = parse_args(["curves", "--dist", UNIFORM, "--kind", "TTT", "--kind", "Lorenz"])
        self.assertEqual(args.kind, ["TTT", "Lorenz"])


class TestSubcommands(unittest.TestCase):
    """End-to-end runs of every subcommand."""

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        if os.path.exists(self.test_dir):
            shutil.rmtree(self.test_dir)

    def report(self, text):
        return json.loads(text)

    def test_chain_exponential(self):
        code, text = run_main(["chain", "--dist", EXP1, "--levels", "3"])
        self.assertEqual(code, EXIT_OK)
        means = self.report(text)["results"]["means"]
        for m in means:
            self.assertAlmostEqual(m, 1.0, delta=1e-9)

    def test_chain_uniform_and_gamma(self):
        code, text = run_main(["chain", "--dist", UNIFORM, "--levels", "3"])
        self.assertEqual(code, EXIT_OK)
        means = self.report(text)["results"]["means"]
        for got, want in zip(means, [0.5, 1.0 / 3.0, 0.25]):
            self.assertAlmostEqual(got, want, delta=1e-9)

        code, text = run_main(["chain", "--dist", GAMMA, "--levels", "2"])
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(self.report(text)["results"]["means"][0], 2.0, delta=1e-9)

    def test_chain_writes_files(self):
        out = os.path.join(self.test_dir, "chain")
        code, _ = run_main(["chain", "--dist", WEIBULL2, "--levels", "2", "--grid", "64", "--out", out])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(os.path.exists(os.path.join(out, REPORT_FILE)))
        self.assertTrue(os.path.exists(os.path.join(out, "chain.csv")))
        with open(os.path.join(out, REPORT_FILE)) as f:
            document = ReportDocument.from_json(f.read())
        self.assertEqual(document.inputs["levels"], 2)
        self.assertEqual(document.inputs["settings"]["grid_points"], 64)

    def test_runs_are_deterministic(self):
        argv = ["classify", "--dist", GAMMA, "--levels", "2", "--grid", "64"]
        first = run_main(argv)
        second = run_main(argv)
        self.assertEqual(first, second)

    def test_csv_to_stdout(self):
        code, text = run_main(["chain", "--dist", EXP1, "--levels", "1", "--format", "csv"])
        self.assertEqual(code, EXIT_OK)
        header = text.splitlines()[0].split(",")
        self.assertEqual(header, ["s", "u", "x", "survival", "failure_rate", "mrl", "mean"])

    def test_curves(self):
        code, text = run_main(["curves", "--dist", UNIFORM, "--levels", "2", "--kind", "TTT"])
        self.assertEqual(code, EXIT_OK)
        curves = self.report(text)["results"]["curves"]
        self.assertEqual(len(curves), 1)

    def test_curves_sample(self):
        out = os.path.join(self.test_dir, "curves")
        code, _ = run_main(["curves", "--dist", SAMPLE, "--levels", "2", "--out", out])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(os.path.exists(os.path.join(out, "sample_ttt.csv")))

    def test_order_equivalent_pair(self):
        code, text = run_main(["order", "--dist", EXP1, "--dist", EXP2, "--levels", "2"])
        self.assertEqual(code, EXIT_OK)
        body = self.report(text)
        self.assertAlmostEqual(body["results"]["ordering"]["equivalence"], 0.5, delta=1e-6)
        holds = {v["holds"] for v in body["results"]["ordering"]["verdicts"]}
        self.assertEqual(holds, {"inconclusive"})
        self.assertGreater(len(body["warnings"]), 0)

    def test_classify_sample_is_best_effort(self):
        code, text = run_main(["classify", "--dist", SAMPLE, "--levels", "1"])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(any("best-effort" in w for w in self.report(text)["warnings"]))


class TestExitCodes(unittest.TestCase):
    """Invalid input maps to exit code 2, numeric failure to 3."""

    def test_bad_spec(self):
        code, _ = run_main(["chain", "--dist", "family=lognormal param.mu=0"])
        self.assertEqual(code, EXIT_INPUT)

    def test_bad_parameter(self):
        code, _ = run_main(["chain", "--dist", "family=exponential param.rate=-1"])
        self.assertEqual(code, EXIT_INPUT)

    def test_missing_data_file(self):
        code, _ = run_main(["chain", "--dist", "data=/nonexistent/lifetimes.csv"])
        self.assertEqual(code, EXIT_INPUT)

    def test_wrong_dist_count(self):
        code, _ = run_main(["order", "--dist", EXP1])
        self.assertEqual(code, EXIT_INPUT)

    def test_curves_need_two_levels(self):
        code, _ = run_main(["curves", "--dist", UNIFORM, "--levels", "1"])
        self.assertEqual(code, EXIT_INPUT)

    def test_invalid_grid(self):
        code, _ = run_main(["chain", "--dist", EXP1, "--grid", "4"])
        self.assertEqual(code, EXIT_INPUT)

    def test_heavy_tail_exits_cleanly(self):
        code, _ = run_main(
            [
                "chain",
                "--dist",
                "family=weibull param.shape=0.02 param.scale=1",
                "--levels",
                "2",
                "--grid",
                "32",
            ]
        )
        self.assertIn(code, (EXIT_OK, EXIT_INPUT, EXIT_NUMERIC))

    def test_arithmetic_failure_maps_to_numeric_exit(self):
        failure = ZeroDivisionError("float division by zero")
        with patch("scripts.run_orderings.run", side_effect=failure):
            code, _ = run_main(["chain", "--dist", EXP1])
        self.assertEqual(code, EXIT_NUMERIC)


if __name__ == "__main__":
    unittest.main()
