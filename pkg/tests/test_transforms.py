"""
Unit tests for unit-interval transforms.

Tests TTT, R-transform and Lorenz curves against closed forms, their
mutual identities, the sample TTT statistic and CSV output.
"""

import math
import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd

from app.core.distributions import (
    make_empirical,
    make_exponential,
    make_gamma,
    make_uniform,
    make_weibull,
)
from app.core.equilibrium import build_chain
from app.core.exceptions import DataError, DomainError, LevelError
from app.core.transforms import (
    CURVE_COLUMNS,
    CurveKind,
    UnitCurve,
    all_curves,
    curves_frame,
    empirical_ttt,
    level_curve,
    lorenz,
    r_transform,
    r_transform_inv,
    ttt,
    ttt_inverse,
    write_curves_csv,
)

U = np.linspace(0.0, 1.0, 101)


class TestClosedFormCurves(unittest.TestCase):
    """Curves with known values."""

    def test_exponential_ttt_is_diagonal(self):
        """Test the TTT transform of the exponential, closed and numeric."""
        for use_closed_form in (True, False):
            chain = build_chain(make_exponential(1.5), 3, use_closed_form=use_closed_form)
            for s in (1, 2):
                with self.subTest(closed=use_closed_form, s=s):
                    self.assertLessEqual(np.max(np.abs(ttt(chain, s, U) - U)), 1e-6)

    def test_uniform_values(self):
        """Test TTT(0.5) = 0.75 and Lorenz(0.5) = 0.25 for the uniform law."""
        chain = build_chain(make_uniform(1.0), 2)
        self.assertAlmostEqual(ttt(chain, 1, 0.5), 0.75, places=12)
        self.assertAlmostEqual(lorenz(chain, 1, 0.5), 0.25, places=12)
        np.testing.assert_allclose(lorenz(chain, 1, U), U**2, atol=1e-12)

    def test_exponential_lorenz(self):
        """Test the exponential Lorenz curve u + (1 - u) ln(1 - u)."""
        chain = build_chain(make_exponential(1.0), 2)
        self.assertAlmostEqual(lorenz(chain, 1, 0.5), 0.153426, delta=1e-5)
        inner = U[1:-1]
        np.testing.assert_allclose(
            lorenz(chain, 2, inner), inner + (1.0 - inner) * np.log(1.0 - inner), atol=1e-10
        )

    def test_numeric_lorenz(self):
        """Test the numeric exponential Lorenz value at the top level."""
        chain = build_chain(make_exponential(1.0), 2, use_closed_form=False)
        self.assertAlmostEqual(lorenz(chain, 2, 0.5), 0.5 + 0.5 * math.log(0.5), delta=1e-5)

    def test_endpoints(self):
        """Test that every curve runs from 0 to 1."""
        chain = build_chain(make_weibull(2.0, 1.0), 2)
        for fn in (ttt, r_transform_inv, r_transform, ttt_inverse, lorenz):
            with self.subTest(fn=fn.__name__):
                self.assertEqual(fn(chain, 1, 0.0), 0.0)
                self.assertEqual(fn(chain, 1, 1.0), 1.0)


class TestIdentities(unittest.TestCase):
    """Relations between the transforms."""

    @classmethod
    def setUpClass(cls):
        cls.chains = [
            build_chain(make_weibull(2.0, 1.0), 3),
            build_chain(make_weibull(0.5, 1.0), 3),
            build_chain(make_gamma(2, 1.0), 3),
        ]

    def test_r_inverse_is_reflected_ttt(self):
        """Test R^{-1}(u) = 1 - H^{-1}(1 - u)."""
        for chain in self.chains:
            for s in (1, 2):
                with self.subTest(name=chain.name, s=s):
                    gap = r_transform_inv(chain, s, U) - (1.0 - ttt(chain, s, 1.0 - U))
                    self.assertLessEqual(np.max(np.abs(gap)), 1e-8)

    def test_inverse_pairs(self):
        """Test that R and R^{-1}, H and H^{-1} invert each other."""
        inner = U[1:-1]
        for chain in self.chains:
            with self.subTest(name=chain.name):
                np.testing.assert_allclose(
                    r_transform(chain, 1, r_transform_inv(chain, 1, inner)), inner, atol=1e-8
                )
                np.testing.assert_allclose(
                    ttt_inverse(chain, 1, ttt(chain, 1, inner)), inner, atol=1e-8
                )

    def test_lorenz_shape(self):
        """Test that Lorenz curves are increasing, convex and below the diagonal."""
        for chain in self.chains:
            values = lorenz(chain, 2, U)
            self.assertTrue(np.all(np.diff(values) >= -1e-12))
            self.assertTrue(np.all(np.diff(values, 2) >= -1e-8))
            self.assertTrue(np.all(values <= U + 1e-12))

    def test_ifr_ttt_is_concave(self):
        """Test that the TTT curve of an IFR law lies above the diagonal."""
        values = ttt(self.chains[0], 1, U)
        self.assertTrue(np.all(values >= U - 1e-10))


class TestErrors(unittest.TestCase):
    """Invalid levels and arguments."""

    def test_level_errors(self):
        """Test that a level-s transform needs level s + 1."""
        chain = build_chain(make_exponential(1.0), 2)
        with self.assertRaises(LevelError):
            ttt(chain, 2, 0.5)
        with self.assertRaises(LevelError):
            r_transform(chain, 0, 0.5)
        with self.assertRaises(LevelError):
            lorenz(chain, 3, 0.5)

    def test_domain_errors(self):
        """Test arguments outside [0, 1]."""
        chain = build_chain(make_exponential(1.0), 2)
        with self.assertRaises(DomainError):
            ttt(chain, 1, 1.5)
        with self.assertRaises(DomainError):
            lorenz(chain, 1, np.array([0.2, -0.1]))

    def test_unit_curve_validation(self):
        """Test that curves need increasing knots of matching length."""
        with self.assertRaises(DomainError):
            UnitCurve([0.0, 0.5, 0.5], [0.0, 0.1, 0.2], CurveKind.TTT, 1)
        with self.assertRaises(DomainError):
            UnitCurve([0.0, 1.0], [0.0], CurveKind.TTT, 1)


class TestEmpiricalTTT(unittest.TestCase):
    """The sample TTT statistic."""

    def test_three_point_sample(self):
        """Test the knots of the statistic for {1, 2, 3}."""
        curve = empirical_ttt([3.0, 1.0, 2.0])
        np.testing.assert_allclose(curve.u_knots, [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
        np.testing.assert_allclose(curve.values, [0.0, 0.5, 5.0 / 6.0, 1.0])
        self.assertAlmostEqual(curve.evaluate(1.0 / 6.0), 0.25)

    def test_matches_chain_ttt_at_knots(self):
        """Test that the step-law TTT transform hits the statistic at i/n."""
        sample = [0.4, 1.1, 2.5, 3.0, 7.2]
        curve = empirical_ttt(sample)
        chain = build_chain(make_empirical(sample), 2)
        inner = curve.u_knots[1:-1]
        np.testing.assert_allclose(ttt(chain, 1, inner), curve.values[1:-1], atol=1e-12)

    def test_large_exponential_sample_tracks_diagonal(self):
        """Test that the statistic of 10000 Exp(1) draws stays within 0.02 of u."""
        sample = np.random.default_rng(7).exponential(1.0, size=10_000)
        curve = empirical_ttt(sample)
        self.assertEqual(curve.u_knots.size, 10_001)
        self.assertLessEqual(np.max(np.abs(curve.values - curve.u_knots)), 0.02)

    def test_invalid_sample(self):
        """Test that an empty sample raises DataError."""
        with self.assertRaises(DataError):
            empirical_ttt([])


class TestCurveTables(unittest.TestCase):
    """Sampling curves and writing them as tables."""

    def setUp(self):
        """Set up a temporary output directory."""
        self.test_dir = tempfile.mkdtemp()
        self.chain = build_chain(make_uniform(1.0), 3)

    def tearDown(self):
        """Clean up the temporary directory."""
        if os.path.exists(self.test_dir):
            shutil.rmtree(self.test_dir)

    def test_level_curve(self):
        """Test sampling on {0} + u-grid + {1}."""
        curve = level_curve(self.chain, 1, CurveKind.R_INV)
        self.assertEqual(curve.u_knots.size, self.chain.settings.grid_points + 2)
        self.assertEqual(curve.u_knots[0], 0.0)
        self.assertEqual(curve.u_knots[-1], 1.0)
        self.assertEqual(curve.kind, CurveKind.R_INV)
        self.assertEqual(curve.to_dict()["kind"], "R_inv")

    def test_all_curves_default(self):
        """Test that every kind is sampled at levels 1..S-1."""
        curves = all_curves(self.chain)
        self.assertEqual(len(curves), 2 * len(CurveKind))
        self.assertEqual(sorted({c.s for c in curves}), [1, 2])

    def test_frame_and_csv(self):
        """Test the u,value,kind,s schema written with full precision."""
        curves = all_curves(self.chain, levels=[1], kinds=[CurveKind.TTT, CurveKind.LORENZ])
        frame = curves_frame(curves)
        self.assertEqual(list(frame.columns), CURVE_COLUMNS)
        self.assertEqual(set(frame["kind"]), {"TTT", "Lorenz"})

        path = write_curves_csv(curves, os.path.join(self.test_dir, "out", "curves.csv"))
        self.assertTrue(path.exists())
        loaded = pd.read_csv(path)
        self.assertEqual(list(loaded.columns), CURVE_COLUMNS)
        np.testing.assert_allclose(loaded["value"].to_numpy(), frame["value"].to_numpy(), rtol=1e-14)

    def test_empty_frame(self):
        """Test that no curves give an empty table with the schema."""
        self.assertEqual(list(curves_frame([]).columns), CURVE_COLUMNS)


if __name__ == "__main__":
    unittest.main()
