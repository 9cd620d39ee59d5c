"""
Unit tests for the generalized ageing orderings.

Tests ordering verdicts against closed-form oracles, agreement between
equivalent forms, the implication chain, scale equivalence and the ageing
classification of single laws.
"""

import unittest
from types import SimpleNamespace

import numpy as np

from app.core.distributions import (
    make_empirical,
    make_exponential,
    make_gamma,
    make_uniform,
    make_weibull,
)
from app.core.equilibrium import build_chain
from app.core.exceptions import DomainError, LevelError
from app.core.orderings import (
    CHECKS,
    Relation,
    alpha_map,
    check_s_ifr,
    classical_name,
    classify_ageing,
    classify_chain,
    implication_violations,
    ordering_report,
    scale_equivalence,
    sign_change_form,
)
from app.core.shapes import Verdict

S = 3


def chain(d):
    """Chain built one level above the tested depth."""
    return build_chain(d, S + 1)


class TestOrderingOracles(unittest.TestCase):
    """Pairs with known verdicts."""

    @classmethod
    def setUpClass(cls):
        cls.weibull2 = chain(make_weibull(2.0, 1.0))
        cls.weibull_half = chain(make_weibull(0.5, 1.0))
        cls.exp1 = chain(make_exponential(1.0))
        cls.exp2 = chain(make_exponential(2.0))

    def test_ifr_law_against_exponential(self):
        """Weibull(2, 1) against Exp(1): every relation holds at every level."""
        report = ordering_report(self.weibull2, self.exp1, S)
        for (relation, s), verdict in report.verdicts.items():
            with self.subTest(relation=relation.value, s=s):
                self.assertEqual(verdict.holds, Verdict.HOLDS)
                self.assertTrue(verdict.agreement, verdict.disagreements())
        self.assertEqual(report.chain_consistency, [])
        self.assertIsNone(report.equivalence)

    def test_swapped_direction_fails(self):
        """Exp(1) against Weibull(2, 1) fails the three strongest relations at s = 1."""
        report = ordering_report(self.exp1, self.weibull2, 1)
        for relation in (Relation.S_IFR, Relation.S_IFRA, Relation.S_NBU):
            with self.subTest(relation=relation.value):
                self.assertEqual(report.verdict(relation, 1).holds, Verdict.FAILS)

    def test_dfr_law_fails(self):
        """Weibull(0.5, 1) against Exp(1) fails all five relations at s = 1."""
        report = ordering_report(self.weibull_half, self.exp1, 1)
        for relation in Relation:
            with self.subTest(relation=relation.value):
                self.assertEqual(report.verdict(relation, 1).holds, Verdict.FAILS)

    def test_scale_equivalent_pair(self):
        """Exp(1) and Exp(2) sit on the boundary in both directions."""
        for x, y, theta in ((self.exp1, self.exp2, 0.5), (self.exp2, self.exp1, 2.0)):
            report = ordering_report(x, y, S)
            self.assertAlmostEqual(report.equivalence, theta, delta=1e-6)
            for (relation, s), verdict in report.verdicts.items():
                with self.subTest(x=x.name, relation=relation.value, s=s):
                    self.assertEqual(verdict.holds, Verdict.INCONCLUSIVE)
                    self.assertEqual(verdict.to_dict()["note"], "equivalence candidate")

    def test_failure_witness(self):
        """A failing primary form carries witnesses inside the window."""
        verdict = check_s_ifr(self.exp1, self.weibull2, 1)
        low, high = verdict.primary_form.window
        self.assertGreater(len(verdict.primary_form.witnesses), 0)
        for w in verdict.primary_form.witnesses:
            self.assertTrue(low <= w <= high)
        self.assertLess(verdict.primary_form.margin, 0)


class TestFormAgreement(unittest.TestCase):
    """Equivalent forms agree and the implication chain is respected."""

    @classmethod
    def setUpClass(cls):
        laws = [
            make_weibull(2.0, 1.0),
            make_weibull(0.5, 1.0),
            make_weibull(3.0, 1.0),
            make_weibull(1.5, 2.0),
            make_gamma(2, 1.0),
            make_gamma(3.5, 2.0),
            make_uniform(1.0),
            make_exponential(1.0),
            make_exponential(2.0),
        ]
        cls.chains = [chain(d) for d in laws]
        cls.exp1 = cls.chains[7]
        cls.reports = {
            (cx.name, cy.name): ordering_report(cx, cy, S)
            for cx in cls.chains
            for cy in cls.chains
            if cx is not cy
        }

    def test_no_implication_violations(self):
        """Every ordered pair of distinct laws respects the implication chain."""
        self.assertEqual(len(self.reports), 72)
        for (x, y), report in self.reports.items():
            with self.subTest(x=x, y=y):
                self.assertEqual(report.chain_consistency, [])

    def test_conclusive_forms_agree(self):
        """Primary and secondary forms never contradict each other at s = 2, 3."""
        for (x, y), report in self.reports.items():
            for (relation, s), verdict in report.verdicts.items():
                if s < 2:
                    continue
                with self.subTest(x=x, y=y, relation=relation.value, s=s):
                    self.assertEqual(verdict.disagreements(), [])

    def test_line_checks_follow_failed_shape(self):
        """Chord and ray checks also fail where a shallow dip breaks the shape."""
        uniform, weibull2, gamma_mid, weibull_mid = (
            self.chains[6],
            self.chains[0],
            self.chains[5],
            self.chains[3],
        )
        cases = [
            (uniform, weibull2, Relation.S_IFR, 3, "sign_change_chords"),
            (uniform, weibull2, Relation.S_IFRA, 3, "sign_change_rays"),
            (gamma_mid, weibull_mid, Relation.S_IFRA, 2, "sign_change_rays"),
            (uniform, gamma_mid, Relation.S_IFR, 3, "sign_change_chords"),
        ]
        for cx, cy, relation, s, form in cases:
            verdict = self.reports[(cx.name, cy.name)].verdict(relation, s)
            with self.subTest(x=cx.name, y=cy.name, relation=relation.value, s=s):
                secondary = verdict.secondary_forms[form]
                if verdict.holds is Verdict.FAILS:
                    self.assertEqual(secondary.holds, Verdict.FAILS)
                self.assertTrue(verdict.agreement, verdict.disagreements())

    def test_previous_level_form_at_the_origin(self):
        """Weibull(3, 1) against gamma(3.5, 2) at s = 2: the NBUFR forms agree."""
        verdict = self.reports[(self.chains[2].name, self.chains[5].name)].verdict(
            Relation.S_NBUFR, 2
        )
        previous = verdict.secondary_forms["alpha_dominates_previous"]
        self.assertTrue(previous.conclusive)
        self.assertEqual(previous.holds, verdict.holds)

    def test_alpha_derivative_matches_differences(self):
        """alpha_s' from the ratio formula against central differences."""
        for cx in self.chains[:3]:
            for s in range(1, S + 1):
                alpha = alpha_map(cx, self.exp1, s)
                n = alpha.x.size
                x = alpha.x[[n // 10, n // 4, n // 2, 3 * n // 4, 9 * n // 10]]
                h = 1e-3 * x
                numeric = (alpha.eval(x + h) - alpha.eval(x - h)) / (2.0 * h)
                with self.subTest(x=cx.name, s=s):
                    np.testing.assert_allclose(alpha.deriv(x), numeric, rtol=1e-4)


class TestOrderProperties(unittest.TestCase):
    """Origin slopes of vanishing densities, transitivity and antisymmetry."""

    @classmethod
    def setUpClass(cls):
        cls.weibull3 = chain(make_weibull(3.0, 1.0))
        cls.weibull2 = chain(make_weibull(2.0, 1.0))
        cls.weibull2_scale3 = chain(make_weibull(2.0, 3.0))
        cls.weibull_mid = chain(make_weibull(1.5, 2.0))
        cls.gamma2 = chain(make_gamma(2, 1.0))
        cls.exp1 = chain(make_exponential(1.0))

    def test_vanishing_densities_give_zero_slope(self):
        """Both densities vanish at 0 but f_X faster: alpha_1'(0) = 0 and the chain holds."""
        for cx in (self.weibull2, self.gamma2):
            with self.subTest(x=cx.name):
                alpha = alpha_map(cx, self.weibull_mid, 1)
                self.assertEqual(alpha.prime_at_zero, 0.0)
                report = ordering_report(cx, self.weibull_mid, S)
                self.assertEqual(report.chain_consistency, [])
                self.assertEqual(implication_violations(report.verdicts, range(1, S + 1)), [])
                for relation in (Relation.S_NBUFR, Relation.S_NBAFR):
                    self.assertEqual(report.verdict(relation, 1).holds, Verdict.HOLDS)

    def test_vanishing_densities_reversed_give_no_slope(self):
        """With the roles swapped alpha_1' blows up at 0 and is reported as unknown."""
        alpha = alpha_map(self.weibull_mid, self.weibull2, 1)
        self.assertIsNone(alpha.prime_at_zero)

    def test_transitivity(self):
        """Weibull(3, 1) <= Weibull(2, 1) <= Exp(1) carries over to the outer pair."""
        xy = ordering_report(self.weibull3, self.weibull2, S)
        yz = ordering_report(self.weibull2, self.exp1, S)
        xz = ordering_report(self.weibull3, self.exp1, S)
        for relation in Relation:
            self.assertEqual(xy.verdict(relation, 1).holds, Verdict.HOLDS)
        for (relation, s), verdict in xz.verdicts.items():
            with self.subTest(relation=relation.value, s=s):
                first = xy.verdict(relation, s).holds
                second = yz.verdict(relation, s).holds
                if first is Verdict.HOLDS and second is Verdict.HOLDS:
                    self.assertEqual(verdict.holds, Verdict.HOLDS)

    def test_antisymmetry(self):
        """Orderings both ways only for a scale pair: Weibull(2, 1) and Weibull(2, 3)."""
        forward = ordering_report(self.weibull2, self.weibull2_scale3, S)
        backward = ordering_report(self.weibull2_scale3, self.weibull2, S)
        self.assertAlmostEqual(forward.equivalence, 3.0, delta=1e-6)
        self.assertAlmostEqual(backward.equivalence, 1.0 / 3.0, delta=1e-6)
        for key, verdict in forward.verdicts.items():
            relation, s = key
            with self.subTest(relation=relation.value, s=s):
                both = {verdict.holds, backward.verdicts[key].holds}
                self.assertNotEqual(both, {Verdict.HOLDS})
                if s == 1:
                    self.assertEqual(verdict.holds, Verdict.INCONCLUSIVE)
                    self.assertEqual(backward.verdicts[key].holds, Verdict.INCONCLUSIVE)
        for pair in ((self.weibull3, self.exp1), (self.exp1, self.weibull3)):
            report = ordering_report(*pair, 1)
            self.assertIsNone(report.equivalence)


class TestAlphaMap(unittest.TestCase):
    """The comparison map and its helpers."""

    @classmethod
    def setUpClass(cls):
        cls.weibull2 = chain(make_weibull(2.0, 1.0))
        cls.exp1 = chain(make_exponential(1.0))

    def test_alpha_is_square(self):
        """alpha_1 of Weibull(2, 1) against Exp(1) is x^2."""
        alpha = alpha_map(self.weibull2, self.exp1, 1)
        np.testing.assert_allclose(alpha.a, alpha.x**2, rtol=1e-6)
        np.testing.assert_allclose(alpha.inverse(alpha.a), alpha.x, rtol=1e-6)
        self.assertAlmostEqual(alpha.prime_at_zero, 0.0)

    def test_prime_at_zero_is_mean_ratio(self):
        """alpha_s'(0) is mu_{Y,s-1} / mu_{X,s-1} for s >= 2."""
        alpha = alpha_map(self.weibull2, self.exp1, 2)
        self.assertAlmostEqual(alpha.prime_at_zero, 1.0 / self.weibull2.mean(1))

    def test_level_errors(self):
        """Test levels outside the chains."""
        with self.assertRaises(LevelError):
            alpha_map(self.weibull2, self.exp1, 0)
        with self.assertRaises(LevelError):
            alpha_map(self.weibull2, self.exp1, S + 2)
        with self.assertRaises(LevelError):
            ordering_report(self.weibull2, self.exp1, S + 2)

    def test_sign_change_form(self):
        """exp(-x^2) - exp(-x) changes sign once, from + to -."""
        pattern = sign_change_form(self.weibull2, self.exp1, 1, 1.0, 0.0)
        self.assertEqual(pattern.signs, ("+", "-"))
        with self.assertRaises(DomainError):
            sign_change_form(self.weibull2, self.exp1, 1, 0.0, 0.0)

    def test_classical_names(self):
        """Named cells and the generic label."""
        self.assertEqual(classical_name(Relation.S_IFR, 2), "DMRL")
        self.assertEqual(classical_name(Relation.S_NBUFR, 2), "NBUE")
        self.assertEqual(classical_name(Relation.S_NBAFR, 2), "HNBUE")
        self.assertEqual(classical_name(Relation.S_NBU, 2), "2-NBU")
        self.assertEqual(classical_name(Relation.S_IFRA, 3), "3-IFRA")

    def test_scale_equivalence(self):
        """theta is reported only for scale families."""
        exp2 = chain(make_exponential(2.0))
        self.assertAlmostEqual(scale_equivalence(self.exp1, exp2), 0.5, delta=1e-6)
        self.assertIsNone(scale_equivalence(self.weibull2, self.exp1))


class TestReports(unittest.TestCase):
    """Report serialization and the implication scan."""

    def test_implication_violations(self):
        """A stronger relation holding while a weaker one fails is flagged."""
        cells = {
            (Relation.S_IFR, 1): SimpleNamespace(holds=Verdict.HOLDS),
            (Relation.S_NBU, 1): SimpleNamespace(holds=Verdict.FAILS),
            (Relation.S_NBAFR, 1): SimpleNamespace(holds=Verdict.INCONCLUSIVE),
        }
        violations = implication_violations(cells, [1])
        self.assertEqual(violations, [{"s": 1, "stronger": "s-IFR", "weaker": "s-NBU"}])

    def test_report_rows_and_dict(self):
        """Rows and dictionaries expose every cell."""
        report = ordering_report(chain(make_gamma(2, 1.0)), chain(make_exponential(0.5)), 2)
        rows = report.to_rows()
        self.assertEqual(len(rows), 2 * len(CHECKS))
        self.assertEqual({r["relation"] for r in rows}, {r.value for r in Relation})
        data = report.to_dict()
        self.assertEqual(data["max_level"], 2)
        self.assertEqual(len(data["verdicts"]), 2 * len(CHECKS))
        self.assertFalse(data["best_effort"])

    def test_empirical_is_best_effort(self):
        """Step-law inputs are flagged in verdicts and warnings."""
        rng = np.random.default_rng(3)
        sample = make_empirical(rng.weibull(2.0, size=200))
        report = ordering_report(chain(sample), chain(make_exponential(1.0)), 1)
        self.assertTrue(report.best_effort)
        self.assertTrue(any("best-effort" in w for w in report.warnings()))


class TestClassification(unittest.TestCase):
    """Ageing classes of single laws."""

    def test_gamma_classes(self):
        """Gamma(2, 1) is IFR, DMRL, NBUE and HNBUE, with agreeing tests."""
        result = classify_chain(chain(make_gamma(2, 1.0)), S)
        for relation, s, label in (
            (Relation.S_IFR, 1, "IFR"),
            (Relation.S_IFR, 2, "DMRL"),
            (Relation.S_NBUFR, 2, "NBUE"),
            (Relation.S_NBAFR, 2, "HNBUE"),
        ):
            entry = result.entries[(relation, s)]
            with self.subTest(label=label):
                self.assertEqual(entry.label, label)
                self.assertEqual(entry.holds, Verdict.HOLDS)
                self.assertTrue(entry.agreement)
        self.assertIn("DMRL", result.summary)

    def test_direct_and_bridge_agree(self):
        """Direct class tests and exponential bridges agree across laws."""
        for d in (make_weibull(2.0, 1.0), make_weibull(0.5, 1.0), make_uniform(1.0)):
            result = classify_chain(chain(d), S)
            with self.subTest(name=d.name):
                self.assertEqual(result.warnings(), [])
                self.assertTrue(all(e.agreement for e in result.entries.values()))

    def test_exponential_is_borderline(self):
        """Exp(1) is on the boundary of every class."""
        result = classify_chain(chain(make_exponential(1.0)), S)
        self.assertTrue(result.borderline)
        self.assertEqual(result.summary, "exponential-borderline")

    def test_dfr_law_fails(self):
        """Weibull(0.5, 1) is in no class at s = 1."""
        result = classify_ageing(chain(make_weibull(0.5, 1.0)), 1)
        for relation in Relation:
            with self.subTest(relation=relation.value):
                self.assertEqual(result.entries[(relation, 1)].holds, Verdict.FAILS)

    def test_reference_rate_invariance(self):
        """Verdicts do not depend on the rate of the exponential reference."""
        c = chain(make_gamma(2, 1.0))
        outcomes = []
        for factor in (0.5, 1.0, 2.0):
            result = classify_ageing(c, 2, reference_rate=factor / c.base.mean)
            outcomes.append({k: (e.holds, e.bridge.holds) for k, e in result.entries.items()})
            self.assertAlmostEqual(result.reference_rate, factor / 2.0)
        self.assertEqual(outcomes[0], outcomes[1])
        self.assertEqual(outcomes[1], outcomes[2])

    def test_to_dict_and_rows(self):
        """Serialized classification lists every entry."""
        result = classify_chain(chain(make_uniform(1.0)), 2)
        data = result.to_dict()
        self.assertEqual(len(data["entries"]), 2 * len(Relation))
        self.assertEqual(len(result.to_rows()), 2 * len(Relation))
        self.assertEqual(data["reference_rate"], 2.0)


if __name__ == "__main__":
    unittest.main()
