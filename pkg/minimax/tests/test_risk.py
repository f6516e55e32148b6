import numpy as np
from django.test import SimpleTestCase

from minimax.axioms import (
    AH, H, M, check_axiom, min_max_composite, top_operator, vectorized_operator,
)
from minimax.core import SampleConfig, sample_points
from minimax.exceptions import (
    AxiomPrecheckFailed, DimensionMismatch, EmptyInputError, EmptyRepresentation,
)
from minimax.norms import SPHERE, epsilon_net
from minimax.risk import (
    RiskMeasure, RiskSpace, build_measure, coherent_eval, coherent_measure,
    expectation_measure, homogeneous_risk_minimax_eval, load_scenarios, min_max_measure,
    normalize_position, risk_from_operator, risk_minimax_eval, worst_case_measure,
)


def cfg(n, count=1000):
    return SampleConfig.default(n, count=count)


class RiskSpaceTest(SimpleTestCase):
    def test_valid(self):
        space = RiskSpace(('up', 'flat', 'down'), [0.25, 0.5, 0.25])
        self.assertEqual(space.n, 3)
        self.assertEqual(space.expectation([4.0, 0.0, -4.0]), 0.0)

    def test_validation(self):
        with self.assertRaises(ValueError):
            RiskSpace(('a', 'b'), [0.5, 0.6])
        with self.assertRaises(ValueError):
            RiskSpace(('a', 'b'), [1.0, 0.0])
        with self.assertRaises(ValueError):
            RiskSpace(('a', 'a'), [0.5, 0.5])
        with self.assertRaises(DimensionMismatch):
            RiskSpace(('a',), [0.5, 0.5])


class RiskFromOperatorTest(SimpleTestCase):
    def test_worst_case(self):
        mu = risk_from_operator(top_operator(3), cfg(3))
        self.assertEqual(mu([1.0, 2.0, 3.0]), -1.0)
        self.assertTrue(mu.positively_homogeneous)
        for X in sample_points(cfg(3, 50)):
            self.assertAlmostEqual(mu(X + 2.0), mu(X) - 2.0)

    def test_min_max(self):
        mu = risk_from_operator(min_max_composite(), cfg(3))
        self.assertEqual(mu([0.0, 1.0, -2.0]), 0.0)
        self.assertEqual(min_max_measure()([0.0, 1.0, -2.0]), 0.0)

    def test_acceptance_operator_properties(self):
        for mu in (risk_from_operator(top_operator(3), cfg(3)), min_max_measure(),
                   coherent_measure([[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]])):
            rho = mu.acceptance_operator()
            for axiom in (M, AH, H):
                self.assertTrue(check_axiom(rho, axiom, cfg(3)).holds, (mu.label, axiom))

    def test_precheck(self):
        with self.assertRaises(AxiomPrecheckFailed):
            risk_from_operator(vectorized_operator(lambda xs: -xs[:, 0], 2), cfg(2))
        with self.assertRaises(DimensionMismatch):
            risk_from_operator(vectorized_operator(lambda xs: xs, 2, 2), cfg(2))

    def test_not_homogeneous(self):
        shifted = vectorized_operator(lambda xs: xs.max(axis=1) + 1.0, 2, label='shifted')
        mu = risk_from_operator(shifted, cfg(2))
        self.assertFalse(mu.positively_homogeneous)


class CoherentTest(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(coherent_eval(np.eye(3), [1.0, 2.0, 3.0]), -1.0)
        self.assertEqual(coherent_eval([[0.5, 0.5], [1.0, 0.0]], [0.0, 4.0]), 0.0)
        space = RiskSpace(('a', 'b'), [0.25, 0.75])
        self.assertEqual(expectation_measure(space)([4.0, 8.0]), -7.0)

    def test_validation(self):
        with self.assertRaises(EmptyInputError):
            coherent_eval(np.zeros((0, 2)), [1.0, 2.0])
        with self.assertRaises(ValueError):
            coherent_eval([[0.5, 0.6]], [1.0, 2.0])

    def test_convex(self):
        mu = coherent_measure([[0.2, 0.3, 0.5], [0.6, 0.2, 0.2], [0.0, 0.0, 1.0]])
        X = sample_points(cfg(3))
        Y = sample_points(cfg(3).derived(1))
        mid = mu.evaluate_many((X + Y) / 2)
        self.assertTrue(np.all(mid <= (mu.evaluate_many(X) + mu.evaluate_many(Y)) / 2 + 1e-9))

    def test_worst_case_has_both_forms(self):
        X = sample_points(cfg(4))
        by_operator = risk_from_operator(top_operator(4), cfg(4)).evaluate_many(X)
        self.assertTrue(np.allclose(by_operator, worst_case_measure(4).evaluate_many(X)))

    def test_build_measure(self):
        space = RiskSpace(('a', 'b', 'c'), [0.2, 0.3, 0.5])
        self.assertEqual(build_measure('worst_case', space)([1.0, 2.0, 3.0]), -1.0)
        self.assertAlmostEqual(build_measure('expectation', space)([1.0, 2.0, 3.0]), -2.3)
        with self.assertRaises(ValueError):
            build_measure('cvar', space)
        with self.assertRaises(DimensionMismatch):
            build_measure('min_max', RiskSpace(('a', 'b'), [0.5, 0.5]))


class RiskMinimaxTest(SimpleTestCase):
    def test_exact_when_net_contains_position(self):
        mu = worst_case_measure(3)
        self.assertEqual(risk_minimax_eval(mu, [[1.0, 2.0, 3.0]], [1.0, 2.0, 3.0]), -1.0)
        mu = expectation_measure(3)
        X = [1.0, 2.0, 6.0]
        self.assertAlmostEqual(risk_minimax_eval(mu, [X, [0.0, 0.0, 0.0]], X), mu(X))

    def test_coarse_net_is_upper_bound(self):
        mu = expectation_measure(3)
        self.assertEqual(risk_minimax_eval(mu, [[0.0, 0.0, 0.0]], [1.0, 2.0, 3.0]), -1.0)
        self.assertAlmostEqual(mu([1.0, 2.0, 3.0]), -2.0)

    def test_upper_bound_on_samples(self):
        ynet = sample_points(cfg(3, 30))
        for mu in (worst_case_measure(3), expectation_measure(3), min_max_measure()):
            for X in sample_points(cfg(3, 100).derived(4)):
                self.assertGreaterEqual(risk_minimax_eval(mu, ynet, X), mu(X) - 1e-9)

    def test_normalization_is_idempotent(self):
        mu = min_max_measure()
        for Y in sample_points(cfg(3, 20)):
            once = normalize_position(mu, Y)
            self.assertLessEqual(abs(mu(once)), 1e-9)
            self.assertTrue(np.allclose(normalize_position(mu, once), once))

    def test_empty_net(self):
        with self.assertRaises(EmptyInputError):
            risk_minimax_eval(worst_case_measure(2), np.zeros((0, 2)), [1.0, 2.0])


class HomogeneousRiskMinimaxTest(SimpleTestCase):
    def test_worst_case(self):
        mu = worst_case_measure(2)
        self.assertEqual(homogeneous_risk_minimax_eval(mu, [[1.0, 3.0]], [1.0, 3.0]), -1.0)

    def test_single_atom_projection(self):
        mu = coherent_measure([[1.0, 0.0, 0.0]], label='first')
        X = [2.0, -1.0, 5.0]
        self.assertEqual(homogeneous_risk_minimax_eval(mu, [X], X), -2.0)

    def test_min_max_on_sphere_net(self):
        mu = min_max_measure()
        ynet = epsilon_net(SPHERE, 0.5, 3).points
        self.assertAlmostEqual(homogeneous_risk_minimax_eval(mu, ynet, [0.0, 1.0, -2.0]), 0.0)
        for X in sample_points(cfg(3, 50)):
            self.assertGreaterEqual(homogeneous_risk_minimax_eval(mu, ynet, X), mu(X) - 1e-9)

    def test_refining_the_net(self):
        mu = min_max_measure()
        X = sample_points(cfg(3, 20))
        coarse = [homogeneous_risk_minimax_eval(mu, epsilon_net(SPHERE, 1.0, 3).points, x)
                  for x in X]
        fine = [homogeneous_risk_minimax_eval(mu, epsilon_net(SPHERE, 0.25, 3).points, x)
                for x in X]
        exact = mu.evaluate_many(X)
        self.assertLessEqual(np.max(np.array(fine) - exact), np.max(np.array(coarse) - exact))

    def test_needs_homogeneity(self):
        shifted = vectorized_operator(lambda xs: xs.max(axis=1) + 1.0, 2, label='shifted')
        mu = risk_from_operator(shifted, cfg(2))
        with self.assertRaises(AxiomPrecheckFailed):
            homogeneous_risk_minimax_eval(mu, [[1.0, 2.0]], [1.0, 2.0], cfg(2))

    def test_all_slices_empty(self):
        broken = RiskMeasure(lambda X: -X.max() - 1.0, 2, positively_homogeneous=True)
        with self.assertRaises(EmptyRepresentation):
            homogeneous_risk_minimax_eval(broken, [[1.0, 2.0]], [1.0, 2.0])


class ScenarioTest(SimpleTestCase):
    rows = [
        {'label': 'boom', 'weight': 0.25, 'bond': 1.0, 'stock': 3.0},
        {'label': 'base', 'weight': 0.5, 'bond': 1.0, 'stock': 1.0},
        {'label': 'bust', 'weight': 0.25, 'bond': 1.0, 'stock': -2.0},
    ]

    def test_load(self):
        space, positions = load_scenarios(self.rows)
        self.assertEqual(space.atoms, ('boom', 'base', 'bust'))
        self.assertEqual(space.weights.tolist(), [0.25, 0.5, 0.25])
        self.assertEqual(list(positions), ['bond', 'stock'])
        self.assertEqual(positions['stock'].tolist(), [3.0, 1.0, -2.0])

    def test_weights_from_space(self):
        rows = [{'label': row['label'], 'stock': row['stock']} for row in self.rows]
        space = RiskSpace(('x', 'y', 'z'), [0.2, 0.2, 0.6])
        loaded, positions = load_scenarios(rows, space)
        self.assertIs(loaded, space)
        with self.assertRaises(ValueError):
            load_scenarios(rows)
        with self.assertRaises(DimensionMismatch):
            load_scenarios(rows[:2], space)

    def test_empty(self):
        with self.assertRaises(EmptyInputError):
            load_scenarios([])
        with self.assertRaises(EmptyInputError):
            load_scenarios([{'label': 'a', 'weight': 1.0}])
