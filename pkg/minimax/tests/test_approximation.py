import numpy as np
from django.test import SimpleTestCase

from minimax.approximation import (
    SmoothedMap, approximate_payment_free, net_smoothing, precheck_payment_free,
    upper_excess_curve, verify_sandwich,
)
from minimax.axioms import identity_operator, top_operator, vectorized_operator
from minimax.core import SampleConfig
from minimax.exceptions import AxiomPrecheckFailed, DimensionMismatch
from minimax.games import (
    GameSpec, InnerAction, OuterAction, StateSpec, eval_payment_free_rep, spec_operator,
)
from minimax.norms import SPHERE, WeakNorm, epsilon_net

from .factories import GameSpecFactory, PaymentFreeGameSpecFactory, min_max_spec, repeated_min


def linear_spec(rows):
    """Payment-free game with one action pair per state: F(x) = P x."""
    states = tuple(StateSpec((OuterAction((InnerAction(0.0, tuple(row)),)),)) for row in rows)
    return GameSpec(len(rows), states)


def unit_box(n):
    return [-1.0] * n, [1.0] * n


class NetSmoothingTest(SimpleTestCase):
    def test_top_example(self):
        net = epsilon_net(unit_box(2), 0.5, 2)
        g = net_smoothing(top_operator(2), WeakNorm.top(2), net)
        value = g.evaluate([0.1, 0.2])
        self.assertGreaterEqual(value, 0.2)
        self.assertLessEqual(value, 1.2)
        self.assertIsInstance(g, SmoothedMap)

    def test_sandwich(self):
        for n in (1, 2, 3):
            q = WeakNorm.top(n)
            for epsilon in (0.5, 0.25, 0.1):
                net = epsilon_net(unit_box(n), epsilon, n)
                cfg = SampleConfig.default(n, count=1000)
                g = net_smoothing(top_operator(n), q, net, cfg)
                report = g.sandwich_report(top_operator(n), cfg)
                self.assertTrue(report.holds, (n, epsilon))
                self.assertLessEqual(report.max_lower_violation, 1e-9)
                self.assertLessEqual(report.max_upper_excess, 2 * epsilon)

    def test_sandwich_on_sphere(self):
        spec = PaymentFreeGameSpecFactory(n=2)
        f = spec_operator(spec).coordinate(0)
        net = epsilon_net(SPHERE, 0.25, 2)
        cfg = SampleConfig.default(2, count=1000)
        g = net_smoothing(f, WeakNorm.top(2), net, cfg)
        self.assertTrue(g.sandwich_report(f, cfg).holds)
        self.assertTrue(np.allclose(g.evaluate_many(net.points), f.evaluate_many(net.points)[:, 0]))

    def test_smoothed_map_is_an_operator(self):
        net = epsilon_net(unit_box(2), 0.5, 2)
        g = net_smoothing(top_operator(2), WeakNorm.top(2), net).as_operator()
        self.assertEqual(g.n, 2)
        self.assertEqual(g.scalar([1.0, -1.0]), g.evaluate_many([[1.0, -1.0]])[0, 0])

    def test_precheck(self):
        expanding = vectorized_operator(lambda xs: 2.0 * xs[:, 0], 2, label='expanding')
        net = epsilon_net(unit_box(2), 0.5, 2)
        with self.assertRaises(AxiomPrecheckFailed) as raised:
            net_smoothing(expanding, WeakNorm.top(2), net, SampleConfig.default(2, count=500))
        self.assertFalse(raised.exception.report.holds)
        g = net_smoothing(expanding, WeakNorm.top(2), net, precheck=False)
        report = g.sandwich_report(expanding, SampleConfig.default(2, count=1000))
        self.assertFalse(report.holds)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            net_smoothing(top_operator(3), WeakNorm.top(2), epsilon_net(unit_box(2), 0.5, 2))


class ApproximatePaymentFreeTest(SimpleTestCase):
    def test_min_example(self):
        F = repeated_min(2)
        G = approximate_payment_free(F, 0.5, SampleConfig.default(2, count=1000))
        report = verify_sandwich(F, G, 0.5, SampleConfig.default(2))
        self.assertEqual(report.samples, 10000)
        self.assertTrue(report.holds)
        self.assertLessEqual(report.max_upper_excess, 0.5)

    def test_identity_is_exact(self):
        F = identity_operator(1)
        for epsilon in (1.0, 0.3):
            G = approximate_payment_free(F, epsilon, SampleConfig.default(1, count=200))
            self.assertEqual(eval_payment_free_rep(G, [-4.5]).tolist(), [-4.5])
            report = verify_sandwich(F, G, epsilon, SampleConfig.default(1, count=500))
            self.assertEqual(report.max_upper_excess, 0.0)

    def test_exact_at_net_points(self):
        spec = min_max_spec()
        F = spec_operator(spec)
        G = approximate_payment_free(spec, 0.25, SampleConfig.default(2, count=500))
        net = epsilon_net(SPHERE, 0.125, 2, nested=True)
        self.assertTrue(np.allclose(G.evaluate_many(net.points), F.evaluate_many(net.points)))
        self.assertLessEqual(G.size(), 2 * len(net))

    def test_random_games(self):
        for _ in range(3):
            spec = PaymentFreeGameSpecFactory(max_states=3)
            cfg = SampleConfig.default(spec.n, count=2000)
            G = approximate_payment_free(spec, 0.5, cfg)
            self.assertTrue(verify_sandwich(spec, G, 0.5, cfg).holds)

    def test_smaller_epsilon_fails(self):
        spec = linear_spec([[0.2, 0.3, 0.5], [0.5, 0.25, 0.25], [0.1, 0.1, 0.8]])
        cfg = SampleConfig.default(3, count=2000)
        G = approximate_payment_free(spec, 0.5, cfg)
        report = verify_sandwich(spec, G, 0.5, cfg)
        self.assertTrue(report.holds)
        self.assertGreater(report.max_upper_excess, 0.0)
        tight = verify_sandwich(spec, G, report.max_upper_excess / 2, cfg)
        self.assertFalse(tight.holds)
        self.assertEqual(tight.max_upper_excess, report.max_upper_excess)

    def test_halving_epsilon_never_hurts(self):
        spec = linear_spec([[0.2, 0.3, 0.5], [0.5, 0.25, 0.25], [0.1, 0.1, 0.8]])
        curve = upper_excess_curve(spec, [0.5, 0.25, 0.125], SampleConfig.default(3, count=1000))
        excess = [value for epsilon, value in curve]
        self.assertEqual([epsilon for epsilon, value in curve], [0.5, 0.25, 0.125])
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(excess, excess[1:])), excess)

    def test_verification_is_seeded(self):
        spec = min_max_spec()
        G = approximate_payment_free(spec, 0.5, SampleConfig.default(2, count=200))
        cfg = SampleConfig.default(2, count=300, seed=5)
        self.assertEqual(verify_sandwich(spec, G, 0.5, cfg).as_dict(),
                         verify_sandwich(spec, G, 0.5, cfg).as_dict())

    def test_rejects_games_with_payments(self):
        F = spec_operator(GameSpecFactory(payoff_range=3.0))
        with self.assertRaises(AxiomPrecheckFailed):
            precheck_payment_free(F, SampleConfig.default(F.n, count=500))
        with self.assertRaises(AxiomPrecheckFailed):
            approximate_payment_free(F, 0.5, SampleConfig.default(F.n, count=500))

    def test_bad_epsilon(self):
        with self.assertRaises(ValueError):
            approximate_payment_free(repeated_min(2), 0.0)
