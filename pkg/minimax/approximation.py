"""
Finite approximations built on epsilon-nets.

net_smoothing: g(x) = min_l f(y_l) + q(x - y_l) satisfies f <= g <= f + 2 eps
on the netted set when f is q-nonexpansive.

approximate_payment_free: a payment-free operator G with finitely many
outer points such that F <= G <= F + eps |x|_sup everywhere.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .axioms import AH, H, M, OperatorHandle, check_axiom, check_nonexpansive
from .core import (
    SampleConfig, as_batch, as_vector, chunk_rows, resolve_tolerance, sample_points, sample_sphere,
)
from .exceptions import AxiomPrecheckFailed, DimensionMismatch, EmptyInputError
from .games import PaymentFreeRep, as_operator, build_payment_free_representation
from .norms import BOX, SPHERE, epsilon_net
from .representation import YNet


logger = logging.getLogger(__name__)


@dataclass
class SandwichReport:
    epsilon: float
    max_lower_violation: float
    max_upper_excess: float
    samples: int
    seed: int
    holds: bool

    def as_dict(self):
        return {
            'epsilon': self.epsilon,
            'max_lower_violation': self.max_lower_violation,
            'max_upper_excess': self.max_upper_excess,
            'samples': self.samples,
            'seed': self.seed,
            'holds': self.holds,
        }


def _target_config(target, n, cfg):
    """Sampling box for the set an EpsNet covers."""
    if target.get('kind') == BOX:
        return SampleConfig(target['lower'], target['upper'], cfg.count, cfg.seed)
    return SampleConfig(np.full(n, -1.0), np.ones(n), cfg.count, cfg.seed)


class SmoothedMap(object):
    def __init__(self, points, values, q, epsilon, target=None):
        self.points = as_batch(points, n=q.n)
        self.values = np.asarray(values, dtype=float).reshape(-1)
        if self.values.size != self.points.shape[0]:
            raise DimensionMismatch('%d values for %d net points'
                                    % (self.values.size, self.points.shape[0]))
        self.q = q
        self.epsilon = float(epsilon)
        self.target = target or {}

    @property
    def n(self):
        return self.q.n

    def evaluate_many(self, xs):
        xs = as_batch(xs, n=self.n)
        out = np.empty(xs.shape[0])
        for start, stop in chunk_rows(xs.shape[0], self.points.size):
            diff = xs[start:stop, None, :] - self.points[None, :, :]
            out[start:stop] = (self.values + self.q.evaluate(diff)).min(axis=1)
        return out

    def evaluate(self, x):
        return float(self.evaluate_many(as_vector(x, n=self.n))[0])

    def as_operator(self):
        return OperatorHandle(self.evaluate, self.n, label='smoothed', batch=self.evaluate_many)

    def sandwich_report(self, f, cfg=None, tol=None):
        """f <= g <= f + 2 eps on samples of the netted set."""
        tol = resolve_tolerance(tol)
        if cfg is None:
            cfg = SampleConfig.default(self.n)
        box = _target_config(self.target, self.n, cfg)
        xs = sample_sphere(box) if self.target.get('kind') == SPHERE else sample_points(box)
        fx = f.evaluate_many(xs)[:, 0]
        gx = self.evaluate_many(xs)
        slack = tol.abs_tol + tol.rel_tol * np.abs(fx)
        holds = bool(np.all(fx - gx <= slack) and np.all(gx - fx <= 2 * self.epsilon + slack))
        return SandwichReport(self.epsilon, max(float(np.max(fx - gx)), 0.0),
                              float(np.max(gx - fx)), cfg.count, cfg.seed, holds)


def net_smoothing(f, q, net, cfg=None, tol=None, precheck=True):
    if f.m != 1 or f.n != q.n or net.dimension != q.n:
        raise DimensionMismatch('need a scalar map on R^%d and a net of the same dimension' % q.n)
    if len(net) == 0:
        raise EmptyInputError('the net is empty')
    if precheck:
        if cfg is None:
            cfg = SampleConfig.default(f.n)
        report = check_nonexpansive(f, q, _target_config(net.target, f.n, cfg), tol)
        if not report.holds:
            raise AxiomPrecheckFailed('%s is not %s-nonexpansive' % (f.label, q.kind), report)
    values = f.evaluate_many(net.points)[:, 0]
    return SmoothedMap(net.points, values, q, net.epsilon, net.target)


def precheck_payment_free(F, cfg=None, tol=None):
    """Sampled M, AH and H checks; raises AxiomPrecheckFailed on the first failure."""
    for axiom in (M, AH, H):
        report = check_axiom(F, axiom, cfg, tol)
        if not report.holds:
            raise AxiomPrecheckFailed('%s fails %s' % (F.label, axiom), report)


def approximate_payment_free(F, epsilon, cfg=None, tol=None, precheck=True):
    """
    Net the unit sup-sphere at epsilon / 2, build the representation over
    every net point and keep, for each state and net point, the first outer
    point attaining the minimum there.
    """
    if not epsilon > 0:
        raise ValueError('epsilon must be positive, got %r' % (epsilon,))
    tol = resolve_tolerance(tol)
    F = as_operator(F)
    if F.n != F.m:
        raise DimensionMismatch('%r is not a self-map' % (F,))
    if precheck:
        precheck_payment_free(F, cfg, tol)
    net = epsilon_net(SPHERE, epsilon / 2.0, F.n, nested=True)
    full = build_payment_free_representation(F, YNet(net.points), tol)
    states = []
    for entries, slices in zip(full.states, full.compiled):
        values = slices.maxima(net.points)
        best = values.min(axis=1)
        allowed = best + tol.abs_tol + tol.rel_tol * np.abs(best)
        chosen = sorted(set(int(np.argmax(row <= limit)) for row, limit in zip(values, allowed)))
        states.append(tuple(entries[k] for k in chosen))
    rep = PaymentFreeRep(F.n, tuple(states), full.dropped, tol)
    logger.info('approximated %s at epsilon %g: %d net points, %d outer points kept',
                F.label, epsilon, len(net), rep.size())
    return rep


def verify_sandwich(F, G, epsilon, cfg=None, tol=None):
    """
    Sample F <= G <= F + epsilon |x|_sup. The upper excess is reported
    normalized by |x|_sup.
    """
    tol = resolve_tolerance(tol)
    F = as_operator(F)
    G = as_operator(G)
    if F.n != G.n or F.m != G.m:
        raise DimensionMismatch('%r and %r have different dimensions' % (F, G))
    if cfg is None:
        cfg = SampleConfig.default(F.n)
    xs = sample_points(cfg)
    fx = F.evaluate_many(xs)
    gx = G.evaluate_many(xs)
    norms = np.abs(xs).max(axis=1)
    slack = tol.abs_tol + tol.rel_tol * np.abs(fx)
    lower = float(np.max(fx - gx))
    nonzero = norms > 0
    excess = (gx[nonzero] - fx[nonzero]) / norms[nonzero, None]
    upper = float(excess.max()) if excess.size else 0.0
    holds = bool(np.all(fx - gx <= slack)
                 and np.all(gx - fx <= epsilon * norms[:, None] + slack))
    report = SandwichReport(float(epsilon), max(lower, 0.0), upper, cfg.count, cfg.seed, holds)
    if not holds:
        logger.info('sandwich fails at epsilon %g: lower %.3g, upper excess %.3g',
                    epsilon, report.max_lower_violation, report.max_upper_excess)
    return report


def upper_excess_curve(F, epsilons, cfg=None, tol=None):
    """(epsilon, measured upper excess) for each epsilon, on the same samples."""
    F = as_operator(F)
    curve = []
    for epsilon in epsilons:
        G = approximate_payment_free(F, epsilon, cfg, tol, precheck=False)
        curve.append((float(epsilon), verify_sandwich(F, G, epsilon, cfg, tol).max_upper_excess))
    return curve
