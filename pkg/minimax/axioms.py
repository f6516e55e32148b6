"""
Sampled checks of the order-theoretic properties of maps f: R^n -> R^m
(e = all-ones on both sides):

    M       x <= y  =>  f(x) <= f(y)
    AH      f(x + l e) = f(x) + l e,        l real
    ASH     f(x + l e) <= f(x) + l e,       l >= 0
    N       |f(x) - f(y)|_sup <= |x - y|_sup
    H       f(l x) = l f(x),                l >= 0
    Nt      t(f(x) - f(y)) <= t(x - y)
    NtPlus  t+(f(x) - f(y)) <= t+(x - y)

A sampled checker can only falsify. Reports carry the number of samples
used so a "holds" verdict is always read together with its sampling power.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .core import (
    SampleConfig, as_batch, as_vector, chunk_rows, resolve_tolerance, sample_lambdas,
    sample_points,
)
from .exceptions import DimensionMismatch, OperatorEvaluationError


logger = logging.getLogger(__name__)


M = 'M'
AH = 'AH'
ASH = 'ASH'
N = 'N'
H = 'H'
NT = 'Nt'
NT_PLUS = 'NtPlus'
AXIOMS = (M, AH, ASH, N, H, NT, NT_PLUS)

CRANDALL_TARTAR = 'CrandallTartar'
GUNAWARDENA_KEANE = 'GunawardenaKeane'
SUBHOMOGENEOUS_GK = 'SubhomogeneousGK'
MONOTONE_SUBHOMOGENEOUS = 'MonotoneSubhomogeneous'

# suite -> (left-hand axioms, right-hand axioms)
SUITES = {
    CRANDALL_TARTAR: ((M, AH), (N, AH)),
    GUNAWARDENA_KEANE: ((M, AH), (NT,)),
    SUBHOMOGENEOUS_GK: ((M, ASH), (NT_PLUS,)),
    MONOTONE_SUBHOMOGENEOUS: ((M, ASH), (M, N)),
}


class OperatorHandle(object):
    """
    A map from R^n to R^m.

    `func` takes one vector and returns m numbers (or one number when m == 1).
    `batch`, when given, takes an (N, n) array and returns an (N, m) array;
    the samplers use it to avoid a Python call per sample.
    """

    def __init__(self, func, n, m=1, label='', batch=None):
        self.func = func
        self.n = int(n)
        self.m = int(m)
        self.label = label or getattr(func, '__name__', 'operator')
        self.batch = batch

    def __repr__(self):
        return '<OperatorHandle %s: R^%d -> R^%d>' % (self.label, self.n, self.m)

    def __call__(self, x):
        x = as_vector(x, n=self.n)
        try:
            value = self.func(x)
        except Exception as exc:
            raise OperatorEvaluationError('evaluating %s failed: %s' % (self.label, exc),
                                          point=x.tolist()) from exc
        return self._shape_output(value, x)

    def _shape_output(self, value, x):
        value = np.atleast_1d(np.asarray(value, dtype=float))
        if value.shape != (self.m,):
            raise OperatorEvaluationError('%s returned shape %s, expected (%d,)'
                                          % (self.label, value.shape, self.m), point=x.tolist())
        return value

    def scalar(self, x):
        if self.m != 1:
            raise DimensionMismatch('%s is not scalar-valued' % self.label)
        return float(self(x)[0])

    def evaluate_many(self, xs):
        xs = as_batch(xs, n=self.n)
        if self.batch is not None:
            try:
                values = np.asarray(self.batch(xs), dtype=float)
            except Exception as exc:
                raise OperatorEvaluationError('batch evaluation of %s failed: %s'
                                              % (self.label, exc)) from exc
            return values.reshape(xs.shape[0], self.m)
        return np.array([self(x) for x in xs]).reshape(xs.shape[0], self.m)

    def coordinate(self, i):
        """The scalar map x -> f(x)_i."""
        if not 0 <= i < self.m:
            raise IndexError('coordinate %d out of range for %s' % (i, self.label))
        batch = None
        if self.batch is not None:
            def batch(xs):
                return self.evaluate_many(xs)[:, i]
        return OperatorHandle(lambda x: self(x)[i], self.n, 1,
                              label='%s[%d]' % (self.label, i), batch=batch)


def vectorized_operator(batch, n, m=1, label=''):
    """Handle for a map written once against (N, n) arrays."""
    def func(x):
        return np.asarray(batch(x.reshape(1, -1)), dtype=float).reshape(-1)
    return OperatorHandle(func, n, m, label=label, batch=batch)


def top_operator(n):
    return vectorized_operator(lambda xs: xs.max(axis=1), n, label='top')


def top_plus_operator(n):
    return vectorized_operator(lambda xs: np.maximum(xs.max(axis=1), 0.0), n, label='top_plus')


def coordinate_min(n):
    return vectorized_operator(lambda xs: xs.min(axis=1), n, label='min')


def coordinate_max(n):
    return vectorized_operator(lambda xs: xs.max(axis=1), n, label='max')


def identity_operator(n):
    return vectorized_operator(lambda xs: xs, n, n, label='identity')


def negation_operator(n):
    return vectorized_operator(lambda xs: -xs, n, n, label='negation')


def min_max_composite():
    """x -> min(x1, max(x2, x3)) on R^3."""
    return vectorized_operator(
        lambda xs: np.minimum(xs[:, 0], np.maximum(xs[:, 1], xs[:, 2])), 3, label='min_max')


BUILTIN_OPERATORS = {
    'top': top_operator,
    'top_plus': top_plus_operator,
    'min': coordinate_min,
    'max': coordinate_max,
    'identity': identity_operator,
    'negation': negation_operator,
    'min_max': lambda n: min_max_composite(),
}


def builtin_operator(name, n):
    try:
        factory = BUILTIN_OPERATORS[name]
    except KeyError:
        raise ValueError('unknown operator %r; choose from %s'
                         % (name, ', '.join(sorted(BUILTIN_OPERATORS))))
    handle = factory(n)
    if handle.n != n:
        raise DimensionMismatch('operator %s is defined on R^%d, not R^%d' % (name, handle.n, n))
    return handle


@dataclass
class AxiomReport:
    axiom: str
    holds: bool
    samples_used: int
    violation: float = 0.0
    counterexample: dict = None

    def as_dict(self):
        data = {'axiom': self.axiom, 'holds': self.holds, 'samples': self.samples_used}
        if self.counterexample is not None:
            data['counterexample'] = self.counterexample
        return data


@dataclass
class SuiteResult:
    suite: str
    left: list
    right: list
    consistent: bool
    reports: list = field(default_factory=list)

    @property
    def left_holds(self):
        return all(report.holds for report in self.left)

    @property
    def right_holds(self):
        return all(report.holds for report in self.right)


def _top(values):
    return values.max(axis=1)


def _top_plus(values):
    return np.maximum(values.max(axis=1), 0.0)


def _sup(values):
    return np.abs(values).max(axis=1)


def _lambdas(cfg, index, low, high):
    return sample_lambdas(cfg.derived(index).seed, cfg.count, low, high)


def _violations(f, axiom, cfg):
    """
    Return (x, y, lam, violation, scale) arrays for `axiom`, one entry per sample;
    violation > 0 means the defining inequality fails by that much.
    """
    xs = sample_points(cfg)
    fx = f.evaluate_many(xs)
    lam = None
    lam_low, lam_high = settings.MINIMAX_LAMBDA_RANGE
    if axiom == M:
        ys = xs + np.abs(sample_points(cfg.derived(1)))
        fy = f.evaluate_many(ys)
        violation = (fx - fy).max(axis=1)
    elif axiom in (AH, ASH):
        if axiom == AH:
            box_low, box_high = settings.MINIMAX_SAMPLE_BOX
            lam = _lambdas(cfg, 2, box_low, box_high)
        else:
            lam = _lambdas(cfg, 2, lam_low, lam_high)
        ys = xs + lam[:, None]
        fy = f.evaluate_many(ys)
        defect = fy - fx - lam[:, None]
        violation = np.abs(defect).max(axis=1) if axiom == AH else defect.max(axis=1)
    elif axiom == H:
        lam = _lambdas(cfg, 2, lam_low, lam_high)
        ys = xs * lam[:, None]
        fy = f.evaluate_many(ys)
        violation = np.abs(fy - lam[:, None] * fx).max(axis=1)
    elif axiom in (N, NT, NT_PLUS):
        ys = sample_points(cfg.derived(1))
        fy = f.evaluate_many(ys)
        measure = {N: _sup, NT: _top, NT_PLUS: _top_plus}[axiom]
        violation = measure(fx - fy) - measure(xs - ys)
    else:
        raise ValueError('unknown axiom %r; choose from %s' % (axiom, ', '.join(AXIOMS)))
    scale = np.maximum(np.abs(fx).max(axis=1), np.abs(fy).max(axis=1))
    return xs, ys, lam, violation, scale


def check_axiom(f, axiom, cfg=None, tol=None):
    tol = resolve_tolerance(tol)
    if cfg is None:
        cfg = SampleConfig.default(f.n)
    if cfg.dimension != f.n:
        raise DimensionMismatch('sampling box has dimension %d, operator expects %d'
                                % (cfg.dimension, f.n))
    xs, ys, lam, violation, scale = _violations(f, axiom, cfg)
    excess = violation - (tol.abs_tol + tol.rel_tol * scale)
    worst = int(np.argmax(excess))
    holds = bool(excess[worst] <= 0)
    report = AxiomReport(axiom, holds, cfg.count, float(max(violation[worst], 0.0)))
    if not holds:
        report.counterexample = {
            'x': xs[worst].tolist(),
            'y': ys[worst].tolist(),
            'violation': float(violation[worst]),
        }
        if lam is not None:
            report.counterexample['lambda'] = float(lam[worst])
        logger.info('%s fails %s: violation %.3g at x=%s', f.label, axiom,
                    violation[worst], xs[worst].tolist())
    return report


def check_axioms(f, axioms, cfg=None, tol=None):
    return [check_axiom(f, axiom, cfg, tol) for axiom in axioms]


def equivalence_suite(f, suite, cfg=None, tol=None):
    """
    Check both sides of one of the equivalences between order properties
    and nonexpansiveness; `consistent` is False when the sides disagree.
    """
    try:
        left_axioms, right_axioms = SUITES[suite]
    except KeyError:
        raise ValueError('unknown suite %r; choose from %s' % (suite, ', '.join(SUITES)))
    if f.n != f.m:
        raise DimensionMismatch('%s maps R^%d to R^%d; equivalence suites need a self-map'
                                % (f.label, f.n, f.m))
    done = {}
    for axiom in left_axioms + right_axioms:
        if axiom not in done:
            done[axiom] = check_axiom(f, axiom, cfg, tol)
    result = SuiteResult(
        suite=suite,
        left=[done[axiom] for axiom in left_axioms],
        right=[done[axiom] for axiom in right_axioms],
        consistent=True,
        reports=list(done.values()),
    )
    result.consistent = result.left_holds == result.right_holds
    if not result.consistent:
        logger.warning('%s: sides of %s disagree (left %s, right %s)', f.label, suite,
                       result.left_holds, result.right_holds)
    return result


def check_nonexpansive(f, q, cfg=None, tol=None):
    """Sampled check of f(x) - f(y) <= q(x - y) for a scalar map f."""
    tol = resolve_tolerance(tol)
    if cfg is None:
        cfg = SampleConfig.default(f.n)
    if q.n != f.n or f.m != 1:
        raise DimensionMismatch('need a scalar map on R^%d, got %r' % (q.n, f))
    xs = sample_points(cfg)
    ys = sample_points(cfg.derived(1))
    fx = f.evaluate_many(xs)[:, 0]
    fy = f.evaluate_many(ys)[:, 0]
    violation = np.empty(cfg.count)
    for start, stop in chunk_rows(cfg.count, f.n):
        diff = xs[start:stop] - ys[start:stop]
        violation[start:stop] = (fx[start:stop] - fy[start:stop]) - q.evaluate(diff)
    scale = np.maximum(np.abs(fx), np.abs(fy))
    excess = violation - (tol.abs_tol + tol.rel_tol * scale)
    worst = int(np.argmax(excess))
    holds = bool(excess[worst] <= 0)
    report = AxiomReport('N_%s' % q.kind, holds, cfg.count, float(max(violation[worst], 0.0)))
    if not holds:
        report.counterexample = {'x': xs[worst].tolist(), 'y': ys[worst].tolist(),
                                 'violation': float(violation[worst])}
    return report
