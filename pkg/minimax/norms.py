"""
Weak Minkowski norms (convex, positively homogeneous, possibly asymmetric
and non-coercive) given as support functions of finite dual sets, and
epsilon-nets with respect to them.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .core import as_batch, as_vector, chunk_rows
from .exceptions import DimensionMismatch, EmptyInputError, LimitExceeded


logger = logging.getLogger(__name__)


TOP = 'top'
TOP_PLUS = 'top_plus'
SUP = 'sup'
POLYHEDRAL = 'polyhedral'
KINDS = (TOP, TOP_PLUS, SUP, POLYHEDRAL)

SPHERE = 'sphere'
BOX = 'box'


def top(x):
    """t(x) = max_i x_i."""
    return float(np.max(as_vector(x)))


def top_plus(x):
    """t+(x) = max(t(x), 0)."""
    return max(top(x), 0.0)


@dataclass(frozen=True, eq=False)
class WeakNorm:
    kind: str
    n: int
    generators: np.ndarray = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError('unknown weak norm kind %r' % (self.kind,))
        if int(self.n) < 1:
            raise ValueError('dimension must be positive')
        object.__setattr__(self, 'n', int(self.n))
        if self.kind == POLYHEDRAL:
            if self.generators is None or len(self.generators) == 0:
                raise EmptyInputError('a polyhedral weak norm needs at least one generator')
            object.__setattr__(self, 'generators',
                               as_batch(self.generators, n=self.n, name='generators'))
        elif self.generators is not None:
            raise ValueError('only polyhedral norms take explicit generators')

    @classmethod
    def top(cls, n):
        return cls(TOP, n)

    @classmethod
    def top_plus(cls, n):
        return cls(TOP_PLUS, n)

    @classmethod
    def sup(cls, n):
        return cls(SUP, n)

    @classmethod
    def polyhedral(cls, generators):
        generators = as_batch(generators, name='generators')
        return cls(POLYHEDRAL, generators.shape[1], generators)

    def __call__(self, x):
        return weak_norm_eval(self, x)

    def evaluate(self, xs):
        """Evaluate along the last axis of an array of any rank."""
        xs = np.asarray(xs, dtype=float)
        if xs.shape[-1] != self.n:
            raise DimensionMismatch('expected vectors of dimension %d, got %d'
                                    % (self.n, xs.shape[-1]))
        if self.kind == TOP:
            return xs.max(axis=-1)
        if self.kind == TOP_PLUS:
            return np.maximum(xs.max(axis=-1), 0.0)
        if self.kind == SUP:
            return np.abs(xs).max(axis=-1)
        return (xs @ self.generators.T).max(axis=-1)

    def generator_set(self):
        """Explicit finite dual set whose support function is this norm."""
        if self.kind == TOP:
            return np.eye(self.n)
        if self.kind == TOP_PLUS:
            return np.vstack([np.eye(self.n), np.zeros((1, self.n))])
        if self.kind == SUP:
            return np.vstack([np.eye(self.n), -np.eye(self.n)])
        return self.generators


def weak_norm_eval(q, x):
    """q(x) = max over the dual set of <p, x>."""
    x = as_vector(x, name='x')
    if x.size != q.n:
        raise DimensionMismatch('x has dimension %d, norm has %d' % (x.size, q.n))
    return float(q.evaluate(x))


def extreme_points(q):
    """
    Extreme points of the convex hull of the dual set of `q`.

    Built-in norms have closed forms; polyhedral generator sets go through
    the hull-membership oracle and are limited to small dimensions.
    """
    if q.kind != POLYHEDRAL:
        return q.generator_set()
    if q.n > settings.MINIMAX_ORACLE_MAX_DIMENSION:
        raise LimitExceeded('extreme point reduction is limited to dimension %d, got %d'
                            % (settings.MINIMAX_ORACLE_MAX_DIMENSION, q.n))
    from .oracle import convex_hull_extremes
    return convex_hull_extremes(q.generators)


def dual_norm_bounds(q, x):
    """(-q(-x), q(x)): every generator p satisfies -q(-x) <= <p, x> <= q(x)."""
    x = as_vector(x, n=q.n)
    return -weak_norm_eval(q, -x), weak_norm_eval(q, x)


def symmetrized_distance(q, x, y):
    x = as_vector(x, n=q.n, name='x')
    y = as_vector(y, n=q.n, name='y')
    return max(weak_norm_eval(q, x - y), weak_norm_eval(q, y - x))


@dataclass(frozen=True, eq=False)
class EpsNet:
    points: np.ndarray
    epsilon: float
    target: dict = field(default_factory=dict)

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


def epsilon_net(target, epsilon, n, nested=False):
    """
    Finite net of `target` with sup-distance < epsilon from every target point.

    `target` is 'sphere' (unit sup-sphere) or a (lower, upper) pair of corners.
    The sup-distance bounds the symmetrized distance of t, t+ and the sup-norm,
    so the net is valid for all the built-in norms.

    With `nested=True` the sphere grid uses a power-of-two number of intervals
    per face and lists points coarsest level first: the net for epsilon / 2
    then starts with the net for epsilon.
    """
    if not epsilon > 0:
        raise ValueError('epsilon must be positive, got %r' % (epsilon,))
    if int(n) < 1:
        raise ValueError('dimension must be positive')
    n = int(n)
    if isinstance(target, str):
        if target != SPHERE:
            raise ValueError('unsupported net target %r' % (target,))
        if nested:
            points = _nested_sphere_grid(epsilon, n)
        else:
            points = _sphere_grid(epsilon, n)
        return EpsNet(points, float(epsilon), {'kind': SPHERE, 'nested': bool(nested)})
    try:
        lower, upper = target
    except (TypeError, ValueError):
        raise ValueError('unsupported net target %r' % (target,))
    lower = as_vector(lower, n=n, name='lower')
    upper = as_vector(upper, n=n, name='upper')
    if np.any(lower > upper):
        raise ValueError('degenerate box: lower > upper')
    points = _box_grid(lower, upper, epsilon)
    return EpsNet(points, float(epsilon),
                  {'kind': BOX, 'lower': lower.tolist(), 'upper': upper.tolist()})


def _check_size(count):
    if count > settings.MINIMAX_GRID_MAX_POINTS:
        raise LimitExceeded('net would have %d points, limit is %d'
                            % (count, settings.MINIMAX_GRID_MAX_POINTS))


def _box_grid(lower, upper, epsilon):
    # Cell midpoints; the farthest box point is half a cell away.
    axes = []
    for low, high in zip(lower, upper):
        width = high - low
        cells = max(1, int(math.ceil(width / epsilon)))
        axes.append(low + (np.arange(cells) + 0.5) * (width / cells))
    _check_size(int(np.prod([len(axis) for axis in axes])))
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(axes))


def _face_points(n, axis_values):
    """All points of the sphere faces x_j = +-1 with the other coordinates on the grid."""
    _check_size(2 * n * len(axis_values) ** (n - 1))
    seen = set()
    points = []
    for j in range(n):
        for sign in (-1.0, 1.0):
            for rest in itertools.product(axis_values, repeat=n - 1):
                point = rest[:j] + (sign,) + rest[j:]
                if point not in seen:
                    seen.add(point)
                    points.append(point)
    return points


def _sphere_grid(epsilon, n):
    count = int(math.ceil(2.0 / epsilon)) + 1
    axis_values = tuple(np.linspace(-1.0, 1.0, count).tolist())
    return np.array(_face_points(n, axis_values), dtype=float).reshape(-1, n)


def _nested_sphere_grid(epsilon, n):
    depth = max(0, int(math.ceil(math.log2(2.0 / epsilon))))
    intervals = 2 ** depth
    # Grid index k in [0, intervals] first appears at level depth - (trailing zeros of k).
    axis_values = tuple(-1.0 + 2.0 * k / intervals for k in range(intervals + 1))

    def level(value):
        k = int(round((value + 1.0) * intervals / 2.0))
        if k == 0:
            return 0
        return depth - ((k & -k).bit_length() - 1)

    points = _face_points(n, axis_values)
    points.sort(key=lambda point: (max(level(v) for v in point), point))
    return np.array(points, dtype=float).reshape(-1, n)


def net_coverage(net, q, samples):
    """Largest symmetrized q-distance from a sample to its nearest net point."""
    samples = as_batch(samples, n=net.dimension, name='samples')
    worst = 0.0
    for start, stop in chunk_rows(samples.shape[0], len(net) * net.dimension):
        diff = samples[start:stop, None, :] - net.points[None, :, :]
        dist = np.maximum(q.evaluate(diff), q.evaluate(-diff))
        worst = max(worst, float(dist.min(axis=1).max()))
    return worst


def is_nonexpansive(f, q, cfg, tol=None):
    """Sampled check of f(x) - f(y) <= q(x - y); see axioms.check_nonexpansive."""
    from .axioms import check_nonexpansive
    return check_nonexpansive(f, q, cfg, tol)
