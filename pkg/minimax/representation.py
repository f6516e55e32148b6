"""
Minimax and maximin representations of scalar maps on R^n.

For f monotone and additively homogeneous (equivalently t-nonexpansive):

    f(x) = min_y max_{p in simplex} <p, x - y> + f(y)
         = max_y min_{p in simplex} <p, x - y> + f(y)

and when f is also positively homogeneous the outer point can be moved to
the inner constraint set:

    f(x) = min_y max { <p, x> : p in simplex, <p, y - f(y) e> <= 0 }

Over a finite set of outer points (a YNet) every minimax form is an upper
bound, every maximin form a lower bound, and both are exact at net points.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import as_batch, as_vector, chunk_rows, is_stochastic, resolve_tolerance
from .exceptions import ContractViolation, DimensionMismatch, EmptyInputError


logger = logging.getLogger(__name__)


SIMPLEX = 'simplex'
SIMPLEX_HALFSPACE = 'simplex_halfspace'


def halfspace_simplex_extremes(a, tol=None):
    """
    Vertices of {p in the simplex : <p, a> <= 0}.

    These are the unit vectors e_j with a_j <= 0 and, for each pair with
    a_j < 0 < a_k, the point of the edge [e_j, e_k] where <p, a> = 0.
    So every vertex has at most two positive entries.
    Returns an array of shape (k, n); k == 0 iff min(a) > 0.
    """
    tol = resolve_tolerance(tol).abs_tol
    a = as_vector(a, name='a')
    n = a.size
    units = np.eye(n)[a <= tol]
    neg = np.flatnonzero(a < -tol)
    pos = np.flatnonzero(a > tol)
    if neg.size == 0 or pos.size == 0:
        return units
    j, k = (idx.ravel() for idx in np.meshgrid(neg, pos, indexing='ij'))
    denom = a[k] - a[j]
    edges = np.zeros((j.size, n))
    rows = np.arange(j.size)
    edges[rows, j] = a[k] / denom
    edges[rows, k] = -a[j] / denom
    vertices = np.vstack([units, edges])
    return _dedupe(vertices, tol)


def _dedupe(points, tol):
    keep = []
    for i, point in enumerate(points):
        if not any(np.max(np.abs(point - points[k])) <= tol for k in keep):
            keep.append(i)
    return points[keep]


@dataclass(frozen=True, eq=False)
class DualSet:
    kind: str
    n: int
    constraint: np.ndarray = None

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError('dimension must be positive, got %r' % (self.n,))
        if self.kind == SIMPLEX_HALFSPACE:
            object.__setattr__(self, 'constraint',
                               as_vector(self.constraint, n=self.n, name='constraint'))
        elif self.kind != SIMPLEX:
            raise ValueError('unknown dual set kind %r' % (self.kind,))

    @cached_property
    def vertices(self):
        if self.kind == SIMPLEX:
            return np.eye(self.n)
        return halfspace_simplex_extremes(self.constraint)

    def support(self, x):
        """max over the set of <p, x>; None when the set is empty."""
        vertices = self.vertices
        if len(vertices) == 0:
            return None
        return float((vertices @ as_vector(x, n=self.n)).max())


def simplex(n):
    return DualSet(SIMPLEX, n)


def simplex_halfspace(a):
    a = as_vector(a, name='a')
    return DualSet(SIMPLEX_HALFSPACE, a.size, a)


@dataclass(frozen=True, eq=False)
class YNet:
    points: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        try:
            points = as_batch(self.points, name='ynet')
        except EmptyInputError:
            raise EmptyInputError('ynet is empty')
        object.__setattr__(self, 'points', points)

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def contains(self, x, tol=None):
        tol = resolve_tolerance(tol).abs_tol
        return bool(np.any(np.abs(self.points - x).max(axis=1) <= tol))

    def union(self, other):
        return YNet(np.vstack([self.points, other.points]),
                    self.normalized and other.normalized)


@dataclass
class RepresentationResult:
    x: list
    value: float
    argmin_y: list
    argmax_p: list
    argmax_index: int = None

    def as_dict(self):
        return {'x': self.x, 'value': self.value,
                'argmin_y': self.argmin_y, 'argmax_p': self.argmax_p}


def _scalar(f):
    if f.m != 1:
        raise DimensionMismatch('%s must be scalar-valued, it maps to R^%d' % (f.label, f.m))


def _check(f, ynet):
    _scalar(f)
    if ynet.dimension != f.n:
        raise DimensionMismatch('ynet has dimension %d, operator expects %d'
                                % (ynet.dimension, f.n))


def zero_level_project(f, y, tol=None):
    """a = y - f(y) e, checked to satisfy |f(a)| <= tol."""
    tol = resolve_tolerance(tol)
    _scalar(f)
    y = as_vector(y, n=f.n, name='y')
    value = f.scalar(y)
    a = y - value
    residual = f.scalar(a)
    if abs(residual) > tol.allowance(value):
        raise ContractViolation('%s is not additively homogeneous at y=%s: f(y - f(y)e) = %.3g'
                                % (f.label, y.tolist(), residual), residual=residual,
                                point=y.tolist())
    return a


def normalize_ynet(f, points, tol=None):
    """Project every point to the zero level of f."""
    tol = resolve_tolerance(tol)
    _scalar(f)
    points = YNet(points).points
    if points.shape[1] != f.n:
        raise DimensionMismatch('ynet has dimension %d, operator expects %d'
                                % (points.shape[1], f.n))
    values = f.evaluate_many(points)[:, 0]
    projected = points - values[:, None]
    residual = f.evaluate_many(projected)[:, 0]
    excess = np.abs(residual) - (tol.abs_tol + tol.rel_tol * np.abs(values))
    worst = int(np.argmax(excess))
    if excess[worst] > 0:
        raise ContractViolation('%s is not additively homogeneous at y=%s: f(y - f(y)e) = %.3g'
                                % (f.label, points[worst].tolist(), residual[worst]),
                                residual=float(residual[worst]), point=points[worst].tolist())
    return YNet(projected, normalized=True)


def _outer_terms(xs, ys, offsets, inner):
    """
    terms[i, l] = inner(xs[i] - ys[l]) + offsets[l], evaluated in row chunks.
    `inner` reduces the last axis.
    """
    terms = np.empty((xs.shape[0], ys.shape[0]))
    for start, stop in chunk_rows(xs.shape[0], ys.size):
        diff = xs[start:stop, None, :] - ys[None, :, :]
        terms[start:stop] = inner(diff) + offsets
    return terms


def _top(diff):
    return diff.max(axis=-1)


def _bottom(diff):
    return diff.min(axis=-1)


def minimax_eval_many(f, ynet, xs):
    """min over y of top(x - y) + f(y), for each row of xs."""
    _check(f, ynet)
    xs = as_batch(xs, n=f.n)
    values = f.evaluate_many(ynet.points)[:, 0]
    return _outer_terms(xs, ynet.points, values, _top).min(axis=1)


def maximin_eval_many(f, ynet, xs):
    """max over y of min_i (x_i - y_i) + f(y), for each row of xs."""
    _check(f, ynet)
    xs = as_batch(xs, n=f.n)
    values = f.evaluate_many(ynet.points)[:, 0]
    return _outer_terms(xs, ynet.points, values, _bottom).max(axis=1)


def minimax_solve(f, ynet, x):
    """minimax_eval together with the optimal outer point and inner vertex."""
    _check(f, ynet)
    x = as_vector(x, n=f.n)
    values = f.evaluate_many(ynet.points)[:, 0]
    terms = _outer_terms(x.reshape(1, -1), ynet.points, values, _top)[0]
    best = int(np.argmin(terms))
    y = ynet.points[best]
    j = int(np.argmax(x - y))
    return RepresentationResult(x.tolist(), float(terms[best]), y.tolist(),
                                np.eye(f.n)[j].tolist(), j)


def minimax_eval(f, ynet, x):
    return float(minimax_eval_many(f, ynet, as_vector(x, n=f.n))[0])


def maximin_eval(f, ynet, x):
    return float(maximin_eval_many(f, ynet, as_vector(x, n=f.n))[0])


def deterministic_minimax_eval(f, ynet, x):
    """
    min over y of max over j of x_j - y_j + f(y), where the inner player
    picks a coordinate. Returns (value, y, j).
    """
    result = minimax_solve(f, ynet, x)
    return result.value, result.argmin_y, result.argmax_index


@dataclass(frozen=True, eq=False)
class VertexSlices:
    """
    Finite families of vertex sets flattened into one array; slice l is
    vertices[starts[l]:starts[l + 1]].
    """
    vertices: np.ndarray
    starts: np.ndarray

    @classmethod
    def from_sets(cls, sets, n):
        if not sets:
            raise EmptyInputError('no vertex sets')
        sizes = [len(vs) for vs in sets]
        if min(sizes) == 0:
            raise ValueError('vertex sets must be nonempty')
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.intp)
        return cls(np.vstack(sets).reshape(-1, n), starts)

    def __len__(self):
        return self.starts.size

    def slice(self, index):
        stop = self.starts[index + 1] if index + 1 < len(self) else len(self.vertices)
        return self.vertices[self.starts[index]:stop]

    def maxima(self, xs):
        """(N, len(self)) array of the max over each slice of <p, x>."""
        products = xs @ self.vertices.T
        return np.maximum.reduceat(products, self.starts, axis=1)

    def minima(self, xs):
        products = xs @ self.vertices.T
        return np.minimum.reduceat(products, self.starts, axis=1)


def homogeneous_slices(f, ynet, tol=None, upper=True):
    """
    Per outer point y the vertices of {p : <p, y - f(y) e> <= 0} (upper) or
    {p : <p, y - f(y) e> >= 0} (lower). An empty slice means f(y) is
    outside [min y, max y], so f cannot be monotone and additively homogeneous.
    """
    tol = resolve_tolerance(tol)
    _check(f, ynet)
    values = f.evaluate_many(ynet.points)[:, 0]
    sign = 1.0 if upper else -1.0
    sets = []
    for y, value in zip(ynet.points, values):
        vertices = halfspace_simplex_extremes(sign * (y - value), tol)
        if len(vertices) == 0:
            raise ContractViolation('empty dual slice at y=%s (f(y)=%.6g)' % (y.tolist(), value),
                                    residual=float(value), point=y.tolist())
        sets.append(vertices)
    return VertexSlices.from_sets(sets, f.n)


def homogeneous_minimax_eval_many(f, ynet, xs, tol=None):
    xs = as_batch(xs, n=f.n)
    return homogeneous_slices(f, ynet, tol).maxima(xs).min(axis=1)


def homogeneous_maximin_eval_many(f, ynet, xs, tol=None):
    xs = as_batch(xs, n=f.n)
    return homogeneous_slices(f, ynet, tol, upper=False).minima(xs).max(axis=1)


def homogeneous_minimax_eval(f, ynet, x, tol=None):
    """min over y of max over {p : <p, y> <= f(y)} of <p, x>."""
    return float(homogeneous_minimax_eval_many(f, ynet, as_vector(x, n=f.n), tol)[0])


def homogeneous_maximin_eval(f, ynet, x, tol=None):
    """max over y of min over {p : <p, y> >= f(y)} of <p, x>."""
    return float(homogeneous_maximin_eval_many(f, ynet, as_vector(x, n=f.n), tol)[0])


def moreau_envelopes(f, q, ynet, x):
    """
    (lower, upper) = (max_y f(y) - q(y - x), min_y f(y) + q(x - y)).
    Both equal f(x) at net points when f is q-nonexpansive.
    """
    _check(f, ynet)
    x = as_vector(x, n=f.n)
    values = f.evaluate_many(ynet.points)[:, 0]
    diff = x - ynet.points
    upper = float((values + q.evaluate(diff)).min())
    lower = float((values - q.evaluate(-diff)).max())
    return lower, upper


@dataclass
class MoreauEntry:
    x: list
    value: float
    lower: float
    upper: float
    on_net: bool
    holds: bool


@dataclass
class MoreauReport:
    entries: list = field(default_factory=list)

    @property
    def holds(self):
        return all(entry.holds for entry in self.entries)

    @property
    def failures(self):
        return [entry for entry in self.entries if not entry.holds]


def moreau_identity_check(f, q, ynet, xs, tol=None):
    """
    Compare both envelopes with f at each x: equal at net points, and
    lower <= f(x) <= upper elsewhere. Violations are report entries.
    """
    tol = resolve_tolerance(tol)
    xs = as_batch(xs, n=f.n)
    report = MoreauReport()
    for x, value in zip(xs, f.evaluate_many(xs)[:, 0]):
        lower, upper = moreau_envelopes(f, q, ynet, x)
        slack = tol.allowance(value)
        on_net = ynet.contains(x, tol)
        holds = upper >= value - slack and lower <= value + slack
        if on_net:
            holds = holds and upper <= value + slack and lower >= value - slack
        report.entries.append(MoreauEntry(x.tolist(), float(value), lower, upper, on_net, holds))
    if not report.holds:
        logger.info('%s: Moreau identities fail at %d of %d points', f.label,
                    len(report.failures), len(report.entries))
    return report


def one_player_eval(f, pgrid, ynet, x, tol=None):
    """
    max over p in pgrid of <p, x> - f*(p), with the conjugate estimated on
    the net as f*(p) ~ max_y <p, y> - f(y). Meaningful for convex f.
    """
    _check(f, ynet)
    try:
        pgrid = as_batch(pgrid, n=f.n, name='pgrid')
    except EmptyInputError:
        raise EmptyInputError('pgrid is empty')
    for p in pgrid:
        if not is_stochastic(p, tol):
            raise ValueError('pgrid entry %s is not stochastic' % p.tolist())
    x = as_vector(x, n=f.n)
    values = f.evaluate_many(ynet.points)[:, 0]
    conjugate = (pgrid @ ynet.points.T - values).max(axis=1)
    return float((pgrid @ x - conjugate).max())
