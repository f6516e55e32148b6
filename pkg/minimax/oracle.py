"""
Brute-force validators.

Nothing here shares code with the fast paths it is used to check: vertex
enumeration works on Python lists, the game oracle walks every action pair
with plain float arithmetic. They are slow on purpose and limited in size.
"""
import itertools
import logging

import numpy as np
from django.conf import settings
from scipy.optimize import linprog

from .core import as_batch, as_vector, chunk_rows, resolve_tolerance
from .exceptions import EmptyInputError, LimitExceeded


logger = logging.getLogger(__name__)


def _check_dimension(n):
    limit = settings.MINIMAX_ORACLE_MAX_DIMENSION
    if n > limit:
        raise LimitExceeded('oracle vertex enumeration is limited to dimension %d, got %d'
                            % (limit, n))


def _same(u, v, tol):
    return all(abs(a - b) <= tol for a, b in zip(u, v))


def _is_between(c, u, v, tol):
    """True if c = t u + (1 - t) v for some t strictly between 0 and 1."""
    d = [a - b for a, b in zip(u, v)]
    k = max(range(len(d)), key=lambda i: abs(d[i]))
    if abs(d[k]) <= tol:
        return False
    t = (c[k] - v[k]) / d[k]
    if not tol < t < 1 - tol:
        return False
    return all(abs(c[i] - (v[i] + t * d[i])) <= tol for i in range(len(c)))


def vertex_enumeration_simplex_halfspace(a, tol=None):
    """
    Vertices of {p in the simplex : <p, a> <= 0}, by enumerating every basic
    solution (simplex vertices and points with two nonzero coordinates on
    <p, a> = 0), keeping the feasible ones and dropping any candidate that
    lies strictly between two others.

    Returns an array of shape (k, n) sorted in decreasing lexicographic order.
    """
    tol = resolve_tolerance(tol).abs_tol
    a = as_vector(a, name='a').tolist()
    n = len(a)
    _check_dimension(n)

    candidates = []
    for j in range(n):
        candidates.append([1.0 if i == j else 0.0 for i in range(n)])
    for j, k in itertools.combinations(range(n), 2):
        denom = a[k] - a[j]
        if denom == 0:
            continue
        p = [0.0] * n
        p[j] = a[k] / denom
        p[k] = -a[j] / denom
        candidates.append(p)

    feasible = []
    for p in candidates:
        if min(p) < -tol or abs(sum(p) - 1.0) > tol:
            continue
        if sum(pi * ai for pi, ai in zip(p, a)) > tol:
            continue
        if any(_same(p, q, tol) for q in feasible):
            continue
        feasible.append(p)

    vertices = []
    for i, c in enumerate(feasible):
        others = feasible[:i] + feasible[i + 1:]
        if not any(_is_between(c, u, v, tol) for u, v in itertools.combinations(others, 2)):
            vertices.append(c)
    vertices.sort(reverse=True)
    return np.array(vertices, dtype=float).reshape(len(vertices), n)


def grid_minimize(f, box, resolution):
    """
    Minimize a scalar operator over the grid lower + k * resolution inside `box`.

    Returns (argmin, value); the first grid point in row-major order wins ties.
    """
    if not resolution > 0:
        raise ValueError('resolution must be positive, got %r' % (resolution,))
    lower, upper = box
    lower = as_vector(lower, n=f.n, name='lower')
    upper = as_vector(upper, n=f.n, name='upper')
    if np.any(lower > upper):
        raise ValueError('degenerate box: lower > upper')
    counts = [int(np.floor((high - low) / resolution + 1e-9)) + 1
              for low, high in zip(lower, upper)]
    total = 1
    for count in counts:
        total *= count
    if total > settings.MINIMAX_GRID_MAX_POINTS:
        raise LimitExceeded('grid has %d points, limit is %d'
                            % (total, settings.MINIMAX_GRID_MAX_POINTS))

    best_value = None
    best_point = None
    for start, stop in chunk_rows(total, f.n, budget=10 ** 6):
        index = np.unravel_index(np.arange(start, stop), counts)
        points = lower + resolution * np.column_stack(index)
        values = f.evaluate_many(points)[:, 0]
        k = int(np.argmin(values))
        if best_value is None or values[k] < best_value:
            best_value = float(values[k])
            best_point = points[k].copy()
    logger.debug('grid minimum %.6g over %d points', best_value, total)
    return best_point, best_value


def exhaustive_minimax(spec, x, with_indices=False):
    """
    Evaluate the Shapley operator of `spec` at `x` by walking every (outer,
    inner) pair: value_i = min over outer of max over inner of payoff + <row, x>.

    Ties go to the lowest index. With `with_indices` also returns the
    (outer, inner) choice per state.
    """
    x = as_vector(x, n=spec.n).tolist()
    limit = settings.MINIMAX_EXHAUSTIVE_MAX_COMBINATIONS
    values = []
    choices = []
    for i, state in enumerate(spec.states):
        combinations = sum(len(action.inner) for action in state.actions)
        if combinations > limit:
            raise LimitExceeded('state %d has %d action pairs, limit is %d'
                                % (i, combinations, limit))
        best_outer = None
        best_choice = None
        for a, action in enumerate(state.actions):
            best_inner = None
            best_b = None
            for b, inner in enumerate(action.inner):
                total = float(inner.payoff)
                for j in range(len(x)):
                    total += float(inner.row[j]) * x[j]
                if best_inner is None or total > best_inner:
                    best_inner = total
                    best_b = b
            if best_outer is None or best_inner < best_outer:
                best_outer = best_inner
                best_choice = (a, best_b)
        values.append(best_outer)
        choices.append(best_choice)
    values = np.array(values, dtype=float)
    if with_indices:
        return values, choices
    return values


def in_convex_hull(point, others, tol=None):
    """
    Whether `point` is a convex combination of the rows of `others`, with the
    equality constraints met to within tol.allowance(max|point|).
    """
    tol = resolve_tolerance(tol)
    point = np.asarray(point, dtype=float)
    others = np.asarray(others, dtype=float)
    k = others.shape[0]
    if k == 0:
        return False
    A_eq = np.vstack([others.T, np.ones((1, k))])
    b_eq = np.concatenate([point, [1.0]])
    # HiGHS rejects feasibility tolerances below 1e-10
    feasibility = max(tol.allowance(float(np.abs(point).max(initial=0.0))), 1e-10)
    result = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k,
                     method='highs', options={'primal_feasibility_tolerance': feasibility})
    return result.status == 0


def convex_hull_extremes(points, tol=None):
    """
    Extreme points of the convex hull of a finite point set, in input order.

    Duplicates keep their first occurrence; a point is dropped when it is a
    convex combination of the remaining ones.
    """
    tol = resolve_tolerance(tol)
    try:
        points = as_batch(points, name='generators')
    except EmptyInputError:
        raise EmptyInputError('cannot reduce an empty generator set')
    _check_dimension(points.shape[1])
    unique = []
    for point in points:
        if not any(np.max(np.abs(point - other)) <= tol.abs_tol for other in unique):
            unique.append(point)
    unique = np.array(unique)
    keep = [i for i in range(len(unique))
            if not in_convex_hull(unique[i], np.delete(unique, i, axis=0), tol)]
    return unique[keep]
