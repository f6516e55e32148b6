"""
Risk measures on a finite probability space with n atoms of positive mass.

A position is a vector X of R^n. A risk measure mu is antitone and cash
additive, mu(X + l e) = mu(X) - l, so rho(X) = mu(-X) is monotone and
additively homogeneous and every representation of such maps applies.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .axioms import AH, H, M, OperatorHandle, check_axiom, min_max_composite
from .core import as_batch, as_vector, is_stochastic, resolve_tolerance
from .exceptions import AxiomPrecheckFailed, DimensionMismatch, EmptyInputError, EmptyRepresentation
from .representation import VertexSlices, halfspace_simplex_extremes


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RiskSpace:
    atoms: tuple
    weights: np.ndarray

    def __post_init__(self):
        weights = as_vector(self.weights, name='weights')
        atoms = tuple(str(atom) for atom in self.atoms)
        if len(atoms) != weights.size:
            raise DimensionMismatch('%d atoms but %d weights' % (len(atoms), weights.size))
        if len(set(atoms)) != len(atoms):
            raise ValueError('atom labels must be unique')
        tol = resolve_tolerance(None)
        if not is_stochastic(weights, tol):
            raise ValueError('weights %s are not a probability vector' % weights.tolist())
        light = [atom for atom, weight in zip(atoms, weights) if weight <= tol.abs_tol]
        if light:
            raise ValueError('atoms without positive weight: %s' % ', '.join(light))
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'weights', weights / weights.sum())

    @property
    def n(self):
        return len(self.atoms)

    def expectation(self, X):
        return float(self.weights @ as_vector(X, n=self.n))


class RiskMeasure(object):
    def __init__(self, func, n, coherent=False, positively_homogeneous=False, label='',
                 batch=None):
        self.func = func
        self.n = int(n)
        self.coherent = coherent
        self.positively_homogeneous = positively_homogeneous or coherent
        self.label = label or 'mu'
        self.batch = batch

    def __repr__(self):
        return '<RiskMeasure %s on %d atoms>' % (self.label, self.n)

    def __call__(self, X):
        return float(self.func(as_vector(X, n=self.n, name='X')))

    def evaluate_many(self, Xs):
        Xs = as_batch(Xs, n=self.n, name='positions')
        if self.batch is not None:
            return np.asarray(self.batch(Xs), dtype=float).reshape(-1)
        return np.array([self(X) for X in Xs])

    def acceptance_operator(self):
        """rho(X) = mu(-X) as a scalar operator handle."""
        batch = None
        if self.batch is not None:
            def batch(xs):
                return self.batch(-xs)
        return OperatorHandle(lambda x: self(-x), self.n, label='rho[%s]' % self.label,
                              batch=batch)


def risk_from_operator(f, cfg=None, tol=None, precheck=True):
    """mu(X) = f(-X) for a scalar f that is monotone and additively homogeneous."""
    if f.m != 1:
        raise DimensionMismatch('%s must be scalar-valued' % f.label)
    homogeneous = False
    if precheck:
        for axiom in (M, AH):
            report = check_axiom(f, axiom, cfg, tol)
            if not report.holds:
                raise AxiomPrecheckFailed('%s fails %s' % (f.label, axiom), report)
        homogeneous = check_axiom(f, H, cfg, tol).holds
    batch = None
    if f.batch is not None:
        def batch(Xs):
            return f.evaluate_many(-Xs)[:, 0]
    return RiskMeasure(lambda X: f.scalar(-X), f.n, positively_homogeneous=homogeneous,
                       label='mu[%s]' % f.label, batch=batch)


def _pset(pset):
    try:
        pset = as_batch(pset, name='pset')
    except EmptyInputError:
        raise EmptyInputError('pset is empty')
    for p in pset:
        if not is_stochastic(p):
            raise ValueError('pset entry %s is not a probability vector' % p.tolist())
    return pset


def coherent_eval(pset, X):
    """max over p in pset of E_p[-X]."""
    pset = _pset(pset)
    X = as_vector(X, n=pset.shape[1], name='X')
    return float((pset @ -X).max())


def coherent_measure(pset, label='coherent'):
    pset = _pset(pset)
    return RiskMeasure(lambda X: float((pset @ -X).max()), pset.shape[1], coherent=True,
                       label=label, batch=lambda Xs: (-Xs @ pset.T).max(axis=1))


def _dimension(space):
    return space.n if isinstance(space, RiskSpace) else int(space)


def worst_case_measure(space):
    """mu(X) = -min_i X_i."""
    return coherent_measure(np.eye(_dimension(space)), label='worst_case')


def expectation_measure(space):
    """mu(X) = -E_P[X] under the reference weights."""
    if not isinstance(space, RiskSpace):
        n = int(space)
        space = RiskSpace(tuple('w%d' % i for i in range(n)), np.full(n, 1.0 / n))
    return coherent_measure(space.weights.reshape(1, -1), label='expectation')


def min_max_measure():
    """mu(X) = min(-X_1, max(-X_2, -X_3)): cash additive and homogeneous, not convex."""
    mu = risk_from_operator(min_max_composite(), precheck=False)
    mu.positively_homogeneous = True
    return mu


MEASURES = {
    'worst_case': worst_case_measure,
    'expectation': expectation_measure,
    'min_max': lambda space: min_max_measure(),
}


def build_measure(name, space):
    try:
        mu = MEASURES[name](space)
    except KeyError:
        raise ValueError('unknown measure %r; choose from %s' % (name, ', '.join(sorted(MEASURES))))
    if mu.n != _dimension(space):
        raise DimensionMismatch('measure %s needs %d atoms, the space has %d'
                                % (name, mu.n, _dimension(space)))
    return mu


def normalize_position(mu, Y):
    """Y + mu(Y) e, which has risk zero."""
    Y = as_vector(Y, n=mu.n, name='Y')
    return Y + mu(Y)


def _normalized(mu, ynet):
    Ys = as_batch(ynet, n=mu.n, name='ynet')
    return Ys + mu.evaluate_many(Ys)[:, None]


def risk_minimax_eval(mu, ynet, X):
    """min over normalized Y of max_i (Y - X)_i; an upper bound for mu(X)."""
    X = as_vector(X, n=mu.n, name='X')
    Ys = _normalized(mu, ynet)
    return float((Ys - X).max(axis=1).min())


def homogeneous_risk_minimax_eval(mu, ynet, X, cfg=None, tol=None):
    """
    min over normalized Y of max { E_p[-X] : p in the simplex, E_p[Y] >= 0 }.
    Outer points whose slice is empty are skipped.
    """
    tol = resolve_tolerance(tol)
    if not mu.positively_homogeneous:
        report = check_axiom(mu.acceptance_operator(), H, cfg, tol)
        if not report.holds:
            raise AxiomPrecheckFailed('%s is not positively homogeneous' % mu.label, report)
    X = as_vector(X, n=mu.n, name='X')
    sets = [halfspace_simplex_extremes(-Y, tol) for Y in _normalized(mu, ynet)]
    sets = [vertices for vertices in sets if len(vertices)]
    if not sets:
        raise EmptyRepresentation('no outer point of the net has a nonempty slice for %s'
                                  % mu.label)
    slices = VertexSlices.from_sets(sets, mu.n)
    return float(slices.maxima(-X.reshape(1, -1)).min())


def load_scenarios(rows, space=None):
    """
    Build (space, positions) from parsed scenario rows: one mapping per atom
    with a `label`, an optional `weight` and one column per position.
    Weights in the rows take precedence over `space`.
    """
    if not rows:
        raise EmptyInputError('no scenario rows')
    columns = [key for key in rows[0] if key not in ('label', 'weight')]
    if not columns:
        raise EmptyInputError('scenario rows carry no position column')
    labels = tuple(str(row.get('label', i)) for i, row in enumerate(rows))
    try:
        if 'weight' in rows[0]:
            space = RiskSpace(labels, [float(row['weight']) for row in rows])
        elif space is None:
            raise ValueError('scenario rows have no weights and no space was given')
        positions = {name: as_vector([float(row[name]) for row in rows], name=name)
                     for name in columns}
    except (KeyError, TypeError) as exc:
        raise ValueError('malformed scenario row: %s' % exc)
    if space.n != len(rows):
        raise DimensionMismatch('%d scenario rows for a space of %d atoms' % (len(rows), space.n))
    return space, positions
