"""
Finite zero-sum games and their Shapley operators

    F_i(x) = min over outer actions a of max over inner actions b of
             r_i^{ab} + <P_i^{ab}, x>

plus payment-free (recursive) games, value iteration, recession operators
and the representation of a payment-free operator as a game whose
transition rows have at most two positive entries.
"""
import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from django.conf import settings

from .axioms import OperatorHandle
from .core import (
    as_batch, as_vector, derive_seed, is_stochastic, is_substochastic, resolve_tolerance,
    uniforms,
)
from .exceptions import (
    ContractViolation, ConvergenceError, DimensionMismatch, EmptyRepresentation, GameSpecError,
)
from .representation import VertexSlices, halfspace_simplex_extremes, normalize_ynet


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InnerAction:
    payoff: float
    row: tuple


@dataclass(frozen=True)
class OuterAction:
    inner: tuple
    name: str = ''


@dataclass(frozen=True)
class StateSpec:
    actions: tuple


@dataclass(frozen=True)
class StateOutcome:
    value: float
    outer: int
    inner: int


@dataclass(frozen=True)
class CompiledState:
    """All inner actions of a state stacked; outer action a owns rows starts[a]:starts[a+1]."""
    payoffs: np.ndarray
    rows: np.ndarray
    starts: np.ndarray


@dataclass(frozen=True, eq=False)
class GameSpec:
    n: int
    states: tuple
    subprobability: bool = False

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise GameSpecError('a game needs at least one state')
        if len(self.states) != n:
            raise GameSpecError('expected %d states, got %d' % (n, len(self.states)))
        tol = resolve_tolerance(None)
        states = []
        for i, state in enumerate(self.states):
            if not state.actions:
                raise GameSpecError('state %d has no outer actions' % i)
            actions = []
            for a, action in enumerate(state.actions):
                if not action.inner:
                    raise GameSpecError('state %d, outer action %d has no inner actions' % (i, a))
                inner = tuple(self._clean(i, a, b, move, n, tol)
                              for b, move in enumerate(action.inner))
                actions.append(OuterAction(inner, action.name))
            states.append(StateSpec(tuple(actions)))
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'states', tuple(states))
        object.__setattr__(self, 'subprobability', bool(self.subprobability))

    def _clean(self, i, a, b, move, n, tol):
        where = 'state %d, action (%d, %d)' % (i, a, b)
        if not np.isfinite(move.payoff):
            raise GameSpecError('%s: payoff is not finite' % where)
        row = np.array(move.row, dtype=float)
        if row.shape != (n,):
            raise GameSpecError('%s: row has length %d, expected %d' % (where, row.size, n))
        if not np.all(np.isfinite(row)):
            raise GameSpecError('%s: row has a non-finite entry' % where)
        if self.subprobability:
            if not is_substochastic(row, tol):
                raise GameSpecError('%s: row %s is not substochastic' % (where, row.tolist()))
            row = np.where(row < 0, 0.0, row)
        else:
            if not is_stochastic(row, tol):
                raise GameSpecError('%s: row %s is not stochastic (sum %.6g)'
                                    % (where, row.tolist(), row.sum()))
            row = np.where(row < 0, 0.0, row)
            row = row / row.sum()
        return InnerAction(float(move.payoff), tuple(row.tolist()))

    @cached_property
    def compiled(self):
        compiled = []
        for state in self.states:
            moves = [move for action in state.actions for move in action.inner]
            sizes = [len(action.inner) for action in state.actions]
            compiled.append(CompiledState(
                payoffs=np.array([move.payoff for move in moves]),
                rows=np.array([move.row for move in moves]).reshape(len(moves), self.n),
                starts=np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.intp),
            ))
        return compiled

    @property
    def max_payoff(self):
        return max(abs(move.payoff) for state in self.states
                   for action in state.actions for move in action.inner)

    @property
    def payment_free(self):
        return self.max_payoff == 0

    def as_operator(self):
        return spec_operator(self)


def _stage_values(state, xs):
    """(N, number of inner actions) array of payoff + <row, x>, summed coordinate by coordinate."""
    acc = np.repeat(state.payoffs[None, :], xs.shape[0], axis=0)
    for j in range(xs.shape[1]):
        acc = acc + state.rows[:, j] * xs[:, j:j + 1]
    return acc


def shapley_eval_many(spec, xs):
    xs = as_batch(xs, n=spec.n)
    out = np.empty((xs.shape[0], spec.n))
    for i, state in enumerate(spec.compiled):
        acc = _stage_values(state, xs)
        out[:, i] = np.maximum.reduceat(acc, state.starts, axis=1).min(axis=1)
    return out


def shapley_eval(spec, x):
    x = as_vector(x, n=spec.n)
    return shapley_eval_many(spec, x)[0]


def shapley_trace(spec, x):
    """Per state the value and the (outer, inner) pair attaining it, lowest index on ties."""
    x = as_vector(x, n=spec.n)
    outcomes = []
    for state in spec.compiled:
        acc = _stage_values(state, x.reshape(1, -1))[0]
        stops = list(state.starts[1:]) + [acc.size]
        best = None
        for a, (start, stop) in enumerate(zip(state.starts, stops)):
            b = int(np.argmax(acc[start:stop]))
            value = acc[start + b]
            if best is None or value < best.value:
                best = StateOutcome(float(value), a, b)
        outcomes.append(best)
    return outcomes


def spec_operator(spec):
    return OperatorHandle(lambda x: shapley_eval(spec, x), spec.n, spec.n,
                          label='shapley[%d]' % spec.n,
                          batch=lambda xs: shapley_eval_many(spec, xs))


def payment_free_from_spec(spec):
    states = tuple(
        StateSpec(tuple(
            OuterAction(tuple(replace(move, payoff=0.0) for move in action.inner), action.name)
            for action in state.actions))
        for state in spec.states)
    return GameSpec(spec.n, states, spec.subprobability)


class _UniformStream(object):
    """Endless stream of uniforms in [0, 1), drawn block by block from one seed."""

    block = 256

    def __init__(self, seed):
        self.seed = seed
        self.index = 0
        self.buffer = []

    def next(self):
        if not self.buffer:
            self.buffer = uniforms(derive_seed(self.seed, self.index), self.block).tolist()
            self.index += 1
        return self.buffer.pop(0)

    def integer(self, upper):
        """Uniform integer in [1, upper]."""
        return 1 + min(upper - 1, int(self.next() * upper))


def random_game_spec(seed, max_states=4, max_outer=3, max_inner=3, subprobability=False,
                     payoff_range=3.0, payment_free=False, n=None):
    """
    Seeded random game: payoffs uniform in [-payoff_range, payoff_range], rows
    normalized exponentials (strictly positive). Substochastic rows are
    scaled by a factor in [0.5, 1].
    """
    stream = _UniformStream(seed)
    n = stream.integer(max_states) if n is None else int(n)
    states = []
    for i in range(n):
        actions = []
        for a in range(stream.integer(max_outer)):
            inner = []
            for b in range(stream.integer(max_inner)):
                payoff = 0.0 if payment_free else payoff_range * (2.0 * stream.next() - 1.0)
                weights = np.array([-np.log1p(-stream.next()) for _ in range(n)])
                weights = np.maximum(weights, 1e-12)
                row = weights / weights.sum()
                if subprobability:
                    row = row * (0.5 + 0.5 * stream.next())
                inner.append(InnerAction(payoff, tuple(row.tolist())))
            actions.append(OuterAction(tuple(inner), 'a%d' % a))
        states.append(StateSpec(tuple(actions)))
    return GameSpec(n, tuple(states), subprobability)


def as_operator(target):
    """OperatorHandle for a GameSpec, a PaymentFreeRep or an OperatorHandle."""
    if isinstance(target, OperatorHandle):
        return target
    if isinstance(target, (GameSpec, PaymentFreeRep)):
        return target.as_operator()
    raise TypeError('cannot build an operator from %r' % (target,))


def value_iteration(target, x0, k):
    """Array of shape (k + 1, n) holding x0, F(x0), ..., F^k(x0)."""
    F = as_operator(target)
    if int(k) < 0:
        raise ValueError('number of steps must be nonnegative, got %r' % (k,))
    x = as_vector(x0, n=F.n, name='x0')
    if F.m != F.n:
        raise DimensionMismatch('value iteration needs a self-map, got %r' % (F,))
    iterates = [x]
    for step in range(int(k)):
        x = F(x)
        iterates.append(x)
    return np.array(iterates)


def recession_operator(target, x, tol=None):
    """
    lim F(s x) / s.

    For a GameSpec the limit is the operator of its payment-free spec and a
    PaymentFreeRep is its own limit. Any other operator is followed along
    s = 2^k for k from MINIMAX_RECESSION_MIN_DOUBLINGS on, until two
    successive values agree within tol.
    """
    if isinstance(target, GameSpec):
        return shapley_eval(payment_free_from_spec(target), as_vector(x, n=target.n))
    if isinstance(target, PaymentFreeRep):
        return eval_payment_free_rep(target, x)
    tol = resolve_tolerance(tol)
    F = as_operator(target)
    x = as_vector(x, n=F.n)
    first = settings.MINIMAX_RECESSION_MIN_DOUBLINGS
    last = settings.MINIMAX_RECESSION_MAX_DOUBLINGS
    previous = None
    for doubling in range(first, last + 1):
        scale = 2.0 ** doubling
        current = F(scale * x) / scale
        if previous is not None:
            gap = float(np.max(np.abs(current - previous)))
            if gap <= tol.allowance(float(np.max(np.abs(current)))):
                logger.debug('recession of %s at %s converged at scale 2^%d', F.label,
                             x.tolist(), doubling)
                return current
        previous = current
    raise ConvergenceError('recession of %s at %s did not settle between 2^%d and 2^%d'
                           % (F.label, x.tolist(), first, last))


@dataclass(frozen=True)
class RepEntry:
    a: np.ndarray
    vertices: np.ndarray


@dataclass(frozen=True, eq=False)
class PaymentFreeRep:
    """
    Per state a list of outer points a with the vertex sets of
    {p in the simplex : <p, a> <= 0}; the operator is

        G_i(x) = min over entries of max over vertices of <p, x>.
    """
    n: int
    states: tuple
    dropped: tuple = None
    tol: object = None

    def __post_init__(self):
        n = int(self.n)
        if len(self.states) != n:
            raise DimensionMismatch('expected %d states, got %d' % (n, len(self.states)))
        tol = resolve_tolerance(self.tol)
        states = []
        for i, entries in enumerate(self.states):
            if not entries:
                raise EmptyRepresentation('state %d has no outer points' % i, state=i)
            cleaned = []
            for entry in entries:
                a = as_vector(entry.a, n=n, name='a')
                vertices = as_batch(entry.vertices, n=n, name='vertices')
                allowance = tol.allowance(float(np.abs(a).max()))
                for p in vertices:
                    if not is_stochastic(p):
                        raise ValueError('state %d: vertex %s is not stochastic' % (i, p.tolist()))
                    if p @ a > allowance:
                        raise ContractViolation(
                            'state %d: vertex %s is outside {p : <p, a> <= 0} for a=%s'
                            % (i, p.tolist(), a.tolist()), residual=float(p @ a), point=a.tolist())
                cleaned.append(RepEntry(a, vertices))
            states.append(tuple(cleaned))
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'states', tuple(states))
        object.__setattr__(self, 'dropped', tuple(self.dropped or (0,) * n))

    @cached_property
    def compiled(self):
        return [VertexSlices.from_sets([entry.vertices for entry in entries], self.n)
                for entries in self.states]

    def size(self):
        return sum(len(entries) for entries in self.states)

    def evaluate_many(self, xs):
        xs = as_batch(xs, n=self.n)
        out = np.empty((xs.shape[0], self.n))
        for i, slices in enumerate(self.compiled):
            out[:, i] = slices.maxima(xs).min(axis=1)
        return out

    def as_operator(self):
        return OperatorHandle(lambda x: eval_payment_free_rep(self, x), self.n, self.n,
                              label='rep[%d]' % self.n, batch=self.evaluate_many)


def eval_payment_free_rep(rep, x):
    x = as_vector(x, n=rep.n)
    return rep.evaluate_many(x)[0]


def build_payment_free_representation(F, ynet, tol=None):
    """
    Project every net point to the zero level of each F_i and attach the
    vertices of the simplex slice cut by that point. Outer points with an
    empty slice are dropped and counted.
    """
    tol = resolve_tolerance(tol)
    if F.n != F.m:
        raise DimensionMismatch('%r is not a self-map' % (F,))
    if ynet.dimension != F.n:
        raise DimensionMismatch('ynet has dimension %d, operator expects %d'
                                % (ynet.dimension, F.n))
    states = []
    dropped = []
    for i in range(F.n):
        projected = normalize_ynet(F.coordinate(i), ynet.points, tol)
        entries = []
        for a in projected.points:
            vertices = halfspace_simplex_extremes(a, tol)
            if len(vertices):
                entries.append(RepEntry(a, vertices))
        dropped.append(len(projected) - len(entries))
        if not entries:
            raise EmptyRepresentation('every outer point of state %d has an empty slice' % i,
                                      state=i, dropped=dropped[-1])
        if dropped[-1]:
            logger.debug('state %d: dropped %d of %d outer points', i, dropped[-1], len(projected))
        states.append(tuple(entries))
    logger.info('built representation of %s: %d outer points, %d dropped',
                F.label, sum(len(entries) for entries in states), sum(dropped))
    return PaymentFreeRep(F.n, tuple(states), tuple(dropped), tol)


def game_from_operator(F, ynet):
    """
    Game with payments whose Shapley operator agrees with F at the net
    points: in state i the outer player picks a net point y, the inner
    player a coordinate j, with payoff F_i(y) - y_j and transition to j.
    """
    if F.n != F.m:
        raise DimensionMismatch('%r is not a self-map' % (F,))
    values = F.evaluate_many(ynet.points)
    units = np.eye(F.n)
    states = []
    for i in range(F.n):
        actions = []
        for l, y in enumerate(ynet.points):
            inner = tuple(InnerAction(float(values[l, i] - y[j]), tuple(units[j].tolist()))
                          for j in range(F.n))
            actions.append(OuterAction(inner, 'y%d' % l))
        states.append(StateSpec(tuple(actions)))
    return GameSpec(F.n, tuple(states))


def rep_to_game_spec(rep):
    """Payment-free game whose Shapley operator is the representation's operator."""
    states = []
    for entries in rep.states:
        actions = tuple(
            OuterAction(tuple(InnerAction(0.0, tuple(p.tolist())) for p in entry.vertices),
                        'a%d' % l)
            for l, entry in enumerate(entries))
        states.append(StateSpec(actions))
    return GameSpec(rep.n, tuple(states))

