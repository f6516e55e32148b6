"""
Numeric plumbing shared by the whole app: vector validation, tolerances,
stochastic vectors and the seeded sampler.

Vectors are plain one-dimensional float64 numpy arrays. Batches of vectors
are two-dimensional arrays with one vector per row.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from .exceptions import DimensionMismatch, EmptyInputError, NonFiniteError


logger = logging.getLogger(__name__)


# splitmix64 constants
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB
MASK_64 = (1 << 64) - 1


def as_vector(x, n=None, name='x'):
    """
    Return `x` as a finite 1-d float array, optionally of dimension `n`.

    Raises EmptyInputError, NonFiniteError or DimensionMismatch.
    """
    arr = np.array(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError('%s must be one-dimensional, got shape %s' % (name, arr.shape))
    if arr.size == 0:
        raise EmptyInputError('%s is empty' % name)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError('%s has a non-finite entry' % name)
    if n is not None and arr.size != n:
        raise DimensionMismatch('%s has dimension %d, expected %d' % (name, arr.size, n))
    return arr


def as_batch(xs, n=None, name='points'):
    """Return `xs` as a finite 2-d float array with one vector per row."""
    arr = np.array(xs, dtype=float)
    if arr.ndim == 1 and n is not None and arr.size == n:
        arr = arr.reshape(1, n)
    if arr.ndim != 2:
        raise ValueError('%s must be a sequence of vectors, got shape %s' % (name, arr.shape))
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyInputError('%s is empty' % name)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError('%s has a non-finite entry' % name)
    if n is not None and arr.shape[1] != n:
        raise DimensionMismatch('%s have dimension %d, expected %d' % (name, arr.shape[1], n))
    return arr


def unit_vector(n):
    """The order unit e = (1, ..., 1)."""
    return np.ones(n)


def sup_norm(x):
    x = as_vector(x)
    return float(np.max(np.abs(x)))


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9

    def __post_init__(self):
        for name in ('abs_tol', 'rel_tol'):
            value = getattr(self, name)
            if not (0 < value <= 1e-3):
                raise ValueError('%s must be in (0, 1e-3], got %r' % (name, value))

    @classmethod
    def default(cls):
        return cls(settings.MINIMAX_ABS_TOL, settings.MINIMAX_REL_TOL)

    def allowance(self, scale=0.0):
        """Slack allowed when comparing quantities of magnitude `scale`."""
        return self.abs_tol + self.rel_tol * abs(scale)

    def close(self, a, b):
        return abs(a - b) <= self.allowance(max(abs(a), abs(b)))


def resolve_tolerance(tol):
    return Tolerance.default() if tol is None else tol


def is_stochastic(p, tol=None):
    tol = resolve_tolerance(tol)
    p = as_vector(p, name='p')
    return bool(np.all(p >= -tol.abs_tol) and abs(p.sum() - 1.0) <= tol.abs_tol)


def as_stochastic(p, tol=None):
    """
    Validate a stochastic vector; entries in [-tol, 0) are clamped to 0
    and the result renormalized.
    """
    tol = resolve_tolerance(tol)
    p = as_vector(p, name='p')
    if not is_stochastic(p, tol):
        raise ValueError('not a stochastic vector: %s' % p.tolist())
    p = np.where(p < 0, 0.0, p)
    return p / p.sum()


def is_substochastic(p, tol=None):
    tol = resolve_tolerance(tol)
    p = as_vector(p, name='p')
    return bool(np.all(p >= -tol.abs_tol) and p.sum() <= 1.0 + tol.abs_tol)


def splitmix64(seed, count):
    """
    `count` consecutive outputs of the splitmix64 generator started at `seed`.

    The k-th output (k = 1, 2, ...) is mix(seed + k * GOLDEN_GAMMA mod 2**64) with

        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        z =  z ^ (z >> 31)

    all arithmetic modulo 2**64.
    """
    with np.errstate(over='ignore'):
        k = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed & MASK_64) + k * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
        z = z ^ (z >> np.uint64(31))
    return z


def uniforms(seed, count):
    """Uniform doubles in [0, 1): the top 53 bits of each splitmix64 output."""
    z = splitmix64(seed, count)
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def derive_seed(seed, index):
    """Seed for the `index`-th independent task derived from `seed`."""
    start = (seed + index * GOLDEN_GAMMA) & MASK_64
    return int(splitmix64(start, 1)[0])


@dataclass(frozen=True, eq=False)
class SampleConfig:
    lower: np.ndarray
    upper: np.ndarray
    count: int
    seed: int = 42

    def __post_init__(self):
        lower = as_vector(self.lower, name='lower')
        upper = as_vector(self.upper, n=lower.size, name='upper')
        if np.any(lower > upper):
            raise ValueError('degenerate sampling box: lower > upper')
        if int(self.count) < 1:
            raise EmptyInputError('sample count must be at least 1, got %r' % self.count)
        if not (0 <= int(self.seed) <= MASK_64):
            raise ValueError('seed must be an unsigned 64-bit integer')
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)
        object.__setattr__(self, 'count', int(self.count))
        object.__setattr__(self, 'seed', int(self.seed))

    @property
    def dimension(self):
        return self.lower.size

    @classmethod
    def default(cls, n, count=None, seed=None, box=None):
        """Sampling configuration built from the MINIMAX_* settings."""
        low, high = settings.MINIMAX_SAMPLE_BOX if box is None else box
        return cls(
            lower=np.full(n, float(low)),
            upper=np.full(n, float(high)),
            count=settings.MINIMAX_SAMPLES if count is None else count,
            seed=settings.MINIMAX_SEED if seed is None else seed,
        )

    def derived(self, index, count=None, lower=None, upper=None):
        """Same box, independent stream."""
        return SampleConfig(
            lower=self.lower if lower is None else lower,
            upper=self.upper if upper is None else upper,
            count=self.count if count is None else count,
            seed=derive_seed(self.seed, index),
        )


def sample_points(cfg):
    """`cfg.count` points drawn uniformly in the box, one per row."""
    n = cfg.dimension
    u = uniforms(cfg.seed, cfg.count * n).reshape(cfg.count, n)
    return cfg.lower + u * (cfg.upper - cfg.lower)


def sample_lambdas(seed, count, low, high):
    return low + uniforms(seed, count) * (high - low)


def sample_sphere(cfg):
    """Points of the unit sup-sphere: box samples rescaled by their sup-norm."""
    n = cfg.dimension
    box = SampleConfig(np.full(n, -1.0), np.ones(n), cfg.count, cfg.seed)
    points = sample_points(box)
    norms = np.max(np.abs(points), axis=1)
    # A zero row has probability zero; send it to a vertex of the cube.
    points[norms == 0] = 1.0
    norms[norms == 0] = 1.0
    return points / norms[:, None]


def chunk_rows(total, width, budget=4 * 10 ** 6):
    """Yield (start, stop) slices so that rows * width stays within `budget`."""
    step = max(1, budget // max(1, width))
    for start in range(0, total, step):
        yield start, min(total, start + step)