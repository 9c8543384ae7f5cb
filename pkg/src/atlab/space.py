"""Finite product spaces, measures on them, and the entropy/variance functionals.

Functions on a space are plain float arrays of length ``space.total_size``,
indexed mixed-radix with site 0 least significant.  Internally most
computations reshape a flat array into an N-dimensional tensor whose axis
``k`` is site ``k`` (Fortran order realises the site-0-fastest convention).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ConditioningError, DomainError, ValidationError

MAX_STATES = 2**24
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ConfigurationSpace:
    site_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.site_sizes)
        if len(sizes) < 1:
            raise ValidationError("a configuration space needs at least one site")
        if any(s < 1 for s in sizes):
            raise ValidationError(f"site sizes must be positive, got {sizes}")
        object.__setattr__(self, "site_sizes", sizes)

    @property
    def n_sites(self) -> int:
        return len(self.site_sizes)

    @property
    def total_size(self) -> int:
        return int(np.prod(self.site_sizes, dtype=object))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.site_sizes

    def check_capacity(self, limit: int = MAX_STATES) -> None:
        if self.total_size > limit:
            raise CapacityError(
                f"state space has {self.total_size} configurations "
                f"(sites {self.site_sizes}); limit is {limit}"
            )

    def index_of(self, config: Sequence[int]) -> int:
        if len(config) != self.n_sites:
            raise DomainError(f"expected {self.n_sites} coordinates, got {len(config)}")
        index, stride = 0, 1
        for k, (x, size) in enumerate(zip(config, self.site_sizes)):
            if not 0 <= x < size:
                raise DomainError(f"coordinate {k} = {x} outside [0, {size})")
            index += int(x) * stride
            stride *= size
        return index

    def config_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total_size:
            raise DomainError(f"index {index} outside [0, {self.total_size})")
        config = []
        for size in self.site_sizes:
            index, x = divmod(index, size)
            config.append(x)
        return tuple(config)

    @cached_property
    def configs(self) -> np.ndarray:
        """All configurations as an integer array of shape (total_size, N), in index order."""
        grids = np.meshgrid(*[np.arange(s) for s in self.site_sizes], indexing="ij")
        return np.stack([g.ravel(order="F") for g in grids], axis=1)

    def tensor(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.site_sizes, order="F")

    def flat(self, tensor: np.ndarray) -> np.ndarray:
        return np.broadcast_to(tensor, self.site_sizes).reshape(-1, order="F")


@dataclass(frozen=True, eq=False)
class Measure:
    """A probability measure on a ConfigurationSpace."""

    space: ConfigurationSpace
    probs: np.ndarray
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.shape != (self.space.total_size,):
            raise ValidationError(
                f"measure has {p.size} entries, space has {self.space.total_size}"
            )
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("measure entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError(f"measure sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_weights(cls, space: ConfigurationSpace, weights) -> "Measure":
        w = np.asarray(weights, dtype=float).reshape(-1)
        total = w.sum()
        if not total > 0:
            raise ValidationError("weights have no positive mass")
        return cls(space, w / total)

    @classmethod
    def product(cls, factors: Sequence[Sequence[float]]) -> "Measure":
        """Tensor product of single-site probability vectors."""
        vecs = [np.asarray(v, dtype=float) / np.sum(v) for v in factors]
        space = ConfigurationSpace(tuple(len(v) for v in vecs))
        t = vecs[0]
        for v in vecs[1:]:
            t = np.multiply.outer(t, v)
        return cls.from_weights(space, space.flat(t))

    @classmethod
    def uniform(cls, space: ConfigurationSpace) -> "Measure":
        return cls(space, np.full(space.total_size, 1.0 / space.total_size))

    @property
    def tensor(self) -> np.ndarray:
        return self.space.tensor(self.probs)

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.probs > 0))

    def conditional_tensor(self, k: int) -> np.ndarray:
        """Tensor of mu_k^{xbar_k}(x_k) indexed by the full configuration.

        Cached per site.  Raises ConditioningError if some slice has zero mass.
        """
        key = ("cond", k)
        if key not in self._cache:
            t = self.tensor
            mass = t.sum(axis=k, keepdims=True)
            if np.any(mass <= 0):
                raise ConditioningError(f"site {k}: some slice xbar_k has zero mass")
            self._cache[key] = t / mass
        return self._cache[key]

    def marginal(self, sites: Iterable[int]) -> np.ndarray:
        """Marginal law on the given sites, as a tensor over those sites in increasing order."""
        keep = sorted(set(sites))
        drop = tuple(j for j in range(self.space.n_sites) if j not in keep)
        return self.tensor.sum(axis=drop)


def _same_space(f: np.ndarray, mu: Measure) -> np.ndarray:
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape != (mu.space.total_size,):
        raise ValidationError(f"function has {f.size} entries, space has {mu.space.total_size}")
    return f


def _xlogx(f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f, dtype=float)
    pos = f > 0
    out[pos] = f[pos] * np.log(f[pos])
    return out


_H_SERIES = np.array([(-1.0) ** n / (n * (n - 1)) for n in range(2, 12)])


def _ent_density(f: np.ndarray, m: np.ndarray) -> np.ndarray:
    """m h(f/m) with h(u) = u log u - u + 1 >= 0; zero where m = 0.

    Summed against a measure with mean(f) = m this is the entropy, computed
    from nonnegative terms so that near-constant f keeps full relative accuracy.
    """
    f, m = np.broadcast_arrays(np.asarray(f, dtype=float), np.asarray(m, dtype=float))
    pos = m > 0
    u = np.where(pos, f / np.where(pos, m, 1.0), 1.0)
    d = u - 1.0
    small = np.abs(d) < 1e-2
    ds = np.where(small, d, 0.0)
    series = ds * ds * np.polyval(_H_SERIES[::-1], ds)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0) - d
    return np.where(pos, m * np.where(small, series, direct), 0.0)


def _require_nonnegative(f: np.ndarray, what: str = "f") -> None:
    if np.any(f < 0):
        raise DomainError(f"{what} has negative entries (min {f.min()!r})")


def expectation(f, mu: Measure) -> float:
    return float(np.dot(mu.probs, _same_space(f, mu)))


def entropy(f, mu: Measure) -> float:
    """Ent_mu(f) = mu[f log f] - mu[f] log mu[f], with 0 log 0 = 0."""
    f = _same_space(f, mu)
    _require_nonnegative(f)
    m = float(np.dot(mu.probs, f))
    return float(np.dot(mu.probs, _ent_density(f, m)))


def variance(g, mu: Measure) -> float:
    g = _same_space(g, mu)
    m = np.dot(mu.probs, g)
    return float(np.dot(mu.probs, (g - m) ** 2))


def covariance(f, g, mu: Measure) -> float:
    f = _same_space(f, mu)
    g = _same_space(g, mu)
    return float(np.dot(mu.probs, (f - np.dot(mu.probs, f)) * (g - np.dot(mu.probs, g))))


def conditional(mu: Measure, k: int, xbar: Sequence[int]) -> np.ndarray:
    """Conditional law of x_k given the other coordinates.

    ``xbar`` lists the values of the sites other than ``k`` in increasing site
    order (length N-1); a full configuration of length N is also accepted, in
    which case its k-th entry is ignored.
    """
    n = mu.space.n_sites
    if not 0 <= k < n:
        raise DomainError(f"site {k} out of range")
    xbar = list(xbar)
    if len(xbar) == n:
        del xbar[k]
    if len(xbar) != n - 1:
        raise DomainError(f"xbar must have {n - 1} entries, got {len(xbar)}")
    idx = list(xbar)
    idx.insert(k, slice(None))
    for j, x in enumerate(idx):
        if j != k and not 0 <= x < mu.space.site_sizes[j]:
            raise DomainError(f"coordinate {j} = {x} out of range")
    row = mu.tensor[tuple(idx)]
    mass = row.sum()
    if mass <= 0:
        raise ConditioningError(f"slice of site {k} at {tuple(xbar)} has zero mass")
    return row / mass


def cond_expectation(f, mu: Measure, k: int) -> np.ndarray:
    """mu_k[f] as a function on the whole space (constant along site k)."""
    f = _same_space(f, mu)
    c = mu.conditional_tensor(k)
    return mu.space.flat((c * mu.space.tensor(f)).sum(axis=k, keepdims=True))


def local_entropy(f, mu: Measure, k: int) -> np.ndarray:
    """The function x -> Ent_{mu_k}(f)(xbar_k)."""
    f = _same_space(f, mu)
    _require_nonnegative(f)
    m = cond_expectation(f, mu, k)
    return cond_expectation(_ent_density(f, m), mu, k)


def local_entropy_sum(f, mu: Measure) -> float:
    """sum_k mu[Ent_{mu_k}(f)]."""
    return float(sum(expectation(local_entropy(f, mu, k), mu) for k in range(mu.space.n_sites)))


def local_variance(g, mu: Measure, k: int) -> np.ndarray:
    g = _same_space(g, mu)
    return cond_expectation((g - cond_expectation(g, mu, k)) ** 2, mu, k)


def local_covariance(f, g, mu: Measure, k: int) -> np.ndarray:
    f = _same_space(f, mu)
    g = _same_space(g, mu)
    return cond_expectation((f - cond_expectation(f, mu, k)) * (g - cond_expectation(g, mu, k)), mu, k)


def _block_axes(mu: Measure, block: Iterable[int]) -> tuple[int, ...]:
    axes = tuple(sorted(set(int(b) for b in block)))
    if any(not 0 <= b < mu.space.n_sites for b in axes):
        raise DomainError(f"block {axes} has sites outside [0, {mu.space.n_sites})")
    return axes


def block_expectation(f, mu: Measure, block: Iterable[int]) -> np.ndarray:
    """mu_B[f]: average over the coordinates in ``block`` given the rest.

    Zero-mass slices get value 0; they carry no mu-weight.
    """
    f = _same_space(f, mu)
    axes = _block_axes(mu, block)
    if not axes:
        return f.copy()
    t = mu.tensor
    mass = t.sum(axis=axes, keepdims=True)
    num = (t * mu.space.tensor(f)).sum(axis=axes, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(mass > 0, num / np.where(mass > 0, mass, 1.0), 0.0)
    return mu.space.flat(out)


def block_entropy(f, mu: Measure, block: Iterable[int]) -> np.ndarray:
    """The function Ent_{mu_B}(f), with zero-mass slices contributing 0."""
    f = _same_space(f, mu)
    _require_nonnegative(f)
    m = block_expectation(f, mu, block)
    return block_expectation(_ent_density(f, m), mu, block)


def marginal_density(f, mu: Measure, block: Iterable[int]) -> np.ndarray:
    """f_B = mu[f | x_B], constant along the coordinates outside B."""
    axes = set(_block_axes(mu, block))
    complement = [j for j in range(mu.space.n_sites) if j not in axes]
    return block_expectation(f, mu, complement)


def decomposition_check(f, mu: Measure, block: Iterable[int]) -> float:
    """Residual of Ent(f) = Ent(f_B) + mu[Ent_{mu_{B^c}}(f)]."""
    axes = set(_block_axes(mu, block))
    complement = [j for j in range(mu.space.n_sites) if j not in axes]
    fb = marginal_density(f, mu, axes)
    return entropy(f, mu) - entropy(fb, mu) - expectation(block_entropy(f, mu, complement), mu)


def tolerance_scale(*references: float) -> float:
    """1 + largest magnitude among the references; slacks are compared against -tol * scale."""
    return 1.0 + max((abs(r) for r in references), default=0.0)
