"""Gibbs measures mu(x) ∝ mu_0(x) exp(beta W(x)) with pair interactions, and the standard families."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import ValidationError
from .space import MAX_STATES, ConfigurationSpace, Measure

SPIN_VALUES = np.array([-1.0, 1.0])  # state 0 is spin -1


@dataclass
class GibbsModel:
    """Base product measure, symmetric couplings J, pair tables w and inverse temperature.

    ``pair_functions`` is keyed by ``(i, j)`` with ``i < j``; each table has
    shape ``(|Omega_i|, |Omega_j|)``.  Use :meth:`pair_table` for either
    orientation.
    """

    space: ConfigurationSpace
    base: list
    couplings: np.ndarray
    pair_functions: dict
    beta: float
    fields: Optional[list] = None
    values: Optional[list] = None
    site_info: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.space.n_sites
        self.base = [np.asarray(b, dtype=float) for b in self.base]
        if len(self.base) != n:
            raise ValidationError(f"expected {n} base vectors, got {len(self.base)}")
        for i, b in enumerate(self.base):
            if b.shape != (self.space.site_sizes[i],):
                raise ValidationError(f"base vector {i} has shape {b.shape}")
            if np.any(b <= 0) or not np.all(np.isfinite(b)):
                raise ValidationError(f"base vector {i} must be strictly positive")
            if abs(b.sum() - 1.0) > 1e-12:
                raise ValidationError(f"base vector {i} sums to {b.sum()!r}")
        J = np.asarray(self.couplings, dtype=float)
        if J.shape != (n, n):
            raise ValidationError(f"couplings must be {n}x{n}, got {J.shape}")
        if np.any(np.diag(J) != 0):
            raise ValidationError("couplings must have zero diagonal")
        if not np.allclose(J, J.T, rtol=0, atol=1e-14):
            raise ValidationError("couplings must be symmetric")
        self.couplings = J
        if self.beta < 0 or not np.isfinite(self.beta):
            raise ValidationError(f"beta must be a nonnegative real, got {self.beta}")
        tables = {}
        for (i, j), w in self.pair_functions.items():
            w = np.asarray(w, dtype=float)
            if i == j:
                raise ValidationError(f"pair function on ({i}, {j}) is not a pair")
            if i > j:
                i, j, w = j, i, w.T
            if w.shape != (self.space.site_sizes[i], self.space.site_sizes[j]):
                raise ValidationError(f"pair table ({i}, {j}) has shape {w.shape}")
            if not np.all(np.isfinite(w)):
                raise ValidationError(f"pair table ({i}, {j}) is not finite")
            tables[(i, j)] = w
        for i, j in zip(*np.nonzero(np.triu(J, 1))):
            if (int(i), int(j)) not in tables:
                raise ValidationError(f"J[{i},{j}] != 0 but no pair function given")
        self.pair_functions = tables

    @property
    def n_sites(self) -> int:
        return self.space.n_sites

    def pair_table(self, i: int, j: int) -> np.ndarray:
        """w_{ij} as a table over Omega_i x Omega_j (zeros if absent)."""
        if i < j:
            w = self.pair_functions.get((i, j))
            return w if w is not None else np.zeros(
                (self.space.site_sizes[i], self.space.site_sizes[j]))
        return self.pair_table(j, i).T

    def active_pairs(self):
        """Pairs i < j with J_ij != 0."""
        return [(i, j) for (i, j) in sorted(self.pair_functions) if self.couplings[i, j] != 0]

    def _pair_term(self, i: int, j: int) -> np.ndarray:
        shape = [1] * self.n_sites
        shape[i], shape[j] = self.space.site_sizes[i], self.space.site_sizes[j]
        return (self.couplings[i, j] * self.pair_functions[(i, j)]).reshape(shape)

    def interaction(self) -> np.ndarray:
        """W(x) = 1/2 sum_{i,j} J_ij w_ij(x_i, x_j) as a flat array."""
        t = np.zeros(self.space.site_sizes)
        for i, j in self.active_pairs():
            t = t + self._pair_term(i, j)
        return self.space.flat(t).copy()

    def local_interaction(self, k: int) -> np.ndarray:
        """W-hat_k(x) = sum_{j != k} J_jk w_jk(x_j, x_k) as a flat array."""
        t = np.zeros(self.space.site_sizes)
        for i, j in self.active_pairs():
            if k in (i, j):
                t = t + self._pair_term(i, j)
        return self.space.flat(t).copy()

    def base_measure(self) -> Measure:
        return Measure.product(self.base)


def build_measure(model: GibbsModel) -> Measure:
    model.space.check_capacity(MAX_STATES)
    logw = np.zeros(model.space.site_sizes)
    for i, b in enumerate(model.base):
        shape = [1] * model.n_sites
        shape[i] = b.size
        logw = logw + np.log(b).reshape(shape)
    logw = model.space.flat(logw) + model.beta * model.interaction()
    w = np.exp(logw - logw.max())
    return Measure(model.space, w / w.sum())


def _as_matrix(J, n: Optional[int] = None) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValidationError(f"coupling matrix must be square, got shape {J.shape}")
    if n is not None and J.shape[0] != n:
        raise ValidationError(f"coupling matrix must be {n}x{n}")
    if not np.allclose(J, J.T, rtol=0, atol=1e-14):
        raise ValidationError("coupling matrix must be symmetric")
    if np.any(np.diag(J) != 0):
        raise ValidationError("coupling matrix must have zero diagonal")
    return J


def _site_fields(fields, n: int) -> np.ndarray:
    if fields is None:
        return np.zeros(n)
    h = np.broadcast_to(np.asarray(fields, dtype=float), (n,))
    return np.array(h)


def _field_base(h: float, values: np.ndarray) -> np.ndarray:
    logw = h * values
    w = np.exp(logw - logw.max())
    return w / w.sum()


def ising(J, beta: float, fields=None) -> GibbsModel:
    """Ising model with w_ij(x_i, x_j) = x_i x_j on spins {-1, +1}; fields go into the base."""
    J = _as_matrix(J)
    n = J.shape[0]
    h = _site_fields(fields, n)
    table = np.outer(SPIN_VALUES, SPIN_VALUES)
    pairs = {(int(i), int(j)): table for i, j in zip(*np.nonzero(np.triu(J, 1)))}
    return GibbsModel(
        space=ConfigurationSpace((2,) * n),
        base=[_field_base(hi, SPIN_VALUES) for hi in h],
        couplings=J,
        pair_functions=pairs,
        beta=float(beta),
        fields=list(h),
        values=[SPIN_VALUES] * n,
    )


def curie_weiss(n: int, beta: float, fields=None) -> GibbsModel:
    if n < 2:
        raise ValidationError("Curie-Weiss needs at least 2 sites")
    J = (np.ones((n, n)) - np.eye(n)) / n
    return ising(J, beta, fields)


def potts(J, s: int, beta: float, fields=None) -> GibbsModel:
    """Potts model with w_ij = 1(x_i = x_j) on {1, ..., s}; the field h_i multiplies x_i."""
    if s < 2:
        raise ValidationError("Potts model needs s >= 2")
    J = _as_matrix(J)
    n = J.shape[0]
    h = _site_fields(fields, n)
    values = np.arange(1, s + 1, dtype=float)
    table = np.eye(s)
    pairs = {(int(i), int(j)): table for i, j in zip(*np.nonzero(np.triu(J, 1)))}
    return GibbsModel(
        space=ConfigurationSpace((s,) * n),
        base=[_field_base(hi, values) for hi in h],
        couplings=J,
        pair_functions=pairs,
        beta=float(beta),
        fields=list(h),
        values=[values] * n,
    )


def cycle_graph(n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = A[(i + 1) % n, i] = 1.0
    return A


def max_degree(J) -> float:
    """max_i sum_{k != i} |J_ki|."""
    J = np.abs(np.asarray(J, dtype=float))
    return float((J.sum(axis=0) - np.diag(J)).max())


# --- birth and death --------------------------------------------------------


def ultra_log_concavity_defect(nu) -> np.ndarray:
    """Relative defect 1 - ((n+1)/n) nu(n+1) nu(n-1) / nu(n)^2 for n = 1..n_max-1.

    Nonnegative entries mean nu(n)^2 >= ((n+1)/n) nu(n+1) nu(n-1).
    """
    nu = np.asarray(nu, dtype=float)
    n = np.arange(1, nu.size - 1)
    return 1.0 - (n + 1) / n * nu[2:] * nu[:-2] / nu[1:-1] ** 2


@dataclass
class BirthDeathSite:
    """Single-site law on {0, ..., n_max}: nu truncated and renormalised, plus a bounded F."""

    nu: np.ndarray
    F: Optional[np.ndarray] = None
    tail_mass: float = 0.0
    F_bound: Optional[float] = None

    def __post_init__(self):
        self.nu = np.asarray(self.nu, dtype=float)
        if self.nu.ndim != 1 or self.nu.size < 2:
            raise ValidationError("nu must be a vector on {0, ..., n_max} with n_max >= 1")
        if np.any(self.nu < 0) or not self.nu.sum() > 0:
            raise ValidationError("nu must be nonnegative with positive mass")
        if self.nu[0] <= 0:
            raise ValidationError("nu(0) = 0: the one-site constant C0 is undefined")
        if np.any(self.nu <= 0):
            raise ValidationError("nu must be strictly positive on the truncated range")
        self.nu = self.nu / self.nu.sum()
        if np.any(ultra_log_concavity_defect(self.nu) < -1e-12):
            raise ValidationError("nu is not ultra log-concave")
        self.F = np.zeros_like(self.nu) if self.F is None else np.asarray(self.F, dtype=float)
        if self.F.shape != self.nu.shape:
            raise ValidationError("F must have the same length as nu")
        sup = float(np.abs(self.F).max())
        if self.F_bound is None:
            self.F_bound = sup
        elif sup > self.F_bound:
            raise ValidationError(f"|F| reaches {sup}, above the declared bound {self.F_bound}")

    @property
    def n_max(self) -> int:
        return self.nu.size - 1

    @property
    def base(self) -> np.ndarray:
        w = self.nu * np.exp(self.F)
        return w / w.sum()

    @property
    def c0(self) -> float:
        """One-site modified log-Sobolev constant e^{4 F_inf} nu(1)/nu(0)."""
        return float(np.exp(4 * self.F_bound) * self.nu[1] / self.nu[0])


def poisson_site(lam: float, n_max: int, F=None, max_tail: float = 1e-12) -> BirthDeathSite:
    """Poisson(lam) truncated to {0, ..., n_max}; refuses truncations dropping more than max_tail."""
    if lam <= 0:
        raise ValidationError("Poisson parameter must be positive")
    tail = float(stats.poisson.sf(n_max, lam))
    if tail > max_tail:
        raise ValidationError(
            f"truncation at n_max={n_max} drops mass {tail:.3g} > {max_tail:.3g}"
        )
    return BirthDeathSite(nu=stats.poisson.pmf(np.arange(n_max + 1), lam), F=F, tail_mass=tail)


def birth_death_model(sites: Sequence[BirthDeathSite], J, w, beta: float) -> GibbsModel:
    """Interacting birth-death sites.  ``w`` is one table for every pair or a dict keyed by (i, j)."""
    J = _as_matrix(J, len(sites))
    pairs = {}
    for i, j in zip(*np.nonzero(np.triu(J, 1))):
        i, j = int(i), int(j)
        table = w[(i, j)] if isinstance(w, Mapping) else w
        if callable(table):
            table = table(np.arange(sites[i].n_max + 1)[:, None], np.arange(sites[j].n_max + 1)[None, :])
        pairs[(i, j)] = np.asarray(table, dtype=float)
    c0 = [s.c0 for s in sites]
    return GibbsModel(
        space=ConfigurationSpace(tuple(s.n_max + 1 for s in sites)),
        base=[s.base for s in sites],
        couplings=J,
        pair_functions=pairs,
        beta=float(beta),
        values=[np.arange(s.n_max + 1, dtype=float) for s in sites],
        site_info={
            "birth_death": True,
            "c0_per_site": c0,
            "c0": max(c0),
            "tail_mass": [s.tail_mass for s in sites],
            "F_inf": max(s.F_bound for s in sites),
        },
    )


# --- norms -------------------------------------------------------------------


@dataclass
class InteractionNorms:
    w_sup: dict
    W_bound: float
    W_hat_bound: np.ndarray


def interaction_norms(model: GibbsModel) -> InteractionNorms:
    """Exact sup norms of the pair tables and the triangle-inequality bounds on W and W-hat_k."""
    n = model.n_sites
    w_sup = {(i, j): float(np.abs(model.pair_functions[(i, j)]).max()) for i, j in model.active_pairs()}
    weighted = np.zeros((n, n))
    for (i, j), s in w_sup.items():
        weighted[i, j] = weighted[j, i] = abs(model.couplings[i, j]) * s
    return InteractionNorms(
        w_sup=w_sup,
        W_bound=0.5 * float(weighted.sum()),
        W_hat_bound=weighted.sum(axis=0),
    )


# --- random instances for sweeps ----------------------------------------------


def random_gibbs_model(
    rng: np.random.Generator,
    n_sites: int,
    max_size: int = 3,
    beta: float = 0.2,
    edge_prob: float = 0.7,
) -> GibbsModel:
    """Random base vectors, couplings in [-1, 1] on random edges, tables in [-1, 1]."""
    sizes = tuple(int(s) for s in rng.integers(2, max_size + 1, size=n_sites))
    base = []
    for s in sizes:
        b = rng.uniform(0.2, 1.0, size=s)
        base.append(b / b.sum())
    J = np.zeros((n_sites, n_sites))
    pairs = {}
    for i in range(n_sites):
        for j in range(i + 1, n_sites):
            if rng.random() < edge_prob:
                J[i, j] = J[j, i] = rng.uniform(-1, 1)
                pairs[(i, j)] = rng.uniform(-1, 1, size=(sizes[i], sizes[j]))
    return GibbsModel(
        space=ConfigurationSpace(sizes),
        base=base,
        couplings=J,
        pair_functions=pairs,
        beta=float(beta),
    )
