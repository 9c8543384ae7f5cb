"""Covers of the site set, Shearer-type entropy inequalities and approximate subadditivity."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from .errors import DomainError, ValidationError
from .inequalities import ConstantEstimate, _batch_tensor
from .rng import DENSITY_AMPLITUDES, random_log_density, trial_rng
from .space import (
    ConfigurationSpace,
    Measure,
    _ent_density,
    _same_space,
    _xlogx,
    block_entropy,
    entropy,
    expectation,
    marginal_density,
)


@dataclass(frozen=True)
class Cover:
    """A family of nonempty blocks whose union is {0, ..., n_sites - 1}; repeated blocks are allowed.

    With ``covering=False`` the union condition is dropped (complementary
    families need not cover, and then n_minus is 0).
    """

    blocks: tuple
    n_sites: int
    covering: bool = True

    def __post_init__(self):
        blocks = tuple(frozenset(int(s) for s in b) for b in self.blocks)
        if not blocks:
            raise ValidationError("a cover needs at least one block")
        for b in blocks:
            if not b:
                raise ValidationError("cover blocks must be nonempty")
            if min(b) < 0 or max(b) >= self.n_sites:
                raise ValidationError(f"block {sorted(b)} has sites outside [0, {self.n_sites})")
        union = frozenset().union(*blocks)
        if self.covering and union != frozenset(range(self.n_sites)):
            missing = sorted(set(range(self.n_sites)) - union)
            raise ValidationError(f"blocks do not cover sites {missing}")
        object.__setattr__(self, "blocks", blocks)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([sum(k in b for b in self.blocks) for k in range(self.n_sites)])

    @property
    def n_minus(self) -> int:
        return int(self.degrees.min())

    @property
    def n_plus(self) -> int:
        return int(self.degrees.max())

    @property
    def delta(self) -> int:
        return max(len(b) for b in self.blocks)

    @property
    def is_uniform(self) -> bool:
        return self.n_minus == self.n_plus

    def complementary(self) -> "Cover":
        full = frozenset(range(self.n_sites))
        comps = [full - b for b in self.blocks]
        if any(not c for c in comps):
            raise ValidationError("a block equals the whole site set; its complement is empty")
        return Cover(tuple(comps), self.n_sites, covering=False)

    def uniform_completion(self) -> "Cover":
        """Add singleton blocks until every site has degree n_plus."""
        extra = [frozenset([k]) for k in range(self.n_sites) for _ in range(self.n_plus - self.degrees[k])]
        return Cover(self.blocks + tuple(extra), self.n_sites)

    def with_block(self, block: Iterable[int]) -> "Cover":
        return Cover(self.blocks + (frozenset(block),), self.n_sites, self.covering)

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.blocks]


def singleton_cover(n: int) -> Cover:
    return Cover(tuple({k} for k in range(n)), n)


def subsets_cover(n: int, size: int) -> Cover:
    return Cover(tuple(set(c) for c in itertools.combinations(range(n), size)), n)


def adjacent_pairs_cover(n: int) -> Cover:
    """Blocks {k, k+1 mod n} of a cycle."""
    return Cover(tuple({k, (k + 1) % n} for k in range(n)), n)


def named_cover(name: str, n: int) -> Cover:
    """Built-in covers: singletons, complement (all (n-1)-subsets), pairs, adjacent."""
    if name == "singletons":
        return singleton_cover(n)
    if name == "complement":
        return Cover(singleton_cover(n).complementary().blocks, n)
    if name == "pairs":
        return subsets_cover(n, 2)
    if name == "adjacent":
        return adjacent_pairs_cover(n)
    raise ValidationError(f"unknown cover {name!r}")


# --- product measures and Shannon entropy -------------------------------------------


def is_product(mu: Measure, tol: float = 1e-12) -> bool:
    t = mu.tensor
    prod = np.ones(())
    for k in range(mu.space.n_sites):
        prod = np.multiply.outer(prod, mu.marginal([k]))
    return bool(np.abs(prod - t).max() <= tol)


def _require_product(mu: Measure) -> None:
    if not is_product(mu):
        raise ValidationError("this inequality is stated for product measures")


def _require_cover(cover: Cover) -> None:
    if cover.n_minus == 0:
        raise ValidationError("this inequality needs a cover (every site in some block)")


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    return float(-_xlogx(p).sum())


def block_entropy_sum(f, mu: Measure, cover: Cover) -> float:
    """sum over blocks B of mu[Ent_{mu_B}(f)]."""
    return float(sum(expectation(block_entropy(f, mu, b), mu) for b in cover.blocks))


def shearer_check(mu: Measure, cover: Cover, f) -> float:
    """(1/n_-) sum_B mu[Ent_{mu_B}(f)] - Ent_mu(f), for product mu."""
    _require_product(mu)
    _require_cover(cover)
    return block_entropy_sum(f, mu, cover) / cover.n_minus - entropy(f, mu)


def shearer_dual_check(mu: Measure, cover: Cover, f) -> float:
    """n_+(Bbar) Ent(f) - sum_{A in Bbar} Ent(f_A) with Bbar the complementary cover of ``cover``."""
    _require_product(mu)
    comp = cover.complementary()
    return comp.n_plus * entropy(f, mu) - sum(entropy(marginal_density(f, mu, a), mu) for a in comp.blocks)


def _block_mean_batch(mu: Measure, T: np.ndarray, block) -> np.ndarray:
    """mu_B[f] for a batch T of shape (B, *site_sizes); zero-mass slices give 0."""
    ax = tuple(int(b) + 1 for b in sorted(block))
    p = mu.tensor[None]
    mass = p.sum(axis=ax, keepdims=True)
    num = (p * T).sum(axis=ax, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(mass > 0, num / np.where(mass > 0, mass, 1.0), 0.0)


def _batch_entropy(mu: Measure, T: np.ndarray) -> np.ndarray:
    axes = tuple(range(1, T.ndim))
    p = mu.tensor[None]
    m = (p * T).sum(axis=axes, keepdims=True)
    return (p * _ent_density(T, m)).sum(axis=axes)


def block_entropy_sums_batch(mu: Measure, cover: Cover, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(sum_B mu[Ent_{mu_B}(f)], Ent_mu(f)) for each row f of F."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if np.any(F < 0):
        raise DomainError("entropy needs f >= 0")
    T = _batch_tensor(mu, F)
    axes = tuple(range(1, T.ndim))
    p = mu.tensor[None]
    total = np.zeros(F.shape[0])
    for b in cover.blocks:
        total += (p * _ent_density(T, _block_mean_batch(mu, T, b))).sum(axis=axes)
    return total, _batch_entropy(mu, T)


def shearer_slacks_batch(mu: Measure, cover: Cover, F: np.ndarray):
    """Batched ``shearer_check`` and ``shearer_dual_check``; the dual is None if some block is all of [N].

    Returns (primal slacks, dual slacks, Ent_mu(f)).
    """
    _require_product(mu)
    _require_cover(cover)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    sums, ent = block_entropy_sums_batch(mu, cover, F)
    primal = sums / cover.n_minus - ent
    if any(len(b) == cover.n_sites for b in cover.blocks):
        return primal, None, ent
    comp = cover.complementary()
    T = _batch_tensor(mu, F)
    # f_A averages over the complement of A, which is a block of the original cover
    marg = sum(_batch_entropy(mu, _block_mean_batch(mu, T, b) * np.ones_like(T)) for b in cover.blocks)
    dual = comp.n_plus * ent - marg
    return primal, dual, ent


def approx_shearer_check(mu: Measure, cover: Cover, C_at: float, f) -> float:
    """C (Delta / n_-) sum_B mu[Ent_{mu_B}(f)] - Ent_mu(f)."""
    _require_cover(cover)
    return C_at * cover.delta / cover.n_minus * block_entropy_sum(f, mu, cover) - entropy(f, mu)


def shannon_identity_check(mu: Measure, f, block: Iterable[int]) -> float:
    """Residual of sum_{i in A} H(X_i) - H(X_A) = Ent(f_A) - sum_{i in A} Ent(f_i), X ~ f mu.

    The left side comes from Shannon entropies of the law f mu; the right side
    from the entropy functional of marginal densities.
    """
    _require_product(mu)
    f = _same_space(f, mu)
    if abs(expectation(f, mu) - 1.0) > 1e-10:
        raise DomainError("f must be a probability density: mu[f] = 1")
    block = sorted(set(block))
    law = Measure(mu.space, f * mu.probs / np.sum(f * mu.probs))
    lhs = sum(shannon_entropy(law.marginal([i])) for i in block) - shannon_entropy(law.marginal(block))
    rhs = entropy(marginal_density(f, mu, block), mu) - sum(
        entropy(marginal_density(f, mu, [i]), mu) for i in block)
    return lhs - rhs


def classical_shearer_check(law: Measure, cover: Cover) -> float:
    """sum_A H(X_A) - n_-(cover) H(X) for X ~ law."""
    return sum(shannon_entropy(law.marginal(a)) for a in cover.blocks) - cover.n_minus * shannon_entropy(law.probs)


# --- subadditivity -----------------------------------------------------------


def permutation_measure(n: int) -> Measure:
    """Uniform measure on permutations of {0, ..., n-1} inside {0, ..., n-1}^n."""
    space = ConfigurationSpace((n,) * n)
    w = np.zeros(space.total_size)
    for perm in itertools.permutations(range(n)):
        w[space.index_of(perm)] = 1.0
    return Measure.from_weights(space, w)


def _subadditivity_ratio_batch(mu: Measure, F: np.ndarray) -> np.ndarray:
    """sum_k Ent(f_k) / Ent(f) for a batch of densities (B, |Omega|)."""
    n = mu.space.n_sites
    sizes = mu.space.site_sizes
    p = mu.probs
    law = F * p[None]
    m = law.sum(axis=1)
    ent = (_ent_density(F, m[:, None]) * p[None]).sum(axis=1)
    T = law.reshape((F.shape[0],) + sizes[::-1]).transpose([0] + list(range(n, 0, -1)))
    num = np.zeros(F.shape[0])
    for k in range(n):
        others = tuple(j + 1 for j in range(n) if j != k)
        q = T.sum(axis=others)
        mk = mu.marginal([k])[None]
        with np.errstate(divide="ignore", invalid="ignore"):
            fk = np.where(mk > 0, q / np.where(mk > 0, mk, 1.0), 0.0)
        num += (mk * _ent_density(fk, m[:, None])).sum(axis=1)
    return np.where(ent > 1e-12 * np.maximum(m, 1e-300), num / np.where(ent > 0, ent, 1.0), 0.0)


def subadditivity_estimate(mu: Measure, budget: int = 8, seed: int = 0, maxiter: int = 300) -> ConstantEstimate:
    """Best ratio sum_k Ent(f_k) / Ent(f) found by multi-start ascent; a lower bound only.

    Densities live on the support of mu; constant densities give 0/0 and score 0.
    Starts: near-point-mass densities on the first support states, then random.
    """
    support = np.flatnonzero(mu.probs > 0)
    size = support.size
    if size < 2:
        raise DomainError("measure has a single atom; every density is constant")

    def embed(G):
        G = np.atleast_2d(G)
        F = np.zeros((G.shape[0], mu.space.total_size))
        F[:, support] = np.exp(G - G.max(axis=1, keepdims=True))
        return F

    def value(g):
        return -float(_subadditivity_ratio_batch(mu, embed(g))[0])

    def gradient(g, h=1e-6):
        G = np.repeat(g[None], 2 * size, axis=0)
        G[np.arange(size), np.arange(size)] += h
        G[size + np.arange(size), np.arange(size)] -= h
        r = _subadditivity_ratio_batch(mu, embed(G))
        return -(r[:size] - r[size:]) / (2 * h)

    best, best_g, history, candidates = -np.inf, None, [], []
    exhausted = False
    for r in range(budget):
        if r < min(2, size):
            g0 = np.zeros(size)
            g0[r] = 40.0
        else:
            g0 = random_log_density(trial_rng(seed, r), size, DENSITY_AMPLITUDES[r % 3])
        for g in (g0, None):
            if g is None:
                res = optimize.minimize(value, g0, jac=gradient, method="L-BFGS-B",
                                        options={"maxiter": maxiter, "gtol": 1e-10})
                exhausted |= res.status == 1
                g = res.x
            val = -value(g)
            candidates.append(np.array(g))
            if val > best:
                best, best_g = val, np.array(g)
        history.append(best)
    return ConstantEstimate("subadditivity", float(best), embed(best_g)[0], budget, exhausted,
                            history=history, candidates=candidates)
