"""Heat-bath (Glauber) dynamics: generator, Dirichlet form, semigroup, spectral gap."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import CapacityError, DomainError
from .space import (
    Measure,
    cond_expectation,
    entropy,
    expectation,
    local_covariance,
    local_entropy,
    _same_space,
)

EIGEN_BUDGET = 4096
POISSON_TAIL = 1e-14


@dataclass(frozen=True, eq=False)
class HeatBathGenerator:
    """L f = sum_k (mu_k[f] - f), uniformizable at rate N."""

    mu: Measure

    @property
    def uniformization_rate(self) -> int:
        return self.mu.space.n_sites

    def __call__(self, f) -> np.ndarray:
        f = _same_space(f, self.mu)
        out = -self.mu.space.n_sites * f
        for k in range(self.mu.space.n_sites):
            out = out + cond_expectation(f, self.mu, k)
        return out

    def transition(self, f) -> np.ndarray:
        """P f with P = I + L / N, a Markov operator."""
        f = _same_space(f, self.mu)
        return sum(cond_expectation(f, self.mu, k) for k in range(self.mu.space.n_sites)) / self.mu.space.n_sites

    def matrix(self) -> np.ndarray:
        """Dense matrix of L acting on column vectors of function values."""
        size = self.mu.space.total_size
        if size > EIGEN_BUDGET:
            raise CapacityError(f"dense generator on {size} states exceeds {EIGEN_BUDGET}")
        return np.column_stack([self(e) for e in np.eye(size)])


def apply_generator(L: HeatBathGenerator, f) -> np.ndarray:
    return L(f)


def dirichlet_form(L: HeatBathGenerator, f, g) -> float:
    """E(f, g) = sum_k mu[cov_{mu_k}(f, g)]."""
    mu = L.mu
    return float(sum(expectation(local_covariance(f, g, mu, k), mu) for k in range(mu.space.n_sites)))


def dirichlet_form_operator(L: HeatBathGenerator, f, g) -> float:
    """E(f, g) = mu[f (-L g)], the operator form."""
    return -expectation(np.asarray(f, dtype=float) * L(g), L.mu)


def _poisson_cutoff(rate_time: float) -> int:
    if rate_time == 0:
        return 0
    return int(stats.poisson.isf(POISSON_TAIL, rate_time)) + 1


def evolve_many(L: HeatBathGenerator, f, times: Sequence[float]) -> np.ndarray:
    """f_t = e^{tL} f at each t by uniformization: sum_m Poisson_{Nt}(m) P^m f.

    Returns an array of shape (len(times), |Omega|).  Powers P^m f are shared
    across times; the series is cut once the Poisson tail drops below 1e-14.
    """
    f = _same_space(f, L.mu)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise DomainError("evolution time must be nonnegative")
    rate = L.uniformization_rate
    if times.size == 0:
        return np.zeros((0, f.size))
    m_max = _poisson_cutoff(rate * times.max())
    out = np.zeros((times.size, f.size))
    weights_all = [stats.poisson.pmf(np.arange(m_max + 1), rate * t) if t > 0 else None for t in times]
    power = f.copy()
    for m in range(m_max + 1):
        for idx, t in enumerate(times):
            if t == 0:
                if m == 0:
                    out[idx] = f
                continue
            out[idx] += weights_all[idx][m] * power
        if m < m_max:
            power = L.transition(power)
    # restore the truncated mass so that mu[f_t] = mu[f] exactly up to round-off
    for idx, t in enumerate(times):
        if t > 0:
            out[idx] /= weights_all[idx].sum()
    return out


def evolve(L: HeatBathGenerator, f, t: float) -> np.ndarray:
    if t < 0:
        raise DomainError("evolution time must be nonnegative")
    return evolve_many(L, f, [t])[0]


def spectral_gap(L: HeatBathGenerator) -> float:
    """Smallest nonzero eigenvalue of -L (self-adjoint in L^2(mu)); the optimal Poincare constant is its inverse."""
    return float(spectral_decomposition(L)[0][1])


def spectral_decomposition(L: HeatBathGenerator) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of -L in increasing order and mu-orthonormal eigenfunctions (columns)."""
    mu = L.mu
    if not mu.is_positive:
        raise DomainError("spectral gap requires a strictly positive measure")
    A = -L.matrix()
    s = np.sqrt(mu.probs)
    sym = (s[:, None] * A) / s[None, :]
    sym = 0.5 * (sym + sym.T)
    vals, vecs = np.linalg.eigh(sym)
    return vals, vecs / s[:, None]


def entropy_trace(L: HeatBathGenerator, f, t_grid: Sequence[float]) -> list[tuple[float, float]]:
    f = _same_space(f, L.mu)
    if np.any(f < 0):
        raise DomainError("entropy trace needs f >= 0")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0):
        raise DomainError("time grid must be increasing")
    states = evolve_many(L, f, t_grid)
    return [(float(t), entropy(np.maximum(ft, 0.0), L.mu)) for t, ft in zip(t_grid, states)]


# --- semigroup integral identities -------------------------------------------------

_GL8 = np.polynomial.legendre.leggauss(8)
_GL16 = np.polynomial.legendre.leggauss(16)


def _gauss(nodes_weights, a, h, values_at):
    x, w = nodes_weights
    t = a + 0.5 * h * (x + 1)
    return 0.5 * h * np.dot(w, values_at(t))


def _integrand(L: HeatBathGenerator, ft: np.ndarray) -> np.ndarray:
    """[E(f_t, log f_t), E(f_t, log(f_t / mu_k[f_t])) for each k]."""
    mu = L.mu
    logf = np.log(ft)
    total = dirichlet_form(L, ft, logf)
    per_site = [
        dirichlet_form(L, ft, logf - np.log(cond_expectation(ft, mu, k)))
        for k in range(mu.space.n_sites)
    ]
    return np.array([total] + per_site)


def integrate_dissipation(L: HeatBathGenerator, f, T: float, target: float = 1e-7):
    """Integrate the entropy dissipation along f_t over [0, T] adaptively.

    Panels carry 8- and 16-point Gauss-Legendre estimates; a panel is accepted
    when they agree to ``target`` (scaled by the panel's share of [0, T]),
    otherwise it is halved.  The state f_t at each panel start is propagated
    exactly by the semigroup.
    """
    f = _same_space(f, L.mu)
    a, h = 0.0, min(T, 1.0 / L.uniformization_rate)
    fa = f
    total = 0.0

    while a < T - 1e-15:
        h = min(h, T - a)

        def values_at(ts, fa=fa, a=a):
            states = evolve_many(L, fa, ts - a)
            return np.array([_integrand(L, s) for s in states])

        coarse = _gauss(_GL8, a, h, values_at)
        fine = _gauss(_GL16, a, h, values_at)
        if np.max(np.abs(fine - coarse)) <= target * max(h / T, 1e-3) or h < 1e-6:
            total = total + fine
            fa = evolve(L, fa, h)
            a += h
            h *= 2.0
        else:
            h *= 0.5
    return total, fa


@dataclass
class SemigroupIdentity:
    residual_total: float
    residual_sites: np.ndarray
    entropy_initial: float


def semigroup_identity_check(L: HeatBathGenerator, f, T: float) -> SemigroupIdentity:
    """Residuals of Ent(f) - Ent(f_T) = int_0^T E(f_t, log f_t) dt and its per-site version."""
    f = _same_space(f, L.mu)
    if np.any(f <= 0):
        raise DomainError("the semigroup identities need a strictly positive f")
    mu = L.mu
    integrals, fT = integrate_dissipation(L, f, T)

    def site_entropies(g):
        return np.array([expectation(local_entropy(g, mu, k), mu) for k in range(mu.space.n_sites)])

    ent0 = entropy(f, mu)
    res_total = ent0 - entropy(fT, mu) - integrals[0]
    res_sites = site_entropies(f) - site_entropies(fT) - integrals[1:]
    return SemigroupIdentity(float(res_total), res_sites, ent0)
