"""Dobrushin-type influence coefficients and the approximate tensorization constants built from them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import CapacityError, ConditioningError, DomainError
from .model import GibbsModel, build_measure, interaction_norms
from .space import Measure

ENUMERATION_BUDGET = 2**26


def _split_xbar(mu: Measure, i: int, k: int, xbar: Sequence[int]) -> list:
    n = mu.space.n_sites
    xbar = list(xbar)
    if len(xbar) == n:
        xbar = [x for j, x in enumerate(xbar) if j not in (i, k)]
    if len(xbar) != n - 2:
        raise DomainError(f"xbar_ik must have {n - 2} entries, got {len(xbar)}")
    return xbar


def _full_config(i, xi, k, xk, rest_sites, rest_vals) -> tuple:
    config = dict(zip(rest_sites, rest_vals))
    config[i], config[k] = xi, xk
    return tuple(config[j] for j in sorted(config))


def phi(mu: Measure, i: int, k: int, x_i: int, y_i: int, x_k: int, xbar_ik: Sequence[int]) -> float:
    """Ratio mu_k^{x_i, xbar}(x_k) / mu_k^{y_i, xbar}(x_k).

    ``xbar_ik`` lists the sites other than i and k in increasing order; a full
    configuration (whose i, k entries are ignored) is accepted too.
    """
    if i == k:
        raise DomainError("phi needs i != k")
    n = mu.space.n_sites
    rest = [j for j in range(n) if j not in (i, k)]
    xbar = _split_xbar(mu, i, k, xbar_ik)
    t = mu.tensor

    def cond(xi):
        idx = list(_full_config(i, xi, k, 0, rest, xbar))
        idx[k] = slice(None)
        row = t[tuple(idx)]
        if row.sum() <= 0:
            raise ConditioningError(f"slice at site {k} with x_{i}={xi} has zero mass")
        return row / row.sum()

    den = cond(y_i)[x_k]
    if den <= 0:
        raise ConditioningError("denominator conditional vanishes")
    return float(cond(x_i)[x_k] / den)


def _phi_table(mu: Measure, i: int, k: int) -> np.ndarray:
    """phi_{i,k}(x_i, y_i, x_k, xbar) over all arguments, shape (|O_i|, |O_i|, |O_k|, |rest|)."""
    c = np.moveaxis(mu.conditional_tensor(k), (i, k), (0, 1))
    si, sk = c.shape[:2]
    c = c.reshape(si, sk, -1)
    return c[:, None] / c[None, :]


def alpha_delta(mu: Measure) -> tuple[np.ndarray, np.ndarray]:
    """Exact alpha_{i,k} (sup of phi) and delta_{i,k} (sup of its oscillation in x_k)."""
    if not mu.is_positive:
        raise ConditioningError("alpha/delta require a strictly positive measure")
    n = mu.space.n_sites
    sizes = mu.space.site_sizes
    if max(sizes) ** 2 * mu.space.total_size > ENUMERATION_BUDGET:
        raise CapacityError(f"coefficient enumeration over {mu.space.total_size} states is too large")
    alpha = np.ones((n, n))
    delta = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            p = _phi_table(mu, i, k)
            alpha[i, k] = p.max()
            delta[i, k] = (p.max(axis=2) - p.min(axis=2)).max()
    return alpha, delta


class GammaKappa(NamedTuple):
    gamma: float
    kappa_theorem: float
    kappa_proof: float


def _offdiag(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    np.fill_diagonal(a, 0.0)
    return a


def gamma_kappa(alpha: np.ndarray, delta: np.ndarray) -> GammaKappa:
    """gamma, the single-max kappa of the theorem statement, and the two-max kappa the proof ends with."""
    alpha = np.asarray(alpha, dtype=float)
    delta = np.asarray(delta, dtype=float)
    prod = alpha * alpha.T
    gamma = float(_offdiag(np.abs(prod - 1)).sum(axis=1).max())
    kappa_theorem = 0.25 * float(_offdiag((delta.T + delta) * prod).sum(axis=1).max())
    # first max: over i of sum_k delta_{k,i} a_ik a_ki; second: over k of sum_i delta_{k,i} a_ki a_ik
    first = _offdiag(delta.T * prod).sum(axis=1).max()
    second = _offdiag(delta * prod).sum(axis=1).max()
    kappa_proof = 0.25 * float(first + second)
    return GammaKappa(gamma, kappa_theorem, kappa_proof)


def gamma_signed(alpha: np.ndarray) -> float:
    """max_i sum_{k != i} (alpha_ik alpha_ki - 1), the form without absolute values."""
    alpha = np.asarray(alpha, dtype=float)
    return float(_offdiag(alpha * alpha.T - 1).sum(axis=1).max())


def at_constant_theorem(gamma: float, kappa: float) -> Optional[float]:
    """(1 - gamma - kappa)^{-1} when gamma + kappa < 1, else None."""
    if gamma < 0 or kappa < 0:
        raise DomainError("gamma and kappa must be nonnegative")
    if gamma + kappa < 1:
        return 1.0 / (1.0 - gamma - kappa)
    return None


def epsilon_q(model: GibbsModel) -> tuple[np.ndarray, float]:
    """epsilon_{i,k} = 4 beta |J_ki| ||w_ik||_inf and q = max_i sum_k e^eps (e^{2 eps} - 1)."""
    n = model.n_sites
    norms = interaction_norms(model)
    eps = np.zeros((n, n))
    for (i, j), s in norms.w_sup.items():
        eps[i, j] = eps[j, i] = 4 * model.beta * abs(model.couplings[i, j]) * s
    terms = _offdiag(np.exp(eps) * np.expm1(2 * eps))
    return eps, float(terms.sum(axis=1).max()) if n > 1 else 0.0


def at_constant_corollary(q: float) -> Optional[float]:
    """(1 - 3q/2)^{-1} when q < 2/3, else None."""
    if q < 0:
        raise DomainError("q must be nonnegative")
    if q < 2.0 / 3.0:
        return 1.0 / (1.0 - 1.5 * q)
    return None


def holley_stroock_constant(model: GibbsModel) -> float:
    """e^{6 beta ||W||_inf} with ||W||_inf replaced by its pair-sum bound."""
    return float(np.exp(6 * model.beta * interaction_norms(model).W_bound))


@dataclass
class CoefficientReport:
    alpha: np.ndarray
    delta: np.ndarray
    gamma: float
    kappa_theorem: float
    kappa_proof: float
    epsilon: Optional[np.ndarray]
    q: Optional[float]
    C_theorem: Optional[float]
    C_theorem_statement: Optional[float]
    C_corollary: Optional[float]
    C_holley_stroock: Optional[float]

    @property
    def theorem_reason(self) -> str:
        return "ok" if self.C_theorem is not None else "hypothesis gamma+kappa<1 violated"

    @property
    def corollary_reason(self) -> str:
        if self.q is None:
            return "no Gibbs model"
        return "ok" if self.C_corollary is not None else "hypothesis q<2/3 violated"

    def best_constant(self) -> Optional[float]:
        """Smallest proven AT constant among the applicable candidates."""
        cands = [c for c in (self.C_theorem, self.C_corollary, self.C_holley_stroock) if c is not None]
        return min(cands) if cands else None


def coefficient_report(model: GibbsModel | None = None, mu: Measure | None = None) -> CoefficientReport:
    """All coefficients and constant candidates; pass a model, or a bare measure for alpha/delta only.

    C_theorem uses the proof's kappa; C_theorem_statement uses the kappa as stated in the theorem.
    """
    if mu is None:
        if model is None:
            raise DomainError("need a model or a measure")
        mu = build_measure(model)
    alpha, delta = alpha_delta(mu)
    gk = gamma_kappa(alpha, delta)
    eps = q = c_cor = c_hs = None
    if model is not None:
        eps, q = epsilon_q(model)
        c_cor = at_constant_corollary(q)
        c_hs = holley_stroock_constant(model)
    return CoefficientReport(
        alpha=alpha,
        delta=delta,
        gamma=gk.gamma,
        kappa_theorem=gk.kappa_theorem,
        kappa_proof=gk.kappa_proof,
        epsilon=eps,
        q=q,
        C_theorem=at_constant_theorem(gk.gamma, gk.kappa_proof),
        C_theorem_statement=at_constant_theorem(gk.gamma, gk.kappa_theorem),
        C_corollary=c_cor,
        C_holley_stroock=c_hs,
    )
