"""Numerical checks of the building blocks of the approximate tensorization argument.

The central object is the logarithmic mean and the measure on Omega_k tilted
by it, which linearise differences of logarithms of conditional expectations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coefficients import alpha_delta
from .errors import ConditioningError, DomainError
from .space import Measure, _same_space, tolerance_scale


def log_mean(a, b):
    """Lambda(a, b) = (a - b) / (log a - log b), with Lambda(a, a) = a and Lambda(a, 0) = 0.

    For |u| <= 1/2, with m = (a + b)/2 and u = (a - b)/(a + b), it is written as
    m * u / artanh(u), which has no cancellation; below |u| = 1e-8 the series
    m / (1 + u^2/3) is used.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("the logarithmic mean needs nonnegative arguments")
    a, b = np.broadcast_arrays(a, b)
    m = 0.5 * (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(m > 0, (a - b) / (a + b), 0.0)
        small = np.abs(u) < 1e-8
        edge = (a == 0) | (b == 0)
        # artanh is ill-conditioned as |u| -> 1; there log a - log b is itself well separated
        far = np.abs(u) > 0.5
        mid = m * u / np.arctanh(np.where(small | far, 0.25, u))
        direct = (a - b) / (np.log(np.where(edge, 1.0, a)) - np.log(np.where(edge, 2.0, b)))
        out = np.where(small, m / (1 + u * u / 3), np.where(far, direct, mid))
    out = np.where(edge & ~(a == b), 0.0, out)
    return out if out.ndim else float(out)


@dataclass
class TiltedMeasure:
    probs: np.ndarray
    norm: float


def _line(tensor: np.ndarray, k: int, config: dict) -> np.ndarray:
    idx = [config.get(j, slice(None)) if j != k else slice(None) for j in range(tensor.ndim)]
    return tensor[tuple(idx)]


def _rest(n: int, i: int, k: int, xbar: Sequence[int]) -> dict:
    xbar = list(xbar)
    rest = [j for j in range(n) if j not in (i, k)]
    if len(xbar) == n:
        xbar = [xbar[j] for j in rest]
    if len(xbar) != len(rest):
        raise DomainError(f"xbar must have {len(rest)} entries")
    return dict(zip(rest, xbar))


def _lines(f, mu: Measure, i, k, x_i, y_i, xbar):
    """f(x_i, ., xbar), f(y_i, ., xbar), mu_k^{x_i, xbar}, mu_k^{y_i, xbar}."""
    f = _same_space(f, mu)
    if i == k:
        raise DomainError("need i != k")
    rest = _rest(mu.space.n_sites, i, k, xbar)
    T = mu.space.tensor(f)
    C = mu.conditional_tensor(k)
    fx = _line(T, k, {**rest, i: x_i})
    fy = _line(T, k, {**rest, i: y_i})
    cx = _line(C, k, {**rest, i: x_i})
    cy = _line(C, k, {**rest, i: y_i})
    return fx, fy, cx, cy


def tilted_measure(f, mu: Measure, i: int, k: int, x_i: int, y_i: int, xbar: Sequence[int]) -> TiltedMeasure:
    """nu(x_k) ∝ Lambda(f(y_i, x_k, xbar), f(x_i, x_k, xbar)) mu_k^{x_i, xbar}(x_k)."""
    fx, fy, cx, _ = _lines(f, mu, i, k, x_i, y_i, xbar)
    if np.any(fx <= 0) or np.any(fy <= 0):
        raise DomainError("the tilted measure needs a strictly positive f")
    w = log_mean(fy, fx) * cx
    norm = float(w.sum())
    if not norm > 0:
        raise ConditioningError("tilted measure has zero normalisation")
    return TiltedMeasure(w / norm, norm)


def tilted_identity_residual(f, mu: Measure, i, k, x_i, y_i, xbar) -> float:
    """max over x_k of |mu_k^{x_i}(x_k) |grad_i f| - nubar |grad_i log f| nu(x_k)|."""
    fx, fy, cx, _ = _lines(f, mu, i, k, x_i, y_i, xbar)
    nu = tilted_measure(f, mu, i, k, x_i, y_i, xbar)
    left = cx * np.abs(fy - fx)
    right = nu.norm * np.abs(np.log(fy) - np.log(fx)) * nu.probs
    return float(np.abs(left - right).max())


@dataclass
class GradientBound:
    lhs: float
    rhs_combined: float
    rhs_first: float
    rhs_second: float

    @property
    def slacks(self) -> tuple[float, float, float]:
        return (self.rhs_combined - self.lhs, self.rhs_first - self.lhs, self.rhs_second - self.lhs)


def _bound_terms(fx, fy, cx, cy, alpha, axis=-1):
    """Vectorised pieces of the gradient bound along the x_k axis."""
    S = (fy * cy).sum(axis=axis)
    U = (fx * cx).sum(axis=axis)
    lhs = np.abs(np.log(S) - np.log(U))
    lam = log_mean(fy, fx) * cx
    nubar = lam.sum(axis=axis)
    nu = lam / np.expand_dims(nubar, axis)
    a1 = (np.abs(np.log(fy) - np.log(fx)) * nu).sum(axis=axis)
    ratio = cx / cy
    cov = np.abs((fy * ratio * cy).sum(axis=axis) - S * (ratio * cy).sum(axis=axis))
    combined = alpha * a1 + alpha * cov / np.sqrt(nubar * S)
    first = a1 + alpha * cov / S
    second = alpha * cov / nubar + alpha * a1
    return lhs, combined, first, second


def gradient_bound_check(f, mu: Measure, i: int, k: int, x: Sequence[int], y_i: int,
                         alpha: Optional[float] = None) -> GradientBound:
    """Both sides of the pointwise bound on |grad_i log mu_k[f](x; y_i)|.

    ``rhs_combined`` is the stated bound; ``rhs_first`` and ``rhs_second`` are
    the two intermediate bounds it is assembled from.
    """
    f = _same_space(f, mu)
    if np.any(f <= 0):
        raise DomainError("gradient bound needs a strictly positive f")
    if alpha is None:
        alpha = alpha_delta(mu)[0][i, k]
    x = list(x)
    fx, fy, cx, cy = _lines(f, mu, i, k, x[i], y_i, x)
    lhs, comb, first, second = _bound_terms(fx, fy, cx, cy, alpha)
    return GradientBound(float(lhs), float(comb), float(first), float(second))


def gradient_bound_sweep(f, mu: Measure, alpha: Optional[np.ndarray] = None) -> dict:
    """Worst relative slack of each bound over every (i, k, x, y_i).

    Relative slack is (rhs - lhs) / (1 + max(|lhs|, |rhs|)).
    """
    f = _same_space(f, mu)
    if np.any(f <= 0):
        raise DomainError("gradient bound needs a strictly positive f")
    if alpha is None:
        alpha = alpha_delta(mu)[0]
    n = mu.space.n_sites
    T = mu.space.tensor(f)
    worst = {"combined": np.inf, "first": np.inf, "second": np.inf}
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            Tf = np.moveaxis(T, (i, k), (0, 1))
            C = np.moveaxis(mu.conditional_tensor(k), (i, k), (0, 1))
            si, sk = Tf.shape[:2]
            Tf = Tf.reshape(si, sk, -1)
            C = C.reshape(si, sk, -1)
            # axes: (x_i, y_i, x_k, rest)
            fx, fy = Tf[:, None], Tf[None, :]
            cx, cy = C[:, None], C[None, :]
            lhs, comb, first, second = _bound_terms(fx, fy, cx, cy, alpha[i, k], axis=2)
            for name, rhs in (("combined", comb), ("first", first), ("second", second)):
                rel = (rhs - lhs) / (1 + np.maximum(np.abs(lhs), np.abs(rhs)))
                worst[name] = min(worst[name], float(rel.min()))
    return worst


def covariance_lemma_check(g, psi, p) -> float:
    """RHS - |cov_p(g, psi)| for the covariance bound by oscillation and the entropy dissipation of g."""
    g = np.asarray(g, dtype=float)
    psi = np.asarray(psi, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(g < 0):
        raise DomainError("g must be nonnegative")
    if abs(p.sum() - 1) > 1e-12 or np.any(p < 0):
        raise DomainError("p must be a probability vector")
    cov = float(np.dot(p, g * psi) - np.dot(p, g) * np.dot(p, psi))
    osc = float(psi.max() - psi.min())
    dg = g[None, :] - g[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        dlog = np.log(g)[None, :] - np.log(g)[:, None]
        term = np.where(dg == 0, 0.0, dg * dlog)
    dissipation = float((p[:, None] * p[None, :] * term).sum())
    rhs = 0.5 * osc * np.sqrt(np.dot(p, g)) * np.sqrt(dissipation)
    return rhs - abs(cov)


def covariance_lemma_relative(g, psi, p) -> float:
    slack = covariance_lemma_check(g, psi, p)
    cov = abs(np.dot(p, np.asarray(g) * np.asarray(psi)) - np.dot(p, g) * np.dot(p, psi))
    return slack / tolerance_scale(cov, slack + cov) if np.isfinite(slack) else np.inf


def covariance_lemma_sweep(f, mu: Measure) -> float:
    """Worst relative slack of the covariance lemma in the instance the gradient bound uses.

    For every i != k, (x_i, y_i) and xbar: g = f(y_i, ., xbar), psi = phi_{i,k}(x_i, y_i, ., xbar),
    p = mu_k^{y_i, xbar}.
    """
    f = _same_space(f, mu)
    n = mu.space.n_sites
    T = mu.space.tensor(f)
    worst = np.inf
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            Tf = np.moveaxis(T, (i, k), (0, 1))
            C = np.moveaxis(mu.conditional_tensor(k), (i, k), (0, 1))
            si, sk = Tf.shape[:2]
            Tf = Tf.reshape(si, sk, -1)
            C = C.reshape(si, sk, -1)
            for a in range(si):
                for b in range(si):
                    for r in range(Tf.shape[2]):
                        psi = C[a, :, r] / C[b, :, r]
                        worst = min(worst, covariance_lemma_relative(Tf[b, :, r], psi, C[b, :, r]))
    return float(worst)
