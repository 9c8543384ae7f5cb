"""Truncated Poisson(1): best log-Sobolev ratio versus the modified log-Sobolev ratio.

For one site on {0, ..., n_max} with the discrete gradient d f(x) = f(x+1) - f(x),
maximise Ent(f) / mu[(d sqrt f)^2] and Ent(f) / mu[d f d log f] over f = e^g.
The MLS ratio stays below 1 (one-site constant C0 = 1); the LS ratio grows
with n_max.  Both are lower bounds on the optimal constants.
"""
import argparse
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats


@dataclass
class Config:
    n_max: tuple = (10, 15, 20, 30, 40)
    lam: float = 1.0
    slopes: tuple = (-2.0, -1.0, 0.5, 1.0, 2.0, 3.0, 4.0)


def entropy(f, p):
    m = p @ f
    return float(p @ (f * np.log(f / m)))


def ls_energy(f, p):
    return float(p[:-1] @ np.diff(np.sqrt(f)) ** 2)


def mls_energy(f, p):
    return float(p[:-1] @ (np.diff(f) * np.diff(np.log(f))))


def best_ratio(energy, p, starts):
    def neg(g):
        f = np.exp(np.clip(g - g.max(), -700, 0))
        e = energy(f, p)
        return -entropy(f, p) / e if e > 0 else 0.0

    best = 0.0
    for g0 in starts:
        res = optimize.minimize(neg, g0, method="L-BFGS-B", options={"maxiter": 500})
        best = max(best, -neg(g0), -res.fun)
    return best


def main(cfg: Config):
    print(f"{'n_max':>6}{'tail':>12}{'LS ratio':>12}{'MLS ratio':>12}")
    for n in cfg.n_max:
        x = np.arange(n + 1, dtype=float)
        p = stats.poisson.pmf(x, cfg.lam)
        tail = stats.poisson.sf(n, cfg.lam)
        p = p / p.sum()
        starts = [s * x for s in cfg.slopes] + [s * x * np.log1p(x) for s in (0.5, 1.0)]
        ls = best_ratio(ls_energy, p, starts)
        mls = best_ratio(mls_energy, p, starts)
        print(f"{n:>6}{tail:>12.2e}{ls:>12.4f}{mls:>12.4f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-max", type=int, nargs="+", default=list(Config.n_max))
    p.add_argument("--lam", type=float, default=Config.lam)
    a = p.parse_args()
    main(Config(n_max=tuple(a.n_max), lam=a.lam))
