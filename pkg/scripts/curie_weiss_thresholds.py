"""Curie-Weiss coefficients versus beta: q, gamma + kappa and the proven AT constants.

Also solves q(beta) = 2/3 for each N, the largest beta at which the q-based
constant is available.
"""
import argparse
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from atlab.coefficients import coefficient_report, epsilon_q
from atlab.model import curie_weiss


@dataclass
class Config:
    sizes: tuple = (2, 3, 4, 5, 6, 7, 8, 9, 10)
    betas: tuple = (0.05, 0.1, 0.2, 0.5, 1.0)
    enumerate_up_to: int = 10


def q_of(n, beta):
    return epsilon_q(curie_weiss(n, beta))[1]


def q_threshold(n):
    return optimize.brentq(lambda b: q_of(n, b) - 2 / 3, 1e-9, 10.0, xtol=1e-14)


def fmt(x):
    return "-" if x is None else f"{x:.6f}"


def main(cfg: Config):
    print("N  beta*(q=2/3)")
    for n in cfg.sizes:
        print(f"{n:<2} {q_threshold(n):.6f}")
    print()
    print(f"{'N':<3}{'beta':<6}{'q':>10}{'g+k_thm':>10}{'g+k_prf':>10}{'C_thm':>10}{'C_cor':>10}{'C_HS':>12}")
    for n in cfg.sizes:
        if n > cfg.enumerate_up_to:
            continue
        for beta in cfg.betas:
            r = coefficient_report(curie_weiss(n, beta))
            print(f"{n:<3}{beta:<6}{r.q:>10.4f}{r.gamma + r.kappa_theorem:>10.4f}"
                  f"{r.gamma + r.kappa_proof:>10.4f}{fmt(r.C_theorem):>10}{fmt(r.C_corollary):>10}"
                  f"{r.C_holley_stroock:>12.4g}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=list(Config.sizes))
    p.add_argument("--betas", type=float, nargs="+", default=list(Config.betas))
    a = p.parse_args()
    main(Config(sizes=tuple(a.sizes), betas=tuple(a.betas)))
