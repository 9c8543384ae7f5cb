"""Lower bounds on sum_k Ent(f_k) / Ent(f) for the uniform measure on permutations.

The values are best ratios found by multi-start ascent, so they only bound
the supremum from below.
"""
import argparse
from dataclasses import dataclass

from atlab.covers import permutation_measure, subadditivity_estimate


@dataclass
class Config:
    sizes: tuple = (3, 4)
    budgets: tuple = (2, 6, 12)
    seed: int = 0


def main(cfg: Config):
    for n in cfg.sizes:
        mu = permutation_measure(n)
        for b in cfg.budgets:
            est = subadditivity_estimate(mu, budget=b, seed=cfg.seed)
            print(f"n={n} budget={b:<3} lower bound {est.value:.6f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=list(Config.sizes))
    p.add_argument("--budgets", type=int, nargs="+", default=list(Config.budgets))
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    main(Config(tuple(a.sizes), tuple(a.budgets), a.seed))
