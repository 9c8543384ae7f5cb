"""Random-model sweep of the theorem constant, comparing the two kappa forms.

For every sampled model with gamma + kappa_proof < 1, random densities are
checked against both constants; on a subset the AT ratio is also maximised
to see how close the best density comes to the statement's constant.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from atlab.coefficients import coefficient_report
from atlab.inequalities import estimate_optimal_constant, sides_batch
from atlab.model import build_measure, random_gibbs_model
from atlab.rng import density_trials, trial_rng


@dataclass
class Config:
    n_models: int = 100
    n_densities: int = 100
    beta_max: float = 0.2
    max_sites: int = 5
    optimize_every: int = 10
    budget: int = 4
    seed: int = 7


def worst_relative(C, lhs, rhs):
    return float(np.min((C * rhs - lhs) / (1 + np.maximum(lhs, C * rhs))))


def main(cfg: Config):
    kept = draws = stmt_only = 0
    worst_proof = worst_stmt = np.inf
    closest = []
    while kept < cfg.n_models:
        rng = trial_rng(cfg.seed, draws)
        draws += 1
        n = int(rng.integers(2, cfg.max_sites + 1))
        model = random_gibbs_model(rng, n, beta=float(rng.uniform(0, cfg.beta_max)))
        mu = build_measure(model)
        r = coefficient_report(model, mu)
        if r.C_theorem is None:
            continue
        F = np.array(list(density_trials(cfg.seed + draws, cfg.n_densities, mu.space.total_size)))
        lhs, rhs = sides_batch("AT", mu, F)
        worst_proof = min(worst_proof, worst_relative(r.C_theorem, lhs, rhs))
        if r.C_theorem_statement is not None:
            w = worst_relative(r.C_theorem_statement, lhs, rhs)
            worst_stmt = min(worst_stmt, w)
            stmt_only += w < -1e-10
            if kept % cfg.optimize_every == 0:
                est = estimate_optimal_constant("AT", mu, budget=cfg.budget, seed=cfg.seed)
                closest.append((est.value / r.C_theorem_statement, est.value / r.C_theorem, n))
        kept += 1
    print(f"models kept {kept} of {draws} drawn")
    print(f"worst relative slack, kappa_proof:   {worst_proof:.3e}")
    print(f"worst relative slack, kappa_theorem: {worst_stmt:.3e}  ({stmt_only} violations)")
    print("optimised AT ratio (lower bound) / constant:")
    for s, p, n in closest:
        print(f"  N={n}  vs statement {s:.4f}  vs proof {p:.4f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-models", type=int, default=Config.n_models)
    p.add_argument("--beta-max", type=float, default=Config.beta_max)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    main(Config(n_models=a.n_models, beta_max=a.beta_max, seed=a.seed))
