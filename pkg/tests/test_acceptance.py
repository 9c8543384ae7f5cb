"""Acceptance criteria, one test each.

Every test prints a PASS/FAIL line (collected in the terminal summary) and
asserts the criterion with its pinned tolerance.
"""
import itertools
import time

import numpy as np
import pytest

from atlab.coefficients import alpha_delta, at_constant_theorem, coefficient_report, epsilon_q, gamma_kappa
from atlab.covers import (
    Cover,
    approx_shearer_check,
    block_entropy_sums_batch,
    classical_shearer_check,
    permutation_measure,
    shannon_identity_check,
    shearer_slacks_batch,
    singleton_cover,
    subadditivity_estimate,
    subsets_cover,
)
from atlab.dynamics import HeatBathGenerator, evolve_many, semigroup_identity_check, spectral_gap
from atlab.inequalities import implication_audit, mlsi_discrete, sides_batch
from atlab.model import (
    birth_death_model,
    build_measure,
    curie_weiss,
    cycle_graph,
    ising,
    max_degree,
    poisson_site,
    random_gibbs_model,
    ultra_log_concavity_defect,
)
from atlab.prooflab import covariance_lemma_check, covariance_lemma_sweep, gradient_bound_sweep, log_mean
from atlab.rng import density_trials, trial_rng
from atlab.space import ConfigurationSpace, Measure, decomposition_check, entropy, expectation, variance

pytestmark = pytest.mark.acceptance

SEED = 20240611


def densities(seed, n, size):
    return np.array(list(density_trials(seed, n, size)))


def worst_relative(slack, *refs):
    scale = 1.0 + np.max(np.abs(np.vstack(refs)), axis=0)
    return float(np.min(slack / scale))


# --- shared sweep of criterion 2 -------------------------------------------------------


@pytest.fixture(scope="module")
def sweep():
    """200 random models (N <= 5, |Omega_i| <= 3, beta <= 0.2) with gamma + kappa_proof < 1."""
    models, draws = [], 0
    t0 = time.perf_counter()
    while len(models) < 200:
        rng = trial_rng(SEED, 2, draws)
        draws += 1
        n = int(rng.integers(2, 6))
        m = random_gibbs_model(rng, n, max_size=3, beta=float(rng.uniform(0.0, 0.2)))
        mu = build_measure(m)
        rep = coefficient_report(m, mu)
        if rep.gamma + rep.kappa_proof < 1:
            F = densities(SEED + draws, 100, mu.space.total_size)
            models.append((m, mu, rep, F))
    return {"models": models, "draws": draws, "setup_seconds": time.perf_counter() - t0}


# --- 1 ---------------------------------------------------------------------------------


def test_c01_exact_tensorization(report):
    t0 = time.perf_counter()
    worst = np.inf
    for n in (2, 3, 4):
        rng = trial_rng(SEED, 1, n)
        sizes = rng.integers(2, 4, size=n)
        factors = [rng.dirichlet(np.ones(s)) + 0.01 for s in sizes]
        mu = Measure.product([f / f.sum() for f in factors])
        F = densities(SEED + n, 1000, mu.space.total_size)
        lhs, rhs = sides_batch("AT", mu, F)
        worst = min(worst, worst_relative(rhs - lhs, lhs, rhs))
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-12 and elapsed < 10
    report(1, ok, f"worst relative AT slack at C=1: {worst:.3e} (>= -1e-12); {elapsed:.2f}s (< 10s)")
    assert ok


# --- 2 ---------------------------------------------------------------------------------


def test_c02_theorem_soundness(sweep, report):
    t0 = time.perf_counter()
    worst_proof, worst_stmt, stmt_only = np.inf, np.inf, []
    for idx, (m, mu, rep, F) in enumerate(sweep["models"]):
        lhs, rhs = sides_batch("AT", mu, F)
        worst_proof = min(worst_proof, worst_relative(rep.C_theorem * rhs - lhs, lhs, rep.C_theorem * rhs))
        if rep.C_theorem_statement is not None:
            w = worst_relative(rep.C_theorem_statement * rhs - lhs, lhs, rep.C_theorem_statement * rhs)
            worst_stmt = min(worst_stmt, w)
            if w < -1e-10:
                stmt_only.append(idx)
    elapsed = time.perf_counter() - t0 + sweep["setup_seconds"]
    ok = worst_proof >= -1e-10 and elapsed < 300
    report(2, ok, f"200 models ({sweep['draws']} drawn), 100 densities each: worst relative slack "
                  f"{worst_proof:.3e} with kappa_proof; {worst_stmt:.3e} with kappa_theorem "
                  f"({len(stmt_only)} statement-only violations, logged); {elapsed:.1f}s (< 300s)")
    assert ok


# --- 3 ---------------------------------------------------------------------------------


def test_c03_corollary_thresholds(report):
    r_hot = coefficient_report(curie_weiss(8, 0.1))
    r_cold = coefficient_report(curie_weiss(8, 1.0))
    beta = 1 / 36
    J = cycle_graph(6)
    assert beta <= (1 / 18) / max_degree(J)
    _, q_cycle = epsilon_q(ising(J, beta))
    parts = {
        "CW N=8 beta=0.1: q < 2/3 and constant present": r_hot.q < 2 / 3 and r_hot.C_corollary is not None,
        "CW N=8 beta=1.0: q > 2/3 and constant absent": r_cold.q > 2 / 3 and r_cold.C_corollary is None,
        "Ising 6-cycle beta=1/36: q < 2/3": q_cycle < 2 / 3,
    }
    for name, ok in parts.items():
        print(f"    {'ok ' if ok else 'BAD'} {name}")
    ok = all(parts.values())
    report(3, ok, f"q(CW,8,0.1)={r_hot.q:.6f}, q(CW,8,1.0)={r_cold.q:.4f}, q(cycle,1/36)={q_cycle:.6f}; "
                  f"the first must be < 2/3")
    # non-gating context: largest beta with q < 2/3 for Curie-Weiss N=8
    lo, hi = 0.0, 0.1
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if epsilon_q(curie_weiss(8, mid))[1] < 2 / 3 else (lo, mid)
    report("3 (context)", True, f"CW N=8 satisfies q < 2/3 only for beta < {lo:.6f}; theorem constant at "
                                f"beta=0.1 is {r_hot.C_theorem:.6f}", gating=False)
    assert ok


# --- 4 ---------------------------------------------------------------------------------


def test_c04_coefficient_bounds(sweep, report):
    worst = np.inf
    for m, mu, rep, _ in sweep["models"]:
        n = m.n_sites
        off = ~np.eye(n, dtype=bool)
        e = rep.epsilon[off]
        worst = min(worst, float(np.min(np.exp(e) - rep.alpha[off])),
                    float(np.min(np.exp(e) - np.exp(-e) - rep.delta[off])))
    ok = worst >= -1e-12
    report(4, ok, f"min over 200 models of e^eps - alpha and e^eps - e^-eps - delta: {worst:.3e} (>= -1e-12)")
    assert ok


# --- 5 ---------------------------------------------------------------------------------


def test_c05_holley_stroock(sweep, report):
    worst = np.inf
    for m, mu, rep, F in sweep["models"]:
        lhs, rhs = sides_batch("AT", mu, F)
        C = rep.C_holley_stroock
        worst = min(worst, worst_relative(C * rhs - lhs, lhs, C * rhs))
    r = coefficient_report(curie_weiss(8, 0.1))
    beats = r.C_corollary is not None and r.C_corollary <= r.C_holley_stroock
    ok = worst >= -1e-10 and beats
    c_cor = "absent" if r.C_corollary is None else f"{r.C_corollary:.6f}"
    report(5, ok, f"Holley-Stroock worst relative slack {worst:.3e} (>= -1e-10); CW N=8 beta=0.1: "
                  f"C_corollary={c_cor} vs C_holley_stroock={r.C_holley_stroock:.6f} (need C_cor <= C_HS)")
    assert ok


# --- 6 ---------------------------------------------------------------------------------


def test_c06_implication_ordering(report):
    failures, etas = [], []
    for t in range(20):
        rng = trial_rng(SEED, 6, t)
        n = int(rng.integers(2, 5))
        mu = build_measure(random_gibbs_model(rng, n, max_size=3 if n < 4 else 2, beta=float(rng.uniform(0, 1))))
        audit = implication_audit(mu, budget=6, seed=t)
        etas.append(audit.eta)
        failures += [(t, c[0]) for c in audit.checks if not c[-1]]
    ok = not failures
    report(6, ok, f"20 models, 5 orderings each; eta = 1e-3 * max(C_P, 1) in [{min(etas):.2e}, {max(etas):.2e}]; "
                  f"failures: {failures or 'none'}")
    assert ok


# --- 7 ---------------------------------------------------------------------------------


def _decay_worst(mu, C, C_P, n_dens=20, grid=50):
    L = HeatBathGenerator(mu)
    worst_ent = worst_var = np.inf
    for f in densities(SEED + 7, n_dens, mu.space.total_size):
        ts = np.linspace(0.0, 5 * C, grid)
        ent0 = entropy(f, mu)
        for t, ft in zip(ts, evolve_many(L, f, ts)):
            worst_ent = min(worst_ent, (np.exp(-t / C) * ent0 - entropy(ft, mu)) / ent0)
        ts = np.linspace(0.0, 5 * C_P, grid)
        var0 = variance(f, mu)
        for t, ft in zip(ts, evolve_many(L, f, ts)):
            worst_var = min(worst_var, (np.exp(-2 * t / C_P) * var0 - variance(ft, mu)) / var0)
    return worst_ent, worst_var


def test_c07_decay(report):
    m = curie_weiss(8, 0.1)
    mu = build_measure(m)
    r = coefficient_report(m, mu)
    C_P = 1 / spectral_gap(HeatBathGenerator(mu))
    if r.C_corollary is not None:
        worst_ent, worst_var = _decay_worst(mu, r.C_corollary, C_P)
        ok = worst_ent >= -1e-8 and worst_var >= -1e-8
        detail = f"C_corollary={r.C_corollary:.6f}: entropy {worst_ent:.3e}, variance {worst_var:.3e}"
    else:
        worst_ent, worst_var = _decay_worst(mu, r.C_theorem, C_P)
        ok = False
        detail = (f"C from the corollary is absent (q={r.q:.6f} >= 2/3); variance decay at C_P={C_P:.6f}: "
                  f"{worst_var:.3e}; entropy decay with C_theorem={r.C_theorem:.6f} instead: {worst_ent:.3e} "
                  f"(relative to Ent(f), >= -1e-8)")
    report(7, ok, detail)
    report("7 (variance part)", worst_var >= -1e-8, f"variance decay worst relative slack {worst_var:.3e}")
    assert ok


# --- 8 ---------------------------------------------------------------------------------


def test_c08_semigroup_identities(report):
    worst_total = worst_sites = 0.0
    for t in range(4):
        rng = trial_rng(SEED, 8, t)
        mu = build_measure(random_gibbs_model(rng, 3, max_size=3, beta=float(rng.uniform(0, 0.5))))
        L = HeatBathGenerator(mu)
        T = 20 / spectral_gap(L)
        for f in densities(SEED + 80 + t, 2, mu.space.total_size):
            res = semigroup_identity_check(L, f, T)
            worst_total = max(worst_total, abs(res.residual_total) / (1 + res.entropy_initial))
            worst_sites = max(worst_sites, float(np.abs(res.residual_sites).max()) / (1 + res.entropy_initial))
    ok = worst_total <= 1e-6 and worst_sites <= 1e-6
    report(8, ok, f"max residual/(1+Ent): total {worst_total:.3e}, per-site {worst_sites:.3e} (<= 1e-6)")
    assert ok


# --- 9 ---------------------------------------------------------------------------------


def test_c09_decomposition(report):
    worst = 0.0
    for t in range(1000):
        rng = trial_rng(SEED, 9, t)
        if t % 100 == 0:
            mu = build_measure(random_gibbs_model(rng, 4, max_size=3, beta=1.0))
        f = np.exp(rng.uniform(-3, 3, mu.space.total_size))
        block = [k for k in range(4) if rng.random() < 0.5]
        worst = max(worst, abs(decomposition_check(f, mu, block)) / (1 + entropy(f, mu)))
    ok = worst <= 1e-12
    report(9, ok, f"max |residual|/scale over 1000 (f, B) on 4-site models: {worst:.3e} (<= 1e-12)")
    assert ok


# --- 10 --------------------------------------------------------------------------------


def _edge_covers(n):
    pairs = list(itertools.combinations(range(n), 2))
    for r in range(1, len(pairs) + 1):
        for fam in itertools.combinations(pairs, r):
            if set().union(*fam) == set(range(n)):
                yield Cover(tuple(set(p) for p in fam), n)


def test_c10_shearer(report):
    mu = Measure.uniform(ConfigurationSpace((2,) * 4))
    F = densities(SEED + 10, 1000, 16)
    covers = list(_edge_covers(4)) + [singleton_cover(4), singleton_cover(4).complementary()]
    worst = np.inf
    for cover in covers:
        primal, dual, ent = shearer_slacks_batch(mu, cover, F)
        worst = min(worst, worst_relative(primal, ent))
        if dual is not None:
            worst = min(worst, worst_relative(dual, ent))
    worst_id = 0.0
    for f in F[:100]:
        f = f / expectation(f, mu)
        for r in range(1, 5):
            for block in itertools.combinations(range(4), r):
                worst_id = max(worst_id, abs(shannon_identity_check(mu, f, block)))
    worst_classical = np.inf
    for f in F[:200]:
        law = Measure(mu.space, f * mu.probs / np.dot(f, mu.probs))
        for cover in covers:
            worst_classical = min(worst_classical, classical_shearer_check(law, cover))
    ok = worst >= -1e-12 and worst_id <= 1e-10 and worst_classical >= -1e-10
    report(10, ok, f"{len(covers)} covers x 1000 densities: worst relative slack {worst:.3e} (>= -1e-12); "
                   f"Shannon identity residual {worst_id:.3e} (<= 1e-10); classical Shearer slack "
                   f"{worst_classical:.3e} (>= -1e-10)")
    assert ok


# --- 11 --------------------------------------------------------------------------------


def _small_covers(n):
    out = [singleton_cover(n), subsets_cover(n, 2), Cover(tuple({k, (k + 1) % n} for k in range(n)), n)]
    if n >= 3:
        out.append(subsets_cover(n, 3))
    if n - 1 <= 3 and n > 1:
        out.append(singleton_cover(n).complementary())
    return [c for c in out if c.delta <= 3]


def test_c11_approximate_shearer(sweep, report):
    worst, count = np.inf, 0
    for m, mu, rep, F in sweep["models"]:
        C = rep.C_theorem
        for cover in _small_covers(m.n_sites):
            sums, ent = block_entropy_sums_batch(mu, cover, F)
            rhs = C * cover.delta / cover.n_minus * sums
            worst = min(worst, worst_relative(rhs - ent, ent, rhs))
            count += 1
    # spot check the batched path against the scalar checker
    m, mu, rep, F = sweep["models"][0]
    cover = _small_covers(m.n_sites)[1]
    sums, ent = block_entropy_sums_batch(mu, cover, F[:1])
    scalar = approx_shearer_check(mu, cover, rep.C_theorem, F[0])
    assert scalar == pytest.approx(rep.C_theorem * cover.delta / cover.n_minus * sums[0] - ent[0], rel=1e-10, abs=1e-13)
    ok = worst >= -1e-10
    report(11, ok, f"{count} (model, cover) pairs with Delta <= 3, 100 densities each: worst relative slack "
                   f"{worst:.3e} (>= -1e-10)")
    assert ok


# --- 12 --------------------------------------------------------------------------------


def test_c12_prooflab(report):
    models = [build_measure(ising(cycle_graph(3), 0.2))]
    for t in range(3):
        rng = trial_rng(SEED, 12, t)
        models.append(build_measure(random_gibbs_model(rng, 3, max_size=3, beta=float(rng.uniform(0.2, 1.0)))))
    worst = {"combined": np.inf, "first": np.inf, "second": np.inf, "covariance": np.inf}
    for j, mu in enumerate(models):
        alpha = alpha_delta(mu)[0]
        for f in densities(SEED + 120 + j, 100, mu.space.total_size):
            for k, v in gradient_bound_sweep(f, mu, alpha).items():
                worst[k] = min(worst[k], v)
            worst["covariance"] = min(worst["covariance"], covariance_lemma_sweep(f, mu))
    rng = trial_rng(SEED, 12, 99)
    for _ in range(1000):
        p = rng.dirichlet(np.ones(4))
        g = rng.exponential(size=4)
        psi = rng.normal(size=4)
        cov = abs(p @ (g * psi) - (p @ g) * (p @ psi))
        worst["covariance"] = min(worst["covariance"], covariance_lemma_check(g, psi, p) / (1 + cov))

    # logarithmic mean property suite over 10^4 random tuples
    N = 10_000
    a, b, a2, b2 = np.exp(rng.uniform(-7, 7, size=(4, N)))
    lam = log_mean(a, b)
    props = {}
    props["Lambda(a,a)=a"] = float(np.max(np.abs(log_mean(a, a) - a) / a))
    props["min<=Lambda<=mean"] = float(np.max(np.maximum(np.minimum(a, b) - lam, lam - 0.5 * (a + b)) / lam))
    q = rng.uniform(0, 1, N)
    A, B = q * a2 + rng.exponential(size=N), q * b2 + rng.exponential(size=N)
    props["monotonicity"] = float(np.max((q * log_mean(a2, b2) - log_mean(A, B)) / log_mean(A, B)))
    w = rng.dirichlet(np.ones(3), size=N)
    xs, ys = np.exp(rng.uniform(-5, 5, size=(2, N, 3)))
    left = log_mean((w * xs).sum(1), (w * ys).sum(1))
    props["concavity"] = float(np.max(((w * log_mean(xs, ys)).sum(1) - left) / left))
    inner = (a - b) ** 2 / (a + b) - 0.5 * (a - b) * (np.log(a) - np.log(b))
    props["(a-b)^2/(a+b) bound"] = float(np.max(inner / (1 + np.abs(a - b) * np.abs(np.log(a / b)))))
    x, wq = np.polynomial.legendre.leggauss(200)
    tq = 0.5 * (x + 1)
    lb = np.log(b / a)
    quad = a * (0.5 * wq[None, :] * np.exp(tq[None, :] * lb[:, None])).sum(1)
    props["integral representation"] = float(np.max(np.abs(quad - lam) / lam))

    bounds_ok = all(v >= -1e-10 for v in worst.values())
    lam_ok = (props["Lambda(a,a)=a"] <= 1e-15 and props["min<=Lambda<=mean"] <= 1e-12
              and props["monotonicity"] <= 1e-12 and props["concavity"] <= 1e-12
              and props["(a-b)^2/(a+b) bound"] <= 1e-12 and props["integral representation"] <= 1e-8)
    ok = bounds_ok and lam_ok
    report(12, ok, "worst relative slacks " + ", ".join(f"{k}={v:.3e}" for k, v in worst.items())
           + " (>= -1e-10); Lambda suite max violations (<= 1e-12, 1e-8 for the integral) " + ", ".join(f"{k}: {v:.2e}" for k, v in props.items()))
    assert ok


# --- 13 --------------------------------------------------------------------------------


def test_c13_birth_death(report):
    site = poisson_site(1.0, 30)
    ulc = float(np.abs(ultra_log_concavity_defect(site.nu)).max())
    one = birth_death_model([site], np.zeros((1, 1)), None, 0.0)
    mu1 = build_measure(one)
    assert one.site_info["c0"] == pytest.approx(1.0, abs=1e-12)
    worst_one = np.inf
    for f in densities(SEED + 13, 100, mu1.space.total_size):
        worst_one = min(worst_one, mlsi_discrete(one, f, 1.0, mu1) / (1 + entropy(f, mu1)))
    two = birth_death_model([site, site], [[0, 1], [1, 0]], lambda x, y: (x == y).astype(float), 0.05)
    mu2 = build_measure(two)
    r = coefficient_report(two, mu2)
    assert r.q < 2 / 3
    K = r.C_corollary * two.site_info["c0"] * np.exp(1 / 3)
    worst_two = np.inf
    for f in densities(SEED + 131, 100, mu2.space.total_size):
        worst_two = min(worst_two, mlsi_discrete(two, f, K, mu2) / (1 + entropy(f, mu2)))
    ok = ulc <= 1e-12 and worst_one >= -1e-8 and worst_two >= -1e-8
    report(13, ok, f"Poisson(1), n_max=30: max |ULC defect| {ulc:.2e} (<= 1e-12); one-site MLSI C0=1 worst "
                   f"relative slack {worst_one:.3e}; two-site q={r.q:.4f}, K={K:.4f}: {worst_two:.3e} (>= -1e-8)")
    assert ok


# --- 14 --------------------------------------------------------------------------------


def test_c14_subadditivity_exploratory(report):
    values = {}
    for n in (3, 4):
        values[n] = subadditivity_estimate(permutation_measure(n), budget=6, seed=SEED).value
    report(14, True, "subadditivity ratio lower bounds: "
           + ", ".join(f"S{n}: {v:.6f}" for n, v in values.items()) + " (expected <= 2.1; report only)",
           gating=False)
