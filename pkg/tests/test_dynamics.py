import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atlab.dynamics import (
    HeatBathGenerator,
    dirichlet_form,
    dirichlet_form_operator,
    entropy_trace,
    evolve,
    evolve_many,
    semigroup_identity_check,
    spectral_decomposition,
    spectral_gap,
)
from atlab.errors import DomainError
from atlab.model import build_measure, curie_weiss, ising, random_gibbs_model
from atlab.space import ConfigurationSpace, Measure, entropy, expectation, variance


def test_single_site_semigroup_closed_form():
    # one site: L f = mu[f] - f, so f_t = mu[f] + e^{-t} (f - mu[f])
    mu = Measure(ConfigurationSpace((3,)), np.array([0.2, 0.3, 0.5]))
    f = np.array([1.0, 4.0, 2.0])
    m = expectation(f, mu)
    for t in (0.0, 0.3, 2.0, 7.5):
        np.testing.assert_allclose(evolve(HeatBathGenerator(mu), f, t), m + np.exp(-t) * (f - m), rtol=1e-12)


def test_product_gap_is_one():
    mu = Measure.product([[0.3, 0.7], [0.1, 0.2, 0.7], [0.5, 0.5]])
    assert spectral_gap(HeatBathGenerator(mu)) == pytest.approx(1.0, rel=1e-12)


def test_generator_kills_constants_and_is_self_adjoint():
    mu = build_measure(random_gibbs_model(np.random.default_rng(0), 3, beta=0.8))
    L = HeatBathGenerator(mu)
    np.testing.assert_allclose(L(np.ones(mu.space.total_size)), 0.0, atol=1e-14)
    A = L.matrix()
    D = np.diag(mu.probs)
    np.testing.assert_allclose(D @ A, (D @ A).T, atol=1e-14)


def test_spectral_decomposition_orthonormal():
    mu = build_measure(ising([[0, 1, 0], [1, 0, 1], [0, 1, 0]], 0.6))
    vals, vecs = spectral_decomposition(HeatBathGenerator(mu))
    gram = vecs.T @ np.diag(mu.probs) @ vecs
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-12)
    assert vals[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(vals <= 3 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_dirichlet_forms_agree(seed):
    rng = np.random.default_rng(seed)
    mu = build_measure(random_gibbs_model(rng, 3, beta=1.0))
    L = HeatBathGenerator(mu)
    f, g = rng.normal(size=(2, mu.space.total_size))
    assert dirichlet_form(L, f, g) == pytest.approx(dirichlet_form_operator(L, f, g), rel=1e-10, abs=1e-12)
    assert dirichlet_form(L, f, f) >= -1e-14


def test_mass_conservation_and_positivity():
    mu = build_measure(curie_weiss(4, 0.5))
    L = HeatBathGenerator(mu)
    f = np.exp(np.random.default_rng(1).normal(size=16) * 3)
    states = evolve_many(L, f, [0.1, 1.0, 10.0])
    for s in states:
        assert expectation(s, mu) == pytest.approx(expectation(f, mu), rel=1e-12)
        assert s.min() > 0


def test_evolve_matches_matrix_exponential():
    from scipy.linalg import expm

    mu = build_measure(ising([[0, 1], [1, 0]], 0.4))
    L = HeatBathGenerator(mu)
    f = np.array([1.0, 3.0, 0.5, 2.0])
    np.testing.assert_allclose(evolve(L, f, 1.7), expm(1.7 * L.matrix()) @ f, rtol=1e-12)


def test_variance_decays_at_gap_rate():
    mu = build_measure(curie_weiss(4, 0.5))
    L = HeatBathGenerator(mu)
    gap = spectral_gap(L)
    f = np.random.default_rng(2).normal(size=16)
    for t in np.linspace(0, 5, 11):
        assert variance(evolve(L, f, t), mu) <= np.exp(-2 * gap * t) * variance(f, mu) * (1 + 1e-10) + 1e-15


def test_entropy_trace_monotone():
    mu = build_measure(curie_weiss(3, 0.3))
    f = np.exp(np.random.default_rng(3).normal(size=8))
    trace = entropy_trace(HeatBathGenerator(mu), f, np.linspace(0, 4, 9))
    ents = [e for _, e in trace]
    assert ents[0] == pytest.approx(entropy(f, mu))
    assert all(b <= a + 1e-14 for a, b in zip(ents, ents[1:]))


def test_negative_time_rejected():
    mu = Measure.uniform(ConfigurationSpace((2,)))
    with pytest.raises(DomainError):
        evolve(HeatBathGenerator(mu), np.ones(2), -1.0)


def test_semigroup_identity_small_model():
    mu = build_measure(ising([[0, 1, 1], [1, 0, 1], [1, 1, 0]], 0.3))
    L = HeatBathGenerator(mu)
    f = np.exp(np.random.default_rng(4).normal(size=8))
    res = semigroup_identity_check(L, f, 10.0)
    assert abs(res.residual_total) <= 1e-6 * (1 + res.entropy_initial)
    assert np.abs(res.residual_sites).max() <= 1e-6 * (1 + res.entropy_initial)
