import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherent_sampling.exceptions import InvalidPOVM, NonOrthogonal
from coherent_sampling.povm import (
    FinitePOVM,
    FiniteSuperposition,
    born_distribution,
    check_mixture_bound,
    check_pinching,
    finite_model,
    random_instance,
    sample_exact,
)
from coherent_sampling.rejection import sample_many


def test_povm_validation():
    with pytest.raises(InvalidPOVM):
        FinitePOVM(np.array([[[1, 0], [0, 0]], [[0, 0], [0, 0.9]]]))
    with pytest.raises(InvalidPOVM):
        FinitePOVM(np.array([[[1, 1], [0, 0]], [[0, -1], [0, 1]]]))
    with pytest.raises(InvalidPOVM):
        FinitePOVM(np.array([[[1.5, 0], [0, 0.5]], [[-0.5, 0], [0, 0.5]]]))
    with pytest.raises(InvalidPOVM):
        FinitePOVM(np.eye(2))
    assert len(FinitePOVM.computational(3)) == 3


def test_superposition_validation():
    with pytest.raises(ValueError):
        FiniteSuperposition([[1, 1]], [1.0])
    with pytest.raises(ValueError):
        FiniteSuperposition([[1, 0], [0, 1]], [1.0, 1.0])
    with pytest.raises(ValueError):
        FiniteSuperposition([[1, 0]], [1.0, 0.0])


def test_born_distribution_computational_basis():
    sup = FiniteSuperposition([[1, 0, 0], [0, 0, 1]], [0.6, 0.8j])
    p = born_distribution(sup.state, FinitePOVM.computational(3))
    np.testing.assert_allclose(p, [0.36, 0.0, 0.64], atol=1e-15)
    assert sup.k_factor == pytest.approx(2.0)


def test_sample_exact_law():
    rng = np.random.default_rng(0)
    sup, povm = random_instance(4, 2, 5, rng)
    draws = sample_exact(sup.state, povm, rng, size=50_000)
    emp = np.bincount(draws, minlength=5) / draws.size
    assert 0.5 * np.abs(emp - born_distribution(sup.state, povm)).sum() < 0.01
    assert isinstance(sample_exact(sup.state, povm, rng), int)


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(2, 10), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_pinching_property(dim, seed, data):
    chi = data.draw(st.integers(1, dim))
    sup, _ = random_instance(dim, chi, 2, np.random.default_rng(seed), orthogonal=True)
    assert check_pinching(sup) >= -1e-9


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(2, 8), chi=st.integers(1, 4), m=st.integers(2, 8), seed=st.integers(0, 2**32 - 1))
def test_mixture_bound_property(dim, chi, m, seed):
    sup, povm = random_instance(dim, chi, m, np.random.default_rng(seed))
    assert check_mixture_bound(sup, povm) <= 1 + 1e-9


def test_pinching_rejects_non_orthogonal():
    sup, _ = random_instance(4, 3, 2, np.random.default_rng(0))
    with pytest.raises(NonOrthogonal):
        check_pinching(sup)


def test_pinching_is_tight_for_uniform_superposition():
    # equal-weight superposition of orthonormal vectors saturates rho <= chi * pinched(rho)
    chi = 4
    sup = FiniteSuperposition(np.eye(chi), np.full(chi, 0.5))
    assert check_pinching(sup) == pytest.approx(0.0, abs=1e-12)


def test_random_povm_is_valid():
    rng = np.random.default_rng(3)
    for _ in range(20):
        _, povm = random_instance(6, 2, 7, rng)
        assert np.abs(povm.effects.sum(axis=0) - np.eye(6)).max() <= 1e-10


def test_finite_model_samples_born_law():
    rng = np.random.default_rng(5)
    sup, povm = random_instance(6, 3, 6, rng)
    b = sample_many(finite_model(sup, povm), 100_000, seed=1)
    emp = np.bincount(b.samples, minlength=6) / 100_000
    assert 0.5 * np.abs(emp - born_distribution(sup.state, povm)).sum() < 0.01
