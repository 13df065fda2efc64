import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from groverdb import grover
from groverdb.statevec import (
    HermitianOperator,
    Povm,
    StateVector,
    apply,
    inner,
    inv_sqrt_expectation,
    inv_sqrt_on_support,
    is_unitary,
    sample,
    support_projector,
)


def random_state(rng, n):
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return StateVector(a / np.linalg.norm(a))


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return HermitianOperator(a @ a.conj().T)


def test_state_rejects_unnormalized():
    with pytest.raises(ValueError):
        StateVector([1.0, 1.0])
    assert StateVector.raw([1.0, 1.0]).dim == 2


def test_state_is_immutable():
    s = StateVector.basis(3, 0)
    with pytest.raises(ValueError):
        s.amps[0] = 2


def test_inner_basis():
    e0, e1 = StateVector.basis(4, 0), StateVector.basis(4, 1)
    assert inner(e0, e0) == 1
    assert inner(e0, e1) == 0
    # gamma_0 is the uniform state
    from groverdb.discrim import fourier_vector
    assert inner(fourier_vector(4, 0), StateVector.uniform(4)) == pytest.approx(1, abs=1e-12)


def test_inner_conjugate_linear():
    rng = np.random.default_rng(1)
    a, b = random_state(rng, 5), random_state(rng, 5)
    assert inner(a, b) == pytest.approx(np.conj(inner(b, a)))
    scaled = StateVector(1j * a.amps)
    assert inner(scaled, b) == pytest.approx(-1j * inner(a, b))


def test_inner_dim_mismatch():
    with pytest.raises(ValueError):
        inner(StateVector.basis(2, 0), StateVector.basis(3, 0))


def test_apply_examples():
    rng = np.random.default_rng(2)
    s = random_state(rng, 6)
    assert apply(np.eye(6), s).allclose(s)
    g = grover.diffusion_matrix(6)
    u = StateVector.uniform(6)
    assert apply(g, u).allclose(u)
    assert apply(g, apply(g, s)).allclose(s)
    assert apply(g, s).norm() == pytest.approx(1, abs=1e-10)
    with pytest.raises(ValueError):
        apply(np.eye(5), s)


def test_hermitian_check():
    with pytest.raises(ValueError):
        HermitianOperator([[0, 1], [0, 0]])


def test_inv_sqrt_examples():
    assert np.allclose(inv_sqrt_on_support(HermitianOperator(np.eye(3))).entries, np.eye(3))
    m = inv_sqrt_on_support(HermitianOperator(np.diag([4.0, 1.0])))
    assert np.allclose(m.entries, np.diag([0.5, 1.0]), atol=1e-15)


def test_inv_sqrt_rejects_indefinite():
    with pytest.raises(ValueError):
        inv_sqrt_on_support(HermitianOperator(np.diag([1.0, -0.5])))


def test_inv_sqrt_grover_gram_n100_m8():
    # Gram operator from brute-force states, no closed form involved.
    N, m = 100, 8
    psi = grover.run(grover.params(N), grover.MarkedSet(N, (0,)), m).amps
    states = np.stack([np.roll(psi, x) for x in range(N)], axis=1)
    omega = HermitianOperator(states @ states.conj().T)
    M = inv_sqrt_on_support(omega).entries
    assert np.max(np.abs(M @ omega.entries @ M - np.eye(N))) < 1e-8


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 128), seed=st.integers(0, 2**32 - 1), deficit=st.integers(0, 5))
def test_inv_sqrt_squared_times_op_is_support_projector(n, seed, deficit):
    rng = np.random.default_rng(seed)
    op = random_psd(rng, n, rank=max(1, n - deficit))
    M = inv_sqrt_on_support(op).entries
    P = support_projector(op)
    assert np.max(np.abs(M @ M @ op.entries - P)) < 1e-8
    assert np.max(np.abs(P @ P - P)) < 1e-10


@pytest.mark.parametrize("n", [1, 2, 7, 40])
def test_inv_sqrt_expectation_matches_dense(n):
    rng = np.random.default_rng(n)
    op = random_psd(rng, n)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    dense = np.vdot(v, inv_sqrt_on_support(op).entries @ v)
    got = inv_sqrt_expectation(lambda x: op.entries @ x, v)
    assert got == pytest.approx(dense, rel=1e-8)


def test_inv_sqrt_expectation_two_eigenvalues_closes_early():
    n = 50
    u = np.full(n, 1 / np.sqrt(n))
    op = 3.0 * np.outer(u, u) + 0.5 * (np.eye(n) - np.outer(u, u))
    calls = []

    def matvec(x):
        calls.append(1)
        return op @ x

    v = np.zeros(n)
    v[0] = 1.0
    got = inv_sqrt_expectation(matvec, v)
    expected = (1 / n) / np.sqrt(3.0) + (1 - 1 / n) / np.sqrt(0.5)
    assert got.real == pytest.approx(expected, rel=1e-12)
    assert len(calls) == 2


def test_povm_validation():
    Povm([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    with pytest.raises(ValueError):
        Povm([np.diag([1.0, 0.0])])
    with pytest.raises(ValueError):
        Povm([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])])
    Povm([np.diag([1.0, 0.0])], support=np.diag([1.0, 0.0]))


def test_rank_one_povm_effects():
    vecs = np.eye(3)
    povm = Povm.rank_one(vecs)
    assert len(povm) == 3
    assert np.allclose(povm.effects[1].entries, np.diag([0, 1, 0]))
    s = StateVector(np.array([0.6, 0.8, 0]))
    assert np.allclose(povm.probabilities(s), [0.36, 0.64, 0])


def test_sample_basis_state_is_deterministic():
    rng = np.random.default_rng(0)
    s = StateVector.basis(8, 3)
    assert all(sample(s, rng) == 3 for _ in range(200))


def test_sample_repeatable_given_seed():
    s = StateVector.uniform(16)
    a = [sample(s, np.random.default_rng(7)) for _ in range(5)]
    assert len(set(a)) == 1


def test_sample_uniform_frequencies():
    rng = np.random.default_rng(11)
    s = StateVector.uniform(4)
    counts = np.bincount([sample(s, rng) for _ in range(100_000)], minlength=4)
    assert np.all(np.abs(counts / 100_000 - 0.25) < 0.01)


def test_sample_grover_n4_single_step():
    p = grover.params(4)
    s = grover.run(p, grover.MarkedSet(4, (2,)), 1)
    rng = np.random.default_rng(3)
    assert all(sample(s, rng) == 2 for _ in range(500))


@pytest.mark.parametrize("n", [3, 9, 16])
def test_sample_chi_square(n):
    rng = np.random.default_rng(100 + n)
    s = random_state(rng, n)
    draws = 100_000
    counts = np.bincount([sample(s, rng) for _ in range(draws)], minlength=n)
    p = s.probabilities()
    assert stats.chisquare(counts, draws * p / p.sum()).pvalue > 0.001


def test_unitary_helper():
    assert is_unitary(grover.diffusion_matrix(5))
    assert not is_unitary(2 * np.eye(3))
