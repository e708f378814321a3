import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kron_oracle, ptrace_first_oracle, ptrace_second_oracle
from qdice import compose
from qdice.errors import DimensionError, LinearDependenceError
from qdice.linalg import embed, gram_schmidt, partial_trace, tensor_product, validate_density
from qdice.rand import complex_gaussian, random_density

SX = np.array([[0, 1], [1, 0]])
SZ = np.array([[1, 0], [0, -1]])


def test_identity_tensor_identity():
    assert np.array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))


def test_sz_tensor_sx_matches_index_oracle():
    got = tensor_product(SZ, SX)
    assert np.array_equal(got, kron_oracle(SZ, SX))
    z = np.zeros((2, 2))
    assert np.array_equal(got, np.block([[SX, z], [z, -SX]]))


def test_column_vectors_lexicographic():
    a = np.array([[1], [2]])
    b = np.array([[3], [5], [7]])
    got = tensor_product(a, b)
    assert got.shape == (6, 1)
    assert np.array_equal(got, kron_oracle(a, b))
    assert got.ravel().tolist() == [3, 5, 7, 6, 10, 14]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tensor_associative_and_trace_multiplicative(seed):
    rng = np.random.default_rng(seed)
    # gaussian-integer entries keep every product exact in floating point
    a, b, c = (rng.integers(-9, 10, (d, d)) + 1j * rng.integers(-9, 10, (d, d)) for d in (2, 3, 2))
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    assert np.array_equal(left, right)
    assert np.isclose(np.trace(tensor_product(a, b)), np.trace(a) * np.trace(b), atol=1e-12)


def test_partial_trace_of_product_returns_factor():
    ra, rb = random_density(2, 1), random_density(3, 2)
    space = compose([("A", 2), ("B", 3)])
    m = np.kron(ra, rb)
    assert np.allclose(partial_trace(m, space, {"B"}), ra, atol=1e-14)
    assert np.allclose(partial_trace(m, space, {"A"}), rb, atol=1e-14)


def test_partial_trace_bell_state_matches_double_sum_oracle():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    m = np.outer(v, v.conj())
    space = compose([("A", 2), ("B", 2)])
    got = partial_trace(m, space, {"B"})
    assert np.allclose(got, ptrace_second_oracle(m, 2, 2), atol=1e-15)
    assert np.allclose(got, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_subject_factor_unchanged_alternative():
    rs, ra = random_density(2, 3), random_density(3, 4)
    space = compose([("S", 2), ("A", 3)])
    assert np.allclose(partial_trace(np.kron(rs, ra), space, "S"), ra, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_partial_trace_random_against_oracles(seed):
    m = random_density(6, seed)
    space = compose([("A", 2), ("B", 3)])
    assert np.allclose(partial_trace(m, space, {"B"}), ptrace_second_oracle(m, 2, 3), atol=1e-14)
    assert np.allclose(partial_trace(m, space, {"A"}), ptrace_first_oracle(m, 2, 3), atol=1e-14)
    assert np.isclose(np.trace(partial_trace(m, space, {"A"})), np.trace(m), atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_partial_trace_composes(seed):
    m = random_density(12, seed)
    space = compose([("S", 2), ("A", 3), ("B", 2)])
    once = partial_trace(m, space, {"S", "B"})
    step = partial_trace(m, space, {"S"})
    twice = partial_trace(step, space.subspace(["A", "B"]), {"B"})
    assert np.max(np.abs(once - twice)) <= 1e-12


def test_partial_trace_middle_factor_keeps_order():
    a, b, c = random_density(2, 1), random_density(3, 2), random_density(2, 3)
    space = compose([("S", 2), ("A", 3), ("B", 2)])
    got = partial_trace(np.kron(np.kron(a, b), c), space, {"A"})
    assert np.allclose(got, np.kron(a, c), atol=1e-14)


def test_partial_trace_errors():
    space = compose([("A", 2), ("B", 2)])
    with pytest.raises(DimensionError):
        partial_trace(np.eye(3), space, {"A"})
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), space, {"A", "B"})
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), space, set())
    with pytest.raises(KeyError):
        partial_trace(np.eye(4), space, {"C"})


def test_gram_schmidt_orthonormal_input_unchanged():
    out = gram_schmidt([[1, 0], [0, 1]])
    assert np.allclose(out, np.eye(2))


def test_gram_schmidt_hand_example():
    out = gram_schmidt([[1, 0], [1, 1]])
    assert np.allclose(out[0], [1, 0]) and np.allclose(out[1], [0, 1])
    g = np.array(out)
    assert np.allclose(g.conj() @ g.T, np.eye(2), atol=1e-12)


def test_gram_schmidt_rejects_dependent_vectors_with_index():
    v = np.array([1, 1, 0]) / np.sqrt(2)
    with pytest.raises(LinearDependenceError) as exc:
        gram_schmidt([v, v * (1 + 0.0)])
    assert exc.value.index == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_gram_schmidt_unitary_and_first_parallel(seed, k):
    rng = np.random.default_rng(seed)
    vecs = complex_gaussian((k, 6), rng)
    out = np.array(gram_schmidt(vecs)).T
    assert np.max(np.abs(out.conj().T @ out - np.eye(k))) <= 1e-10
    first = vecs[0] / np.linalg.norm(vecs[0])
    assert np.isclose(abs(np.vdot(first, out[:, 0])), 1.0, atol=1e-12)
    # same span: every input is reproduced by its projection onto the output
    proj = out @ out.conj().T
    assert np.allclose(proj @ vecs.T, vecs.T, atol=1e-10)


def test_validate_density_examples():
    assert validate_density(np.eye(2) / 2).ok
    assert validate_density(np.diag([1, 0])).ok
    rep = validate_density(np.diag([0.6, 0.6]))
    assert rep.hermitian and rep.psd and not rep.trace_one


def test_validate_density_flags_non_hermitian_and_negative():
    rep = validate_density(np.array([[0.5, 1], [0, 0.5]]))
    assert not rep.hermitian
    rep = validate_density(np.diag([1.5, -0.5]))
    assert not rep.psd and rep.trace_one


def test_embed_places_operator_on_factor():
    space = compose([("S", 2), ("A", 3)])
    op = np.arange(9).reshape(3, 3)
    assert np.array_equal(embed(op, space, "A"), np.kron(np.eye(2), op))
    with pytest.raises(DimensionError):
        embed(np.eye(2), space, "A")
