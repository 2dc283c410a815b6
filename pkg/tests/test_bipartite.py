import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import I2, X, Z, ket, random_density
from locc_qec.bipartite import (
    StateSet,
    from_operator,
    from_vector,
    max_entangled,
    partial_trace,
    partial_transpose,
    schmidt,
    schmidt_rank,
    simultaneous_schmidt_test,
    to_operator,
)
from locc_qec.errors import DimensionMismatch, NotNormalized
from locc_qec.linalg import random_state, random_unitary


def test_max_entangled_examples():
    assert np.allclose(max_entangled(2).vector, (ket(0, 0) + ket(1, 1)) / np.sqrt(2))
    assert np.allclose(max_entangled(1).vector, [1])
    v3 = sum(ket(i, i, dims=[3, 3]) for i in range(3)) / np.sqrt(3)
    assert np.allclose(max_entangled(3).vector, v3)
    assert np.allclose(max_entangled(3).op_form, np.eye(3))


def test_from_operator_examples():
    assert np.allclose(from_operator(X, 2, 2).vector, (ket(0, 1) + ket(1, 0)) / np.sqrt(2))
    assert np.allclose(from_operator(I2, 2, 2).vector, max_entangled(2).vector)
    b = np.sqrt(2) * np.diag([1, 0])
    assert np.allclose(from_operator(b, 2, 2).vector, ket(0, 0))


def test_from_operator_errors():
    with pytest.raises(NotNormalized):
        from_operator(2 * I2, 2, 2)
    with pytest.raises(DimensionMismatch):
        from_operator(np.eye(3), 2, 2)


def test_vector_operator_index_convention(rng):
    b = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    b *= np.sqrt(2) / np.linalg.norm(b)
    s = from_operator(b, 2, 3)
    for i in range(2):
        for j in range(3):
            assert s.vector[i * 3 + j] == pytest.approx(b[j, i] / np.sqrt(2))
    # (I (x) B)|Phi> directly
    phi = np.eye(2).reshape(-1) / np.sqrt(2)
    assert np.allclose(np.kron(np.eye(2), b) @ phi, s.vector)


def test_to_operator_examples():
    assert np.allclose(to_operator(max_entangled(2)), I2)
    s = from_vector((ket(0, 1) + ket(1, 0)) / np.sqrt(2), 2, 2)
    assert np.allclose(to_operator(s), X)


@settings(max_examples=50, deadline=None)
@given(a=st.integers(1, 4), b=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_duality_round_trip(a, b, seed):
    rng = np.random.default_rng(seed)
    v = random_state(a * b, rng)
    s = from_vector(v, a, b)
    back = from_operator(to_operator(s), a, b)
    assert np.linalg.norm(back.vector - v) <= 1e-12
    # Schmidt coefficients are the singular values of op_form / sqrt(a)
    c, _, _ = schmidt(s)
    sv = np.linalg.svd(s.op_form / np.sqrt(a), compute_uv=False)
    assert np.allclose(c, sv)


def test_schmidt_reconstruction(rng):
    s = from_vector(random_state(6, rng), 2, 3)
    c, u, v = schmidt(s)
    rebuilt = sum(c[k] * np.kron(u[:, k], v[:, k]) for k in range(len(c)))
    assert np.allclose(rebuilt, s.vector)


def test_schmidt_rank_examples():
    assert schmidt_rank(max_entangled(3)) == 3
    singlet = from_vector((ket(1, 0, dims=[3, 3]) - ket(0, 1, dims=[3, 3])) / np.sqrt(2), 3, 3)
    assert schmidt_rank(singlet) == 2
    assert schmidt_rank(from_vector(ket(0, 0), 2, 2)) == 1


def test_maximal_entanglement_criterion(rng):
    u = random_unitary(3, rng)
    s = from_operator(u, 3, 3)
    assert s.is_maximally_entangled()
    assert np.allclose(partial_trace(s.density, (3, 3), "B"), np.eye(3) / 3)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    g *= np.sqrt(3) / np.linalg.norm(g)
    s2 = from_operator(g, 3, 3)
    assert not s2.is_maximally_entangled()
    assert not np.allclose(partial_trace(s2.density, (3, 3), "B"), np.eye(3) / 3)


def test_partial_trace_examples(rng):
    phi = max_entangled(2).density
    assert np.allclose(partial_trace(phi, (2, 2), "B"), I2 / 2)
    rho = random_density(6, rng)
    for system in ("A", "B"):
        assert np.trace(partial_trace(rho, (2, 3), system)) == pytest.approx(1.0)
    a = random_density(2, rng)
    b = random_density(3, rng)
    assert np.allclose(partial_trace(np.kron(a, b), (2, 3), "B"), a)
    assert np.allclose(partial_trace(np.kron(a, b), (2, 3), "A"), b)
    with pytest.raises(DimensionMismatch):
        partial_trace(np.eye(5), (2, 3))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_partial_transpose_of_phi_is_swap(d):
    t = d * partial_transpose(max_entangled(d).density, (d, d), "B")
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1
    assert np.allclose(t, swap)
    assert np.allclose(np.sort(np.linalg.eigvalsh(t)), np.sort(np.linalg.eigvalsh(swap)))
    assert set(np.round(np.linalg.eigvalsh(t), 10)) == {-1.0, 1.0}


def test_partial_transpose_involution(rng):
    rho = random_density(6, rng)
    for system in ("A", "B"):
        assert np.allclose(partial_transpose(partial_transpose(rho, (2, 3), system), (2, 3), system), rho)


@pytest.mark.parametrize("d", [2, 3])
def test_partial_transpose_lemma(d, rng):
    t = partial_transpose(max_entangled(d).density, (d, d), "B")
    for _ in range(5):
        psi = random_state(d, rng)
        sigma = np.outer(psi, psi.conj())
        assert np.allclose(d * d * t @ np.kron(sigma, np.eye(d)) @ t, np.kron(np.eye(d), sigma), atol=1e-10)


def test_simultaneous_schmidt_examples(rng):
    res = simultaneous_schmidt_test([I2, X])
    assert res is not None
    for k, b in enumerate([I2, X]):
        assert np.allclose(res.u @ np.diag(res.diagonals[k]) @ res.v, b)
    assert simultaneous_schmidt_test([I2, Z, X]) is None
    u, v = random_unitary(3, rng), random_unitary(3, rng)
    ds = [rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(2)]
    ops = [u @ np.diag(d) @ v for d in ds]
    res = simultaneous_schmidt_test(ops)
    assert res is not None
    assert res.residual <= 1e-9
    for k in range(2):
        # diagonals recovered up to phase/permutation
        assert np.allclose(np.sort(np.abs(res.diagonals[k])), np.sort(np.abs(ds[k])))


def test_state_set_properties():
    s = StateSet.from_operators([I2, X])
    assert s.orthonormal and len(s) == 2 and s.dim_a == 2 and s.dim_b == 2
    assert np.allclose(s.gram(), np.eye(2))
    with pytest.raises(DimensionMismatch):
        StateSet([max_entangled(2), max_entangled(3)])
    assert not StateSet([max_entangled(2), max_entangled(2)]).orthonormal
