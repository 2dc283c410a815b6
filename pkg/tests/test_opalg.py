import numpy as np
import pytest

from conftest import I2, X, Y, Z
from locc_qec.errors import NotClosed, NotSquareBlocks
from locc_qec.fixtures import qutrit_example
from locc_qec.linalg import random_unitary
from locc_qec.opalg import (
    AlgebraStructure,
    canonical_algebra,
    closure_residual,
    constant_diagonal_unitary,
    find_separating_vector,
    generated_algebra,
    has_separating_vector,
    is_multiplicatively_closed,
    operator_span,
    operator_system_S0,
    separating_rank,
    uniform_block_vectors,
    wedderburn_structure,
    x_subspace,
)
from locc_qec.stabilizer import logical_pauli_set, pauli_span


def _rotated(blocks, rng):
    alg = canonical_algebra(blocks)
    u = random_unitary(alg.ambient_dim, rng)
    return operator_span(u[None] @ alg.basis @ u.conj().T[None]), u


def _random_structure(rng, budget=16):
    blocks = []
    while True:
        m, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        if sum(a * b for a, b in blocks) + m * n > budget:
            return blocks or [(m, n)]
        blocks.append((m, n))
        if rng.random() < 0.4:
            return blocks


def test_s0_examples():
    s = operator_system_S0([I2, X])
    assert s.dim == 2 and s.contains(X) and s.contains(I2)
    assert operator_system_S0([I2, X, Y, Z]).dim == 4


def test_x_subspace_examples():
    assert x_subspace([np.eye(3)]).dim == 1
    # two maximally entangled members: B1^+ B1 = B2^+ B2 = I
    rng = np.random.default_rng(5)
    ops = [np.eye(3), random_unitary(3, rng) * 1.0, rng.standard_normal((3, 3))]
    assert x_subspace(ops).dim < 9


def test_qutrit_x_subspace_structure():
    # diagonal products give diag(1, 1, 1), diag(1, w, w^2), its conjugate and
    # |0><0| + |1><1|, spanning all diagonals; the products with B3 only touch
    # |0><1| and |1><0|.  So X = diagonals (+) span{E01, E10}.
    ops = qutrit_example().ops
    x = x_subspace(ops)
    e = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            e[i, j, i, j] = 1
    expected = [e[0, 0], e[1, 1], e[2, 2], e[0, 1], e[1, 0]]
    assert x.dim == 5
    assert np.all(x.residual(expected) <= 1e-10)
    assert operator_system_S0(ops).dim <= x.dim


def test_closure_examples():
    assert is_multiplicatively_closed(operator_span([I2, X]))
    ixz = operator_span([I2, X, Z])
    assert not is_multiplicatively_closed(ixz)
    xz = X @ Z / np.linalg.norm(X @ Z)
    assert ixz.residual([xz])[0] == pytest.approx(1.0, abs=1e-8)
    # basis elements have unit norm, so their product XZ/2 is off by 1/sqrt2
    assert closure_residual(ixz) == pytest.approx(1 / np.sqrt(2), abs=1e-8)
    for n, k in [(2, 1), (3, 1), (3, 2)]:
        span = pauli_span(logical_pauli_set(n, k), n)
        assert is_multiplicatively_closed(span)


def test_generated_algebra_examples():
    ix = operator_span([I2, X])
    assert generated_algebra(ix).dim == 2
    assert generated_algebra(operator_span([I2, X, Z])).dim == 4
    z1 = np.kron(Z, I2)
    z2 = np.kron(I2, Z)
    diag = generated_algebra(operator_span([z1, z2]))
    assert diag.dim == 4 and diag.contains(np.kron(Z, Z)) and diag.contains(np.eye(4))


def test_generated_algebra_idempotent(rng):
    for _ in range(5):
        mats = [rng.standard_normal((4, 4)) * (rng.random((4, 4)) < 0.3) for _ in range(2)]
        s = operator_span(mats)
        g = generated_algebra(s)
        assert g.dim >= s.dim
        assert np.all(g.residual(s.basis) <= 1e-8)
        assert generated_algebra(g).dim == g.dim
        assert is_multiplicatively_closed(g)


def test_wedderburn_examples():
    assert wedderburn_structure(operator_span([I2, X, Y, Z])).blocks == [(2, 1)]
    assert wedderburn_structure(pauli_span(logical_pauli_set(2, 1), 2)).blocks == [(2, 2)]
    diag = operator_span([np.diag(v) for v in np.eye(3)])
    assert wedderburn_structure(diag).blocks == [(1, 1)] * 3


def test_wedderburn_rejects_non_algebra():
    with pytest.raises(NotClosed):
        wedderburn_structure(operator_span([I2, X, Z]))


def test_wedderburn_round_trip(rng):
    for _ in range(10):
        blocks = _random_structure(rng)
        alg, _ = _rotated(blocks, rng)
        st = wedderburn_structure(alg, seed=int(rng.integers(1000)))
        assert st.multiset() == sorted(blocks)
        assert st.algebra_dim == alg.dim
        # W^+ A W lies in the canonical algebra of the recovered blocks
        w = st.unitary
        assert np.allclose(w.conj().T @ w, np.eye(alg.ambient_dim), atol=1e-10)
        canon = canonical_algebra(st.blocks)
        back = w.conj().T[None] @ alg.basis @ w[None]
        assert np.max(canon.residual(back)) <= 1e-8


def test_wedderburn_partial_support(rng):
    pad = np.zeros((2, 3, 3), dtype=complex)
    pad[:, :2, :2] = np.asarray([I2, X])
    st = wedderburn_structure(operator_span(pad))
    assert st.blocks == [(1, 1), (1, 1)] and st.support_dim == 2


def test_has_separating_vector_examples():
    assert has_separating_vector(AlgebraStructure([(2, 2)]))
    assert not has_separating_vector(AlgebraStructure([(2, 1)]))
    assert has_separating_vector(AlgebraStructure([(1, 1), (3, 5)]))


def test_find_separating_vector_examples():
    ix = operator_span([I2, X])
    assert separating_rank(ix, [1, 0]) == 2
    assert separating_rank(ix, np.array([1, 1]) / np.sqrt(2)) == 1
    assert find_separating_vector(ix) is not None
    assert find_separating_vector(operator_span([I2, X, Y, Z])) is None
    m2i2 = canonical_algebra([(2, 2)])
    phi = np.eye(2).reshape(-1) / np.sqrt(2)
    assert separating_rank(m2i2, phi) == 4
    psi = find_separating_vector(m2i2)
    assert psi is not None and separating_rank(m2i2, psi) == 4


def test_separating_vector_consistency(rng):
    for _ in range(10):
        blocks = _random_structure(rng, budget=12)
        alg, _ = _rotated(blocks, rng)
        st = wedderburn_structure(alg)
        psi = find_separating_vector(alg, seed=int(rng.integers(1000)))
        assert (psi is not None) == has_separating_vector(st)


def test_uniform_block_vectors():
    for m, n in [(1, 1), (2, 2), (2, 3), (3, 3), (2, 5)]:
        v = uniform_block_vectors(m, n)
        assert np.allclose(v.conj().T @ v, np.eye(m * n))
        for col in v.T:
            t = col.reshape(m, n)
            assert np.allclose(t @ t.conj().T, np.eye(m) / m)
    with pytest.raises(NotSquareBlocks):
        uniform_block_vectors(3, 2)


def test_constant_diagonal_examples(rng):
    assert np.allclose(constant_diagonal_unitary(AlgebraStructure([(1, 1)])), [[1]])
    u = constant_diagonal_unitary(AlgebraStructure([(2, 2)]))
    bell = np.array([[1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0]]) / np.sqrt(2)
    # every row is a Bell vector up to phase
    assert np.allclose(np.max(np.abs(u @ bell.T), axis=1), 1)
    for _ in range(20):
        a = np.kron(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)), I2)
        d = np.diag(u @ a @ u.conj().T)
        assert np.allclose(d, np.trace(a) / 4, atol=1e-12)


@pytest.mark.parametrize("blocks", [[(2, 2)], [(3, 3)], [(1, 1)] * 3, [(2, 2)] * 2, [(2, 3)], [(1, 2)] * 2])
def test_constant_diagonal_on_canonical_algebra(blocks):
    u = constant_diagonal_unitary(AlgebraStructure(blocks))
    alg = canonical_algebra(blocks)
    r = alg.ambient_dim
    assert np.allclose(u @ u.conj().T, np.eye(r))
    for e in alg.basis:
        d = np.diag(u @ e @ u.conj().T)
        assert np.allclose(d, np.trace(e) / r, atol=1e-12)
    psi = u.conj().T[:, 0]
    assert separating_rank(alg, psi) == alg.dim


def test_constant_diagonal_rejects():
    with pytest.raises(NotSquareBlocks):
        constant_diagonal_unitary(AlgebraStructure([(2, 1)]))
    with pytest.raises(NotSquareBlocks):
        constant_diagonal_unitary(AlgebraStructure([(1, 1), (2, 2)]))
