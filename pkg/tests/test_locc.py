import numpy as np
import pytest

from conftest import I2, X, Y, Z, simultaneous_schmidt_triple, two_max_entangled_triple
from locc_qec.bipartite import StateSet, from_vector, max_entangled
from locc_qec.errors import (
    DimensionMismatch,
    NotNormalized,
    RankOneRequired,
    StrictSubspaceRequired,
)
from locc_qec.fixtures import (
    bell_pair,
    qutrit_example,
    qutrit_reference_alice_basis,
    qutrit_reference_coefficients,
    qutrit_reference_kernel_element,
    watrous_code,
)
from locc_qec.linalg import random_unitary
from locc_qec.locc import (
    Status,
    build_psi_map,
    cross_block_norm,
    find_distinguishable_basis_3d,
    king_search,
    necessary_commute_test,
    normalised_bob_bases,
    oneway_algebra_test,
    rotate_states,
    schmidt_rank_obstruction,
    sym_antisym_obstruction,
    verify_protocol,
)
from locc_qec.opalg import x_subspace
from locc_qec.qec import CodeSpace
from locc_qec.stabilizer import logical_pauli_set, states_from_paulis


def _match_up_to_phase(u, v):
    """Largest deviation of ``|<u_k|v_pi(k)>|`` from 1 under greedy matching."""
    ov = np.abs(u.conj().T @ v)
    return float(np.max(1 - np.max(ov, axis=1)))


def test_oneway_bell_pair():
    v = oneway_algebra_test(bell_pair())
    assert v.status is Status.DISTINGUISHABLE
    assert verify_protocol(bell_pair(), v.witness.alice_basis, v.witness.bob_bases) <= 1e-8


def test_oneway_full_pauli_set():
    v = oneway_algebra_test(StateSet.from_operators([I2, X, Y, Z]))
    assert v.status is Status.NOT_DISTINGUISHABLE
    assert v.certificate["structure"] == [[2, 1]]
    assert v.witness is None


def test_oneway_stabilizer_set():
    s = states_from_paulis(logical_pauli_set(2, 1))
    v = oneway_algebra_test(s)
    assert v.status is Status.DISTINGUISHABLE
    assert v.certificate["structure"] == [[2, 2]]
    assert verify_protocol(s, v.witness.alice_basis, v.witness.bob_bases) <= 1e-8


def test_oneway_qutrit_set_itself():
    # I, D, D^* span the diagonals and the B3 products add E01, E10, so
    # S0 = M_2 (+) M_1 acting on span{|0>, |1>} (+) span{|2>}
    v = oneway_algebra_test(qutrit_example())
    assert v.status is Status.NOT_DISTINGUISHABLE
    assert v.certificate["structure"] == [[1, 1], [2, 1]]


def test_oneway_inconclusive_when_not_closed():
    rng = np.random.default_rng(3)
    u = random_unitary(9, rng)
    s = StateSet([from_vector(u[:, k], 3, 3) for k in range(3)])
    v = oneway_algebra_test(s)
    assert v.status is Status.INCONCLUSIVE
    assert v.certificate["closure_residual"] > 1e-3


def test_oneway_requires_orthonormal():
    with pytest.raises(NotNormalized):
        oneway_algebra_test(StateSet.from_operators([I2, I2]))


def test_oneway_seed_determinism():
    s = states_from_paulis(logical_pauli_set(2, 1))
    a, b = oneway_algebra_test(s, seed=7), oneway_algebra_test(s, seed=7)
    assert np.array_equal(a.witness.alice_basis, b.witness.alice_basis)


def test_psi_map_examples():
    ops = qutrit_example().ops
    psi = build_psi_map(ops)
    assert psi.unital and psi.unital_residual <= 1e-12
    assert np.linalg.norm(psi(qutrit_reference_kernel_element())) <= 1e-10


def test_psi_map_bell_by_hand(rng):
    psi = build_psi_map([I2, X])
    for _ in range(10):
        tau = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        # entries: Tr(tau^T B_i^+ B_j)/2 with B_1^+B_2 = B_2^+B_1 = X
        t = tau.T
        expected = 0.5 * np.array([[np.trace(t), np.trace(t @ X)], [np.trace(t @ X), np.trace(t)]])
        assert np.allclose(psi(tau), expected)


def test_psi_map_matches_entrywise(rng):
    for ops in (qutrit_example().ops, simultaneous_schmidt_triple(rng)):
        psi = build_psi_map(ops)
        for _ in range(100):
            tau = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            entry = np.array([[np.trace(tau.T @ bi.conj().T @ bj) / 3 for bj in ops] for bi in ops])
            assert np.allclose(psi(tau), entry, atol=1e-12)


def test_psi_map_unital_for_orthonormal_families(rng):
    for _ in range(5):
        u = random_unitary(9, rng)
        s = StateSet([from_vector(u[:, k], 3, 3) for k in range(3)])
        assert build_psi_map(s.ops).unital


def test_qutrit_basis():
    ops = qutrit_example().ops
    w = find_distinguishable_basis_3d(ops)
    s = qutrit_example()
    rotated = w.states_for(s)
    assert verify_protocol(rotated, w.alice_basis, w.bob_bases) <= 1e-8
    assert _match_up_to_phase(w.alice_basis, qutrit_reference_alice_basis()) <= 1e-8
    assert _match_up_to_phase(w.coefficients, qutrit_reference_coefficients()) <= 1e-8


def test_reference_protocol_verifies():
    s = rotate_states(qutrit_example(), qutrit_reference_coefficients())
    alice = qutrit_reference_alice_basis()
    assert verify_protocol(s, alice, normalised_bob_bases(s.ops, alice)) <= 1e-10


def test_basis_finder_two_max_entangled(rng):
    for _ in range(10):
        ops = two_max_entangled_triple(rng)
        assert x_subspace(ops).dim < 9
        w = find_distinguishable_basis_3d(ops, seed=int(rng.integers(100)))
        s = w.states_for(StateSet.from_operators(ops))
        assert verify_protocol(s, w.alice_basis, w.bob_bases) <= 1e-8


def test_basis_finder_simultaneous_schmidt(rng):
    for _ in range(10):
        ops = simultaneous_schmidt_triple(rng)
        w = find_distinguishable_basis_3d(ops)
        s = w.states_for(StateSet.from_operators(ops))
        assert verify_protocol(s, w.alice_basis, w.bob_bases) <= 1e-8


def test_basis_finder_errors(rng):
    u = random_unitary(9, rng)
    s = StateSet([from_vector(u[:, k], 3, 3) for k in range(3)])
    with pytest.raises(StrictSubspaceRequired):
        find_distinguishable_basis_3d(s.ops)
    with pytest.raises(DimensionMismatch):
        find_distinguishable_basis_3d([I2, X])
    with pytest.raises(NotNormalized):
        find_distinguishable_basis_3d([np.eye(3)] * 3)


def test_schmidt_rank_obstruction_examples():
    v = schmidt_rank_obstruction(max_entangled(3))
    assert v.status is Status.NOT_DISTINGUISHABLE and v.certificate["schmidt_rank"] == 3
    e0 = np.eye(3)[0]
    assert schmidt_rank_obstruction(from_vector(np.kron(e0, e0), 3, 3)).status is Status.INCONCLUSIVE
    phi = (np.kron(e0, e0) + np.kron(np.eye(3)[1], np.eye(3)[1])) / np.sqrt(2)
    v = schmidt_rank_obstruction(from_vector(phi, 3, 3))
    assert v.status is Status.INCONCLUSIVE and v.certificate["schmidt_rank"] == 2


def test_sym_antisym_examples(rng):
    # sigma = |0><0| on C^2: (sigma (x) I) mixes |01> +- |10> with weight 1/2 each
    assert cross_block_norm(np.diag([1.0, 0.0])) == pytest.approx(1 / np.sqrt(2))
    sigmas = []
    for _ in range(50):
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v /= np.linalg.norm(v)
        sigmas.append(np.outer(v, v.conj()))
    holds, m = sym_antisym_obstruction(3, sigmas)
    assert holds and m > 0.1
    assert cross_block_norm(np.eye(2) / 2) <= 1e-12
    with pytest.raises(RankOneRequired):
        sym_antisym_obstruction(2, [np.eye(2) / 2])


def test_sym_antisym_closed_form(rng):
    # for a pure sigma the cross-block norm is sqrt(2d - 2)/2, independent of sigma
    for d in (2, 3, 4, 5):
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        v /= np.linalg.norm(v)
        assert cross_block_norm(np.outer(v, v.conj())) == pytest.approx(np.sqrt(2 * d - 2) / 2)


def test_necessary_commute_examples():
    ok, worst = necessary_commute_test(CodeSpace.from_states(bell_pair()), np.eye(2))
    assert ok and worst <= 1e-12
    ok, worst = necessary_commute_test(watrous_code(3), np.eye(3))
    assert not ok and worst > 0.01
    code = CodeSpace(4, np.eye(4)[:, :2])
    assert necessary_commute_test(code, np.eye(1), dim_b=4)[0]
    with pytest.raises(DimensionMismatch):
        necessary_commute_test(code, np.eye(3))


def test_verify_protocol_examples():
    assert verify_protocol(bell_pair(), np.eye(2)) == pytest.approx(0.0, abs=1e-15)
    bob = normalised_bob_bases(bell_pair().ops, np.eye(2))
    assert verify_protocol(bell_pair(), np.eye(2), bob) <= 1e-15
    scrambled = [b[:, ::-1] for b in bob]
    assert verify_protocol(bell_pair(), np.eye(2), scrambled) > 0.5
    with pytest.raises(DimensionMismatch):
        verify_protocol(bell_pair(), np.eye(3))


def test_verify_protocol_rejects_bad_alice_basis():
    had = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert verify_protocol(bell_pair(), had) > 0.5


def test_king_search_seeded():
    code = CodeSpace.from_states(qutrit_example())
    res = king_search(code)
    assert res.found and res.seeded


def test_king_search_simultaneous_schmidt(rng):
    ops = simultaneous_schmidt_triple(rng)
    res = king_search(CodeSpace.from_states(StateSet.from_operators(ops)))
    assert res.found


def test_king_search_random_logs_minima(rng):
    u = random_unitary(9, rng)
    res = king_search(CodeSpace(9, u[:, :3]), attempts=2, seed=1)
    assert len(res.minima) == 2
    assert res.min_norm == pytest.approx(min(res.minima))
