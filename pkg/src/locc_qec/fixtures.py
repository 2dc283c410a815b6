"""Standard instances: Bell pair, qutrit example, teleportation, Watrous-type code."""

from __future__ import annotations

import numpy as np

from .bipartite import BipartiteState, StateSet, max_entangled
from .channels import KrausChannel, Povm, extend_with_identity, qc_channel_from_povm
from .qec import CodeSpace

__all__ = [
    "pauli_x",
    "pauli_z",
    "bell_pair",
    "bell_noise",
    "qutrit_example",
    "qutrit_reference_alice_basis",
    "qutrit_reference_coefficients",
    "qutrit_reference_kernel_element",
    "clock_shift",
    "generalized_bell_ops",
    "teleportation_fixture",
    "complement_code",
    "complement_states",
    "watrous_code",
]

OMEGA3 = np.exp(2j * np.pi / 3)


def pauli_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def pauli_z() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=np.complex128)


def bell_pair() -> StateSet:
    """``(|00> + |11>)/sqrt2`` and ``(|01> + |10>)/sqrt2``, i.e. ``B in {I, X}``."""
    return StateSet.from_operators([np.eye(2), pauli_x()])


def bell_noise() -> KrausChannel:
    """Computational-basis measurement on A: Kraus ``|0><0| (x) I``, ``|1><1| (x) I``."""
    return extend_with_identity(qc_channel_from_povm(Povm.from_basis(np.eye(2))), 2)


def qutrit_example() -> StateSet:
    """``Phi_1 = sum|ii>/sqrt3``, ``Phi_2 = sum w^i |ii>/sqrt3``, ``Phi_3 = (|10> - |01>)/sqrt2``."""
    b3 = np.zeros((3, 3), dtype=np.complex128)
    # vector[i*3 + j] = B[j, i]/sqrt3, so |10> sits at B[0, 1]
    b3[0, 1] = np.sqrt(1.5)
    b3[1, 0] = -np.sqrt(1.5)
    return StateSet.from_operators([np.eye(3), np.diag([1, OMEGA3, OMEGA3 ** 2]), b3])


def qutrit_reference_kernel_element() -> np.ndarray:
    m = np.zeros((3, 3), dtype=np.complex128)
    m[0, 2] = m[2, 0] = 1.0
    return m


def qutrit_reference_alice_basis() -> np.ndarray:
    return np.column_stack([[1, 0, 1], [1, 0, -1], [0, np.sqrt(2), 0]]).astype(np.complex128) / np.sqrt(2)


def qutrit_reference_coefficients() -> np.ndarray:
    """Columns ``c^(k)`` of the reference common eigenbasis, normalised."""
    w2 = OMEGA3 ** 2
    c = np.column_stack([[1, w2, 0], [1, -w2, 0], [0, 0, np.sqrt(2)]]).astype(np.complex128)
    return c / np.sqrt(2)


def clock_shift(n: int):
    """Shift ``X|j> = |j+1>`` and clock ``Z|j> = w^j |j>`` on ``C^n``."""
    x = np.roll(np.eye(n), 1, axis=0).astype(np.complex128)
    z = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    return x, z


def generalized_bell_ops(n: int) -> list:
    """``X^i Z^j`` for ``i, j`` in ``Z_n``, ordered by ``(i, j)``."""
    x, z = clock_shift(n)
    return [np.linalg.matrix_power(x, i) @ np.linalg.matrix_power(z, j) for i in range(n) for j in range(n)]


def teleportation_fixture(n: int):
    """States ``|Phi> (x) |phi_ij>`` written with ``a = b = n^2``.

    Returns ``(states, alice_basis)``.  System A is ``A1 A2`` and B is
    ``B1 B2``; ``B = I (x) X^i Z^j`` in the ``(A1 A2) -> (B1 B2)`` operator
    form, and Alice measures ``A1 A2`` in the generalised Bell basis.
    """
    ops = [np.kron(np.eye(n), p) for p in generalized_bell_ops(n)]
    states = StateSet.from_operators(ops)
    phi = np.eye(n).reshape(-1) / np.sqrt(n)
    basis = np.column_stack([np.kron(np.eye(n), p) @ phi for p in generalized_bell_ops(n)])
    return states, basis


def complement_code(phi: BipartiteState) -> CodeSpace:
    """Orthogonal complement of ``phi`` in ``C^a (x) C^b``."""
    v = phi.vector.reshape(-1, 1)
    u, _, _ = np.linalg.svd(v, full_matrices=True)
    return CodeSpace(v.shape[0], u[:, 1:])


def complement_states(phi: BipartiteState) -> StateSet:
    from .bipartite import from_vector

    code = complement_code(phi)
    return StateSet([from_vector(code.basis[:, k], phi.dim_a, phi.dim_b) for k in range(code.dim)])


def watrous_code(d: int = 3) -> CodeSpace:
    """Complement of the maximally entangled state on ``C^d (x) C^d``."""
    return complement_code(max_entangled(d))
