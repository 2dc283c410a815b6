"""Bipartite pure states and their operator form.

A state on ``C^a (x) C^b`` is identified with the ``b x a`` operator ``B``
through ``|phi> = (I (x) B)|Phi>``, where ``|Phi> = a^{-1/2} sum_i |ii>`` is
the canonical maximally entangled state on ``C^a (x) C^a``.  With the
row-major Kronecker convention this reads

    vector[i * b + j] = B[j, i] / sqrt(a)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotNormalized
from .linalg import as_matrix, as_tolerance, dagger, fix_phase, svd

__all__ = [
    "BipartiteState",
    "StateSet",
    "max_entangled",
    "from_operator",
    "from_vector",
    "to_operator",
    "schmidt",
    "schmidt_rank",
    "partial_trace",
    "partial_transpose",
    "simultaneous_schmidt_test",
    "SimultaneousSchmidt",
]


@dataclass(eq=False)
class BipartiteState:
    dim_a: int
    dim_b: int
    vector: np.ndarray
    op_form: np.ndarray

    @property
    def density(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def is_maximally_entangled(self, tol=None) -> bool:
        tol = as_tolerance(tol)
        g = dagger(self.op_form) @ self.op_form
        return tol.close(g, np.eye(self.dim_a))


@dataclass(eq=False)
class StateSet:
    """A nonempty list of states sharing their dimensions."""

    states: list
    orthonormal: bool = field(default=False)

    def __post_init__(self):
        if not self.states:
            raise ValueError("a state set needs at least one state")
        a, b = self.states[0].dim_a, self.states[0].dim_b
        for s in self.states:
            if (s.dim_a, s.dim_b) != (a, b):
                raise DimensionMismatch("states in a set must share dimensions")
        self.orthonormal = self.check_orthonormal()

    @classmethod
    def from_operators(cls, ops: Sequence, dim_a: int | None = None, dim_b: int | None = None, tol=None):
        ops = [as_matrix(b) for b in ops]
        b, a = ops[0].shape
        return cls([from_operator(op, dim_a or a, dim_b or b, tol) for op in ops])

    @property
    def dim_a(self) -> int:
        return self.states[0].dim_a

    @property
    def dim_b(self) -> int:
        return self.states[0].dim_b

    @property
    def ops(self) -> list[np.ndarray]:
        return [s.op_form for s in self.states]

    def vectors(self) -> np.ndarray:
        """States as the columns of a ``(a*b) x d`` matrix."""
        return np.column_stack([s.vector for s in self.states])

    def gram(self) -> np.ndarray:
        v = self.vectors()
        return dagger(v) @ v

    def check_orthonormal(self, tol=None) -> bool:
        return as_tolerance(tol).close(self.gram(), np.eye(len(self.states)))

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]


def max_entangled(a: int) -> BipartiteState:
    if a < 1:
        raise ValueError("dimension must be positive")
    return from_operator(np.eye(a), a, a)


def from_operator(b_op, a: int | None = None, b: int | None = None, tol=None) -> BipartiteState:
    """State ``(I (x) B)|Phi>`` for a ``b x a`` operator with ``Tr(B^+ B) = a``."""
    tol = as_tolerance(tol)
    op = as_matrix(b_op)
    bb, aa = op.shape
    a = aa if a is None else a
    b = bb if b is None else b
    if op.shape != (b, a):
        raise DimensionMismatch(f"operator must be {b}x{a}, got {op.shape[0]}x{op.shape[1]}")
    norm2 = float(np.real(np.trace(dagger(op) @ op)))
    if not tol.is_zero(abs(norm2 - a), a):
        raise NotNormalized(f"Tr(B^+ B) = {norm2:.12g}, expected {a}")
    vec = op.T.reshape(-1) / np.sqrt(a)
    return BipartiteState(a, b, vec, op)


def from_vector(vec, a: int, b: int, tol=None) -> BipartiteState:
    tol = as_tolerance(tol)
    v = np.asarray(vec, dtype=np.complex128).ravel()
    if v.size != a * b:
        raise DimensionMismatch(f"vector has length {v.size}, expected {a * b}")
    if not tol.is_zero(abs(np.linalg.norm(v) - 1.0), 1.0):
        raise NotNormalized(f"state vector has norm {np.linalg.norm(v):.12g}")
    op = np.sqrt(a) * v.reshape(a, b).T
    return BipartiteState(a, b, v, op)


def to_operator(s: BipartiteState) -> np.ndarray:
    return np.sqrt(s.dim_a) * s.vector.reshape(s.dim_a, s.dim_b).T


def schmidt(s: BipartiteState):
    """Schmidt decomposition ``s = sum_k c_k |u_k>|v_k>``.

    Returns ``(coefficients, A-vectors, B-vectors)``; vectors are columns and
    coefficients are non-negative and descending.
    """
    m = s.vector.reshape(s.dim_a, s.dim_b)
    u, c, v = svd(m)
    k = len(c)
    # m = U diag(c) V^+ so the B-side vectors are conj(V) columns
    return c, u[:, :k], np.conj(v[:, :k])


def schmidt_rank(s: BipartiteState, tol=None) -> int:
    tol = as_tolerance(tol)
    c, _, _ = schmidt(s)
    return int(np.sum(c > tol.threshold(c[0] if c.size else 0.0)))


def _split_dims(rho, dims):
    a, b = dims
    rho = as_matrix(rho)
    if rho.shape != (a * b, a * b):
        raise DimensionMismatch(f"operator of shape {rho.shape} does not match dims {dims}")
    return rho.reshape(a, b, a, b)


def _which(system) -> int:
    if system in (0, "A", "a"):
        return 0
    if system in (1, "B", "b"):
        return 1
    raise ValueError(f"unknown subsystem {system!r}")


def partial_trace(rho, dims: tuple[int, int], system="B") -> np.ndarray:
    """Trace out ``system`` ('A' or 'B') of an operator on ``C^a (x) C^b``."""
    t = _split_dims(rho, dims)
    if _which(system) == 1:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def partial_transpose(rho, dims: tuple[int, int], system="B") -> np.ndarray:
    t = _split_dims(rho, dims)
    a, b = dims
    if _which(system) == 1:
        out = t.transpose(0, 3, 2, 1)
    else:
        out = t.transpose(2, 1, 0, 3)
    return out.reshape(a * b, a * b)


@dataclass(eq=False)
class SimultaneousSchmidt:
    """``B_k = U diag(diagonals[k]) V`` for every operator in the family."""

    u: np.ndarray
    v: np.ndarray
    diagonals: list
    residual: float


def simultaneous_schmidt_test(ops: Sequence, tol=None) -> SimultaneousSchmidt | None:
    """Look for unitaries ``U, V`` with every ``B_k = U D_k V`` diagonal-sandwiched.

    ``B_k = U D_k V`` forces the products ``B_i^+ B_j`` to be a commuting
    family of normal matrices jointly diagonalised by ``V^+``.  We take a
    joint eigenbasis ``w_c`` of that family and keep it only if every vector
    has parallel images ``{B_k w_c}_k`` (rank-one Gram matrix); those images
    give the columns of ``U``.  ``None`` is returned when no such pair exists
    or the reconstruction residual exceeds the tolerance.
    """
    from .qec import simultaneous_eigenbasis  # local import: qec depends on this module
    from .errors import NotCommuting, NotNormal

    tol = as_tolerance(tol)
    ops = [as_matrix(b) for b in ops]
    n = ops[0].shape[1]
    if any(b.shape != (n, n) for b in ops):
        raise DimensionMismatch("simultaneous Schmidt test needs square operators of one size")
    family = [dagger(bi) @ bj for bi in ops for bj in ops]
    try:
        w = simultaneous_eigenbasis(family, tol)
    except (NotCommuting, NotNormal):
        return None
    scale = max(np.linalg.norm(b) for b in ops)
    cols: list = [None] * n
    diags = np.zeros((len(ops), n), dtype=np.complex128)
    for c in range(n):
        images = np.column_stack([b @ w[:, c] for b in ops])
        gram = dagger(images) @ images
        tr = float(np.real(np.trace(gram)))
        if tr <= tol.threshold(scale):
            continue
        lam_max = float(np.linalg.eigvalsh(gram)[-1])
        if not tol.is_zero(tr - lam_max, tr):
            return None
        k = int(np.argmax(np.linalg.norm(images, axis=0)))
        u_c = fix_phase(images[:, k] / np.linalg.norm(images[:, k]))
        cols[c] = u_c
        diags[:, c] = u_c.conj() @ images
    # zero columns: complete U to a unitary
    filled = [c for c in range(n) if cols[c] is not None]
    if len(filled) < n:
        known = np.column_stack([cols[c] for c in filled]) if filled else np.zeros((n, 0))
        comp = _orth_complement(known, n)
        it = iter(comp.T)
        for c in range(n):
            if cols[c] is None:
                cols[c] = next(it)
    u = np.column_stack(cols)
    v = dagger(w)
    residual = max(np.linalg.norm(b - u @ np.diag(diags[k]) @ v) for k, b in enumerate(ops))
    if not tol.is_zero(residual, scale):
        return None
    return SimultaneousSchmidt(u, v, [diags[k] for k in range(len(ops))], float(residual))


def _orth_complement(q: np.ndarray, n: int) -> np.ndarray:
    if q.shape[1] == 0:
        return np.eye(n, dtype=np.complex128)
    u, _, _ = np.linalg.svd(q, full_matrices=True)
    return u[:, q.shape[1]:]
