"""Operator systems and finite-dimensional *-algebras.

Every algebra handled here is, up to a unitary change of basis, of the form
``(+)_k M_{m_k} (x) I_{n_k}``.  :func:`wedderburn_structure` recovers the
block parameters ``(m_k, n_k)`` together with a unitary ``W`` such that
``W^+ A W`` is in that canonical form for every ``A`` in the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoConvergence, NonIntegerStructure, NotClosed, NotSquareBlocks
from .linalg import (
    as_matrix,
    as_tolerance,
    dagger,
    null_space,
    rank,
    solve_lyapunov_commutant,
    span_basis,
)

__all__ = [
    "OperatorSpan",
    "AlgebraStructure",
    "operator_span",
    "operator_system_S0",
    "x_subspace",
    "closure_residual",
    "is_multiplicatively_closed",
    "generated_algebra",
    "canonical_algebra",
    "wedderburn_structure",
    "has_separating_vector",
    "find_separating_vector",
    "separating_rank",
    "constant_diagonal_unitary",
    "uniform_block_vectors",
]

INTEGRALITY_TOL = 1e-6


@dataclass(eq=False)
class OperatorSpan:
    ambient_dim: int
    basis: np.ndarray  # (p, r, r), Hilbert-Schmidt orthonormal
    contains_identity: bool = False
    star_closed: bool = False

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def flat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, -1)

    def residual(self, mats) -> np.ndarray:
        """Distance of each matrix in ``mats`` from the span."""
        v = np.asarray(mats, dtype=np.complex128).reshape(-1, self.ambient_dim ** 2)
        q = self.flat()
        proj = (v @ q.conj().T) @ q
        return np.linalg.norm(v - proj, axis=1)

    def contains(self, m, tol=None) -> bool:
        tol = as_tolerance(tol)
        m = as_matrix(m)
        return tol.is_zero(float(self.residual(m[None])[0]), float(np.linalg.norm(m)))

    def hermitian_basis(self) -> np.ndarray:
        """Real-linear Hermitian spanning set (valid when the span is *-closed)."""
        b = self.basis
        herm = np.concatenate([(b + dagger(b)) / 2, (b - dagger(b)) / 2j])
        keep = np.linalg.norm(herm.reshape(len(herm), -1), axis=1) > 1e-12
        return herm[keep]

    def random_element(self, rng, hermitian: bool = True) -> np.ndarray:
        if hermitian:
            h = self.hermitian_basis()
            return np.einsum("p,pij->ij", rng.standard_normal(len(h)), h)
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return np.einsum("p,pij->ij", c, self.basis)


@dataclass(eq=False)
class AlgebraStructure:
    """Wedderburn data: ``blocks`` holds ``(m_k, n_k)`` pairs.

    ``unitary`` (when known) has columns ordered block by block, and inside a
    block by ``i * n_k + c``, so that ``unitary^+ A unitary`` equals
    ``(+)_k A_k (x) I_{n_k}`` (padded with zeros off the support).
    """

    blocks: list
    unitary: np.ndarray | None = field(default=None, repr=False)
    support_dim: int | None = None

    @property
    def algebra_dim(self) -> int:
        return sum(m * m for m, _ in self.blocks)

    @property
    def total_dim(self) -> int:
        return sum(m * n for m, n in self.blocks)

    def multiset(self) -> list:
        return sorted(self.blocks)


def operator_span(mats, tol=None, max_dim: int | None = None) -> OperatorSpan:
    tol = as_tolerance(tol)
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim == 2:
        mats = mats[None]
    r = mats.shape[1]
    basis = span_basis(mats, tol, max_dim=max_dim if max_dim is not None else r * r)
    s = OperatorSpan(r, basis)
    s.contains_identity = s.contains(np.eye(r), tol) if s.dim else False
    s.star_closed = bool(s.dim) and bool(np.all(s.residual(dagger(basis)) <= tol.threshold(1.0)))
    return s


def _pair_products(ops: Sequence, include_diagonal: bool, chunk_rows: int = 64):
    """Yield chunks of ``B_i^+ B_j`` over the requested index pairs."""
    b = np.asarray([as_matrix(o) for o in ops])
    d = len(b)
    for start in range(0, d, chunk_rows):
        left = b[start:start + chunk_rows]
        prods = np.einsum("ika,jkb->ijab", left.conj(), b)
        if not include_diagonal:
            idx = np.arange(left.shape[0])
            mask = np.ones(prods.shape[:2], dtype=bool)
            mask[idx, idx + start] = False
            yield prods[mask]
        else:
            yield prods.reshape(-1, *prods.shape[2:])


def _span_of_products(ops, include_diagonal: bool, extra, tol) -> OperatorSpan:
    tol = as_tolerance(tol)
    a = as_matrix(ops[0]).shape[1]
    full = a * a
    chunks = list(extra)
    basis = span_basis(np.asarray(chunks), tol) if chunks else np.zeros((0, a, a), dtype=np.complex128)
    for prods in _pair_products(ops, include_diagonal):
        if basis.shape[0] >= full:
            break
        if prods.shape[0] == 0:
            continue
        basis = span_basis(np.concatenate([basis, prods]), tol, max_dim=full)
    s = OperatorSpan(a, basis)
    s.contains_identity = s.contains(np.eye(a), tol) if s.dim else False
    s.star_closed = bool(s.dim) and bool(np.all(s.residual(dagger(basis)) <= tol.threshold(1.0)))
    return s


def operator_system_S0(ops: Sequence, tol=None) -> OperatorSpan:
    """``span{B_i^+ B_j : i != j} + C I`` for operators ``B_i`` (each ``b x a``)."""
    a = as_matrix(ops[0]).shape[1]
    return _span_of_products(ops, False, [np.eye(a, dtype=np.complex128)], tol)


def x_subspace(ops: Sequence, tol=None) -> OperatorSpan:
    """``span{B_i^+ B_j}`` over all ordered pairs, diagonal included."""
    return _span_of_products(ops, True, [], tol)


def closure_residual(s: OperatorSpan, chunk: int = 32) -> float:
    """Largest distance from the span of a product of two basis elements."""
    if s.dim == 0 or s.dim == s.ambient_dim ** 2:
        return 0.0
    b = s.basis
    worst = 0.0
    for start in range(0, s.dim, chunk):
        prods = np.einsum("aij,bjk->abik", b[start:start + chunk], b)
        worst = max(worst, float(np.max(s.residual(prods))))
    return worst


def is_multiplicatively_closed(s: OperatorSpan, tol=None) -> bool:
    tol = as_tolerance(tol)
    return tol.is_zero(closure_residual(s), 1.0)


def generated_algebra(s: OperatorSpan, max_rounds: int = 64, tol=None) -> OperatorSpan:
    """Smallest *-algebra containing ``s``: multiply and re-span until stable."""
    tol = as_tolerance(tol)
    r = s.ambient_dim
    cur = operator_span(np.concatenate([s.basis, dagger(s.basis)]), tol)
    for _ in range(max_rounds):
        if cur.dim == r * r:
            return cur
        prods = np.einsum("aij,bjk->abik", cur.basis, cur.basis).reshape(-1, r, r)
        nxt = operator_span(np.concatenate([cur.basis, prods]), tol)
        if nxt.dim == cur.dim:
            return nxt
        cur = nxt
    raise NoConvergence(f"algebra dimension still growing after {max_rounds} rounds")


def canonical_algebra(blocks: Sequence) -> OperatorSpan:
    """Matrix-unit basis of ``(+)_k M_{m_k} (x) I_{n_k}`` (orthonormalised)."""
    r = sum(m * n for m, n in blocks)
    mats = []
    off = 0
    for m, n in blocks:
        for i in range(m):
            for j in range(m):
                e = np.zeros((m, m))
                e[i, j] = 1.0
                big = np.zeros((r, r), dtype=np.complex128)
                big[off:off + m * n, off:off + m * n] = np.kron(e, np.eye(n)) / np.sqrt(n)
                mats.append(big)
        off += m * n
    return OperatorSpan(r, np.asarray(mats), contains_identity=True, star_closed=True)


def _clusters(w: np.ndarray, rel: float = 1e-6) -> list[list[int]]:
    """Group ascending eigenvalues whose neighbours differ by less than ``rel`` * spread."""
    spread = max(float(w[-1] - w[0]), 1.0) if len(w) else 1.0
    groups, cur = [], [0]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > rel * spread:
            groups.append(cur)
            cur = [i]
        else:
            cur.append(i)
    groups.append(cur)
    return groups


def _commutant(s: OperatorSpan, rng, tol) -> list[np.ndarray]:
    """Commutant of the algebra, found from a couple of generic elements then checked."""
    herm = s.hermitian_basis()
    gens = [s.random_element(rng) for _ in range(2)]
    while True:
        comm = solve_lyapunov_commutant(gens, tol)
        bad = False
        for c in comm:
            for h in herm:
                if np.linalg.norm(c @ h - h @ c) > 1e-7:
                    bad = True
                    break
            if bad:
                break
        if not bad:
            return comm
        if len(gens) >= len(herm):
            return solve_lyapunov_commutant(list(herm), tol)
        gens.append(s.random_element(rng))


def _intersection(a: np.ndarray, b: np.ndarray, tol) -> np.ndarray:
    """Basis of span(a) intersect span(b); inputs are stacks of matrices."""
    if len(a) == 0 or len(b) == 0:
        return np.zeros((0,) + a.shape[1:], dtype=np.complex128)
    fa = a.reshape(len(a), -1)
    fb = b.reshape(len(b), -1)
    ns = null_space(np.hstack([fa.T, -fb.T]), tol)
    if ns.shape[1] == 0:
        return np.zeros((0,) + a.shape[1:], dtype=np.complex128)
    inter = (fa.T @ ns[: len(a)]).T
    return span_basis(inter.reshape((-1,) + a.shape[1:]), tol)


def _block_matrix_units(alg_k: OperatorSpan, m: int, n: int, rng, tol) -> np.ndarray:
    """Unitary ``Y`` on one central block with ``Y^+ A Y = A' (x) I_n``."""
    dk = m * n
    for _attempt in range(16):
        h = alg_k.random_element(rng)
        w, v = np.linalg.eigh(h)
        groups = _clusters(w)
        if len(groups) != m or any(len(g) != n for g in groups):
            continue
        frames = [v[:, g] for g in groups]
        f1 = frames[0]
        cols = [f1]
        ok = True
        for fi in frames[1:]:
            g = alg_k.random_element(rng, hermitian=False)
            t = dagger(fi) @ g @ f1
            sv = np.linalg.svd(t, compute_uv=False)
            if sv[0] < 1e-6 or sv[-1] / sv[0] < 1 - 1e-6:
                ok = False
                break
            cols.append(fi @ t / np.sqrt(np.mean(sv ** 2)))
        if not ok:
            continue
        y = np.hstack(cols)
        # re-orthonormalise (polar factor) to scrub rounding
        u, _, vh = np.linalg.svd(y)
        return u @ vh if y.shape[0] == dk else y
    raise NonIntegerStructure(f"could not split a block of size {dk} into {m} copies of dimension {n}")


def wedderburn_structure(alg: OperatorSpan, tol=None, seed: int = 0) -> AlgebraStructure:
    """Block parameters ``(m_k, n_k)`` of a *-algebra and its canonical basis.

    Steps: restrict to the support; take the centre as commutant intersected
    with the algebra; split by the eigenspaces of a generic central Hermitian
    element; read ``m_k`` from the dimension of each compressed block and
    ``n_k`` from the block's rank; finally build matrix units to get the
    canonical unitary.

    Raises
    ------
    NotClosed
        Input is not a *-closed, multiplicatively closed span.
    NonIntegerStructure
        ``m_k`` or ``n_k`` fails integrality by more than ``1e-6``.
    """
    tol = as_tolerance(tol)
    rng = np.random.default_rng(seed)
    r = alg.ambient_dim
    if not alg.star_closed:
        raise NotClosed("span is not closed under adjoints")
    res = closure_residual(alg)
    if not tol.is_zero(res, 1.0):
        raise NotClosed(f"span is not closed under multiplication (residual {res:.3e})")

    # support of the algebra
    ranges = np.hstack(list(alg.basis))
    u, sv, _ = np.linalg.svd(ranges, full_matrices=True)
    s_dim = int(np.sum(sv > tol.threshold(sv[0] if sv.size else 0.0)))
    q = u[:, :s_dim]
    comp = u[:, s_dim:]
    sub = OperatorSpan(s_dim, span_basis(dagger(q)[None] @ alg.basis @ q[None], tol),
                       contains_identity=True, star_closed=True)

    commutant = np.asarray(_commutant(sub, rng, tol))
    centre = _intersection(sub.basis, commutant, tol)
    centre_span = OperatorSpan(s_dim, centre, True, True)
    z = centre_span.random_element(rng)
    w, v = np.linalg.eigh(z)
    groups = _clusters(w)

    blocks, frames = [], []
    for g in groups:
        pk = v[:, g]
        compressed = dagger(pk)[None] @ sub.basis @ pk[None]
        dim_k = rank(compressed.reshape(len(compressed), -1), tol)
        m_real = np.sqrt(dim_k)
        m = int(round(m_real))
        if m == 0 or abs(m_real - m) > INTEGRALITY_TOL:
            raise NonIntegerStructure(f"block algebra of dimension {dim_k} is not a square")
        n_real = len(g) / m
        n = int(round(n_real))
        if abs(n_real - n) > INTEGRALITY_TOL:
            raise NonIntegerStructure(f"block of rank {len(g)} is not a multiple of m = {m}")
        alg_k = OperatorSpan(len(g), span_basis(compressed, tol), True, True)
        y = _block_matrix_units(alg_k, m, n, rng, tol)
        blocks.append((m, n))
        frames.append(q @ pk @ y)

    order = sorted(range(len(blocks)), key=lambda k: blocks[k])
    blocks = [blocks[k] for k in order]
    cols = [frames[k] for k in order]
    if comp.shape[1]:
        cols.append(comp)
    unitary = np.hstack(cols)
    return AlgebraStructure(blocks, unitary, s_dim)


def has_separating_vector(st: AlgebraStructure) -> bool:
    return all(n >= m for m, n in st.blocks)


def separating_rank(alg: OperatorSpan, psi, tol=None) -> int:
    """Rank of ``A -> A psi`` on the algebra (columns ``E_p psi``)."""
    tol = as_tolerance(tol)
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    cols = np.einsum("pij,j->ip", alg.basis, psi)
    return rank(cols, tol)


def find_separating_vector(alg: OperatorSpan, attempts: int = 64, tol=None, seed: int = 0):
    """Random search for ``psi`` with ``A psi = 0`` only for ``A = 0``.

    A Gaussian vector is separating with probability one when any exists;
    every candidate is checked by the rank of ``A -> A psi`` before it is
    returned.  Returns ``None`` when all attempts fail.
    """
    tol = as_tolerance(tol) if tol is not None else as_tolerance(1e-8)
    rng = np.random.default_rng(seed)
    r = alg.ambient_dim
    if alg.dim > r:
        return None
    for _ in range(attempts):
        psi = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        psi /= np.linalg.norm(psi)
        cols = np.einsum("pij,j->ip", alg.basis, psi)
        s = np.linalg.svd(cols, compute_uv=False)
        if s.size and s[-1] > tol.threshold(s[0]):
            return psi
    return None


def uniform_block_vectors(m: int, n: int) -> np.ndarray:
    """``m*n`` orthonormal vectors in ``C^m (x) C^n`` with reduced state ``I/m``.

    Requires ``n >= m``.  Vector ``(a, b)`` has amplitude
    ``omega_m^{i b} / sqrt(m)`` on ``|i, (i + a) mod n>``; for ``m = n`` these
    are the generalised Bell (Pauli) states.  Returned as columns.
    """
    if n < m:
        raise NotSquareBlocks(f"block ({m}, {n}) has no separating vector")
    omega = np.exp(2j * np.pi / m)
    vecs = []
    for a in range(n):
        for b in range(m):
            t = np.zeros((m, n), dtype=np.complex128)
            for i in range(m):
                t[i, (i + a) % n] = omega ** (i * b) / np.sqrt(m)
            vecs.append(t.reshape(-1))
    return np.column_stack(vecs)


def constant_diagonal_unitary(st: AlgebraStructure) -> np.ndarray:
    """Unitary ``U`` with ``U A U^+`` of constant diagonal on the canonical algebra.

    Supports ``K`` identical blocks ``(m, n)`` with ``n >= m`` (this covers
    every square case with equal blocks): inside a block the rows are the
    vectors of :func:`uniform_block_vectors`, and a ``K``-point Fourier
    transform spreads each row evenly across the blocks.  Other structures
    raise :class:`NotSquareBlocks`.
    """
    blocks = list(st.blocks)
    if not blocks:
        raise NotSquareBlocks("empty structure")
    if any(b != blocks[0] for b in blocks):
        raise NotSquareBlocks(f"blocks {blocks} are not all equal; only uniform structures are constructed")
    m, n = blocks[0]
    if n < m:
        raise NotSquareBlocks(f"block ({m}, {n}) has m > n, so no constant-diagonal unitary exists")
    kk = len(blocks)
    dk = m * n
    inner = uniform_block_vectors(m, n)
    fourier = np.exp(2j * np.pi * np.outer(np.arange(kk), np.arange(kk)) / kk) / np.sqrt(kk)
    rows = []
    for j in range(kk):
        for y in range(dk):
            u = np.concatenate([fourier[j, k] * inner[:, y] for k in range(kk)])
            rows.append(u.conj())
    return np.asarray(rows)
