"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every
numerical comparison goes through a :class:`Tolerance`, whose rule is

    x ~ y  iff  |x - y| <= absolute + relative * max(|x|, |y|)

with ``|.|`` the Frobenius norm unless a function says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_tolerance",
    "as_matrix",
    "dagger",
    "tensor",
    "eig_hermitian",
    "svd",
    "null_space",
    "rank",
    "gram_schmidt",
    "solve_lyapunov_commutant",
    "span_basis",
    "random_unitary",
    "random_state",
    "fix_phase",
]


@dataclass(frozen=True)
class Tolerance:
    absolute: float = 1e-10
    relative: float = 1e-9

    def __post_init__(self):
        if self.absolute < 0 or self.relative < 0:
            raise ValueError("tolerances must be non-negative")

    def threshold(self, scale: float = 0.0) -> float:
        """Largest deviation accepted for quantities of size ``scale``."""
        return self.absolute + self.relative * scale

    def close(self, x, y) -> bool:
        x = np.asarray(x)
        y = np.asarray(y)
        diff = np.linalg.norm(x - y)
        return bool(diff <= self.threshold(max(np.linalg.norm(x), np.linalg.norm(y))))

    def is_zero(self, value: float, scale: float = 0.0) -> bool:
        return bool(value <= self.threshold(scale))


DEFAULT_TOL = Tolerance()


def as_tolerance(tol) -> Tolerance:
    """Accept ``None`` (default), a float (absolute, no relative part) or a Tolerance."""
    if tol is None:
        return DEFAULT_TOL
    if isinstance(tol, Tolerance):
        return tol
    return Tolerance(absolute=float(tol), relative=0.0)


def as_matrix(a, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array, optionally checking its shape."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got array of shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionMismatch(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionMismatch(f"expected {cols} columns, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def tensor(*mats) -> np.ndarray:
    """Kronecker product, ``(A (x) B)[i*rB + k, j*cB + l] = A[i, j] B[k, l]``."""
    out = np.ones((1, 1), dtype=np.complex128)
    for m in mats:
        out = np.kron(out, as_matrix(m))
    return out


def fix_phase(v: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Rotate ``v`` so its first entry of non-negligible size is real positive."""
    v = np.asarray(v, dtype=np.complex128)
    idx = np.flatnonzero(np.abs(v) > atol * max(1.0, np.abs(v).max(initial=0.0)))
    if idx.size == 0:
        return v
    z = v[idx[0]]
    return v * (np.abs(z) / z)


def eig_hermitian(a, tol=None) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(eigenvalues, V)`` with eigenvalues in descending order and the
    eigenvectors as the orthonormal columns of ``V``.  Each eigenvector is
    phase-fixed (first non-negligible entry real positive); ties in the
    eigenvalue are ordered lexicographically on the phase-fixed vector.

    Raises
    ------
    NotHermitian
        If ``||A - A^dagger||_F`` exceeds the tolerance.
    """
    tol = as_tolerance(tol)
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch("eig_hermitian needs a square matrix")
    scale = np.linalg.norm(a)
    if not tol.is_zero(np.linalg.norm(a - dagger(a)), scale):
        raise NotHermitian(f"matrix is not Hermitian (||A - A^+|| = {np.linalg.norm(a - dagger(a)):.3e})")
    h = (a + dagger(a)) / 2
    w, v = np.linalg.eigh(h)
    vecs = [fix_phase(v[:, i]) for i in range(len(w))]
    gap = tol.threshold(max(scale, 1.0))

    def key(i):
        vec = np.round(vecs[i], 12)
        return tuple(x for z in vec for x in (-z.real, -z.imag))

    order = sorted(range(len(w)), key=lambda i: -w[i])
    # group ties and sort each group by the phase-fixed vector
    grouped, cur = [], [order[0]] if order else []
    for i in order[1:]:
        if abs(w[i] - w[cur[-1]]) <= gap:
            cur.append(i)
        else:
            grouped.append(cur)
            cur = [i]
    if cur:
        grouped.append(cur)
    final = [i for g in grouped for i in sorted(g, key=key)]
    return w[final].astype(float), np.column_stack([vecs[i] for i in final]) if final else v


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``A = U diag(s) V^dagger``; returns ``(U, s, V)`` with ``s`` descending."""
    a = as_matrix(a)
    u, s, vh = np.linalg.svd(a)
    return u, s, dagger(vh)


def _threshold_from_singular(s: np.ndarray, tol: Tolerance) -> float:
    smax = float(s[0]) if s.size else 0.0
    return tol.threshold(smax)


def null_space(a, tol=None) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{x : ||A x|| <= tol * ||A||}``.

    The result has shape ``(cols, k)``; ``k`` may be zero.
    """
    tol = as_tolerance(tol)
    a = as_matrix(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=np.complex128)
    _, s, vh = np.linalg.svd(a)
    thr = _threshold_from_singular(s, tol)
    r = int(np.sum(s > thr))
    return dagger(vh[r:])


def rank(a, tol=None) -> int:
    tol = as_tolerance(tol)
    a = as_matrix(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > _threshold_from_singular(s, tol)))


def gram_schmidt(vectors: Iterable, tol=None) -> list[np.ndarray]:
    """Orthonormalise ``vectors`` in order, dropping ones already in the span.

    Uses two passes of modified Gram-Schmidt per vector for stability.
    """
    tol = as_tolerance(tol)
    basis: list[np.ndarray] = []
    for v in vectors:
        w = np.asarray(v, dtype=np.complex128).ravel().copy()
        scale = np.linalg.norm(w)
        for _ in range(2):
            for q in basis:
                w -= np.vdot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol.threshold(scale) and nrm > 0:
            basis.append(w / nrm)
    return basis


def span_basis(mats, tol=None, *, max_dim: int | None = None, chunk: int = 2048) -> np.ndarray:
    """Orthonormal basis of the span of ``mats`` (any trailing shape).

    Works incrementally in chunks, which keeps memory bounded for large
    families, and stops early once ``max_dim`` vectors are found.  Returns an
    array of shape ``(k, *mats.shape[1:])`` whose flattened rows are
    orthonormal in the standard (Hilbert-Schmidt) inner product.
    """
    tol = as_tolerance(tol)
    mats = np.asarray(mats, dtype=np.complex128)
    shape = mats.shape[1:]
    flat = mats.reshape(mats.shape[0], -1)
    dim = flat.shape[1]
    max_dim = dim if max_dim is None else max_dim
    scale = float(np.max(np.linalg.norm(flat, axis=1), initial=0.0))
    thr = tol.threshold(scale)
    q = np.zeros((0, dim), dtype=np.complex128)
    for start in range(0, flat.shape[0], chunk):
        block = flat[start:start + chunk]
        for _ in range(2):
            if q.shape[0]:
                block = block - (block @ dagger(q)) @ q
        if block.shape[0] == 0:
            continue
        _, s, vh = np.linalg.svd(block, full_matrices=False)
        new = vh[s > thr]
        if new.shape[0]:
            q = np.vstack([q, new])
            # re-orthonormalise to keep drift out of long runs
            qq, _ = np.linalg.qr(q.T)
            q = qq.T
        if q.shape[0] >= max_dim:
            break
    return q.reshape((q.shape[0],) + shape)


def solve_lyapunov_commutant(a_list: Sequence, tol=None) -> list[np.ndarray]:
    """Basis of ``{X : X A - A X = 0 for every A in a_list}``.

    Solved as the null space of the stacked maps ``vec(X) -> vec(XA - AX)``
    with row-major vectorisation.  The basis is Hilbert-Schmidt orthonormal.
    """
    tol = as_tolerance(tol)
    mats = [as_matrix(a) for a in a_list]
    if not mats:
        raise ValueError("need at least one matrix")
    n = mats[0].shape[0]
    eye = np.eye(n)
    blocks = []
    for a in mats:
        if a.shape != (n, n):
            raise DimensionMismatch("commutant family must share a square shape")
        blocks.append(np.kron(eye, a.T) - np.kron(a, eye))
    ns = null_space(np.vstack(blocks), tol)
    return [ns[:, i].reshape(n, n) for i in range(ns.shape[1])]


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``n x n`` unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)
