"""Error-correction conditions for subspaces and for sets of states."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bipartite import StateSet
from .channels import KrausChannel, Povm, apply, extend_with_identity, qc_channel_from_povm
from .errors import DimensionMismatch, NotCommuting, NotNormal
from .linalg import as_matrix, as_tolerance, dagger, gram_schmidt

__all__ = [
    "CodeSpace",
    "KlReport",
    "kl_check",
    "correctable_set_check",
    "compressions",
    "commuting_family_check",
    "simultaneous_eigenbasis",
    "block_structure_check",
    "code_from_locc",
    "standard_recovery",
]


@dataclass(eq=False)
class CodeSpace:
    ambient_dim: int
    basis: np.ndarray  # orthonormal columns

    @classmethod
    def from_vectors(cls, vectors, tol=None) -> "CodeSpace":
        """Orthonormalise ``vectors`` (columns or a list) into a code."""
        vecs = vectors.T if isinstance(vectors, np.ndarray) and vectors.ndim == 2 else vectors
        q = gram_schmidt(vecs, tol)
        if not q:
            raise ValueError("empty code space")
        return cls(len(q[0]), np.column_stack(q))

    @classmethod
    def from_states(cls, states: StateSet) -> "CodeSpace":
        return cls.from_vectors(states.vectors())

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ dagger(self.basis)


@dataclass(eq=False)
class KlReport:
    correctable: bool
    lam: np.ndarray
    residual: float


def _check_noise(code: CodeSpace, noise: KrausChannel):
    if noise.dim_in != code.ambient_dim:
        raise DimensionMismatch(f"noise acts on dimension {noise.dim_in}, code lives in {code.ambient_dim}")


def compressions(code: CodeSpace, noise: KrausChannel) -> np.ndarray:
    """``Q[i, j] = C^+ A_i^+ A_j C`` in the code basis, shape ``(K, K, d, d)``."""
    _check_noise(code, noise)
    ac = np.asarray([k @ code.basis for k in noise.kraus])  # (K, out, d)
    return np.einsum("ioa,job->ijab", ac.conj(), ac)


def kl_check(code: CodeSpace, noise: KrausChannel, tol=None) -> KlReport:
    """Knill-Laflamme test ``P A_i^+ A_j P = lambda_ij P``.

    Works in the code basis, where ``P`` becomes the identity, so
    ``lambda_ij = Tr(Q_ij) / d`` and the residual is the largest
    ``||Q_ij - lambda_ij I||_F``.
    """
    tol = as_tolerance(tol)
    q = compressions(code, noise)
    d = code.dim
    lam = np.einsum("ijaa->ij", q) / d
    dev = q - lam[:, :, None, None] * np.eye(d)
    residual = float(np.max(np.linalg.norm(dev, axis=(2, 3))))
    scale = float(np.max(np.linalg.norm(q, axis=(2, 3))))
    return KlReport(tol.is_zero(residual, scale), lam, residual)


def correctable_set_check(states: Sequence, noise: KrausChannel, tol=None):
    """Are the noisy outputs of ``states`` pairwise orthogonal?

    Returns ``(ok, worst)`` where ``worst`` is ``(k, l, overlap)`` for the
    largest ``Tr(E(rho_k) E(rho_l))`` with ``k != l`` (``None`` for a single state).
    """
    tol = as_tolerance(tol)
    rhos = [as_matrix(r, noise.dim_in, noise.dim_in) for r in states]
    outs = [apply(noise, r) for r in rhos]
    worst = None
    for k, l in itertools.combinations(range(len(outs)), 2):
        ov = float(abs(np.trace(outs[k] @ outs[l])))
        if worst is None or ov > worst[2]:
            worst = (k, l, ov)
    ok = worst is None or tol.is_zero(worst[2], 1.0)
    return ok, worst


def _max_commutator(family: Sequence[np.ndarray]) -> float:
    worst = 0.0
    for x, y in itertools.combinations(family, 2):
        worst = max(worst, float(np.linalg.norm(x @ y - y @ x)))
    return worst


def commuting_family_check(code: CodeSpace, noise: KrausChannel, tol=None):
    """Do the compressions ``P A_j^+ A_i P`` commute pairwise?  Returns ``(ok, worst_norm)``."""
    tol = as_tolerance(tol)
    q = compressions(code, noise)
    family = [q[i, j] for i in range(q.shape[0]) for j in range(q.shape[1])]
    worst = _max_commutator(family)
    scale = max(float(np.linalg.norm(f)) for f in family) ** 2
    return tol.is_zero(worst, scale), worst


def _diagonalises(basis: np.ndarray, family, tol) -> bool:
    for f in family:
        m = dagger(basis) @ f @ basis
        off = m - np.diag(np.diag(m))
        if not tol.is_zero(np.linalg.norm(off), np.linalg.norm(f)):
            return False
    return True


def _hermitian_parts(family):
    out = []
    for f in family:
        out.append((f + dagger(f)) / 2)
        out.append((f - dagger(f)) / 2j)
    return out


def _refine(basis: np.ndarray, parts, tol) -> np.ndarray:
    """Split ``basis`` (columns) into joint eigenvectors of the Hermitian ``parts``."""
    if basis.shape[1] <= 1 or not parts:
        return basis
    h = parts[0]
    m = dagger(basis) @ h @ basis
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    gap = tol.threshold(max(np.linalg.norm(h), 1.0)) * 10
    cols, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > gap:
            sub = basis @ v[:, start:i]
            cols.append(_refine(sub, parts[1:], tol))
            start = i
    return np.column_stack(cols)


def simultaneous_eigenbasis(family: Sequence, tol=None, seed: int = 0) -> np.ndarray:
    """Orthonormal basis (columns) diagonalising a commuting family of normal matrices.

    A random real combination of the Hermitian and skew parts of every member
    separates all joint eigenspaces with probability one; we try up to eight
    such combinations and fall back to splitting eigenspaces member by member.

    Raises
    ------
    NotNormal, NotCommuting
        When the preconditions fail beyond tolerance.
    """
    tol = as_tolerance(tol)
    family = [as_matrix(f) for f in family]
    n = family[0].shape[0]
    scale = max(max(float(np.linalg.norm(f)) for f in family), 1.0)
    for f in family:
        if not tol.is_zero(np.linalg.norm(f @ dagger(f) - dagger(f) @ f), scale ** 2):
            raise NotNormal("family member is not normal")
    worst = _max_commutator(family)
    if not tol.is_zero(worst, scale ** 2):
        raise NotCommuting(f"family does not commute (worst commutator {worst:.3e})")
    parts = _hermitian_parts(family)
    rng = np.random.default_rng(seed)
    for _ in range(8):
        c = rng.standard_normal(len(parts))
        h = sum(ci * p for ci, p in zip(c, parts))
        _, v = np.linalg.eigh((h + dagger(h)) / 2)
        if _diagonalises(v, family, tol):
            return v
    return _refine(np.eye(n, dtype=np.complex128), parts, tol)


def block_structure_check(blocks: Sequence, noise: KrausChannel, tol=None):
    """Are all ``P A_k^+ A_l P`` block diagonal for the split ``C = (+) C_i``?

    ``blocks`` lists orthonormal bases (columns) of mutually orthogonal
    subspaces.  Returns ``(ok, worst_cross_block_norm)``.
    """
    tol = as_tolerance(tol)
    blocks = [as_matrix(b, rows=noise.dim_in) for b in blocks]
    for i, j in itertools.combinations(range(len(blocks)), 2):
        if np.linalg.norm(dagger(blocks[i]) @ blocks[j]) > tol.threshold(1.0) * 10:
            raise ValueError(f"subspaces {i} and {j} are not orthogonal")
    worst = 0.0
    scale = 0.0
    for kk in noise.kraus:
        for kl in noise.kraus:
            m = dagger(kk) @ kl
            scale = max(scale, float(np.linalg.norm(m)))
            for i, j in itertools.permutations(range(len(blocks)), 2):
                worst = max(worst, float(np.linalg.norm(dagger(blocks[i]) @ m @ blocks[j])))
    return tol.is_zero(worst, scale), worst


def code_from_locc(states: StateSet, alice: Povm | np.ndarray, tol=None):
    """Code ``span(S)`` and noise ``Phi_QC (x) id_B`` for Alice's measurement.

    ``alice`` is either a rank-one POVM or a basis (columns) she projects onto.
    """
    povm = alice if isinstance(alice, Povm) else Povm.from_basis(alice)
    if povm.dim != states.dim_a:
        raise DimensionMismatch("Alice's measurement does not act on her system")
    noise = extend_with_identity(qc_channel_from_povm(povm, tol), states.dim_b)
    return CodeSpace.from_states(states), noise


def standard_recovery(code: CodeSpace, noise: KrausChannel, tol=None) -> KrausChannel:
    """Textbook recovery for a Knill-Laflamme code.

    Diagonalise ``lambda`` to get Kraus operators ``F_k`` with
    ``P F_k^+ F_l P = d_k delta_kl P``; each ``F_k P`` is ``sqrt(d_k)`` times a
    partial isometry ``W_k`` and the recovery is ``R_k = W_k^+ P_k`` with
    ``P_k`` the projection onto ``F_k C``.
    """
    tol = as_tolerance(tol)
    rep = kl_check(code, noise, tol)
    if not rep.correctable:
        raise ValueError(f"code is not correctable (residual {rep.residual:.3e})")
    w, u = np.linalg.eigh((rep.lam + dagger(rep.lam)) / 2)
    kraus = []
    p = code.projector
    for k in range(len(w)):
        if w[k] <= tol.threshold(float(np.max(np.abs(w)))):
            continue
        f = sum(u[i, k] * noise.kraus[i] for i in range(len(noise.kraus)))
        wk = f @ p / np.sqrt(w[k])
        pk = wk @ dagger(wk)
        kraus.append(dagger(wk) @ pk)
    return KrausChannel(kraus, noise.dim_out, noise.dim_in)
