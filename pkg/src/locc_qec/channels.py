"""Kraus-form channels, Alice's quantum-classical channel and Bob's recovery.

Frame convention: an Alice basis is the list of kets she projects onto.  If
she projects state ``(I (x) B)|Phi>`` onto ``|phi_x>`` the unnormalised
state left with Bob is ``B conj(phi_x) / sqrt(a)``, where ``conj`` is the
entrywise complex conjugate in the standard basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bipartite import StateSet
from .errors import DimensionMismatch, NotDistinguishable, NotMaximallyEntangled, NotRankOne
from .linalg import as_matrix, as_tolerance, dagger, random_state

__all__ = [
    "KrausChannel",
    "Povm",
    "identity_channel",
    "qc_channel_from_povm",
    "extend_with_identity",
    "apply",
    "compose",
    "bob_states",
    "build_recovery",
    "verify_recovery",
    "teleportation_residual",
]


@dataclass(eq=False)
class KrausChannel:
    kraus: list
    dim_in: int
    dim_out: int

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("a channel needs at least one Kraus operator")
        self.kraus = [as_matrix(k, self.dim_out, self.dim_in) for k in self.kraus]

    @classmethod
    def from_kraus(cls, kraus: Sequence) -> "KrausChannel":
        kraus = [as_matrix(k) for k in kraus]
        out, inp = kraus[0].shape
        return cls(kraus, inp, out)

    def completeness(self) -> np.ndarray:
        return sum(dagger(k) @ k for k in self.kraus)

    def is_trace_preserving(self, tol=None) -> bool:
        return as_tolerance(tol).close(self.completeness(), np.eye(self.dim_in))

    def __call__(self, rho):
        return apply(self, rho)

    def __len__(self):
        return len(self.kraus)


@dataclass(eq=False)
class Povm:
    """Measurement effects; ``weights``/``vectors`` hold a rank-one split
    ``sigma_j = m_j |v_j><v_j|`` when one is known."""

    elements: list
    weights: np.ndarray | None = None
    vectors: list | None = None

    @classmethod
    def from_rank_one(cls, weights, vectors) -> "Povm":
        weights = np.asarray(weights, dtype=float)
        vectors = [np.asarray(v, dtype=np.complex128).ravel() for v in vectors]
        vectors = [v / np.linalg.norm(v) for v in vectors]
        elements = [m * np.outer(v, v.conj()) for m, v in zip(weights, vectors)]
        return cls(elements, weights, vectors)

    @classmethod
    def from_basis(cls, basis) -> "Povm":
        """Projective measurement onto the columns of ``basis``."""
        basis = as_matrix(basis)
        return cls.from_rank_one(np.ones(basis.shape[1]), list(basis.T))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def is_complete(self, tol=None) -> bool:
        return as_tolerance(tol).close(sum(self.elements), np.eye(self.dim))

    def rank_one_decomposition(self, tol=None):
        if self.weights is not None:
            return self.weights, self.vectors
        tol = as_tolerance(tol)
        weights, vectors = [], []
        for j, e in enumerate(self.elements):
            w, v = np.linalg.eigh((e + dagger(e)) / 2)
            top = w[-1]
            if np.sum(w > tol.threshold(abs(top))) > 1:
                raise NotRankOne(f"POVM element {j} has rank > 1")
            weights.append(max(top, 0.0))
            vectors.append(v[:, -1])
        self.weights, self.vectors = np.asarray(weights), vectors
        return self.weights, self.vectors


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel([np.eye(dim)], dim, dim)


def qc_channel_from_povm(p: Povm, tol=None) -> KrausChannel:
    """Kraus operators ``V_j = sqrt(m_j) |j><v_j|`` of the measure-and-record channel."""
    weights, vectors = p.rank_one_decomposition(tol)
    r = len(vectors)
    kraus = []
    for j, (m, v) in enumerate(zip(weights, vectors)):
        k = np.zeros((r, p.dim), dtype=np.complex128)
        k[j] = np.sqrt(m) * v.conj()
        kraus.append(k)
    return KrausChannel(kraus, p.dim, r)


def extend_with_identity(c: KrausChannel, dim_b: int) -> KrausChannel:
    eye = np.eye(dim_b)
    return KrausChannel([np.kron(k, eye) for k in c.kraus], c.dim_in * dim_b, c.dim_out * dim_b)


def apply(c: KrausChannel, rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (c.dim_in, c.dim_in):
        raise DimensionMismatch(f"input of shape {rho.shape} for a channel on dimension {c.dim_in}")
    k = np.asarray(c.kraus)
    return np.einsum("kij,jl,kml->im", k, rho, k.conj())


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """Channel ``second o first`` with Kraus operators ``K2 K1`` (all pairs)."""
    if second.dim_in != first.dim_out:
        raise DimensionMismatch(f"cannot feed dimension {first.dim_out} into a channel on {second.dim_in}")
    return KrausChannel([k2 @ k1 for k2 in second.kraus for k1 in first.kraus], first.dim_in, second.dim_out)


def bob_states(ops: Sequence, alice_basis) -> np.ndarray:
    """Unnormalised Bob states ``B_i conj(phi_x)``, shape ``(r, d, b)``.

    These are ``sqrt(a)`` times the true conditional states, so a maximally
    entangled family gives unit vectors.
    """
    basis = as_matrix(alice_basis)
    ops = np.asarray([as_matrix(b) for b in ops])
    if ops.shape[2] != basis.shape[0]:
        raise DimensionMismatch("Alice basis dimension does not match the operators")
    # ops: (d, b, a); basis: (a, r)
    return np.einsum("iba,ax->xib", ops, basis.conj())


def build_recovery(states: StateSet, alice_basis, tol=None) -> KrausChannel:
    """Bob's correction after Alice measures in ``alice_basis``.

    For outcome ``x`` Bob applies ``R_x = sum_i |phi_i><B_i conj(phi_x)|``;
    the Kraus operators are ``<x| (x) R_x`` acting on ``C^r (x) C^b``.  Pair it
    with ``extend_with_identity(qc_channel_from_povm(Povm.from_basis(alice_basis)), b)``.

    Raises
    ------
    NotDistinguishable
        If for some outcome the Bob states are not mutually orthogonal.
    NotMaximallyEntangled
        If ``R_x R_x^+`` differs from the code projector (Bob states not unit).
    """
    tol = as_tolerance(tol)
    if not states.orthonormal:
        raise ValueError("build_recovery needs an orthonormal state set")
    basis = as_matrix(alice_basis, rows=states.dim_a)
    r = basis.shape[1]
    a, b = states.dim_a, states.dim_b
    bob = bob_states(states.ops, basis)
    worst, where = 0.0, None
    for x in range(r):
        g = bob[x].conj() @ bob[x].T
        off = np.abs(g - np.diag(np.diag(g)))
        if off.size and off.max() > worst:
            worst = float(off.max())
            i, k = np.unravel_index(np.argmax(off), off.shape)
            where = (x, int(i), int(k))
    if not tol.is_zero(worst, 1.0):
        raise NotDistinguishable(
            f"Bob states for outcome {where[0]} overlap: |<{where[1]}|{where[2]}>| = {worst:.3e}",
            pair=where, overlap=worst)
    code = states.vectors()
    proj = code @ dagger(code)
    kraus = []
    for x in range(r):
        r_x = code @ bob[x].conj()
        if not tol.close(r_x @ dagger(r_x), proj):
            raise NotMaximallyEntangled(f"R_{x} R_{x}^+ differs from the code projector")
        ex = np.zeros((1, r))
        ex[0, x] = 1.0
        kraus.append(np.kron(ex, r_x))
    return KrausChannel(kraus, r * b, a * b)


def verify_recovery(recovery: KrausChannel, noise: KrausChannel, code_basis, trials: int = 0,
                    seed: int = 0) -> float:
    """Largest ``||(R o E)(rho) - rho||_F`` over the code's matrix units.

    The ``d^2`` units ``|phi_i><phi_k|`` span every operator on the code, so by
    linearity they make the check complete; ``trials`` extra random code
    states (seeded) can be added as a sanity check.
    """
    if recovery.dim_in != noise.dim_out:
        raise DimensionMismatch("recovery input does not match the noise output")
    code = as_matrix(code_basis, rows=noise.dim_in)
    if recovery.dim_out != code.shape[0]:
        raise DimensionMismatch("recovery output does not match the code ambient dimension")
    full = compose(recovery, noise)
    d = code.shape[1]
    # images of the code vectors under every Kraus operator: g[k] = K_k C
    g = np.asarray([k @ code for k in full.kraus])
    worst = 0.0
    for i in range(d):
        out = np.einsum("ka,kbj->jab", g[:, :, i], g.conj())
        target = np.einsum("a,bj->jab", code[:, i], code.conj())
        worst = max(worst, float(np.max(np.linalg.norm(out - target, axis=(1, 2)))))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        alpha = random_state(d, rng)
        ga = g @ alpha
        rho_out = np.einsum("ka,kb->ab", ga, ga.conj())
        psi = code @ alpha
        worst = max(worst, float(np.linalg.norm(rho_out - np.outer(psi, psi.conj()))))
    return worst


def teleportation_residual(alice_basis) -> float:
    """Max over ``j`` of ``||(|j><conj(phi_j)| (x) I)|Phi> - |j>|phi_j>/sqrt(a)||``."""
    basis = as_matrix(alice_basis)
    a = basis.shape[0]
    phi = np.eye(a).reshape(-1) / np.sqrt(a)
    worst = 0.0
    for j in range(basis.shape[1]):
        ket_j = np.zeros(basis.shape[1])
        ket_j[j] = 1.0
        op = np.kron(np.outer(ket_j, basis[:, j]), np.eye(a))  # |j><conj(phi_j)|: bra of conj is phi_j^T
        lhs = op @ phi
        rhs = np.kron(ket_j, basis[:, j]) / np.sqrt(a)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst
