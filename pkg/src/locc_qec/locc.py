"""One-way LOCC deciders, protocol construction and obstruction tests.

Conventions follow :mod:`locc_qec.channels`: an Alice basis lists the kets
she projects onto, and for outcome ``x`` Bob holds the (unnormalised,
``sqrt(a)``-scaled) states ``B_i conj(phi_x)``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .bipartite import BipartiteState, StateSet, from_operator, from_vector, schmidt_rank
from .channels import bob_states
from .errors import (
    CommutationFailure,
    DimensionMismatch,
    NotCommuting,
    NotNormal,
    NotNormalized,
    NotSquareBlocks,
    RankOneRequired,
    StrictSubspaceRequired,
)
from .linalg import as_matrix, as_tolerance, dagger, null_space, random_unitary
from .opalg import (
    AlgebraStructure,
    OperatorSpan,
    closure_residual,
    constant_diagonal_unitary,
    find_separating_vector,
    has_separating_vector,
    operator_system_S0,
    wedderburn_structure,
    x_subspace,
)
from .qec import CodeSpace, simultaneous_eigenbasis

log = logging.getLogger(__name__)

__all__ = [
    "Status",
    "Verdict",
    "ProtocolWitness",
    "PsiMap",
    "KingResult",
    "oneway_algebra_test",
    "build_psi_map",
    "find_distinguishable_basis_3d",
    "schmidt_rank_obstruction",
    "sym_antisym_obstruction",
    "cross_block_norm",
    "necessary_commute_test",
    "verify_protocol",
    "king_search",
    "rotate_states",
    "normalised_bob_bases",
    "PROTOCOL_TOL",
]

PROTOCOL_TOL = 1e-8


class Status(str, enum.Enum):
    DISTINGUISHABLE = "Distinguishable"
    NOT_DISTINGUISHABLE = "NotDistinguishable"
    INCONCLUSIVE = "Inconclusive"


@dataclass(eq=False)
class ProtocolWitness:
    """A one-way protocol.

    ``alice_basis`` has the kets Alice projects onto as columns.  When
    ``coefficients`` is set the protocol distinguishes the rotated states
    ``Phi'_k = sum_i coefficients[i, k] Phi_i`` rather than the input set.
    ``bob_bases[x]`` holds Bob's measurement vectors for outcome ``x`` as
    columns (column ``i`` announces state ``i``; zero columns are allowed).
    """

    alice_basis: np.ndarray
    bob_bases: list
    coefficients: np.ndarray | None = None
    overlap: float = float("nan")

    def states_for(self, states: StateSet) -> StateSet:
        if self.coefficients is None:
            return states
        return rotate_states(states, self.coefficients)


@dataclass(eq=False)
class Verdict:
    status: Status
    witness: ProtocolWitness | None = None
    certificate: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    @property
    def distinguishable(self) -> bool:
        return self.status is Status.DISTINGUISHABLE


def rotate_states(states: StateSet, coefficients) -> StateSet:
    """States ``sum_i c[i, k] Phi_i``; ``coefficients`` must be unitary."""
    c = as_matrix(coefficients, rows=len(states))
    ops = np.asarray(states.ops)
    new = np.einsum("ik,iba->kba", c, ops)
    return StateSet.from_operators(list(new), states.dim_a, states.dim_b)


def normalised_bob_bases(ops: Sequence, alice_basis, tol=None) -> list:
    """Bob's measurement per outcome: his conditional states, normalised.

    Vanishing conditional states give zero columns.
    """
    tol = as_tolerance(tol)
    bob = bob_states(ops, alice_basis)
    out = []
    for x in range(bob.shape[0]):
        cols = bob[x].T.copy()  # (b, d)
        norms = np.linalg.norm(cols, axis=0)
        for i, nrm in enumerate(norms):
            cols[:, i] = cols[:, i] / nrm if nrm > tol.threshold(1.0) * 100 else 0.0
        out.append(cols)
    return out


def verify_protocol(states: StateSet, alice_basis, bob_bases=None) -> float:
    """Largest defect of a one-way protocol; the protocol is valid iff it is ~0.

    Collected defects:

    * pairwise overlaps ``|<conj(phi_x)| B_i^+ B_k |conj(phi_x)>|`` of Bob's states,
    * non-orthonormality of Alice's basis,
    * with ``bob_bases``: weight of Bob's state outside its assigned vector,
      overlap with another state's vector, and non-orthonormality of the
      nonzero columns.
    """
    basis = as_matrix(alice_basis)
    if basis.shape[0] != states.dim_a:
        raise DimensionMismatch(f"Alice basis has dimension {basis.shape[0]}, system A has {states.dim_a}")
    worst = float(np.max(np.abs(dagger(basis) @ basis - np.eye(basis.shape[1]))))
    bob = bob_states(states.ops, basis)  # (r, d, b)
    d = len(states)
    for x in range(bob.shape[0]):
        g = bob[x].conj() @ bob[x].T
        off = g - np.diag(np.diag(g))
        if off.size:
            worst = max(worst, float(np.max(np.abs(off))))
    if bob_bases is None:
        return worst
    if len(bob_bases) != bob.shape[0]:
        raise DimensionMismatch(f"{len(bob_bases)} Bob bases for {bob.shape[0]} Alice outcomes")
    for x, w in enumerate(bob_bases):
        w = as_matrix(w, rows=states.dim_b, cols=d)
        nz = np.linalg.norm(w, axis=0) > 0.5
        wn = w[:, nz]
        worst = max(worst, float(np.max(np.abs(dagger(wn) @ wn - np.eye(wn.shape[1])), initial=0.0)))
        amp = dagger(w) @ bob[x].T  # amp[k, i] = <w_k | v_i>
        for i in range(d):
            v = bob[x, i]
            leak = float(np.real(np.vdot(v, v))) - abs(amp[i, i]) ** 2
            worst = max(worst, abs(leak))
            for k in range(d):
                if k != i:
                    worst = max(worst, float(abs(amp[k, i])))
    return worst


# ---------------------------------------------------------------- algebra test


def _search_constant_diagonal(s0: OperatorSpan, seed: int, restarts: int = 8, iters: int = 3000):
    """Gradient search for an orthonormal basis ``u_x`` with ``<u_x|A|u_x> = Tr(A)/a``.

    Fallback for structures the explicit construction does not cover.
    Returns the basis as columns, or ``None``.
    """
    a = s0.ambient_dim
    mats = s0.basis
    target = np.einsum("pii->p", mats) / a
    rng = np.random.default_rng(seed)

    def loss_grad(u):
        r = np.einsum("ix,pij,jx->xp", u.conj(), mats, u) - target[None]
        g = np.einsum("xp,pij,jx->ix", r.conj(), mats, u) + np.einsum("xp,pji,jx->ix", r, mats.conj(), u)
        return float(np.sum(np.abs(r) ** 2)), g

    for _ in range(restarts):
        u = random_unitary(a, rng)
        step = 0.1
        f, g = loss_grad(u)
        for _ in range(iters):
            skew = g @ dagger(u) - u @ dagger(g)
            while step > 1e-12:
                cand = expm(-step * skew) @ u
                fc, gc = loss_grad(cand)
                if fc < f:
                    u, f, g = cand, fc, gc
                    step *= 1.5
                    break
                step /= 2
            if f < 1e-26 or step <= 1e-12:
                break
        if f < 1e-20:
            return u
    return None


def oneway_algebra_test(states: StateSet, tol=None, seed: int = 0,
                        s0: OperatorSpan | None = None) -> Verdict:
    """Decide one-way distinguishability through the separating-vector criterion.

    Applies when the operator system ``S0 = span{B_i^+ B_j (i != j), I}`` is
    closed under multiplication; otherwise the verdict is Inconclusive.
    """
    tol = as_tolerance(tol)
    if not states.orthonormal:
        raise NotNormalized("oneway_algebra_test needs an orthonormal state set")
    diag = []
    if s0 is None:
        s0 = operator_system_S0(states.ops, tol)
    diag.append(f"dim S0 = {s0.dim} in M_{s0.ambient_dim}")
    res = closure_residual(s0)
    if not tol.is_zero(res, 1.0):
        diag.append(f"S0 not multiplicatively closed (residual {res:.3e}); criterion does not apply")
        return Verdict(Status.INCONCLUSIVE, certificate={"closure_residual": res}, diagnostics=diag)
    st = wedderburn_structure(s0, tol, seed)
    diag.append(f"S0 is an algebra with blocks {st.blocks}")
    cert = {"structure": [list(b) for b in st.blocks]}
    if not has_separating_vector(st):
        diag.append("some block has m_k > n_k: no separating vector")
        return Verdict(Status.NOT_DISTINGUISHABLE, certificate=cert, diagnostics=diag)

    u = None
    try:
        uc = constant_diagonal_unitary(st)
        u = st.unitary @ dagger(uc)
        diag.append("constant-diagonal basis built from uniform blocks")
    except NotSquareBlocks as exc:
        diag.append(f"explicit construction unavailable ({exc}); numerical search")
        u = _search_constant_diagonal(s0, seed)
    if u is not None:
        alice = u.conj()
        bob = normalised_bob_bases(states.ops, alice, tol)
        ov = verify_protocol(states, alice, bob)
        if ov <= PROTOCOL_TOL:
            diag.append(f"protocol verified, max defect {ov:.3e}")
            return Verdict(Status.DISTINGUISHABLE, ProtocolWitness(alice, bob, None, ov), cert, diag)
        diag.append(f"constructed protocol failed verification (defect {ov:.3e})")
    psi = find_separating_vector(s0, seed=seed)
    if psi is not None:
        cert["separating_vector"] = psi
    diag.append("separating vector exists; no explicit protocol produced")
    return Verdict(Status.DISTINGUISHABLE, None, cert, diag)


# ---------------------------------------------------------------------- Psi map


@dataclass(eq=False)
class PsiMap:
    """``Psi(tau)_ij = <Phi_i|(tau (x) I)|Phi_j> = Tr(tau^T B_i^+ B_j) / a``.

    ``matrix`` acts on row-major ``vec(tau)`` and returns row-major ``vec(Psi(tau))``.
    """

    dim_code: int
    dim_alice: int
    matrix: np.ndarray
    unital: bool = False
    unital_residual: float = float("nan")

    def __call__(self, tau) -> np.ndarray:
        tau = as_matrix(tau, self.dim_alice, self.dim_alice)
        return (self.matrix @ tau.reshape(-1)).reshape(self.dim_code, self.dim_code)


def build_psi_map(ops: Sequence, tol=None) -> PsiMap:
    tol = as_tolerance(tol)
    b = np.asarray([as_matrix(o) for o in ops])
    d, _, a = b.shape
    prods = np.einsum("ika,jkb->ijab", b.conj(), b)  # B_i^+ B_j
    matrix = prods.reshape(d * d, a * a) / a
    psi = PsiMap(d, a, matrix)
    dev = float(np.linalg.norm(psi(np.eye(a)) - np.eye(d)))
    psi.unital_residual = dev
    psi.unital = tol.is_zero(dev, np.sqrt(d))
    return psi


def _rref_rows(m: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """Reduced row echelon form (rows span the same space), partial pivoting by column order."""
    m = m.astype(np.complex128).copy()
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[p, c]) < eps:
            continue
        m[[r, p]] = m[[p, r]]
        m[r] /= m[r, c]
        for i in range(rows):
            if i != r:
                m[i] -= m[i, c] * m[r]
        r += 1
    m[np.abs(m) < eps] = 0.0
    return m[:r]


def _kernel_candidates(kernel: np.ndarray, rng, extra: int = 32):
    """Hermitian kernel elements: parts of each basis element, then random mixes."""
    herm = []
    for e in kernel:
        herm.append((e + dagger(e)) / 2)
        herm.append((e - dagger(e)) / 2j)
    herm = [h for h in herm if np.linalg.norm(h) > 1e-9]
    scored = []
    for idx, h in enumerate(herm):
        w = np.linalg.eigvalsh(h)
        if w[1] < 0:  # two negative eigenvalues: use -h
            w = -w[::-1]
        scored.append((-round(float(-w[0] / np.linalg.norm(h)), 9), idx))
    ordered = [herm[i] for _, i in sorted(scored)]
    for _ in range(extra):
        c = rng.standard_normal(len(herm))
        ordered.append(sum(ci * h for ci, h in zip(c, herm)))
    return ordered


def find_distinguishable_basis_3d(ops: Sequence, tol: float = PROTOCOL_TOL, seed: int = 0) -> ProtocolWitness:
    """Protocol for a basis of the span of three states on ``C^3 (x) C^n``.

    Works whenever ``X = span{B_i^+ B_j}`` is a proper subspace of ``M_3``:
    a Hermitian ``M`` orthogonal (under ``Tr(M^T .)``) to ``X`` has one
    negative eigenvalue; measuring in its eigenbasis makes the outputs of
    ``Psi`` on the eigenprojectors commute, and their common eigenbasis
    gives the code basis.  The kernel element is taken from a reduced
    row-echelon basis of the kernel, ranked by its normalised negative
    eigenvalue; random combinations are tried if all of these fail.

    Raises
    ------
    StrictSubspaceRequired
        If ``dim X = 9``.
    CommutationFailure
        If no candidate yields commuting ``Psi`` outputs and a verified protocol.
    """
    ops = [as_matrix(o) for o in ops]
    if len(ops) != 3 or any(o.shape[1] != 3 for o in ops):
        raise DimensionMismatch("find_distinguishable_basis_3d needs three operators acting on C^3")
    states = StateSet.from_operators(ops)
    if not states.orthonormal:
        raise NotNormalized("states must be orthonormal")
    xs = x_subspace(ops)
    if xs.dim >= 9:
        raise StrictSubspaceRequired("span{B_i^+ B_j} is all of M_3")
    # kernel of M -> (Tr(M^T X_p))_p ; rows are vec(X_p) unconjugated
    ker = null_space(xs.flat(), as_tolerance(1e-9))
    ker = _rref_rows(ker.T).reshape(-1, 3, 3)
    psi = build_psi_map(ops)
    rng = np.random.default_rng(seed)
    worst_comm = 0.0
    for m in _kernel_candidates(ker, rng):
        w, v = np.linalg.eigh(m)
        if w[1] < -tol * np.linalg.norm(m):
            w, v = -w[::-1], v[:, ::-1]
        if w[0] >= -tol * np.linalg.norm(m):
            continue
        q1 = psi(np.outer(v[:, 1], v[:, 1].conj()))
        q2 = psi(np.outer(v[:, 2], v[:, 2].conj()))
        comm = float(np.linalg.norm(q1 @ q2 - q2 @ q1))
        worst_comm = max(worst_comm, comm)
        if comm > tol:
            continue
        try:
            coeffs = simultaneous_eigenbasis([q1, q2], as_tolerance(tol), seed)
        except (NotCommuting, NotNormal):
            continue
        rotated = rotate_states(states, coeffs)
        bob = normalised_bob_bases(rotated.ops, v)
        ov = verify_protocol(rotated, v, bob)
        if ov <= tol:
            return ProtocolWitness(v, bob, coeffs, ov)
    raise CommutationFailure(f"no kernel element gave a verified protocol (worst commutator {worst_comm:.3e})")


# -------------------------------------------------------------- obstructions


def schmidt_rank_obstruction(phi: BipartiteState, tol=None) -> Verdict:
    """Verdict on bases of the orthogonal complement of ``phi``.

    Schmidt rank above two rules out every basis of the complement; lower
    ranks leave the question open.
    """
    r = schmidt_rank(phi, tol)
    diag = [f"Schmidt rank {r}"]
    if r > 2:
        return Verdict(Status.NOT_DISTINGUISHABLE, certificate={"schmidt_rank": r}, diagnostics=diag)
    return Verdict(Status.INCONCLUSIVE, certificate={"schmidt_rank": r}, diagnostics=diag)


def _sym_antisym(d: int):
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    eye = np.eye(d * d)
    return (eye + swap) / 2, (eye - swap) / 2


def cross_block_norm(sigma, d: int | None = None) -> float:
    """``||Pi_s (sigma (x) I) Pi_a + Pi_a (sigma (x) I) Pi_s||_F``."""
    sigma = as_matrix(sigma)
    d = sigma.shape[0] if d is None else d
    ps, pa = _sym_antisym(d)
    big = np.kron(sigma, np.eye(d))
    return float(np.linalg.norm(ps @ big @ pa + pa @ big @ ps))


def sym_antisym_obstruction(d: int, sigmas: Sequence, tol=None):
    """Cross-block test for splitting ``C^d (x) C^d`` into symmetric and antisymmetric parts.

    Returns ``(holds, min_norm)``: the obstruction holds when every rank-one
    ``sigma`` leaves a cross-block term above tolerance.

    Raises
    ------
    RankOneRequired
        If some ``sigma`` is not rank one.
    """
    tol = as_tolerance(tol)
    norms = []
    for j, s in enumerate(sigmas):
        s = as_matrix(s, d, d)
        w = np.linalg.eigvalsh((s + dagger(s)) / 2)
        if np.sum(np.abs(w) > tol.threshold(float(np.max(np.abs(w))))) != 1:
            raise RankOneRequired(f"sigma {j} is not rank one")
        norms.append(cross_block_norm(s, d))
    m = min(norms) if norms else float("inf")
    return (not tol.is_zero(m, 1.0)), m


def necessary_commute_test(code: CodeSpace, alice_basis, dim_b: int | None = None, tol=None):
    """Do the compressions ``Q_j = P (|phi_j><phi_j| (x) I) P`` commute pairwise?

    Returns ``(ok, worst_commutator_norm)`` with ``Q_j`` taken in the code basis.
    """
    tol = as_tolerance(tol)
    basis = as_matrix(alice_basis)
    a = basis.shape[0]
    if dim_b is None:
        if code.ambient_dim % a:
            raise DimensionMismatch(f"code dimension {code.ambient_dim} is not a multiple of {a}")
        dim_b = code.ambient_dim // a
    if a * dim_b != code.ambient_dim:
        raise DimensionMismatch("Alice basis does not match the code's ambient dimension")
    # (phi phi^+ (x) I) C  ->  contract Alice index with phi^+
    c = code.basis.reshape(a, dim_b, code.dim)
    proj = np.einsum("ax,abk->xbk", basis.conj(), c)  # <phi_x| (x) I applied to C
    qs = np.einsum("xbk,xbl->xkl", proj.conj(), proj)
    worst = 0.0
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            worst = max(worst, float(np.linalg.norm(qs[i] @ qs[j] - qs[j] @ qs[i])))
    return tol.is_zero(worst, 1.0), worst


# ------------------------------------------------------------------ King search


@dataclass(eq=False)
class KingResult:
    witness: ProtocolWitness | None
    min_norm: float
    minima: list = field(default_factory=list)
    seeded: bool = False

    @property
    def found(self) -> bool:
        return self.witness is not None


def _hermitian_from(params: np.ndarray, n: int) -> np.ndarray:
    h = np.zeros((n, n), dtype=np.complex128)
    iu = np.triu_indices(n, 1)
    k = len(iu[0])
    h[iu] = params[:k] + 1j * params[k:2 * k]
    h = h + dagger(h)
    h[np.diag_indices(n)] = params[2 * k:]
    return h


def _code_ops(code: CodeSpace, dim_a: int) -> list:
    if code.ambient_dim % dim_a:
        raise DimensionMismatch(f"code dimension {code.ambient_dim} is not a multiple of {dim_a}")
    b = code.ambient_dim // dim_a
    return [from_vector(code.basis[:, k], dim_a, b).op_form for k in range(code.dim)]


def king_search(code: CodeSpace, attempts: int = 10, seed: int = 0, tol: float = 1e-7,
                dim_a: int = 3) -> KingResult:
    """Search for orthonormal ``phi_1, phi_2`` making the code compressions commute.

    When ``dim X < 9`` the constructive basis finder supplies the witness
    directly.  Otherwise each attempt starts from a random unitary and runs a
    quasi-Newton descent on ``||[Q_1, Q_2]||_F^2`` over ``U = U_0 exp(iH)``; a
    pair below ``tol`` is turned into a protocol and verified.  This is a
    search, not a decision procedure: failure proves nothing.
    """
    ops = _code_ops(code, dim_a)
    minima: list = []
    if code.dim == 3 and dim_a == 3 and x_subspace(ops).dim < 9:
        try:
            wit = find_distinguishable_basis_3d(ops, seed=seed)
            return KingResult(wit, 0.0, [0.0], seeded=True)
        except CommutationFailure as exc:
            log.info("constructive seeding failed: %s", exc)
    b = code.ambient_dim // dim_a
    c = code.basis.reshape(dim_a, b, code.dim)

    def comps(u):
        proj = np.einsum("ax,abk->xbk", u.conj(), c)
        return np.einsum("xbk,xbl->xkl", proj.conj(), proj)

    def objective(p, u0):
        u = u0 @ expm(1j * _hermitian_from(p, dim_a))
        q = comps(u[:, :2])
        return float(np.linalg.norm(q[0] @ q[1] - q[1] @ q[0]) ** 2)

    rng = np.random.default_rng(seed)
    best = (np.inf, None)
    states = StateSet.from_operators(ops)
    for t in range(attempts):
        u0 = random_unitary(dim_a, rng)
        res = minimize(objective, np.zeros(dim_a * dim_a), args=(u0,), method="BFGS",
                       options={"gtol": 1e-14, "maxiter": 2000})
        u = u0 @ expm(1j * _hermitian_from(res.x, dim_a))
        val = float(np.sqrt(max(res.fun, 0.0)))
        minima.append(val)
        log.info("king_search attempt %d: min commutator %.3e", t, val)
        if val < best[0]:
            best = (val, u)
    if best[0] > tol:
        return KingResult(None, best[0], minima)
    u = best[1]
    q = comps(u)
    try:
        coeffs = simultaneous_eigenbasis([q[0], q[1]], as_tolerance(max(tol, 1e-9)))
    except (NotCommuting, NotNormal):
        return KingResult(None, best[0], minima)
    rotated = rotate_states(states, coeffs)
    bob = normalised_bob_bases(rotated.ops, u)
    ov = verify_protocol(rotated, u, bob)
    return KingResult(ProtocolWitness(u, bob, coeffs, ov), best[0], minima)
