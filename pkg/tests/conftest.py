import numpy as np
import pytest

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def ket(*bits, dims=None):
    """Computational basis vector |b1 b2 ...> (qubits unless ``dims`` given)."""
    dims = dims or [2] * len(bits)
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    idx = 0
    for b, d in zip(bits, dims):
        idx = idx * d + b
    v[idx] = 1.0
    return v


def random_density(n, rng, rank=None):
    rank = rank or n
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def correctable_instance(rng, n=6, d=2, kraus=3, block=2):
    """Noise on C^n with a code basis whose noisy images are mutually orthogonal.

    Stinespring construction: code vector ``psi_k`` is sent into its own
    output block ``O_k`` (blocks mutually orthogonal), and the isometry is
    completed arbitrarily on the code's complement.  Returns
    ``(code_basis, kraus_list)`` with ``code_basis`` columns orthonormal.
    """
    m = d * block + 2  # output dimension, with spare room
    assert kraus * m >= n
    code = np.linalg.qr(rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d)))[0]
    out_blocks = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))[0]
    big = kraus * m
    v_code = np.zeros((big, d), dtype=complex)
    for k in range(d):
        o_k = out_blocks[:, k * block:(k + 1) * block]
        c = rng.standard_normal((kraus, block)) + 1j * rng.standard_normal((kraus, block))
        c /= np.linalg.norm(c)
        v_code[:, k] = np.concatenate([o_k @ c[i] for i in range(kraus)])
    # complete the isometry on the complement of the code
    comp_in = np.linalg.svd(code, full_matrices=True)[0][:, d:]
    u_out = np.linalg.svd(v_code, full_matrices=True)[0][:, d:]
    pick = u_out @ np.linalg.qr(rng.standard_normal((big - d, n - d)) + 1j * rng.standard_normal((big - d, n - d)))[0]
    v = v_code @ code.conj().T + pick @ comp_in.conj().T
    kraus_ops = [v[i * m:(i + 1) * m] for i in range(kraus)]
    return code, kraus_ops


def brute_force_output(kraus_ops, rho):
    out = np.zeros((kraus_ops[0].shape[0],) * 2, dtype=complex)
    for a in kraus_ops:
        for r in range(rho.shape[0]):
            for c in range(rho.shape[1]):
                out += rho[r, c] * np.outer(a[:, r], a[:, c].conj())
    return out


def simultaneous_schmidt_triple(rng, a=3):
    """``B_k = sqrt(a) U diag(d_k) V`` with ``d_k`` the columns of a random unitary."""
    from locc_qec.linalg import random_unitary

    u, v, dmat = random_unitary(a, rng), random_unitary(a, rng), random_unitary(a, rng)
    return [np.sqrt(a) * u @ np.diag(dmat[:, k]) @ v for k in range(3)]


def two_max_entangled_triple(rng):
    """Two orthogonal maximally entangled members plus a random orthonormal third."""
    from locc_qec.linalg import random_unitary

    u = random_unitary(3, rng)
    b1 = u
    b2 = u @ np.diag(np.exp(2j * np.pi * np.arange(3) / 3))
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    for b in (b1, b2):
        g = g - np.trace(b.conj().T @ g) / 3 * b
    b3 = g * np.sqrt(3) / np.linalg.norm(g)
    return [b1, b2, b3]


# acceptance results: criterion label -> list of (check, ok, detail)
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_RESULTS, key=lambda s: (len(s), s)):
        checks = ACCEPTANCE_RESULTS[label]
        ok = all(c[1] for c in checks)
        failed = [f"{c[0]}: {c[2].splitlines()[0]}" for c in checks if not c[1]]
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}"
        if failed:
            line += " -- " + "; ".join(failed)
        terminalreporter.write_line(line)
