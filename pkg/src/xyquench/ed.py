"""Dense exact-diagonalization oracle for small rings.

Builds the full 2^N spin Hamiltonian

    H = -(1+gamma)/2 sum sx_i sx_{i+1} - (1-gamma)/2 sum sy_i sy_{i+1}
        - h sum sz_i              (periodic, coupling 1)

and computes thermal states, exact time evolution and two-site reduced
density matrices by brute force.  Everything here is deliberately
straightforward: it exists to validate the fermionic pipeline, which agrees
with it only up to the O(1/N) boundary term dropped by the mode picture, so
comparisons should tighten as N grows rather than hit machine precision.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Degenerate levels within this window share the kT = 0 ground-space weight.
GROUND_TOL = 1e-10


def _check_sites(n: int):
    if not 4 <= n <= 12:
        raise ValueError(f"ed oracle supports 4 <= n_sites <= 12, got {n}")


def _site_product(n: int, ops: dict):
    """Sparse kron product with ops[site] inserted and identities elsewhere."""
    factors = [sp.csr_matrix(ops.get(k, np.eye(2, dtype=complex))) for k in range(n)]
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


def build_hamiltonian(n: int, gamma: float, h: float) -> np.ndarray:
    """Dense 2^n x 2^n Hamiltonian of the ring at field h."""
    _check_sites(n)
    ham = sp.csr_matrix((2**n, 2**n), dtype=complex)
    jx = 0.5 * (1.0 + gamma)
    jy = 0.5 * (1.0 - gamma)
    for i in range(n):
        j = (i + 1) % n
        ham = ham - jx * _site_product(n, {i: SX, j: SX})
        ham = ham - jy * _site_product(n, {i: SY, j: SY})
        ham = ham - h * _site_product(n, {i: SZ})
    return ham.toarray()


def thermal_state(ham: np.ndarray, kt: float) -> np.ndarray:
    """Gibbs state exp(-H/kT)/Z; kT = 0 gives the ground-space projector.

    Weights are computed from energies shifted by the ground energy, so low
    temperatures never overflow.
    """
    if kt < 0:
        raise ValueError(f"kt must be non-negative, got {kt}")
    evals, vecs = np.linalg.eigh(ham)
    shifted = evals - evals[0]
    if kt == 0.0:
        weights = (shifted < GROUND_TOL).astype(float)
    else:
        weights = np.exp(-shifted / kt)
    weights /= weights.sum()
    return (vecs * weights) @ vecs.conj().T


def evolve(state: np.ndarray, ham_after: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) state exp(+i H t) through the spectral decomposition."""
    evals, vecs = np.linalg.eigh(ham_after)
    phase = np.exp(-1j * evals * t)
    rotated = vecs.conj().T @ state @ vecs
    return vecs @ (phase[:, None] * rotated * phase.conj()[None, :]) @ vecs.conj().T


def reduce_pair(state: np.ndarray, i: int, j: int) -> np.ndarray:
    """Two-site reduced density matrix for sites (i, j), site i as first factor."""
    dim = state.shape[0]
    n = int(round(math.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"state dimension {dim} is not a power of two")
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"need two distinct sites in 0..{n - 1}, got ({i}, {j})")
    tensor = state.reshape((2,) * (2 * n))
    order = [i, j] + [k for k in range(n) if k not in (i, j)]
    tensor = tensor.transpose(order + [n + k for k in order])
    tensor = tensor.reshape(4, 2 ** (n - 2), 4, 2 ** (n - 2))
    return np.einsum("arbr->ab", tensor)


def magnetization(state: np.ndarray) -> float:
    """(1/N) sum_i <S_i^z>; uses the diagonal of sum_i sigma_i^z directly."""
    dim = state.shape[0]
    n = int(round(math.log2(dim)))
    counts = np.array([bin(k).count("1") for k in range(dim)], dtype=float)
    total = float(np.real(np.diag(state)) @ (n - 2.0 * counts))
    return total / (2.0 * n)


def pair_correlators(state: np.ndarray, i: int, j: int):
    """(S^x, S^y, S^z) correlators <S_i^a S_j^a> of one site pair."""
    rho2 = reduce_pair(state, i, j)
    out = []
    for op in (SX, SY, SZ):
        out.append(float(np.trace(rho2 @ np.kron(op, op)).real) / 4.0)
    return tuple(out)


def quench_series(n: int, gamma: float, kt: float, a: float, b: float, times, d: int = 1):
    """Oracle observables (M_z, S^x, S^y, S^z, rho_pair) for each requested time.

    Diagonalizes the post-quench Hamiltonian once and reuses the spectral
    decomposition across the time grid.
    """
    _check_sites(n)
    rho0 = thermal_state(build_hamiltonian(n, gamma, a), kt)
    evals, vecs = np.linalg.eigh(build_hamiltonian(n, gamma, b))
    rotated = vecs.conj().T @ rho0 @ vecs
    rows = []
    for t in times:
        phase = np.exp(-1j * evals * t)
        rho_t = vecs @ (phase[:, None] * rotated * phase.conj()[None, :]) @ vecs.conj().T
        sx, sy, sz = pair_correlators(rho_t, 0, d % n)
        rows.append((magnetization(rho_t), sx, sy, sz, reduce_pair(rho_t, 0, d % n)))
    return rows
