"""Fermionic contractions, magnetization and string correlators on the ring.

With A_l = c_l^dag + c_l and B_l = c_l^dag - c_l, every equal-time spin
observable reduces to the three elementary contractions <B_l A_m>, <A_l A_m>
and <B_l B_m>, evaluated as sums over the N/2 momentum modes.  Spin-spin
correlators then follow from the string construction: each one is 1/4 times
the Pfaffian of a skew-symmetric matrix filled with those contractions
(Wick's theorem for the quadratic fermion problem).

Time arguments accept math.inf, which selects the dephased long-time limit:
sin^2(2 t Lambda) -> 1/2 and sin(4 t Lambda) -> 0 mode by mode, while modes
with Lambda(after) below the series threshold never evolve and keep their
initial value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .dynamics import DEGENERACY_EPS, SERIES_EPS
from .errors import NumericalError
from .lattice import ChainConfig, grid_arrays

# Correlators are real; anything above this imaginary residue means the
# contraction table is inconsistent and the result cannot be trusted.
IMAG_TOL = 1e-10


class _ModeData(NamedTuple):
    """Per-mode arrays entering every contraction sum at fixed (config, t)."""

    phi: np.ndarray
    delta: np.ndarray
    x_a: np.ndarray  # cos(phi) + a
    x_b: np.ndarray  # cos(phi) + b
    weight: np.ndarray  # tanh(Lambda_a/kT)/Lambda_a with kT = 0 handled
    w: np.ndarray  # sin^2(2 t Lambda_b)/Lambda_b^2, dephased to 1/(2 Lambda_b^2)
    v: np.ndarray  # sin(4 t Lambda_b)/Lambda_b, dephased to 0


@lru_cache(maxsize=16)
def _mode_data(config: ChainConfig, t: float) -> _ModeData:
    phi, delta = grid_arrays(config)
    a, b = config.field_before, config.field_after
    x_a = np.cos(phi) + a
    x_b = np.cos(phi) + b
    lam_a = np.hypot(x_a, 0.5 * delta)
    lam_b = np.hypot(x_b, 0.5 * delta)

    if config.kt == 0.0:
        # Exactly degenerate modes are uniform at kT = 0 and contribute
        # nothing; nearby modes stay finite because |x_a|, |delta|/2 <= Lambda_a.
        live = lam_a > DEGENERACY_EPS
        weight = np.where(live, 1.0 / np.where(live, lam_a, 1.0), 0.0)
    else:
        arg = lam_a / config.kt
        small = arg < 1e-6
        weight = np.empty_like(lam_a)
        np.divide(np.tanh(arg), lam_a, out=weight, where=~small)
        weight[small] = (1.0 - arg[small] ** 2 / 3.0) / config.kt

    evolving = lam_b >= SERIES_EPS
    safe_lam_b = np.where(evolving, lam_b, 1.0)
    if math.isinf(t):
        w = np.where(evolving, 0.5 / safe_lam_b**2, 0.0)
        v = np.zeros_like(lam_b)
    else:
        s = np.where(evolving, np.sin(2.0 * t * lam_b) / safe_lam_b, 2.0 * t)
        w = s * s
        v = np.where(evolving, np.sin(4.0 * t * lam_b) / safe_lam_b, 4.0 * t)
    return _ModeData(phi, delta, x_a, x_b, weight, w, v)


def _ba_parts(config: ChainConfig, d: int, t: float) -> tuple[float, float]:
    """cos- and sin-weighted halves of <B_l A_{l+d}> (the sin half is odd in d)."""
    md = _mode_data(config, t)
    a, b = config.field_before, config.field_after
    cos_part = np.sum(
        md.weight * np.cos(d * md.phi) * (md.delta**2 * (b - a) * md.w + 2.0 * md.x_a)
    )
    sin_part = np.sum(
        md.weight * md.delta * np.sin(d * md.phi) * (1.0 + 2.0 * (a - b) * md.x_b * md.w)
    )
    n = config.n_sites
    return float(cos_part) / n, float(sin_part) / n


def _same_kind_imag(config: ChainConfig, d: int, t: float) -> float:
    """Shared imaginary part of <A_l A_{l+d}> and <B_l B_{l+d}>."""
    md = _mode_data(config, t)
    a, b = config.field_before, config.field_after
    total = np.sum(md.delta * (a - b) * np.sin(d * md.phi) * md.v * md.weight)
    return float(total) / config.n_sites


def _check_offset(config: ChainConfig, d: int):
    if not -config.n_sites < d < config.n_sites:
        raise ValueError(f"offset {d} outside the ring of {config.n_sites} sites")


def contraction_ba(config: ChainConfig, d: int, t: float) -> float:
    """<B_l A_{l+d}> at time t (math.inf for the dephased limit).

    Negative d is allowed; only the sin-weighted half changes sign.
    """
    _check_offset(config, d)
    cos_part, sin_part = _ba_parts(config, d, t)
    return cos_part + sin_part


def contraction_aa(config: ChainConfig, d: int, t: float) -> complex:
    """<A_l A_{l+d}>: delta_{d0} plus a purely imaginary quench part.

    The real part is the plain mode count (1/N) sum_k e^{i d phi_k} over the
    full N-point grid, which vanishes exactly for 0 < |d| < N; summing the
    cosine over only the N/2 paired modes would leave a spurious
    ((-1)^d - 1)/N offset that breaks the anticommutator {A_l, A_m} = 2 delta_lm.
    """
    _check_offset(config, d)
    re = 1.0 if d == 0 else 0.0
    return complex(re, _same_kind_imag(config, d, t))


def contraction_bb(config: ChainConfig, d: int, t: float) -> complex:
    """<B_l B_{l+d}>: -delta_{d0} plus the same imaginary part as contraction_aa."""
    _check_offset(config, d)
    re = -1.0 if d == 0 else 0.0
    return complex(re, _same_kind_imag(config, d, t))


def magnetization_z(config: ChainConfig, t: float) -> float:
    """Transverse magnetization per site, M_z(t) = (1/N) sum_l <S_l^z>."""
    md = _mode_data(config, t)
    a, b = config.field_before, config.field_after
    total = np.sum(md.weight * (2.0 * md.delta**2 * (b - a) * md.w + 4.0 * md.x_a))
    return float(total) / (4.0 * config.n_sites)


@dataclass(frozen=True)
class ContractionTable:
    """All contractions for offsets 0..d_max+1 at one (config, t).

    ba[d] holds <B_l A_{l+d}> for d >= 0; ba_at(d) also serves negative
    offsets through the sign flip of the sin-weighted half.
    """

    d_max: int
    ba: tuple
    ba_reversed: tuple
    aa: tuple
    bb: tuple

    def ba_at(self, d: int) -> float:
        return self.ba[d] if d >= 0 else self.ba_reversed[-d]

    def aa_at(self, d: int) -> complex:
        return self.aa[d]

    def bb_at(self, d: int) -> complex:
        return self.bb[d]


@lru_cache(maxsize=32)
def contraction_table(config: ChainConfig, t: float, d_max: int) -> ContractionTable:
    """Build (and cache) the contraction lookup used by the Pfaffian assembly."""
    ba, rev, aa, bb = [], [], [], []
    for d in range(d_max + 2):
        cos_part, sin_part = _ba_parts(config, d, t)
        ba.append(cos_part + sin_part)
        rev.append(cos_part - sin_part)
        im = _same_kind_imag(config, d, t)
        re = 1.0 if d == 0 else 0.0
        aa.append(complex(re, im))
        bb.append(complex(-re, im))
    return ContractionTable(
        d_max=d_max, ba=tuple(ba), ba_reversed=tuple(rev), aa=tuple(aa), bb=tuple(bb)
    )


class SkewMatrix:
    """Even-dimensional skew-symmetric matrix, antisymmetric by construction."""

    __slots__ = ("mat",)

    def __init__(self, mat: np.ndarray):
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        if mat.shape[0] % 2:
            raise ValueError(f"skew matrices of odd dimension {mat.shape[0]} have no Pfaffian")
        self.mat = mat

    @classmethod
    def from_upper(cls, dim: int, entry) -> "SkewMatrix":
        """Fill from an upper-triangle callback entry(i, j), i < j."""
        mat = np.zeros((dim, dim), dtype=complex)
        for i in range(dim):
            for j in range(i + 1, dim):
                val = entry(i, j)
                mat[i, j] = val
                mat[j, i] = -val
        return cls(mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def _pf_expand(a: np.ndarray) -> complex:
    """First-row expansion; exponential in the dimension, fine up to 8."""

    def rec(active: tuple) -> complex:
        if not active:
            return 1.0 + 0.0j
        first, rest = active[0], active[1:]
        total = 0.0 + 0.0j
        sign = 1.0
        for k, j in enumerate(rest):
            total += sign * a[first, j] * rec(rest[:k] + rest[k + 1 :])
            sign = -sign
        return total

    return rec(tuple(range(a.shape[0])))


def _pf_eliminate(a: np.ndarray) -> complex:
    """Skew-symmetric Gaussian elimination with partial pivoting, O(n^3)."""
    n = a.shape[0]
    val = 1.0 + 0.0j
    for k in range(0, n - 1, 2):
        pivot = k + 1 + int(np.argmax(np.abs(a[k + 1 :, k])))
        if pivot != k + 1:
            a[[k + 1, pivot], :] = a[[pivot, k + 1], :]
            a[:, [k + 1, pivot]] = a[:, [pivot, k + 1]]
            val = -val
        if a[k + 1, k] == 0.0:
            return 0.0 + 0.0j
        val *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2 :] / a[k, k + 1]
            col = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return val


def pfaffian(m) -> complex:
    """Pfaffian of a skew-symmetric matrix (SkewMatrix or array-like).

    Empty matrices have Pfaffian 1.  Dimensions up to 8 use the combinatorial
    expansion; larger ones use elimination with partial pivoting.
    """
    if isinstance(m, SkewMatrix):
        a = m.mat
    else:
        a = np.asarray(m, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] % 2:
            raise ValueError(f"skew matrices of odd dimension {a.shape[0]} have no Pfaffian")
        scale = np.max(np.abs(a)) if a.size else 0.0
        if scale and np.max(np.abs(a + a.T)) > 1e-12 * max(scale, 1.0):
            raise ValueError("matrix is not antisymmetric")
    if a.shape[0] == 0:
        return 1.0 + 0.0j
    if a.shape[0] <= 8:
        return _pf_expand(a)
    return _pf_eliminate(a.copy())


def _string_entry(table: ContractionTable, op_i, op_j) -> complex:
    kind_i, site_i = op_i
    kind_j, site_j = op_j
    if kind_i == "b" and kind_j == "a":
        return table.ba_at(site_j - site_i)
    if kind_i == "a" and kind_j == "b":
        # <A_i B_j> = -<B_j A_i> by anticommutation (distinct operators).
        return -table.ba_at(site_i - site_j)
    if kind_i == "a":
        return table.aa_at(site_j - site_i)
    return table.bb_at(site_j - site_i)


def _quarter_pfaffian(table: ContractionTable, ops: list, prefactor: float) -> float:
    skew = SkewMatrix.from_upper(len(ops), lambda i, j: _string_entry(table, ops[i], ops[j]))
    val = prefactor * pfaffian(skew) / 4.0
    if abs(val.imag) > IMAG_TOL:
        raise NumericalError(f"correlator imaginary residue {val.imag:.3e} exceeds {IMAG_TOL}")
    return float(val.real)


def _check_distance(config: ChainConfig, d: int):
    if d < 1:
        raise ValueError(f"correlator distance must be >= 1, got {d}")
    if d >= config.n_sites:
        raise ValueError(f"distance {d} outside the ring of {config.n_sites} sites")


def correlator_xx(config: ChainConfig, d: int, t: float) -> float:
    """S^x_{l,l+d}(t) = <S_l^x S_{l+d}^x> from the string Pfaffian."""
    _check_distance(config, d)
    table = contraction_table(config, t, d)
    ops = [("b", 0)]
    for k in range(1, d):
        ops += [("a", k), ("b", k)]
    ops.append(("a", d))
    return _quarter_pfaffian(table, ops, 1.0)


def correlator_yy(config: ChainConfig, d: int, t: float) -> float:
    """S^y_{l,l+d}(t); same string as S^x with A and B swapped and sign (-1)^d."""
    _check_distance(config, d)
    table = contraction_table(config, t, d)
    ops = [("a", 0)]
    for k in range(1, d):
        ops += [("b", k), ("a", k)]
    ops.append(("b", d))
    return _quarter_pfaffian(table, ops, float((-1) ** d))


def correlator_zz(config: ChainConfig, d: int, t: float) -> float:
    """S^z_{l,l+d}(t); a 4-operator Pfaffian, no string in between."""
    _check_distance(config, d)
    table = contraction_table(config, t, d)
    ops = [("a", 0), ("b", 0), ("a", d), ("b", d)]
    return _quarter_pfaffian(table, ops, 1.0)
