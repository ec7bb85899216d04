"""Receiver side: complex-field sum-pattern (CFSP) statistics, posteriors and EP decoders.

The received noiseless sample at a position is the real sum of the users'
modulated symbols.  Its finite-field image is the FFSP symbol.  This module
holds the many-to-one map between the two, the prior of each CFSP value, the
per-symbol posterior under AWGN, and the correlation and MAP decoders for
orthogonal and overloaded EP codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import gf
from .epcode import EpCode, all_blocks, ffsp
from .gf import FfMatrix, FfVector
from .modem import f_f2c_3ask, f_f2c_bpsk

TERNARY_3ASK = "ternary_3ask"
BINARY_BPSK = "binary_bpsk"
GF2_BPSK = "gf2_bpsk"
ALPHABETS = (TERNARY_3ASK, BINARY_BPSK, GF2_BPSK)

MAP_MAX_M = 20

ERASURE = -1


@dataclass(frozen=True)
class CfspStats:
    """Noiseless CFSP values, their finite-field images and prior probabilities.

    ``omega_r`` is sorted in descending order.  ``p`` is the field of ``omega_v``.
    """

    J: int
    omega_r: np.ndarray
    omega_v: np.ndarray
    pmf: np.ndarray
    alphabet: str
    p: int = 3

    def __post_init__(self):
        n = len(self.omega_r)
        if len(self.omega_v) != n or len(self.pmf) != n:
            raise ValueError("omega_r, omega_v and pmf must have equal length")

    @property
    def size(self) -> int:
        return len(self.omega_r)


def cfsp_stats(J: int, alphabet: str = TERNARY_3ASK) -> CfspStats:
    """CFSP statistics for J users sending uniformly distributed symbols.

    ternary_3ask: each user sends 0, +1 or -1 with probability 1/3.
    binary_bpsk: each user sends +1 (symbol 1) or -1 (symbol 2) with probability 1/2.
    gf2_bpsk: each user sends +1 (symbol 1) or -1 (symbol 0) over GF(2).
    """
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    if alphabet == TERNARY_3ASK:
        r = np.arange(J, -J - 1, -1)
        # r = iota - nu with iota users on +1 and nu users on -1
        pmf = np.zeros(2 * J + 1)
        for iota in range(J + 1):
            for nu in range(J - iota + 1):
                pmf[J - (iota - nu)] += comb(J, iota) * comb(J - iota, nu)
        pmf /= 3.0**J
        return CfspStats(J, r, r % 3, pmf, alphabet, 3)
    if alphabet in (BINARY_BPSK, GF2_BPSK):
        r = np.arange(J, -J - 1, -2)
        iota = (r + J) // 2
        pmf = np.array([comb(J, int(i)) for i in iota], dtype=float) / 2.0**J
        if alphabet == BINARY_BPSK:
            return CfspStats(J, r, (2 * J - iota) % 3, pmf, alphabet, 3)
        return CfspStats(J, r, iota % 2, pmf, alphabet, 2)
    raise ValueError(f"unknown alphabet {alphabet!r}; expected one of {ALPHABETS}")


def cfsp_from_contributions(amplitudes, symbol_pmfs, levels, p: int, decimals: int = 9) -> CfspStats:
    """Exact CFSP statistics for independent users with individual amplitudes and symbol laws.

    Args:
        amplitudes: per-user amplitude a_j.
        symbol_pmfs: per-user probability vector over GF(p) symbols.
        levels: real level of each GF(p) symbol before scaling (e.g. 3ASK table).
        p: field size.
        decimals: rounding used to merge coincident real values.
    """
    vals = {(0.0, 0): 1.0}
    for a, q in zip(amplitudes, symbol_pmfs):
        nxt: dict[tuple[float, int], float] = {}
        for (r, v), pr in vals.items():
            for s in range(p):
                if q[s] <= 0:
                    continue
                key = (round(r + a * levels[s], decimals), (v + s) % p)
                nxt[key] = nxt.get(key, 0.0) + pr * q[s]
        vals = nxt
    keys = sorted(vals, key=lambda t: (-t[0], t[1]))
    r = np.array([k[0] for k in keys])
    v = np.array([k[1] for k in keys], dtype=np.int64)
    pmf = np.array([vals[k] for k in keys])
    return CfspStats(len(list(amplitudes)), r, v, pmf / pmf.sum(), "custom", p)


def f_c2f_hard(r: int, stats: CfspStats) -> int:
    """Finite-field image of a noiseless CFSP value."""
    idx = np.nonzero(np.isclose(stats.omega_r, r, rtol=0, atol=1e-9))[0]
    if idx.size == 0:
        raise ValueError(f"{r} is not a CFSP value for J={stats.J}")
    return int(stats.omega_v[idx[0]])


def f_c2f_hard_vec(r, stats: CfspStats) -> np.ndarray:
    return np.array([f_c2f_hard(x, stats) for x in np.asarray(r).reshape(-1)]).reshape(np.shape(r))


def _posterior_core(y: np.ndarray, centers: np.ndarray, omega_v: np.ndarray, log_pmf: np.ndarray,
                    n0: float, p: int) -> np.ndarray:
    # y (..., 1), centers (..., L) -> (..., p)
    logw = log_pmf - (y - centers) ** 2 / n0
    logw = logw - logw.max(axis=-1, keepdims=True)
    w = np.exp(logw)
    out = np.zeros(y.shape[:-1] + (p,))
    for s in range(p):
        out[..., s] = np.where(omega_v == s, w, 0.0).sum(axis=-1)
    return out / out.sum(axis=-1, keepdims=True)


def posterior(y, mu, n0: float, stats: CfspStats, p_avg: float = 1.0) -> np.ndarray:
    """P(v = s | y) for each received sample.

    The noiseless sample is sqrt(mu·P_avg)·omega_r(l) with prior pmf(l); the
    posterior sums the Gaussian likelihoods of every l whose image is s.

    Returns:
        Array of shape y.shape + (p,) whose rows sum to one.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    y = np.asarray(y, dtype=float)
    a = np.sqrt(np.asarray(mu, dtype=float) * p_avg)
    centers = np.multiply.outer(np.broadcast_to(a, y.shape), stats.omega_r)
    with np.errstate(divide="ignore"):
        log_pmf = np.log(stats.pmf)
    return _posterior_core(y[..., None], centers, stats.omega_v, log_pmf, n0, stats.p)


def posterior_table(y: np.ndarray, table: list[CfspStats], n0: float) -> np.ndarray:
    """Posteriors for frames of samples where position n has its own statistics ``table[n]``.

    Args:
        y: received samples, shape (F, N).
        table: N CfspStats with amplitudes already folded into omega_r.
        n0: noise spectral density.

    Returns:
        (F, N, p) posteriors.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    p = table[0].p
    L = max(s.size for s in table)
    N = len(table)
    centers = np.zeros((N, L))
    omega_v = np.full((N, L), -1, dtype=np.int64)
    log_pmf = np.full((N, L), -np.inf)
    for n, s in enumerate(table):
        centers[n, : s.size] = s.omega_r
        omega_v[n, : s.size] = s.omega_v
        with np.errstate(divide="ignore"):
            log_pmf[n, : s.size] = np.log(s.pmf)
    return _posterior_core(np.asarray(y, dtype=float)[..., None], centers, omega_v, log_pmf, n0, p)


def walsh_rows(t_o: FfMatrix) -> np.ndarray:
    """Real ±1 image of a ternary matrix with entries in {1, 2}."""
    return f_f2c_bpsk(t_o)


def correlate_complex(y_block, walsh_row, delta_th: float = 0.0) -> int:
    """Complex-field correlation detector: 1 above +delta, 0 below -delta, else erasure."""
    y = np.asarray(y_block, dtype=float)
    w = np.asarray(walsh_row, dtype=float)
    if y.shape != w.shape:
        raise ValueError(f"block length {y.shape} does not match row length {w.shape}")
    if delta_th < 0:
        raise ValueError("delta_th must be nonnegative")
    d = float(y @ w)
    if d > delta_th:
        return 1
    if d < -delta_th:
        return 0
    return ERASURE


def correlate_complex_batch(y: np.ndarray, rows: np.ndarray, delta_th: float = 0.0) -> np.ndarray:
    """Vectorized complex correlation of blocks (..., m) against rows (R, m) -> (..., R)."""
    d = np.asarray(y, dtype=float) @ np.asarray(rows, dtype=float).T
    out = np.full(d.shape, ERASURE, dtype=np.int64)
    out[d > delta_th] = 1
    out[d < -delta_th] = 0
    return out


class UndecodableSymbol(ValueError):
    pass


def correlate_ff(w: FfVector, row: FfVector, self_corr: int) -> int:
    """Finite-field correlation detector for additive-inverse orthogonal codes.

    With self-correlation 1 a dot product of 1 means bit 1 and 2 means bit 0;
    self-correlation 2 swaps the two.
    """
    if w.p != 3:
        raise ValueError("finite-field correlation works over GF(3)")
    if self_corr not in (1, 2):
        raise ValueError(f"self-correlation must be 1 or 2, got {self_corr}")
    d = gf.dot(w, row)
    if d == 0:
        raise UndecodableSymbol(f"zero correlation between {w} and {row}")
    return int(d == self_corr)


def correlate_ff_batch(w: np.ndarray, code: EpCode) -> np.ndarray:
    """Finite-field correlation of FFSP words (..., m) against every one-word row -> bits (..., M).

    A zero correlation yields ERASURE.
    """
    g = code.g_one.a
    d = (np.asarray(w, dtype=np.int64) @ g.T) % 3
    sc = np.einsum("ij,ij->i", g, g) % 3
    out = np.where(d == sc, 1, 0)
    return np.where(d == 0, ERASURE, out)


def noiseless_cfsp_table(code: EpCode, used=None) -> tuple[np.ndarray, np.ndarray]:
    """Every user block of the code and its noiseless real sum pattern.

    Unused EPs (``used`` False) are silent.  Over GF(3) each user's word is
    3ASK-modulated; over GF(2) each user sends binary BPSK on the support of
    its pair.

    Returns:
        (blocks (2^M', M'), cfsp (2^M', m)) with M' the number of used EPs.
    """
    M = code.M
    used = np.ones(M, dtype=bool) if used is None else np.asarray(used, dtype=bool)
    idx = np.nonzero(used)[0]
    blocks = all_blocks(idx.size)
    g0, g1 = code.g_zero.a[idx], code.g_one.a[idx]
    words = blocks[:, :, None] * g1[None] + (1 - blocks[:, :, None]) * g0[None]
    if code.p == 3:
        sig = f_f2c_3ask(words).sum(axis=1)
    else:
        support = (g0 != 0) | (g1 != 0)
        sig = ((2.0 * words - 1.0) * support[None]).sum(axis=1)
    return blocks, sig


def map_detect_overload(r_block, code: EpCode, stats: CfspStats | None = None, n0: float = 0.0,
                        prior=None) -> np.ndarray:
    """Block MAP detection over all 2^M user blocks of an EP code.

    Args:
        r_block: received real block of length m.
        code: EP code (typically overloaded).
        stats: unused beyond documentation of the alphabet; accepted for interface symmetry.
        n0: noise density; needed only with a non-uniform prior.
        prior: optional probability per user block (lexicographic order).

    Returns:
        The detected user block (M bits); ties go to the lexicographically smallest block.
    """
    if code.M > MAP_MAX_M:
        raise ValueError(f"MAP enumeration limited to M <= {MAP_MAX_M}, got {code.M}")
    r = np.asarray(r_block, dtype=float)
    if r.shape != (code.m,):
        raise ValueError(f"received block must have length {code.m}")
    blocks, table = noiseless_cfsp_table(code)
    metric = ((table - r) ** 2).sum(axis=1)
    if prior is not None:
        if n0 <= 0:
            raise ValueError("a non-uniform prior needs n0 > 0")
        with np.errstate(divide="ignore"):
            metric = metric / n0 - np.log(np.asarray(prior, dtype=float))
    return blocks[int(np.argmin(metric))]


def map_detect_batch(r: np.ndarray, blocks: np.ndarray, table: np.ndarray,
                     candidate_mask: np.ndarray | None = None) -> np.ndarray:
    """Minimum-distance detection of many blocks (F, m) against a candidate table.

    ``candidate_mask`` (F, C) restricts each frame to a subset of candidates.
    """
    metric = (r * r).sum(axis=1)[:, None] - 2.0 * r @ table.T + (table * table).sum(axis=1)[None]
    if candidate_mask is not None:
        metric = np.where(candidate_mask, metric, np.inf)
    return blocks[np.argmin(metric, axis=1)]


def ffsp_consistency_mask(w_hat: np.ndarray, code: EpCode, blocks: np.ndarray, used) -> np.ndarray:
    """Which candidate user blocks reproduce each decoded FFSP word (F, m) -> (F, C)."""
    used = np.asarray(used, dtype=bool)
    full = np.zeros((blocks.shape[0], code.M), dtype=np.int64)
    full[:, used] = blocks
    g0, g1 = code.g_zero.a.copy(), code.g_one.a.copy()
    g0[~used] = 0
    g1[~used] = 0
    cand = (full @ g1 + (1 - full) @ g0) % code.p
    return (np.asarray(w_hat)[:, None, :] == cand[None]).all(axis=2)


def ff_demux(w_hat: np.ndarray, code: EpCode, used=None) -> np.ndarray:
    """Recover user blocks from FFSP words (F, m) of a uniquely decodable code.

    The block whose FFSP is nearest in Hamming distance is chosen, which is
    the exact inverse when the word lies in the image; ties go to the lowest index.
    """
    used = np.ones(code.M, dtype=bool) if used is None else np.asarray(used, dtype=bool)
    idx = np.nonzero(used)[0]
    if idx.size > MAP_MAX_M:
        raise ValueError(f"demultiplexing limited to {MAP_MAX_M} active EPs")
    blocks = all_blocks(idx.size)
    full = np.zeros((blocks.shape[0], code.M), dtype=np.int64)
    full[:, idx] = blocks
    g0, g1 = code.g_zero.a.copy(), code.g_one.a.copy()
    g0[~used] = 0
    g1[~used] = 0
    cand = (full @ g1 + (1 - full) @ g0) % code.p
    w = np.asarray(w_hat, dtype=np.int64)
    dist = (w[:, None, :] != cand[None]).sum(axis=2)
    return blocks[np.argmin(dist, axis=1)]


def ffsp_words(code: EpCode, blocks) -> np.ndarray:
    return ffsp(code, blocks)
