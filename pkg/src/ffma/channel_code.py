"""Systematic (N, mT) linear block codes over GF(p) and desk-scale decoders.

Codes are stored as ``g = [I | F_red]`` with K_gc = m·T information symbols
made of T data blocks of m symbols.  Two decoders are provided: exhaustive
maximum likelihood over the codebook, and q-ary sum-product (QSPA) belief
propagation on a parity-check matrix.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf
from .epcode import code_16_12_generator
from .gf import FfMatrix, FfVector

# exhaustive ML enumerates p^K_gc codewords
ML_MAX_CODEWORDS = 1 << 20


class DecoderError(ValueError):
    pass


@dataclass(frozen=True)
class SystematicCode:
    g: FfMatrix
    m: int
    h: FfMatrix | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        k = self.g.rows
        if k % self.m:
            raise ValueError(f"information length {k} is not a multiple of m={self.m}")
        if self.g.cols < k:
            raise ValueError("generator has fewer columns than rows")
        if not np.array_equal(self.g.a[:, :k], np.eye(k, dtype=np.int64)):
            raise ValueError("generator is not in systematic form [I | F_red]")
        h = self.h if self.h is not None else induced_parity_check(self.g)
        if h is not None:
            if h.p != self.p or h.cols != self.N:
                raise ValueError("parity-check matrix does not match the generator")
            if not (self.g @ h.T).is_zero():
                raise ValueError("g·h^T is not zero")
        object.__setattr__(self, "h", h)

    @property
    def p(self) -> int:
        return self.g.p

    @property
    def N(self) -> int:
        return self.g.cols

    @property
    def k(self) -> int:
        return self.g.rows

    @property
    def T(self) -> int:
        return self.k // self.m

    @property
    def R(self) -> int:
        return self.N - self.k

    @property
    def f_red(self) -> np.ndarray:
        return self.g.a[:, self.k :]

    @functools.cached_property
    def codebook(self) -> np.ndarray:
        """All codewords, in lexicographic order of their information part."""
        size = self.p**self.k
        if size > ML_MAX_CODEWORDS:
            raise DecoderError(
                f"codebook of {self.p}^{self.k} words exceeds the exhaustive limit {ML_MAX_CODEWORDS}"
            )
        idx = np.arange(size, dtype=np.int64)[:, None]
        powers = self.p ** np.arange(self.k - 1, -1, -1, dtype=np.int64)
        info = (idx // powers) % self.p  # base-p digits, most significant first
        return (info @ self.g.a) % self.p

    @functools.cached_property
    def _edges(self):
        return _TannerGraph(self.h)


def induced_parity_check(g: FfMatrix) -> FfMatrix | None:
    """h = [-F_red^T | I_R] for a systematic generator; None when R = 0."""
    k, n = g.shape
    if n == k:
        return None
    f = g.a[:, k:]
    return FfMatrix(np.hstack([(-f.T) % g.p, np.eye(n - k, dtype=np.int64)]), g.p)


@dataclass(frozen=True)
class Codeword:
    symbols: FfVector
    k: int

    @property
    def info(self) -> FfVector:
        return self.symbols[: self.k]

    @property
    def parity(self) -> FfVector | None:
        return self.symbols[self.k :] if len(self.symbols) > self.k else None

    def __str__(self) -> str:
        return str(self.symbols)


def code_16_12(p: int = 2) -> SystematicCode:
    """The (16, 12) systematic code with T=3 blocks of m=4 symbols."""
    if p not in (2, 3):
        raise ValueError("the (16, 12) code is defined over GF(2) or GF(3)")
    return SystematicCode(code_16_12_generator(p), m=4, name=f"code_16_12_gf{p}")


def encode(code: SystematicCode, info: FfVector) -> Codeword:
    if len(info) != code.k:
        raise ValueError(f"info length {len(info)} does not match K_gc={code.k}")
    if info.p != code.p:
        raise gf.ModulusMismatch(f"info over GF({info.p}), code over GF({code.p})")
    return Codeword(info @ code.g, code.k)


def encode_array(code: SystematicCode, info: np.ndarray) -> np.ndarray:
    """Batch encoding of integer info rows (..., K_gc) into (..., N)."""
    return (np.asarray(info, dtype=np.int64) @ code.g.a) % code.p


def place_and_encode(code: SystematicCode, u: FfVector, t: int) -> Codeword:
    """Encode the info sequence that holds ``u`` in data block ``t`` (1-based) and zeros elsewhere."""
    if not 1 <= t <= code.T:
        raise ValueError(f"block index {t} outside 1..{code.T}")
    if len(u) != code.m:
        raise ValueError(f"element length {len(u)} does not match m={code.m}")
    info = np.zeros(code.k, dtype=np.int64)
    info[(t - 1) * code.m : t * code.m] = u.elems
    return encode(code, FfVector(info, code.p))


def superpose(codewords: list[Codeword]) -> Codeword:
    """Finite-field sum of codewords of one code."""
    if not codewords:
        raise ValueError("nothing to superpose")
    k, n = codewords[0].k, len(codewords[0].symbols)
    for c in codewords:
        if c.k != k or len(c.symbols) != n or c.symbols.p != codewords[0].symbols.p:
            raise ValueError("codewords come from different codes")
    total = gf.vsum(c.symbols for c in codewords)
    return Codeword(total, k)


def _as_log_posteriors(code: SystematicCode, posteriors) -> np.ndarray:
    if isinstance(posteriors, FfVector):
        # hard input: symmetric channel with a small crossover, i.e. minimum Hamming distance
        p = code.p
        probs = np.full((len(posteriors), p), 0.01 / (p - 1))
        probs[np.arange(len(posteriors)), posteriors.elems] = 0.99
        posteriors = probs
    arr = np.asarray(posteriors, dtype=float)
    if arr.shape[-2:] != (code.N, code.p):
        raise ValueError(f"posteriors must have trailing shape ({code.N}, {code.p}), got {arr.shape}")
    with np.errstate(divide="ignore"):
        return np.log(arr)


def ml_decode_batch(code: SystematicCode, log_post: np.ndarray, chunk_bytes: int = 1 << 26) -> np.ndarray:
    """Exhaustive ML decoding of a batch of frames from log symbol posteriors (F, N, p).

    Returns:
        Integer array (F, K_gc) of decoded information symbols.
    """
    cb = code.codebook
    F = log_post.shape[0]
    out = np.empty((F, code.k), dtype=np.int64)
    cols = np.arange(code.N)
    per_frame = cb.shape[0] * 8
    step = max(1, chunk_bytes // per_frame)
    for s in range(0, F, step):
        lp = log_post[s : s + step]
        scores = np.zeros((lp.shape[0], cb.shape[0]))
        for n in cols:
            scores += lp[:, n, :][:, cb[:, n]]
        best = np.argmax(scores, axis=1)
        out[s : s + step] = cb[best, : code.k]
    return out


def ml_decode(code: SystematicCode, symbol_posteriors) -> FfVector:
    """Maximum-likelihood information sequence; ties go to the lexicographically smallest codeword.

    Args:
        code: systematic code with an enumerable codebook.
        symbol_posteriors: (N, p) symbol probabilities, or an FfVector of hard decisions.
    """
    lp = _as_log_posteriors(code, symbol_posteriors)
    return FfVector(ml_decode_batch(code, lp[None])[0], code.p)


class _TannerGraph:
    """Padded edge tables of a parity-check matrix for vectorized message passing."""

    def __init__(self, h: FfMatrix | None):
        if h is None:
            raise DecoderError("QSPA needs a parity-check matrix")
        self.h = h
        rows, cols = np.nonzero(h.a)
        self.n_edges = rows.size
        self.edge_check = rows
        self.edge_var = cols
        self.weight = h.a[rows, cols]
        self.check_slots = self._pad(rows, h.rows)
        self.var_slots = self._pad(cols, h.cols)
        p = h.p
        inv = np.array([0] + [gf.inv_mod(a, p) for a in range(1, p)])
        # x -> h·x is a permutation of GF(p); perm[e, a] = h_e·a
        self.perm = (self.weight[:, None] * np.arange(p)[None, :]) % p
        self.inv_perm = (inv[self.weight][:, None] * np.arange(p)[None, :]) % p

    @staticmethod
    def _pad(owner: np.ndarray, count: int) -> np.ndarray:
        deg = np.bincount(owner, minlength=count)
        slots = np.full((count, max(int(deg.max()), 1)), -1, dtype=np.int64)
        fill = np.zeros(count, dtype=np.int64)
        for e, o in enumerate(owner):
            slots[o, fill[o]] = e
            fill[o] += 1
        return slots


def _excluded_products(x: np.ndarray, axis: int) -> np.ndarray:
    """For each slot, the product of all other slots along ``axis`` (no division)."""
    x = np.moveaxis(x, axis, 0)
    d = x.shape[0]
    ones = np.ones_like(x[:1])
    pre = np.concatenate([ones, np.cumprod(x[:-1], axis=0)], axis=0)
    suf = np.concatenate([np.cumprod(x[::-1][:-1], axis=0)[::-1], ones], axis=0) if d > 1 else ones
    return np.moveaxis(pre * suf, 0, axis)


def _normalize(x: np.ndarray) -> np.ndarray:
    s = x.sum(axis=-1, keepdims=True)
    uniform = np.full_like(x, 1.0 / x.shape[-1])
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(s > 0, x / np.where(s > 0, s, 1.0), uniform)
    return out


@dataclass
class QspaResult:
    info: np.ndarray  # (F, K_gc)
    codeword: np.ndarray  # (F, N)
    converged: np.ndarray  # (F,) syndrome reached zero
    iterations: np.ndarray  # (F,) iterations used (0 = input already a codeword)
    beliefs: np.ndarray  # (F, N, p) final normalized beliefs


def qspa_decode_batch(code: SystematicCode, posteriors: np.ndarray, max_iter: int = 50,
                      early_exit: bool = True) -> QspaResult:
    """Flooding q-ary sum-product decoding, probability domain, vectorized over frames.

    Args:
        code: systematic code whose parity-check matrix drives the Tanner graph.
        posteriors: channel symbol probabilities, shape (F, N, p).
        max_iter: iteration cap.
        early_exit: freeze a frame as soon as its hard decision satisfies every check.
            With ``False`` all ``max_iter`` iterations run and ``converged`` only
            reports the final syndrome.
    """
    if code.p not in (2, 3):
        raise DecoderError(f"QSPA supports GF(2) and GF(3), got GF({code.p})")
    tg = code._edges
    p = code.p
    prior = _normalize(np.asarray(posteriors, dtype=float))
    F, N, _ = prior.shape
    h = tg.h.a
    E = tg.n_edges
    e_idx = np.arange(E)

    def syndrome_ok(x):
        return ~((x @ h.T) % p).any(axis=1)

    hard = np.argmax(prior, axis=2)
    beliefs = prior.copy()
    done = syndrome_ok(hard) if early_exit else np.zeros(F, dtype=bool)
    out_word = hard.copy()
    iters = np.zeros(F, dtype=np.int64)

    # variable-to-check messages start as the channel priors
    q = prior[:, tg.edge_var, :]  # (F, E, p)
    pad_c = tg.check_slots < 0
    pad_v = tg.var_slots < 0
    for it in range(1, max_iter + 1):
        if done.all():
            break
        # check update: permute to y = h·x, convolve others in the DFT domain, evaluate at -y
        qy = np.empty_like(q)
        qy[:, e_idx[:, None], tg.perm] = q
        spec = np.fft.fft(qy, axis=2)  # (F, E, p)
        cs = spec[:, np.where(pad_c, 0, tg.check_slots), :]
        cs[:, pad_c, :] = 1.0
        excl = _excluded_products(cs, axis=2)
        ry_slots = np.real(np.fft.ifft(excl, axis=3))
        ry = np.empty((F, E, p))
        ry[:, tg.check_slots[~pad_c], :] = ry_slots[:, ~pad_c, :]
        # probability that the other terms sum to -y, i.e. index (-s) mod p
        ry = ry[:, :, (-np.arange(p)) % p]
        r = ry[:, e_idx[:, None], tg.perm]  # back to x coordinates
        r = _normalize(np.clip(r, 0.0, None))

        # variable update
        vs = r[:, np.where(pad_v, 0, tg.var_slots), :]
        vs[:, pad_v, :] = 1.0
        excl_v = _excluded_products(vs, axis=2)
        full = excl_v[:, :, 0, :] * vs[:, :, 0, :]
        beliefs_new = _normalize(prior * full)
        qv = excl_v * prior[:, :, None, :]
        qn = np.empty_like(q)
        qn[:, tg.var_slots[~pad_v], :] = qv[:, ~pad_v, :]
        q = _normalize(qn)

        hard = np.argmax(beliefs_new, axis=2)
        ok = syndrome_ok(hard)
        active = ~done
        out_word[active] = hard[active]
        beliefs[active] = beliefs_new[active]
        iters[active] = it
        if early_exit:
            done = done | ok
    if not early_exit:
        done = syndrome_ok(out_word)
    return QspaResult(out_word[:, : code.k].copy(), out_word, done, iters, beliefs)


def qspa_decode(code: SystematicCode, symbol_posteriors, max_iter: int = 50) -> FfVector:
    """Symbolwise decision from q-ary sum-product beliefs for one frame."""
    res = qspa_decode_batch(code, np.asarray(symbol_posteriors, dtype=float)[None], max_iter)
    return FfVector(res.info[0], code.p)


def systematic_from_parity_check(h: FfMatrix, m: int | None = None, name: str = "") -> SystematicCode:
    """Systematic code for the null space of ``h``.

    Columns are reordered so that pivot columns of ``h`` become the parity
    positions at the end; the returned code carries ``h`` with the same
    column order.
    """
    red, piv = gf.row_reduce(h.a, h.p)
    free = [c for c in range(h.cols) if c not in piv]
    if not free:
        raise ValueError("parity-check matrix has full column rank; the code is trivial")
    order = free + list(piv)
    r = len(piv)
    a = red[:r][:, free]  # red[:, order] = [A | I_r]
    k = len(free)
    g = np.hstack([np.eye(k, dtype=np.int64), (-a.T) % h.p])
    h_perm = FfMatrix(h.a[:, order], h.p)
    return SystematicCode(FfMatrix(g, h.p), m if m is not None else k, h=h_perm, name=name)


def _count_four_cycles(h: np.ndarray) -> int:
    b = (h != 0).astype(np.int64)
    overlap = b @ b.T
    np.fill_diagonal(overlap, 0)
    return int((overlap * (overlap - 1) // 2).sum() // 2)


def random_regular_ldpc(
    n: int, dv: int = 3, dc: int = 6, p: int = 2, seed: int = 0, swaps: int = 2000
) -> FfMatrix:
    """Seeded random regular (dv, dc) parity-check matrix with best-effort 4-cycle removal.

    Nonzero entries over GF(3) are drawn uniformly from {1, 2}.
    """
    if (n * dv) % dc:
        raise ValueError(f"n·dv = {n * dv} is not divisible by dc = {dc}")
    rng = np.random.default_rng(seed)
    rows = n * dv // dc
    for _ in range(1000):
        sockets = np.repeat(np.arange(rows), dc)
        rng.shuffle(sockets)
        checks = sockets.reshape(n, dv)
        if all(len(set(c)) == dv for c in checks):
            break
    else:
        raise ValueError("could not build a regular graph without parallel edges")
    b = np.zeros((rows, n), dtype=np.int64)
    for v, cs in enumerate(checks):
        b[cs, v] = 1
    best = _count_four_cycles(b)
    for _ in range(swaps):
        if best == 0:
            break
        # swap the check endpoints of two random edges
        v1, v2 = rng.choice(n, size=2, replace=False)
        c1 = rng.choice(np.nonzero(b[:, v1])[0])
        c2 = rng.choice(np.nonzero(b[:, v2])[0])
        if c1 == c2 or b[c2, v1] or b[c1, v2]:
            continue
        b[c1, v1] = b[c2, v2] = 0
        b[c2, v1] = b[c1, v2] = 1
        cnt = _count_four_cycles(b)
        if cnt <= best:
            best = cnt
        else:
            b[c2, v1] = b[c1, v2] = 0
            b[c1, v1] = b[c2, v2] = 1
    if p > 2:
        b = b * rng.integers(1, p, size=b.shape)
    return FfMatrix(b, p)


def toy_ldpc_code(n: int = 12, p: int = 2, seed: int = 0, m: int | None = None) -> SystematicCode:
    """Small seeded LDPC code: (3,6)-regular over GF(2), (2,4)-regular over larger fields.

    Column weight 2 is the usual choice for nonbinary LDPC codes; at these lengths
    it also leaves the graph (nearly) free of 4-cycles, which loopy decoding needs.
    """
    dv, dc = (3, 6) if p == 2 else (2, 4)
    h = random_regular_ldpc(n, dv, dc, p, seed)
    return systematic_from_parity_check(h, m, name=f"toy_ldpc_n{n}_gf{p}_s{seed}")


def load_alist(path: str | Path, p: int = 2) -> FfMatrix:
    """Read an alist parity-check matrix.

    Column lines list 1-based check indices (0 pads).  For p > 2 each index may
    be followed by its nonzero coefficient.
    """
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    n, r = int(lines[0][0]), int(lines[0][1])
    max_cw = int(lines[1][0])
    col_w = [int(x) for x in lines[2]]
    col_lines = [[int(x) for x in lines[4 + v]] for v in range(n)]
    # weighted lists hold (index, value) pairs, possibly zero-padded to the maximum weight
    plain = all(len(t) in (col_w[v], max_cw) for v, t in enumerate(col_lines))
    weighted = p > 2 and not plain and all(len(t) in (2 * col_w[v], 2 * max_cw) for v, t in enumerate(col_lines))
    h = np.zeros((r, n), dtype=np.int64)
    for v, toks in enumerate(col_lines):
        pairs = list(zip(toks[0::2], toks[1::2])) if weighted else [(c, 1) for c in toks]
        for c, val in pairs:
            if c > 0:
                h[c - 1, v] = val % p
    return FfMatrix(h, p)


def load_code(path: str | Path, m: int | None = None) -> SystematicCode:
    """Load a code from a gf-format matrix file (systematic generator) or an ``.alist`` parity check."""
    path = Path(path)
    if path.suffix == ".alist":
        return systematic_from_parity_check(load_alist(path), m, name=path.stem)
    g = gf.load_matrix(path)
    return SystematicCode(g, m if m is not None else g.rows, name=path.stem)
