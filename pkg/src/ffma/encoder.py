"""Serial and parallel EP encoding, FFSP formation and frame layout.

Serial mode gives each user one EP and sends its K bits over K consecutive
data blocks.  Parallel mode gives each user K distinct EPs inside a single
data block.  Either way the finite-field sum of the users' words in a block
is that block's finite-field sum-pattern (FFSP).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .epcode import ElementPair, EpCode, ffsp
from .gf import FfVector, concat

SERIAL = "serial"
PARALLEL = "parallel"


class CapacityError(ValueError):
    pass


def _bits(bits) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64)
    if b.size and (b.min() < 0 or b.max() > 1):
        raise ValueError("bits must be 0 or 1")
    return b


def f_b2q(bit: int, pair: ElementPair) -> FfVector:
    """Switching function: bit 0 selects the zero word, bit 1 the one word."""
    return pair.word(int(bit))


def ffsp_of_user_block(block, code: EpCode) -> FfVector:
    """w = b·G1 + (1-b)·G0 mod p for one user block of M bits."""
    b = _bits(block).reshape(-1)
    if b.size != code.M:
        raise ValueError(f"user block must have {code.M} bits, got {b.size}")
    return FfVector(ffsp(code, b), code.p)


def encode_serial(bits, code: EpCode) -> tuple[list[FfVector], FfVector]:
    """Encode J users x K bits with user j on pair j.

    Returns:
        The per-user element sequences (length m·K each) and the FFSP sequence
        formed blockwise as their finite-field sum.
    """
    b = _bits(bits)
    if b.ndim != 2:
        raise ValueError("bits must be a J x K matrix")
    J, K = b.shape
    if J > code.M:
        raise CapacityError(f"serial mode serves at most M={code.M} users per block group, got J={J}")
    users = [concat([f_b2q(b[j, k], code.pairs[j]) for k in range(K)]) for j in range(J)]
    w = users[0]
    for u in users[1:]:
        w = w + u
    return users, w


def encode_parallel(bits, code: EpCode) -> tuple[list[FfVector], FfVector]:
    """Encode J_mc users x K bits inside one block; user j uses pairs jK .. jK+K-1."""
    b = _bits(bits)
    if b.ndim != 2:
        raise ValueError("bits must be a J_mc x K matrix")
    J, K = b.shape
    if J * K > code.M:
        raise CapacityError(f"parallel mode needs J_mc·K <= M, got {J}·{K} > {code.M}")
    words = []
    for j in range(J):
        c = f_b2q(b[j, 0], code.pairs[j * K])
        for k in range(1, K):
            c = c + f_b2q(b[j, k], code.pairs[j * K + k])
        words.append(c)
    w = words[0]
    for c in words[1:]:
        w = w + c
    return words, w


@dataclass(frozen=True)
class UserSlot:
    """Where one user's bits go: bit k uses EP ``eps[k]`` in data block ``blocks[k]``."""

    blocks: tuple[int, ...]
    eps: tuple[int, ...]


@dataclass(frozen=True)
class FrameLayout:
    T: int
    m: int
    M: int
    K: int
    J: int
    mode: str
    assignment: tuple[UserSlot, ...]

    @property
    def capacity(self) -> int:
        return frame_capacity(self.M, self.T, self.K, self.mode)

    def block_users(self, t: int) -> list[int]:
        return [j for j, s in enumerate(self.assignment) if t in s.blocks]


def frame_capacity(M: int, T: int, K: int, mode: str) -> int:
    if mode == SERIAL:
        return M * (T // K)
    if mode == PARALLEL:
        return (M // K) * T
    raise ValueError(f"unknown layout mode {mode!r}")


def plan_frame(M: int, m: int, T: int, K: int, J: int, mode: str) -> FrameLayout:
    """Assign J users x K bits to T data blocks, filling the lowest blocks first."""
    for name, val in (("M", M), ("m", m), ("T", T), ("K", K), ("J", J)):
        if val < 1:
            raise ValueError(f"{name} must be positive, got {val}")
    if mode == SERIAL and K > T:
        raise ValueError(f"serial mode needs K <= T, got K={K}, T={T}")
    if mode == PARALLEL and K > M:
        raise ValueError(f"parallel mode needs K <= M, got K={K}, M={M}")
    cap = frame_capacity(M, T, K, mode)
    if J > cap:
        raise CapacityError(
            f"J={J} exceeds the user bound M·T/K = {M}·{T}/{K} (usable capacity {cap})"
        )
    slots = []
    if mode == SERIAL:
        for j in range(J):
            g, e = divmod(j, M)
            slots.append(UserSlot(tuple(range(g * K, g * K + K)), (e,) * K))
    else:
        per_block = M // K
        for j in range(J):
            t, i = divmod(j, per_block)
            slots.append(UserSlot((t,) * K, tuple(range(i * K, i * K + K))))
    return FrameLayout(T, m, M, K, J, mode, tuple(slots))


def frame_user_words(layout: FrameLayout, code: EpCode, bits: np.ndarray) -> np.ndarray:
    """Per-user information sequences of length m·T for a batch of frames.

    Args:
        layout: frame layout.
        code: EP code with M pairs of length m.
        bits: array of shape (F, J, K).

    Returns:
        Integer array (F, J, m·T); blocks a user does not occupy are zero.
    """
    b = _bits(bits)
    F, J, K = b.shape
    if (J, K) != (layout.J, layout.K):
        raise ValueError(f"bits shape {(J, K)} does not match layout {(layout.J, layout.K)}")
    m, p = code.m, code.p
    g0, g1 = code.g_zero.a, code.g_one.a
    out = np.zeros((F, J, layout.T, m), dtype=np.int64)
    for j, slot in enumerate(layout.assignment):
        for k, (t, e) in enumerate(zip(slot.blocks, slot.eps)):
            bk = b[:, j, k][:, None]
            out[:, j, t] += bk * g1[e] + (1 - bk) * g0[e]
    return (out % p).reshape(F, J, layout.T * m)


def frame_ffsp(layout: FrameLayout, code: EpCode, bits: np.ndarray) -> np.ndarray:
    """FFSP sequence of length m·T for each frame in a batch."""
    return frame_user_words(layout, code, bits).sum(axis=1) % code.p


def block_user_bits(layout: FrameLayout, bits: np.ndarray, t: int) -> np.ndarray:
    """The M-bit user block of data block ``t``; unused EPs read as bit 0.

    Returns:
        Array (F, M) and a boolean mask (M,) of EPs in use.
    """
    b = np.asarray(bits)
    block = np.zeros((b.shape[0], layout.M), dtype=np.int64)
    used = np.zeros(layout.M, dtype=bool)
    for j, slot in enumerate(layout.assignment):
        for k, (tt, e) in enumerate(zip(slot.blocks, slot.eps)):
            if tt == t:
                block[:, e] = b[:, j, k]
                used[e] = True
    return block, used


def load_bits(path: str | Path) -> np.ndarray:
    """Read a bit matrix: header "J K" then J rows of 0/1 values."""
    tokens = Path(path).read_text().split()
    J, K = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    vals = [int(t) for t in body] if len(body) == J * K else [int(c) for t in body for c in t]
    if len(vals) != J * K:
        raise ValueError(f"{path}: expected {J * K} bits, found {len(vals)}")
    return _bits(np.array(vals).reshape(J, K))
