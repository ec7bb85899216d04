"""Element-pair (EP) codes: construction, classification and USPM checks.

An EP code holds M pairs of m-tuples over GF(p).  User j sends the
``zero_word`` of pair j for bit 0 and the ``one_word`` for bit 1.  Stacking
the words gives the two generator matrices ``g_zero`` and ``g_one``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import gf
from .gf import FfMatrix, FfVector

S_CWEP = "S-CWEP"
AI_CWEP = "AI-CWEP"
NO_CWEP = "NO-CWEP"
ORTHO_UDEP = "ORTHO-UDEP"
FAMILIES = (S_CWEP, AI_CWEP, NO_CWEP, ORTHO_UDEP)

MODE_CCMA = "FF-CCMA"
MODE_ORTHOGONAL = "FF-TDMA/FF-CDMA"
MODE_NOMA = "FF-NOMA"

UNIQUE = "unique"
AMBIGUOUS = "ambiguous"

# exhaustive injectivity checks enumerate 2^M blocks
EXHAUSTIVE_MAX_M = 12


class CodeConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class ElementPair:
    zero_word: FfVector
    one_word: FfVector

    def __post_init__(self):
        if self.zero_word.p != self.one_word.p or len(self.zero_word) != len(self.one_word):
            raise CodeConstructionError("pair words must share length and modulus")
        if self.zero_word == self.one_word:
            raise CodeConstructionError(f"pair words must differ, both are {self.zero_word}")

    def word(self, bit: int) -> FfVector:
        if bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {bit}")
        return self.one_word if bit else self.zero_word

    def __str__(self) -> str:
        return f"({self.zero_word}, {self.one_word})"


@dataclass(frozen=True)
class EpCode:
    g_zero: FfMatrix
    g_one: FfMatrix
    family: str
    pairs: tuple[ElementPair, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.g_zero.shape != self.g_one.shape or self.g_zero.p != self.g_one.p:
            raise CodeConstructionError("g_zero and g_one must have equal shape and modulus")
        if self.family not in FAMILIES:
            raise CodeConstructionError(f"unknown family {self.family!r}")
        expected = _structural_family(self.g_zero, self.g_one)
        allowed = {S_CWEP: {S_CWEP, ORTHO_UDEP}, AI_CWEP: {AI_CWEP, NO_CWEP}}[expected]
        if self.family not in allowed:
            raise CodeConstructionError(
                f"matrices are structurally {expected}, cannot be tagged {self.family}"
            )
        if self.family in (AI_CWEP, NO_CWEP) and self.p != 3:
            raise CodeConstructionError("additive-inverse families live over GF(3)")
        pairs = tuple(ElementPair(self.g_zero.row(j), self.g_one.row(j)) for j in range(self.M))
        object.__setattr__(self, "pairs", pairs)

    @property
    def p(self) -> int:
        return self.g_one.p

    @property
    def M(self) -> int:
        return self.g_one.rows

    @property
    def m(self) -> int:
        return self.g_one.cols

    @property
    def is_additive_inverse(self) -> bool:
        return self.family in (AI_CWEP, NO_CWEP)


def _structural_family(g_zero: FfMatrix, g_one: FfMatrix) -> str:
    if g_zero.is_zero():
        return S_CWEP
    if (g_zero + g_one).is_zero():
        return AI_CWEP
    raise CodeConstructionError(
        "g_zero is neither all-zero nor the additive inverse of g_one"
    )


def scwep_from_generator(g: FfMatrix) -> EpCode:
    """Single-codeword EP code: bit 0 sends the zero word, bit 1 sends row j of ``g``."""
    if g.p != 2:
        raise CodeConstructionError("S-CWEP generators are binary")
    family = ORTHO_UDEP if g == gf.identity(g.rows, 2) else S_CWEP
    return EpCode(gf.zeros(g.rows, g.cols, 2), g, family)


def orthogonal_udep(m: int) -> EpCode:
    return scwep_from_generator(gf.identity(m, 2))


TERNARY_BASE = ((1, 1), (2, 1))


def ternary_orthogonal(kappa: int) -> FfMatrix:
    """2^kappa x 2^kappa ternary orthogonal matrix, base [[1,1],[2,1]] Kronecker-folded."""
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    base = FfMatrix(TERNARY_BASE, 3)
    t = base
    for _ in range(kappa - 1):
        t = gf.kronecker(base, t)
    return t


def ternary_nonorthogonal_3x2() -> FfMatrix:
    return FfMatrix([[1, 1], [2, 1], [0, 1]], 3)


def is_row_orthogonal(t: FfMatrix) -> bool:
    """True when the rows are mutually orthogonal and self-correlations are nonzero."""
    gram = (t @ t.T).a
    off = gram - np.diag(np.diag(gram))
    return t.rows == t.cols and not off.any() and bool(np.all(np.diag(gram) != 0))


def ai_cwep_from_matrix(t: FfMatrix) -> EpCode:
    """Additive-inverse EP code with bit-1 words = rows of ``t``, bit-0 words = 2·rows."""
    if t.p != 3:
        raise CodeConstructionError("additive-inverse EP codes are ternary")
    family = AI_CWEP if is_row_orthogonal(t) else NO_CWEP
    return EpCode(gf.scale(2, t), t, family)


def ffsp(code: EpCode, block: np.ndarray) -> np.ndarray:
    """FFSP words for one or many user blocks; ``block`` has shape (..., M)."""
    b = np.asarray(block, dtype=np.int64)
    if b.shape[-1] != code.M:
        raise ValueError(f"user block must have {code.M} bits, got {b.shape[-1]}")
    return (b @ code.g_one.a + (1 - b) @ code.g_zero.a) % code.p


def all_blocks(M: int) -> np.ndarray:
    """All 2^M binary blocks in lexicographic order (first bit most significant)."""
    return np.array(list(itertools.product((0, 1), repeat=M)), dtype=np.int64)


def check_uspm(code: EpCode) -> str:
    """USPM verdict from the rank of the full-one generator matrix."""
    return UNIQUE if gf.rank(code.g_one) == code.M else AMBIGUOUS


def check_uspm_exhaustive(code: EpCode) -> str:
    """USPM verdict by enumerating every user block; limited to M <= 12."""
    if code.M > EXHAUSTIVE_MAX_M:
        raise ValueError(f"exhaustive check limited to M <= {EXHAUSTIVE_MAX_M}, got {code.M}")
    words = ffsp(code, all_blocks(code.M))
    distinct = np.unique(words, axis=0).shape[0]
    return UNIQUE if distinct == 2**code.M else AMBIGUOUS


def loading_factor(code: EpCode) -> Fraction:
    return Fraction(code.M, code.m)


def classify_mode(code_or_eta: EpCode | Fraction) -> str:
    eta = loading_factor(code_or_eta) if isinstance(code_or_eta, EpCode) else Fraction(code_or_eta)
    if eta <= 0:
        raise ValueError("loading factor must be positive")
    if eta < 1:
        return MODE_CCMA
    if eta == 1:
        return MODE_ORTHOGONAL
    return MODE_NOMA


def self_correlations(code: EpCode) -> list[int]:
    """Per-row finite-field self-correlation of the bit-1 words (0 where undefined)."""
    g = code.g_one
    return [gf.dot(g.row(j), g.row(j)) for j in range(code.M)]


def to_text(code: EpCode) -> str:
    header = f"{code.family} {code.p} {code.m} {code.M}\n"
    return header + gf.to_text(code.g_zero) + gf.to_text(code.g_one)


def from_text(text: str) -> EpCode:
    head, _, rest = text.strip().partition("\n")
    parts = head.split()
    if len(parts) != 4:
        raise ValueError(f"codebook header must be 'family p m M', got {head!r}")
    family, p, m, M = parts[0], int(parts[1]), int(parts[2]), int(parts[3])
    (g0, g1), _ = gf.read_matrices(rest, 2)
    if g1.shape != (M, m) or g1.p != p:
        raise ValueError(f"codebook matrices do not match header {head!r}")
    return EpCode(g0, g1, family)


def save(code: EpCode, path: str | Path) -> None:
    Path(path).write_text(to_text(code))


def load(path: str | Path) -> EpCode:
    return from_text(Path(path).read_text())


# Named constructions used by examples, tests and the CLI.

FULL_ONE_G1 = ("11111111", "00001111", "00110011", "01010101")

CODE_16_12_PARITY = (
    "1000", "0100", "0010", "0001", "0001", "1000",
    "0100", "0010", "0010", "0001", "1000", "0100",
)


def code_16_12_generator(p: int = 2) -> FfMatrix:
    """The 12x16 systematic matrix [I_12 | F] whose parity part is listed above."""
    f = np.array([[int(c) for c in r] for r in CODE_16_12_PARITY], dtype=np.int64)
    return FfMatrix(np.hstack([np.eye(12, dtype=np.int64), f]), p)


def scwep_full_one_code() -> EpCode:
    return scwep_from_generator(FfMatrix.from_rows(FULL_ONE_G1, 2))


def scwep_16_12_code() -> EpCode:
    return scwep_from_generator(code_16_12_generator(2))


def shipped_codes() -> dict[str, EpCode]:
    """Every code constructed by name in this package."""
    codes = {
        "scwep_full_one": scwep_full_one_code(),
        "scwep_16_12": scwep_16_12_code(),
        "ortho4": orthogonal_udep(4),
        "no_cwep_3x2": ai_cwep_from_matrix(ternary_nonorthogonal_3x2()),
    }
    for kappa in (1, 2, 3):
        codes[f"ai_cwep_k{kappa}"] = ai_cwep_from_matrix(ternary_orthogonal(kappa))
    return codes
