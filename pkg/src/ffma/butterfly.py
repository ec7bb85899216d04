"""Network FFMA on a 3-dimensional butterfly network.

Three source nodes each map one message bit to a field element.  A relay
forms the finite-field sum w and forwards it to every destination.
Destination j also hears u_j directly, which resolves the ambiguity that the
overloaded sum alone leaves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .epcode import ElementPair, ai_cwep_from_matrix, ternary_nonorthogonal_3x2
from .gf import FfVector, vsum

NO_CWEP_GF9 = "no_cwep_gf9"
AIEP_GF7 = "aiep_gf7"
CODE_ALIASES = {"gf9": NO_CWEP_GF9, "gf7": AIEP_GF7, NO_CWEP_GF9: NO_CWEP_GF9, AIEP_GF7: AIEP_GF7}


class AmbiguousDecode(ValueError):
    pass


class InconsistentInput(ValueError):
    pass


@dataclass(frozen=True)
class OverloadNetworkCode:
    kind: str
    pairs: tuple[ElementPair, ElementPair, ElementPair]

    def __post_init__(self):
        for pr in self.pairs:
            if (pr.zero_word + pr.one_word).elems.any():
                raise ValueError(f"pair {pr} is not an additive-inverse pair")

    @property
    def p(self) -> int:
        return self.pairs[0].zero_word.p


def no_cwep_gf9() -> OverloadNetworkCode:
    """Three pairs of GF(3) 2-tuples: (22, 11), (12, 21), (02, 01)."""
    code = ai_cwep_from_matrix(ternary_nonorthogonal_3x2())
    return OverloadNetworkCode(NO_CWEP_GF9, code.pairs)


def aiep_gf7() -> OverloadNetworkCode:
    """Three additive-inverse scalar pairs over GF(7).

    Bit 0 maps to 1, 2, 4 and bit 1 to 6, 5, 3 for sources 1, 2, 3, so the
    all-zero message sums to 1 + 2 + 4 = 0.
    """
    zero, one = (1, 2, 4), (6, 5, 3)
    pairs = tuple(ElementPair(FfVector([a], 7), FfVector([b], 7)) for a, b in zip(zero, one))
    return OverloadNetworkCode(AIEP_GF7, pairs)


def get_code(name: str) -> OverloadNetworkCode:
    try:
        kind = CODE_ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown butterfly code {name!r}; expected gf9 or gf7") from None
    return no_cwep_gf9() if kind == NO_CWEP_GF9 else aiep_gf7()


def butterfly_encode(bits, code: OverloadNetworkCode) -> tuple[FfVector, FfVector, FfVector, FfVector]:
    """Source mapping u_j = F_B2q(b_j, C_j) and relay sum w = u_1 + u_2 + u_3."""
    b = [int(x) for x in bits]
    if len(b) != 3 or any(x not in (0, 1) for x in b):
        raise ValueError(f"message must be three bits, got {bits}")
    u = tuple(pr.word(bit) for pr, bit in zip(code.pairs, b))
    return u[0], u[1], u[2], vsum(u)


def candidates(j: int, u_j: FfVector, w: FfVector, code: OverloadNetworkCode) -> list[tuple[int, int, int]]:
    """All messages consistent with destination j's observations (j is 1-based)."""
    out = []
    for msg in itertools.product((0, 1), repeat=3):
        cu = [pr.word(b) for pr, b in zip(code.pairs, msg)]
        if cu[j - 1] == u_j and vsum(cu) == w:
            out.append(msg)
    return out


def destination_decode(j: int, u_j: FfVector, w: FfVector, code: OverloadNetworkCode) -> tuple[int, int, int]:
    """Recover the 3-bit message at destination j from u_j and the relayed sum w."""
    if j not in (1, 2, 3):
        raise ValueError(f"destination index must be 1, 2 or 3, got {j}")
    found = candidates(j, u_j, w, code)
    if not found:
        raise InconsistentInput(f"no message matches u_{j}={u_j}, w={w}")
    if len(found) > 1:
        raise AmbiguousDecode(f"{len(found)} messages match u_{j}={u_j}, w={w}")
    return found[0]


@dataclass(frozen=True)
class ButterflyTrace:
    message: tuple[int, int, int]
    u: tuple[FfVector, FfVector, FfVector]
    w: FfVector
    decodes: tuple[tuple[int, int, int], ...]
    candidate_counts: tuple[int, int, int]

    @property
    def ok(self) -> bool:
        return all(d == self.message for d in self.decodes) and self.candidate_counts == (1, 1, 1)


def trace(bits, code: OverloadNetworkCode) -> ButterflyTrace:
    u1, u2, u3, w = butterfly_encode(bits, code)
    u = (u1, u2, u3)
    counts = tuple(len(candidates(j, u[j - 1], w, code)) for j in (1, 2, 3))
    decodes = tuple(destination_decode(j, u[j - 1], w, code) for j in (1, 2, 3))
    return ButterflyTrace(tuple(int(x) for x in bits), u, w, decodes, counts)


def trace_table(code: OverloadNetworkCode) -> list[ButterflyTrace]:
    return [trace(msg, code) for msg in itertools.product((0, 1), repeat=3)]


def format_trace_table(code: OverloadNetworkCode) -> str:
    lines = [f"# code={code.kind} p={code.p}", "message,u1,u2,u3,w,D1,D2,D3,ok"]
    for tr in trace_table(code):
        msg = "".join(map(str, tr.message))
        decs = ["".join(map(str, d)) for d in tr.decodes]
        lines.append(",".join([msg, *(str(x) for x in tr.u), str(tr.w), *decs, str(tr.ok).lower()]))
    return "\n".join(lines)


def fsp_table(code: OverloadNetworkCode) -> np.ndarray:
    """Relay sum for every message, as an (8, len(w)) integer array in message order."""
    return np.array([trace(msg, code).w.elems for msg in itertools.product((0, 1), repeat=3)])
