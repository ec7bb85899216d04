"""Golden-vector replay of the worked examples, reported per example."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import butterfly, channel_code, epcode, gf, modem, receiver
from ..encoder import encode_parallel, encode_serial, ffsp_of_user_block, plan_frame
from ..gf import FfMatrix, FfVector


@dataclass(frozen=True)
class ReplayEntry:
    name: str
    passed: bool
    detail: str = ""


def _v(s: str, p: int = 3) -> FfVector:
    return FfVector.from_str(s, p)


def scwep_full_one() -> str | None:
    g1 = FfMatrix.from_rows(epcode.FULL_ONE_G1, 2)
    code = epcode.scwep_from_generator(g1)
    if gf.rank(g1) != 4 or epcode.check_uspm(code) != epcode.UNIQUE:
        return "rank of the 4x8 full-one matrix is not 4"
    if str(_v("1100", 2) @ g1) != "11110000":
        return "(1,1,0,0)·G1 is not 11110000"
    return None


T_O4 = ("1111", "2121", "2211", "1221")
T_O8 = ("11111111", "21212121", "22112211", "12211221",
        "22221111", "12122121", "11222211", "21121221")
T_O4_PAIRS = (("2222", "1111"), ("1212", "2121"), ("1122", "2211"), ("2112", "1221"))


def kronecker_ai_cwep() -> str | None:
    t2 = epcode.ternary_orthogonal(1)
    if t2 != FfMatrix([[1, 1], [2, 1]], 3):
        return "base ternary matrix mismatch"
    if gf.kronecker(t2, t2) != FfMatrix.from_rows(T_O4, 3):
        return "two-fold Kronecker product mismatch"
    if gf.kronecker(t2, epcode.ternary_orthogonal(2)) != FfMatrix.from_rows(T_O8, 3):
        return "three-fold Kronecker product mismatch"
    if gf.scale(2, t2) != FfMatrix([[2, 2], [1, 2]], 3):
        return "additive inverse of the base matrix mismatch"
    code = epcode.ai_cwep_from_matrix(epcode.ternary_orthogonal(2))
    got = tuple((str(pr.zero_word), str(pr.one_word)) for pr in code.pairs)
    if got != T_O4_PAIRS:
        return f"pairs {got}"
    if code.family != epcode.AI_CWEP or epcode.check_uspm(code) != epcode.UNIQUE:
        return "T_o(4,4) code is not a uniquely decodable AI-CWEP"
    if epcode.loading_factor(code) != 1:
        return "loading factor is not 1"
    return None


STRUCTURAL_ONE_WORDS = (
    "1000000000001000", "0100000000000100", "0010000000000010", "0001000000000001",
    "0000100000000001", "0000010000001000", "0000001000000100", "0000000100000010",
    "0000000010000010", "0000000001000001", "0000000000101000", "0000000000010100",
)


def structural_ccma_code() -> str | None:
    code = epcode.scwep_16_12_code()
    got = tuple(str(pr.one_word) for pr in code.pairs)
    if got != STRUCTURAL_ONE_WORDS:
        return f"one words {got}"
    if any(pr.zero_word.elems.any() for pr in code.pairs):
        return "zero words are not all-zero"
    if epcode.loading_factor(code) != Fraction(3, 4) or epcode.classify_mode(code) != epcode.MODE_CCMA:
        return "loading factor / mode mismatch"
    return None


def serial_encoding_chain() -> str | None:
    code = epcode.ai_cwep_from_matrix(epcode.ternary_orthogonal(2))
    bits = np.array([[1, 1, 0], [1, 0, 1], [0, 0, 1]])
    users, w = encode_serial(bits, code)
    want_u = ("111111112222", "212112122121", "112211222211")
    if tuple(str(u) for u in users) != want_u:
        return f"user sequences {[str(u) for u in users]}"
    if str(w) != "102101120221":
        return f"FFSP sequence {w}"
    cc = channel_code.code_16_12(3)
    cws = [channel_code.encode(cc, u) for u in users]
    if tuple(str(c.parity) for c in cws) != ("1111", "0000", "0102"):
        return f"parities {[str(c.parity) for c in cws]}"
    v2 = channel_code.superpose([channel_code.place_and_encode(cc, b, t + 1) for t, b in enumerate(users[1].blocks(4))])
    if v2 != cws[1]:
        return "blockwise placement of u2 differs from direct encoding"
    v_sum = channel_code.superpose(cws)
    if str(v_sum) != "1021011202211210":
        return f"v_sum {v_sum}"
    noiseless = np.zeros((16, 3))
    noiseless[np.arange(16), v_sum.symbols.elems] = 1.0
    if str(channel_code.ml_decode(cc, noiseless)) != "102101120221":
        return "ML decoding of the noiseless superposition failed"
    return None


NOMA_3X2_TABLE = (  # user block, FFSP block, CFSP block
    ("000", "00", (0, -3)), ("100", "22", (2, -1)), ("010", "12", (-2, -1)), ("001", "02", (0, -1)),
    ("111", "00", (0, 3)), ("011", "11", (-2, 1)), ("101", "21", (2, 1)), ("110", "01", (0, 1)),
)


def overloaded_noma_code() -> str | None:
    t = epcode.ternary_nonorthogonal_3x2()
    code = epcode.ai_cwep_from_matrix(t)
    got = tuple((str(pr.zero_word), str(pr.one_word)) for pr in code.pairs)
    if got != (("22", "11"), ("12", "21"), ("02", "01")):
        return f"pairs {got}"
    if epcode.loading_factor(code) != Fraction(3, 2) or epcode.classify_mode(code) != epcode.MODE_NOMA:
        return "loading factor / mode mismatch"
    if epcode.check_uspm(code) != epcode.AMBIGUOUS:
        return "overloaded code reported as unique"
    if str(_v("111") @ t) != "00" or gf.rank(t) != 2:
        return "3x2 matrix algebra mismatch"
    for b, w, r in NOMA_3X2_TABLE:
        bits = [int(c) for c in b]
        if str(ffsp_of_user_block(bits, code)) != w:
            return f"FFSP of {b}"
        _, sig = receiver.noiseless_cfsp_table(code)
        idx = int(b, 2)
        if tuple(int(x) for x in sig[idx]) != r:
            return f"CFSP of {b}: {sig[idx]}"
        if tuple(receiver.map_detect_overload(np.array(r, float), code)) != tuple(bits):
            return f"MAP detection of {r}"
    return None


USER_WORDS = ("1111111122221111", "2121121221210000", "1122112222110102")
RECEIVED_CFSP = ((1, 3, -1, 1), (3, 1, 1, -1), (-3, -1, -1, 1), (1, 2, 1, 0))
HARD_VHAT = "1021011202211210"


def ternary_modulation_hard_map() -> str | None:
    x = [modem.f_f2c_3ask(_v(s)) for s in USER_WORDS]
    want_x2 = [-1, 1, -1, 1, 1, -1, 1, -1, -1, 1, -1, 1, 0, 0, 0, 0]
    if x[1].tolist() != want_x2:
        return f"x2 {x[1].tolist()}"
    r = modem.gmac(x, 0.0)
    if tuple(tuple(int(a) for a in r[i * 4 : i * 4 + 4]) for i in range(4)) != RECEIVED_CFSP:
        return f"received CFSP {r}"
    stats = receiver.cfsp_stats(3)
    if stats.omega_r.tolist() != [3, 2, 1, 0, -1, -2, -3] or stats.omega_v.tolist() != [0, 2, 1, 0, 2, 1, 0]:
        return "J=3 CFSP statistics mismatch"
    vhat = "".join(str(receiver.f_c2f_hard(int(a), stats)) for a in r)
    if vhat != HARD_VHAT:
        return f"v_hat {vhat}"
    return None


def correlation_decoders() -> str | None:
    t = epcode.ternary_orthogonal(2)
    rows = receiver.walsh_rows(t)
    want = ((1, 1, 0), (1, 0, 1), (0, 0, 1))
    r_inf = np.array(RECEIVED_CFSP[:3], dtype=float)
    dots = r_inf @ rows.T
    if dots[:, 0].tolist() != [4, 4, -4] or dots[:, 1].tolist() != [4, -4, 4] or dots[:, 2].tolist() != [-4, -4, 4]:
        return f"complex correlations {dots.tolist()}"
    for j in range(3):
        bits = tuple(receiver.correlate_complex(r_inf[k], rows[j]) for k in range(3))
        if bits != want[j]:
            return f"complex-field bits of user {j + 1}: {bits}"
    w_hat = [_v(s) for s in ("1021", "0112", "0221")]
    want_dots = ((1, 1, 2), (1, 2, 1), (2, 2, 1))
    for j in range(3):
        row = t.row(j)
        sc = gf.dot(row, row)
        d = tuple(gf.dot(w, row) for w in w_hat)
        if d != want_dots[j]:
            return f"finite-field correlations of user {j + 1}: {d}"
        bits = tuple(receiver.correlate_ff(w, row, sc) for w in w_hat)
        if bits != want[j]:
            return f"finite-field bits of user {j + 1}: {bits}"
    return None


def layouts_and_pav() -> str | None:
    lay = plan_frame(4, 4, 4, 2, 8, "parallel")
    if lay.capacity != 8 or len(lay.block_users(0)) != 2:
        return "parallel layout capacity"
    noma = plan_frame(6, 4, 3, 1, 18, "parallel")
    if noma.capacity != 18:
        return "overloaded layout capacity"
    code = epcode.ai_cwep_from_matrix(epcode.ternary_orthogonal(2))
    _, w = encode_parallel(np.array([[1, 0], [0, 1]]), code)
    t = code.g_one
    want = t.row(0) + 2 * t.row(1) + 2 * t.row(2) + t.row(3)
    if w != want:
        return "parallel encoding mismatch"
    checks = (
        (modem.pav_regular("td", M=300, K=10, Q=100, m=400).as_tuple(), (30.0, 1.0)),
        (modem.pav_regular("cc_mip_parallel", M=300, K=10, Q=100, m=400, K_gc=8400, R=1600, N=10000).as_tuple(),
         (830.0, 1.0, 1.0)),
        (modem.pav_regular("cc_mbip_parallel", M=300, K=10, Q=100, m=400, K_gc=8400, R=1600, N=10000).as_tuple(),
         (630.0, 21.0, 1.0)),
    )
    for got, want_t in checks:
        if not np.allclose(got, want_t, rtol=0, atol=1e-9):
            return f"PAV {got} != {want_t}"
    return None


def butterfly_walkthroughs() -> str | None:
    c9 = butterfly.no_cwep_gf9()
    u1, u2, u3, w = butterfly.butterfly_encode((0, 0, 0), c9)
    if (str(u1), str(u2), str(u3), str(w)) != ("22", "12", "02", "00"):
        return "GF(9) encoding of (0,0,0)"
    if butterfly.destination_decode(1, u1, w, c9) != (0, 0, 0):
        return "GF(9) decoding at D1"
    if len(butterfly.candidates(1, u1, w, c9)) != 1:
        return "GF(9) candidate set at D1 is not a singleton"
    c7 = butterfly.aiep_gf7()
    u1, u2, u3, w = butterfly.butterfly_encode((0, 0, 0), c7)
    if (str(u1), str(u2), str(u3), str(w)) != ("1", "2", "4", "0"):
        return "GF(7) encoding of (0,0,0)"
    if butterfly.destination_decode(1, u1, w, c7) != (0, 0, 0):
        return "GF(7) decoding at D1"
    return None


CHECKS = (
    ("scwep_full_one", scwep_full_one),
    ("kronecker_ai_cwep", kronecker_ai_cwep),
    ("layouts_and_pav", layouts_and_pav),
    ("structural_ccma_code", structural_ccma_code),
    ("serial_encoding_chain", serial_encoding_chain),
    ("overloaded_noma_code", overloaded_noma_code),
    ("ternary_modulation_hard_map", ternary_modulation_hard_map),
    ("correlation_decoders", correlation_decoders),
    ("butterfly", butterfly_walkthroughs),
)


def replay_examples() -> list[ReplayEntry]:
    report = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            err = fn()
        except Exception as exc:  # a crash is a failed entry, not an aborted replay
            err = f"{type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - t0) * 1e3
        report.append(ReplayEntry(name, err is None, err or f"ok ({ms:.1f} ms)"))
    return report
