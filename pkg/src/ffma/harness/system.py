"""End-to-end FFMA link: EP encoding, channel coding, modulation, GMAC and decoding.

A ``System`` is built once from an ``ExperimentConfig`` and then maps batches
of user bits and unit-variance noise to decoded bits.  All per-frame work is
vectorized over the batch axis.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .. import channel_code as ccm
from .. import epcode
from ..encoder import CapacityError, frame_capacity, plan_frame
from ..epcode import EpCode
from ..modem import Pav, pav_regular
from ..receiver import CfspStats, cfsp_from_contributions, posterior_table
from .config import ConfigError, ExperimentConfig, validate_basic

log = logging.getLogger(__name__)

# real level of each field symbol before amplitude scaling
LEVELS = {2: np.array([-1.0, 1.0]), 3: np.array([0.0, 1.0, -1.0])}

JOINT_MAX_BITS = 16
BLOCK_MAP_MAX_BITS = 16

CLASS_UNUSED, CLASS_INFO, CLASS_PARITY, CLASS_CODE_PARITY = 0, 1, 2, 3


def build_ep_code(spec: str) -> EpCode:
    """EP code from a recipe string.

    Recipes: ``ortho:<m>``, ``scwep_full_one``, ``scwep_16_12``, ``ai_cwep:<kappa>``,
    ``no_cwep_3x2``, ``file:<path>`` (codebook text format).
    """
    name, _, arg = spec.partition(":")
    try:
        if name == "ortho":
            return epcode.orthogonal_udep(int(arg))
        if name == "scwep_full_one":
            return epcode.scwep_full_one_code()
        if name == "scwep_16_12":
            return epcode.scwep_16_12_code()
        if name == "ai_cwep":
            return epcode.ai_cwep_from_matrix(epcode.ternary_orthogonal(int(arg)))
        if name == "no_cwep_3x2":
            return epcode.ai_cwep_from_matrix(epcode.ternary_nonorthogonal_3x2())
        if name == "file":
            return epcode.load(arg)
    except (ValueError, OSError) as exc:
        raise ConfigError("ep.code", str(exc)) from None
    raise ConfigError("ep.code", f"unknown recipe {spec!r}")


def build_channel_code(spec: str, p: int, m: int) -> ccm.SystematicCode | None:
    """Channel code from a recipe: ``none``, ``code_16_12``, ``toy_ldpc:<n>:<seed>``, ``file:<path>``."""
    name, _, arg = spec.partition(":")
    try:
        if name == "none":
            return None
        if name == "code_16_12":
            code = ccm.code_16_12(p)
            if m != code.m:
                raise ValueError(f"the (16, 12) code has m=4 blocks, EP code has m={m}")
            return code
        if name == "toy_ldpc":
            n, _, seed = arg.partition(":")
            return ccm.toy_ldpc_code(int(n), p, int(seed or 0), m)
        if name == "file":
            code = ccm.load_code(arg, m)
            if code.p != p:
                raise ValueError(f"channel code over GF({code.p}), EP code over GF({p})")
            return code
    except (ValueError, OSError) as exc:
        raise ConfigError("channel.code", str(exc)) from None
    raise ConfigError("channel.code", f"unknown recipe {spec!r}")


def _check_mode(mode: str, code: EpCode) -> None:
    kind = epcode.classify_mode(code)
    ok = {
        "ff_tdma": code.p == 2 and kind == epcode.MODE_ORTHOGONAL,
        "ff_ccma": code.p == 2 and kind == epcode.MODE_CCMA,
        "ff_cdma": code.family == epcode.AI_CWEP,
        "ff_noma": kind == epcode.MODE_NOMA,
    }[mode]
    if not ok:
        raise ConfigError(
            "system.mode", f"{mode} does not match a {code.family} code with loading factor {epcode.loading_factor(code)}"
        )


def _is_orthogonal_antipodal(code: EpCode) -> bool:
    return code.family == epcode.ORTHO_UDEP or code.family == epcode.AI_CWEP


@dataclass(frozen=True)
class BlockPlan:
    """Bits carried in one data block: (user, bit index, EP index) triples and the block's positions."""

    t: int
    slots: tuple[tuple[int, int, int], ...]
    positions: np.ndarray


class System:
    def __init__(self, cfg: ExperimentConfig):
        validate_basic(cfg)
        self.cfg = cfg
        self.code = build_ep_code(cfg.ep_code)
        _check_mode(cfg.mode, self.code)
        self.p = self.code.p
        m, M = self.code.m, self.code.M
        self.cc = build_channel_code(cfg.channel_code, self.p, m)
        self.T = self._frame_blocks()
        try:
            self.layout = plan_frame(M, m, self.T, cfg.K, cfg.J, cfg.layout)
        except CapacityError as exc:
            raise ConfigError("system.J", str(exc)) from None
        except ValueError as exc:
            raise ConfigError("system.K", str(exc)) from None
        self.info_len = m * self.T
        self.L = self.cc.N if self.cc else self.info_len
        self._check_chain()
        self._build_contributions()
        self._build_power()
        self._build_priors()
        self.blocks = self._block_plans()
        self._joint_table = None
        self._block_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    # construction -----------------------------------------------------------------

    def _frame_blocks(self) -> int:
        cfg, M = self.cfg, self.code.M
        if self.cc is not None:
            if cfg.T and cfg.T != self.cc.T:
                raise ConfigError("system.T", f"channel code carries T={self.cc.T} blocks, config says {cfg.T}")
            return self.cc.T
        if cfg.T:
            return cfg.T
        if cfg.layout == "serial":
            return cfg.K * -(-cfg.J // M)
        per_block = M // cfg.K
        if per_block == 0:
            raise ConfigError("system.K", f"K={cfg.K} exceeds M={M}")
        return -(-cfg.J // per_block)

    def _check_chain(self) -> None:
        chain = self.cfg.decoder
        coded = self.cc is not None
        if chain == ("joint",):
            if self.cfg.J * self.cfg.K > JOINT_MAX_BITS:
                raise ConfigError("decoder.chain", f"joint decoding limited to J·K <= {JOINT_MAX_BITS}")
            return
        if coded:
            valid = len(chain) == 2 and chain[0] in ("ml", "qspa") and chain[1] in ("map", "correlation")
        else:
            valid = len(chain) == 1 and chain[0] in ("map", "correlation")
        if not valid:
            raise ConfigError(
                "decoder.chain",
                f"{','.join(chain)} is not valid {'with' if coded else 'without'} a channel code",
            )
        if chain[-1] == "correlation" and not _is_orthogonal_antipodal(self.code):
            raise ConfigError("decoder.chain", f"correlation decoding needs an orthogonal code, got {self.code.family}")
        if chain[0] == "qspa" and self.p not in (2, 3):
            raise ConfigError("decoder.chain", "qspa needs GF(2) or GF(3)")

    def _build_contributions(self) -> None:
        """Codeword contribution of every (user, bit) for bit 0 and bit 1; the link is linear in them."""
        J, K, m = self.cfg.J, self.cfg.K, self.code.m
        g0, g1 = self.code.g_zero.a, self.code.g_one.a
        c0 = np.zeros((J, K, self.info_len), dtype=np.int64)
        c1 = np.zeros_like(c0)
        for j, slot in enumerate(self.layout.assignment):
            for k, (t, e) in enumerate(zip(slot.blocks, slot.eps)):
                c0[j, k, t * m : (t + 1) * m] = g0[e]
                c1[j, k, t * m : (t + 1) * m] = g1[e]
        if self.cc is not None:
            c0 = ccm.encode_array(self.cc, c0)
            c1 = ccm.encode_array(self.cc, c1)
        self.c0, self.c1 = c0, c1
        self.support = ((c0 != 0) | (c1 != 0)).any(axis=1)  # (J, L)

    def _position_classes(self) -> np.ndarray:
        J, m = self.cfg.J, self.code.m
        g1 = self.code.g_one.a
        unit_row = np.full(m, -1)
        for c in range(m):
            nz = np.nonzero(g1[:, c])[0]
            if nz.size == 1:
                unit_row[c] = nz[0]
        has_units = (unit_row >= 0).any()
        classes = np.zeros((J, self.L), dtype=np.int64)
        for j, slot in enumerate(self.layout.assignment):
            mine = set(zip(slot.blocks, slot.eps))
            for n in np.nonzero(self.support[j])[0]:
                if n >= self.info_len:
                    classes[j, n] = CLASS_CODE_PARITY
                    continue
                t, c = divmod(int(n), m)
                if not has_units or (t, int(unit_row[c])) in mine:
                    classes[j, n] = CLASS_INFO
                else:
                    classes[j, n] = CLASS_PARITY
        return classes

    def _build_power(self) -> None:
        cfg = self.cfg
        self.classes = self._position_classes()
        J = cfg.J
        mu = np.zeros((J, self.L))
        self.pav_factors = np.ones(J)
        if cfg.pav == "none":
            mu[self.support] = 1.0
            self.regular_pav = None
        else:
            M, m = self.code.M, self.code.m
            Q = max(m - M, 0)
            if self.cc is None:
                reg = pav_regular("td", M=M, K=cfg.K, Q=Q, m=m, p_avg=cfg.p_avg)
                total = m
            else:
                mode = f"cc_{cfg.pav}_{cfg.layout}"
                reg = pav_regular(mode, M=M, K=cfg.K, Q=Q, m=m, K_gc=self.cc.k,
                                  R=self.cc.R, N=self.cc.N, p_avg=cfg.p_avg)
                total = self.cc.N
            self.regular_pav = reg
            for j in range(J):
                pav, k = reg.expand(self.classes[j], total)
                mu[j] = pav.mu
                self.pav_factors[j] = k
            if not np.allclose(self.pav_factors, 1.0):
                log.info("per-user PAV expansion factors: %s", np.round(self.pav_factors, 6).tolist())
        self.mu = mu
        self.amp = np.sqrt(mu * cfg.p_avg) * self.support

    def _build_priors(self) -> None:
        p, J, K = self.p, self.cfg.J, self.cfg.K
        # per-user symbol law at each position under uniform bits
        P = np.zeros((J, self.L, p))
        P[:, :, 0] = 1.0
        idx = np.arange(p)
        for k in range(K):
            s0 = (idx[None, None, :] - self.c0[:, k, :, None]) % p
            s1 = (idx[None, None, :] - self.c1[:, k, :, None]) % p
            P = 0.5 * np.take_along_axis(P, s0, axis=2) + 0.5 * np.take_along_axis(P, s1, axis=2)
        self.symbol_pmf = P
        levels = LEVELS[p]
        energy = (self.amp**2 * (P * levels**2).sum(axis=2)).sum()
        self.energy_per_frame = float(energy)
        self.eb = self.energy_per_frame / (J * K)
        cache: dict[tuple, CfspStats] = {}
        table = []
        for n in range(self.L):
            users = np.nonzero(self.amp[:, n] > 0)[0]
            key = tuple((round(float(self.amp[j, n]), 12), tuple(np.round(P[j, n], 12))) for j in users)
            if key not in cache:
                if users.size == 0:
                    cache[key] = CfspStats(0, np.array([0.0]), np.array([0]), np.array([1.0]), "custom", p)
                else:
                    cache[key] = cfsp_from_contributions(self.amp[users, n], P[users, n], levels, p)
            table.append(cache[key])
        self.stats = table

    def _block_plans(self) -> list[BlockPlan]:
        m = self.code.m
        plans = []
        for t in range(self.T):
            slots = []
            for j, slot in enumerate(self.layout.assignment):
                for k, (tt, e) in enumerate(zip(slot.blocks, slot.eps)):
                    if tt == t:
                        slots.append((j, k, e))
            plans.append(BlockPlan(t, tuple(slots), np.arange(t * m, (t + 1) * m)))
        return plans

    # transmission -----------------------------------------------------------------

    def words(self, bits: np.ndarray) -> np.ndarray:
        """Each user's transmitted codeword, shape (F, J, L)."""
        b = np.asarray(bits, dtype=np.int64)[..., None]
        return ((b * self.c1 + (1 - b) * self.c0).sum(axis=2)) % self.p

    def superposed(self, bits: np.ndarray) -> np.ndarray:
        """Finite-field sum of the users' codewords, shape (F, L)."""
        return self.words(bits).sum(axis=1) % self.p

    def noiseless(self, bits: np.ndarray) -> np.ndarray:
        """Real received signal without noise, shape (F, L)."""
        return (self.amp * LEVELS[self.p][self.words(bits)]).sum(axis=1)

    def n0_for(self, ebn0_db: float) -> float:
        return self.eb / 10.0 ** (ebn0_db / 10.0)

    def receive(self, bits: np.ndarray, noise: np.ndarray, n0: float) -> np.ndarray:
        return self.noiseless(bits) + np.sqrt(n0 / 2.0) * np.asarray(noise)

    # decoding ---------------------------------------------------------------------

    def decode(self, y: np.ndarray, n0: float) -> np.ndarray:
        """Decoded user bits (F, J, K) from received frames (F, L)."""
        chain = self.cfg.decoder
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if chain == ("joint",):
            return self._decode_joint(y)
        if self.cc is None:
            if chain[0] == "map":
                return self._decode_block_map(y, None)
            return self._decode_complex_correlation(y)
        w_hat = self.channel_decode(y, n0)
        if chain[1] == "map":
            return self._decode_block_map(y, w_hat)
        return self._decode_ff_correlation(w_hat)

    def channel_decode(self, y: np.ndarray, n0: float) -> np.ndarray:
        """Decoded FFSP information sequence (F, m·T) from the superposed codeword."""
        post = posterior_table(y, self.stats, max(n0, 1e-300))
        if self.cfg.decoder[0] == "ml":
            with np.errstate(divide="ignore"):
                return ccm.ml_decode_batch(self.cc, np.log(post))
        return ccm.qspa_decode_batch(self.cc, post, self.cfg.qspa_iters).info

    def _decode_joint(self, y: np.ndarray) -> np.ndarray:
        J, K = self.cfg.J, self.cfg.K
        if self._joint_table is None:
            cand = np.array(list(itertools.product((0, 1), repeat=J * K)), dtype=np.int64).reshape(-1, J, K)
            self._joint_table = (cand, self.noiseless(cand))
        cand, table = self._joint_table
        sq = (table * table).sum(axis=1)
        out = np.empty((y.shape[0], J, K), dtype=np.int64)
        step = max(1, (1 << 24) // table.shape[0])
        for s in range(0, y.shape[0], step):
            metric = sq[None, :] - 2.0 * y[s : s + step] @ table.T
            out[s : s + step] = cand[np.argmin(metric, axis=1)]
        return out

    def _block_table(self, plan: BlockPlan):
        """Candidate bit settings of one block with their noiseless signal and FFSP on the block."""
        if plan.t not in self._block_tables:
            n = len(plan.slots)
            if n > BLOCK_MAP_MAX_BITS:
                raise ConfigError("decoder.chain", f"block MAP limited to {BLOCK_MAP_MAX_BITS} bits per block")
            combos = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(-1, n)
            bits = np.zeros((combos.shape[0], self.cfg.J, self.cfg.K), dtype=np.int64)
            for i, (j, k, _) in enumerate(plan.slots):
                bits[:, j, k] = combos[:, i]
            sig = self.noiseless(bits)[:, plan.positions]
            ffsp = self.superposed(bits)[:, plan.positions]
            self._block_tables[plan.t] = (combos, sig, ffsp)
        return self._block_tables[plan.t]

    def _decode_block_map(self, y: np.ndarray, w_hat: np.ndarray | None) -> np.ndarray:
        F = y.shape[0]
        out = np.zeros((F, self.cfg.J, self.cfg.K), dtype=np.int64)
        for plan in self.blocks:
            if not plan.slots:
                continue
            combos, sig, ffsp = self._block_table(plan)
            yb = y[:, plan.positions]
            metric = (sig * sig).sum(axis=1)[None, :] - 2.0 * yb @ sig.T
            if w_hat is not None:
                wb = w_hat[:, plan.positions]
                mask = (wb[:, None, :] == ffsp[None]).all(axis=2)
                # frames whose decoded FFSP matches no candidate fall back to the full set
                mask[~mask.any(axis=1)] = True
                metric = np.where(mask, metric, np.inf)
            best = combos[np.argmin(metric, axis=1)]
            for i, (j, k, _) in enumerate(plan.slots):
                out[:, j, k] = best[:, i]
        return out

    def _signature(self, j: int, e: int, plan: BlockPlan) -> np.ndarray:
        lv = LEVELS[self.p]
        diff = lv[self.code.g_one.a[e]] - lv[self.code.g_zero.a[e]]
        return self.amp[j, plan.positions] * diff / 2.0

    def _decode_complex_correlation(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros((y.shape[0], self.cfg.J, self.cfg.K), dtype=np.int64)
        for plan in self.blocks:
            yb = y[:, plan.positions]
            for j, k, e in plan.slots:
                d = yb @ self._signature(j, e, plan)
                # a zero correlation is an erasure; without a channel code it is read as 0
                out[:, j, k] = (d > 0).astype(np.int64)
        return out

    def _decode_ff_correlation(self, w_hat: np.ndarray) -> np.ndarray:
        out = np.zeros((w_hat.shape[0], self.cfg.J, self.cfg.K), dtype=np.int64)
        g1 = self.code.g_one.a
        p = self.p
        sc = np.einsum("ij,ij->i", g1, g1) % p
        for plan in self.blocks:
            wb = w_hat[:, plan.positions]
            for j, k, e in plan.slots:
                d = (wb @ g1[e]) % p
                # zero correlation is an erasure and is read as 0
                out[:, j, k] = (d == sc[e]).astype(np.int64)
        return out

    def describe(self) -> dict:
        return {
            "mode": self.cfg.mode,
            "family": self.code.family,
            "p": self.p,
            "m": self.code.m,
            "M": self.code.M,
            "eta": str(epcode.loading_factor(self.code)),
            "T": self.T,
            "L": self.L,
            "capacity": frame_capacity(self.code.M, self.T, self.cfg.K, self.cfg.layout),
            "eb": self.eb,
            "pav": None if self.regular_pav is None else list(self.regular_pav.as_tuple()),
        }
