"""Finite-field to real transforms, polarization-adjusted power allocation and the GMAC."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .gf import FfMatrix, FfVector

log = logging.getLogger(__name__)

# index by GF(3) symbol: 0 -> 0, 1 -> +1, 2 -> -1
_ASK3 = np.array([0.0, 1.0, -1.0])

PAV_MODES = ("td", "cc_mip_parallel", "cc_mip_serial", "cc_mbip_parallel", "cc_mbip_serial")


def _symbols(v) -> np.ndarray:
    if isinstance(v, FfVector):
        return v.elems
    if isinstance(v, FfMatrix):
        return v.a
    return np.asarray(v, dtype=np.int64)


def f_f2c_3ask(v) -> np.ndarray:
    """3ASK: 1 -> +1, 0 -> 0, 2 -> -1."""
    s = _symbols(v)
    if s.size and (s.min() < 0 or s.max() > 2):
        raise ValueError("3ASK expects GF(3) symbols")
    return _ASK3[s]


def f_f2c_bpsk(v) -> np.ndarray:
    """BPSK view of GF(3) symbols restricted to {1, 2}: 1 -> +1, 2 -> -1."""
    s = _symbols(v)
    if s.size and not np.isin(s, (1, 2)).all():
        raise ValueError("BPSK transform is undefined for the zero symbol")
    return _ASK3[s]


def f_f2c_gf2(v) -> np.ndarray:
    """Binary BPSK: 1 -> +1, 0 -> -1."""
    s = _symbols(v)
    if s.size and (s.min() < 0 or s.max() > 1):
        raise ValueError("binary BPSK expects GF(2) symbols")
    return 2.0 * s - 1.0


def f_f2c(v, p: int) -> np.ndarray:
    """Field-appropriate transform: binary BPSK over GF(2), 3ASK over GF(3)."""
    if p == 2:
        return f_f2c_gf2(v)
    if p == 3:
        return f_f2c_3ask(v)
    raise ValueError(f"no real transform defined over GF({p})")


@dataclass(frozen=True)
class Pav:
    """Symbol-level power weights; a transmitted symbol x_n is scaled by sqrt(mu_n·p_avg)."""

    mu: np.ndarray
    p_avg: float = 1.0

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or (mu < 0).any():
            raise ValueError("mu must be a nonnegative vector")
        object.__setattr__(self, "mu", mu)

    @property
    def amplitude(self) -> np.ndarray:
        return np.sqrt(self.mu * self.p_avg)


@dataclass(frozen=True)
class RegularPav:
    """Regular PAV: one weight for information symbols, one for multiuser-code parity,
    and (with a channel code) one for channel-code parity."""

    mu1: float
    mu2: float
    mu_c: float | None
    factor: float = 1.0
    p_avg: float = 1.0

    def as_tuple(self) -> tuple[float, ...]:
        if self.mu_c is None:
            return (self.mu1, self.mu2)
        return (self.mu1, self.mu2, self.mu_c)

    def expand(self, classes: np.ndarray, total: float) -> tuple[Pav, float]:
        """Symbol-level PAV from per-position classes (0 unused, 1 info, 2 parity, 3 code parity).

        The result is rescaled so that its weights sum to ``total``; the scale
        factor applied is returned alongside it.
        """
        table = np.array([0.0, self.mu1, self.mu2, self.mu_c or 0.0])
        mu = table[np.asarray(classes)]
        s = mu.sum()
        if s <= 0:
            raise ValueError("PAV expansion has no positive weight")
        k = total / s
        return Pav(mu * k, self.p_avg), k


def pav_regular(mode: str, *, M: int = 0, K: int = 0, Q: int = 0, m: int = 0,
                K_gc: int = 0, R: int = 0, N: int = 0, p_avg: float = 1.0) -> RegularPav:
    """Regular PAV under the MIP or MBIP allocation rule.

    The result satisfies K·mu1 + Q·mu2 = m without a channel code, or
    K·mu1 + Q·mu2 + R·mu_c = N with one.  Formulas that miss the constraint
    are rescaled by a common factor, which is logged and stored in ``factor``.
    """
    if mode not in PAV_MODES:
        raise ValueError(f"unknown PAV mode {mode!r}; expected one of {PAV_MODES}")
    if K <= 0:
        raise ValueError("K must be positive")
    if M and K > M:
        raise ValueError(f"K={K} exceeds M={M}")
    if mode == "td":
        if M <= 0 or m <= 0:
            raise ValueError("td PAV needs positive M and m")
        mu = (M / K, 1.0)
        budget = m
        spent = K * mu[0] + Q * mu[1]
        return _rescaled(mode, mu, budget, spent, p_avg)
    if K_gc <= 0:
        raise ValueError("channel-coded PAV needs positive K_gc")
    if mode == "cc_mip_parallel":
        mu = ((K_gc - Q) / K, 1.0, 1.0)
    elif mode == "cc_mip_serial":
        mu = ((K_gc - K * Q) / K, 1.0, 1.0)
    elif mode == "cc_mbip_parallel":
        mu = (M * K_gc / (K * m), K_gc / m, 1.0)
    else:
        mu = (M * K_gc / (K * m), K_gc / (K * m), 1.0)
    if min(mu) <= 0:
        raise ValueError(f"{mode} gives a nonpositive allocation {mu}")
    spent = K * mu[0] + Q * mu[1] + R * mu[2]
    return _rescaled(mode, mu, N, spent, p_avg)


def _rescaled(mode, mu, budget, spent, p_avg) -> RegularPav:
    if min(mu) <= 0:
        raise ValueError(f"{mode} gives a nonpositive allocation {mu}")
    factor = budget / spent if spent > 0 else 1.0
    if not np.isclose(factor, 1.0, rtol=0, atol=1e-12):
        log.info("PAV %s rescaled by %.6g to meet the power constraint", mode, factor)
        mu = tuple(x * factor for x in mu)
    else:
        factor = 1.0
    if len(mu) == 2:
        return RegularPav(mu[0], mu[1], None, factor, p_avg)
    return RegularPav(mu[0], mu[1], mu[2], factor, p_avg)


def apply_pav(x, pav: Pav) -> np.ndarray:
    """Hadamard scaling x_n · sqrt(mu_n · P_avg); broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != pav.mu.size:
        raise ValueError(f"signal length {x.shape[-1]} does not match PAV length {pav.mu.size}")
    return x * pav.amplitude


def noise_std(n0: float) -> float:
    return float(np.sqrt(n0 / 2.0))


def gmac(signals, n0: float, rng_seed=None) -> np.ndarray:
    """Sum the users' signals and add white Gaussian noise of variance N0/2.

    ``rng_seed`` may be an integer, a SeedSequence or a Generator.
    """
    sigs = [np.asarray(s, dtype=float) for s in signals]
    if not sigs:
        raise ValueError("gmac needs at least one signal")
    shape = sigs[0].shape
    for s in sigs:
        if s.shape != shape:
            raise ValueError(f"signal shapes differ: {shape} vs {s.shape}")
    y = np.sum(sigs, axis=0)
    if n0 < 0:
        raise ValueError("n0 must be nonnegative")
    if n0 > 0:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
        y = y + rng.normal(0.0, noise_std(n0), size=shape)
    return y


def signal_to_csv(x, path) -> None:
    np.savetxt(path, np.atleast_2d(np.asarray(x, dtype=float)), delimiter=",", fmt="%.10g")
