"""Experiment configuration: strict ``key = value`` text with ``[section]`` headers."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

MODES = ("ff_tdma", "ff_ccma", "ff_cdma", "ff_noma")
STAGES = ("correlation", "map", "ml", "qspa", "joint")
PAV_CHOICES = ("none", "mip", "mbip")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "ff_tdma"
    J: int = 1
    K: int = 1
    layout: str = "serial"
    T: int = 0  # 0 = smallest frame that fits, or the channel code's T
    ep_code: str = "ortho:4"
    channel_code: str = "none"
    qspa_iters: int = 50
    pav: str = "none"
    p_avg: float = 1.0
    decoder: tuple[str, ...] = ("map",)
    ebn0_db: tuple[float, ...] = (0.0,)
    min_frames: int = 1000
    max_frames: int = 10000
    target_errors: int = 100
    batch: int = 1000
    seed: int = 0

    def replace(self, **kw) -> ExperimentConfig:
        return dataclasses.replace(self, **kw)

    def to_text(self) -> str:
        return "\n".join(
            [
                "[system]",
                f"mode = {self.mode}",
                f"J = {self.J}",
                f"K = {self.K}",
                f"layout = {self.layout}",
                f"T = {self.T}",
                f"seed = {self.seed}",
                "",
                "[ep]",
                f"code = {self.ep_code}",
                "",
                "[channel]",
                f"code = {self.channel_code}",
                f"qspa_iters = {self.qspa_iters}",
                "",
                "[power]",
                f"pav = {self.pav}",
                f"p_avg = {self.p_avg!r}",
                "",
                "[decoder]",
                f"chain = {','.join(self.decoder)}",
                "",
                "[sweep]",
                f"ebn0_db = {', '.join(repr(float(x)) for x in self.ebn0_db)}",
                f"min_frames = {self.min_frames}",
                f"max_frames = {self.max_frames}",
                f"target_errors = {self.target_errors}",
                f"batch = {self.batch}",
                "",
            ]
        )


def _int(v: str) -> int:
    return int(v)


def _float(v: str) -> float:
    return float(v)


def _str(v: str) -> str:
    return v


def _chain(v: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in v.split(",") if s.strip())


def _grid(v: str) -> tuple[float, ...]:
    return tuple(float(s) for s in v.replace(" ", ",").split(",") if s)


# section -> key -> (config attribute, parser)
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "system": {
        "mode": ("mode", _str),
        "J": ("J", _int),
        "K": ("K", _int),
        "layout": ("layout", _str),
        "T": ("T", _int),
        "seed": ("seed", _int),
    },
    "ep": {"code": ("ep_code", _str)},
    "channel": {"code": ("channel_code", _str), "qspa_iters": ("qspa_iters", _int)},
    "power": {"pav": ("pav", _str), "p_avg": ("p_avg", _float)},
    "decoder": {"chain": ("decoder", _chain)},
    "sweep": {
        "ebn0_db": ("ebn0_db", _grid),
        "min_frames": ("min_frames", _int),
        "max_frames": ("max_frames", _int),
        "target_errors": ("target_errors", _int),
        "batch": ("batch", _int),
    },
}


def parse_config(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"[{section}]", f"unknown section on line {lineno}")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        if section is None:
            raise ConfigError(f"line {lineno}", "key outside of any section")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigError(f"{section}.{key}", "unknown key")
        attr, parser = SCHEMA[section][key]
        try:
            values[attr] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key}", f"cannot parse {val!r} ({exc})") from None
    cfg = ExperimentConfig(**values)
    validate_basic(cfg)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def validate_basic(cfg: ExperimentConfig) -> None:
    """Checks that do not need the codes to be built."""
    if cfg.mode not in MODES:
        raise ConfigError("system.mode", f"{cfg.mode!r} not in {MODES}")
    if cfg.layout not in ("serial", "parallel"):
        raise ConfigError("system.layout", "must be serial or parallel")
    for name in ("J", "K", "min_frames", "max_frames", "target_errors", "batch", "qspa_iters"):
        if getattr(cfg, name) < 1:
            raise ConfigError(name, "must be positive")
    if cfg.T < 0:
        raise ConfigError("system.T", "must be nonnegative")
    if cfg.max_frames < cfg.min_frames:
        raise ConfigError("sweep.max_frames", "must be >= min_frames")
    if cfg.pav not in PAV_CHOICES:
        raise ConfigError("power.pav", f"{cfg.pav!r} not in {PAV_CHOICES}")
    if cfg.p_avg <= 0:
        raise ConfigError("power.p_avg", "must be positive")
    if not cfg.decoder or any(s not in STAGES for s in cfg.decoder):
        raise ConfigError("decoder.chain", f"stages must come from {STAGES}")
