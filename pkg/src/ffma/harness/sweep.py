"""Seeded Monte Carlo BER/FER sweeps over Eb/N0 with deterministic parallel execution."""

from __future__ import annotations

import csv
import json
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .system import System

CSV_HEADER = ("ebn0_db", "frames", "bit_errs", "frame_errs", "ber", "fer")


@dataclass(frozen=True)
class PointResult:
    ebn0_db: float
    n0: float
    frames: int
    bit_errs: int
    frame_errs: int
    bits_per_frame: int
    wall_time: float

    @property
    def ber(self) -> float:
        return self.bit_errs / (self.frames * self.bits_per_frame) if self.frames else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errs / self.frames if self.frames else 0.0


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list[PointResult] = field(default_factory=list)
    system_info: dict = field(default_factory=dict)

    def counts(self) -> list[tuple[int, int, int]]:
        return [(p.frames, p.bit_errs, p.frame_errs) for p in self.points]


def frame_rng(seed: int, point: int, frame: int) -> np.random.Generator:
    """Independent stream for one frame, keyed by (master seed, point index, frame index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, frame)))


def draw_frames(system: System, seed: int, point: int, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """User bits (F, J, K) and unit-variance noise (F, L) for frames start..stop-1."""
    J, K, L = system.cfg.J, system.cfg.K, system.L
    n = stop - start
    bits = np.empty((n, J, K), dtype=np.int64)
    noise = np.empty((n, L))
    for i in range(n):
        rng = frame_rng(seed, point, start + i)
        bits[i] = rng.integers(0, 2, size=(J, K))
        noise[i] = rng.standard_normal(L)
    return bits, noise


def run_batch(system: System, seed: int, point: int, start: int, stop: int, n0: float) -> tuple[int, int, int]:
    bits, noise = draw_frames(system, seed, point, start, stop)
    y = system.receive(bits, noise, n0)
    dec = system.decode(y, n0)
    wrong = dec != bits
    return stop - start, int(wrong.sum()), int(wrong.reshape(wrong.shape[0], -1).any(axis=1).sum())


def run_point(system: System, point: int, ebn0_db: float, threads: int = 1,
              pool: ThreadPoolExecutor | None = None) -> PointResult:
    cfg = system.cfg
    n0 = system.n0_for(ebn0_db)
    t0 = time.perf_counter()
    frames = bit_errs = frame_errs = 0
    batches = [(s, min(s + cfg.batch, cfg.max_frames)) for s in range(0, cfg.max_frames, cfg.batch)]
    nxt = 0
    done = False
    while not done and nxt < len(batches):
        wave = batches[nxt : nxt + max(threads, 1)]
        nxt += len(wave)
        if pool is None:
            results = (run_batch(system, cfg.seed, point, s, e, n0) for s, e in wave)
        else:
            futures = [pool.submit(run_batch, system, cfg.seed, point, s, e, n0) for s, e in wave]
            results = (f.result() for f in futures)
        # aggregate strictly in batch order so the stopping point never depends on scheduling
        for n, be, fe in results:
            frames += n
            bit_errs += be
            frame_errs += fe
            if frames >= cfg.min_frames and (bit_errs >= cfg.target_errors or frames >= cfg.max_frames):
                done = True
                break
    return PointResult(ebn0_db, n0, frames, bit_errs, frame_errs, cfg.J * cfg.K, time.perf_counter() - t0)


def run_sweep(config: ExperimentConfig, threads: int = 1, system: System | None = None) -> SweepResult:
    """Run every Eb/N0 point of the configuration; results depend only on the config and seed."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    system = system or System(config)
    result = SweepResult(config, system_info=system.describe())
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for i, ebn0 in enumerate(config.ebn0_db):
            result.points.append(run_point(system, i, float(ebn0), threads, pool))
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return result


def version_string() -> str:
    try:
        base = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        base = "0+unknown"
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{base}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def manifest_text(result: SweepResult) -> str:
    head = [
        f"# version = {version_string()}",
        f"# seed = {result.config.seed}",
        f"# system = {json.dumps(result.system_info, sort_keys=True)}",
        "",
    ]
    return "\n".join(head) + result.config.to_text()


def emit(result: SweepResult, path: str | Path) -> tuple[Path, Path]:
    """Write the CSV and a manifest next to it (same stem, ``.manifest`` suffix).

    The manifest is itself a valid config file, so re-running it reproduces the counts.
    """
    path = Path(path)
    manifest = path.with_suffix(".manifest")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for p in result.points:
                w.writerow([repr(p.ebn0_db), p.frames, p.bit_errs, p.frame_errs, f"{p.ber:.6e}", f"{p.fer:.6e}"])
        manifest.write_text(manifest_text(result))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror}") from exc
    return path, manifest
