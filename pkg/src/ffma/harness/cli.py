"""Command-line entry point: ``ffma sweep|replay-examples|butterfly|codegen``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .. import butterfly, epcode
from .config import ConfigError, load_config
from .replay import replay_examples
from .sweep import CSV_HEADER, emit, run_sweep


def _error(kind: str, msg: str, code: int = 2) -> int:
    # one line, tab separated: "error", kind, message
    print(f"error\t{kind}\t{' '.join(str(msg).split())}", file=sys.stderr)
    return code


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    result = run_sweep(cfg, threads=args.threads)
    out = Path(args.out) if args.out else Path(args.config).with_suffix(".csv")
    csv_path, manifest = emit(result, out)
    print(",".join(CSV_HEADER))
    for p in result.points:
        print(f"{p.ebn0_db!r},{p.frames},{p.bit_errs},{p.frame_errs},{p.ber:.6e},{p.fer:.6e}")
    print(f"# wrote {csv_path} and {manifest}", file=sys.stderr)
    return 0


def cmd_replay(args) -> int:
    report = replay_examples()
    lines = [f"{'PASS' if e.passed else 'FAIL'} {e.name}: {e.detail}" for e in report]
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0 if all(e.passed for e in report) else 1


def cmd_butterfly(args) -> int:
    code = butterfly.get_code(args.code)
    text = butterfly.format_trace_table(code)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0 if all(t.ok for t in butterfly.trace_table(code)) else 1


def cmd_codegen(args) -> int:
    codes = epcode.shipped_codes()
    names = args.names or sorted(codes)
    unknown = [n for n in names if n not in codes]
    if unknown:
        raise ConfigError("codegen.names", f"unknown codes {unknown}; available {sorted(codes)}")
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for name in names:
        text = epcode.to_text(codes[name])
        if out:
            (out / f"{name}.code").write_text(text)
            print(out / f"{name}.code")
        else:
            print(f"# {name}\n{text}", end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ffma", description="Finite-field multiple access toolkit")
    ap.add_argument("--seed", type=int, default=None, help="override the master seed")
    ap.add_argument("--threads", type=int, default=1, help="frame worker threads")
    ap.add_argument("--out", default=None, help="output file or directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("sweep", help="run a BER/FER sweep from a config file")
    sp.add_argument("config")
    sp.set_defaults(func=cmd_sweep)
    sub.add_parser("replay-examples", help="replay the worked golden vectors").set_defaults(func=cmd_replay)
    bp = sub.add_parser("butterfly", help="print the 3D butterfly trace table")
    bp.add_argument("--code", choices=("gf9", "gf7"), required=True)
    bp.set_defaults(func=cmd_butterfly)
    cp = sub.add_parser("codegen", help="export EP codebooks")
    cp.add_argument("names", nargs="*")
    cp.set_defaults(func=cmd_codegen)
    # allow the global flags after the subcommand as well
    for p in (sp, bp, cp, sub.choices["replay-examples"]):
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--threads", type=int, default=argparse.SUPPRESS)
        p.add_argument("--out", default=argparse.SUPPRESS)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.threads < 1:
        return _error("usage", "--threads must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        return _error("config", exc)
    except OSError as exc:
        return _error("io", exc)
    except ValueError as exc:
        return _error("value", exc)


if __name__ == "__main__":
    sys.exit(main())
