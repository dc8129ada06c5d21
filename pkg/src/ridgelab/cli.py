"""``ridgelab`` command-line entry point.

Exit codes: 0 success (an inapplicable bound is a success), 1 validation
failure, 2 configuration or input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bounds import ConfigurationError, InsufficientTrialsError
from .config import ConfigError, load_config
from .experiments import COMMANDS, InputError, ZeroFieldError
from .ridge import BandError, InsufficientDataError
from .signals import ModelViolation
from .wavelets import InvalidWaveletError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("ridgelab")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ridgelab", description="Wavelet ridge experiments under Gaussian noise.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    p.add_argument("--seed", type=int, help="base seed (RIDGELAB_SEED takes precedence)")
    p.add_argument("--lambda", dest="lam", type=float, help="penalty weight for the penalized ridge")
    p.add_argument("--threads", type=int, default=1, help="worker threads for trial-parallel loops")
    p.add_argument("--out", help="output directory (default: config output_dir/<command>)")
    p.add_argument("--full", action="store_true", help="full-scale trial counts (10^4) unless --trials is set")
    p.add_argument("--input", help="t,x CSV for the transform command")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {"trials": args.trials, "base_seed": args.seed, "lambda": args.lam}
    if args.full:
        overrides["full"] = True
    try:
        cfg = load_config(args.config, args.command, overrides)
        out = Path(args.out) if args.out else cfg.output_dir / args.command
        kwargs = {"input_path": args.input} if args.command == "transform" else {}
        res = COMMANDS[args.command](cfg, out, args.threads, **kwargs)
    except (ConfigError, ConfigurationError, InsufficientTrialsError, InputError, ZeroFieldError, BandError,
            ModelViolation, InvalidWaveletError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientDataError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(json.dumps({"command": args.command, "ok": res.ok, "output_dir": str(out),
                      **{k: v for k, v in res.summary.items() if not isinstance(v, dict)}},
                     default=str))
    return EXIT_OK if res.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
