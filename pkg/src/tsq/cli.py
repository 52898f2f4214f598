"""``tsq run|validate|version``.

Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import load_config
from .errors import ConfigError, NumericError, TsqError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scenario described by a config file")
    run.add_argument("config")
    run.add_argument("-o", "--output-dir", help="override [run] output_dir")
    val = sub.add_parser("validate", help="parse and validate a config file")
    val.add_argument("config")
    sub.add_parser("version", help="print the package version")
    return p


def _err(msg: str) -> None:
    print(f"tsq: error: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "version":
        print(f"tsq {__version__}")
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            print(f"{args.config}: ok ({cfg.scenario})")
            return EXIT_OK
        from .scenarios import run_scenario

        report = run_scenario(cfg, output_dir=args.output_dir)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except (NumericError, FloatingPointError) as exc:
        _err(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    except OSError as exc:
        _err(f"I/O failure: {exc}")
        return EXIT_IO
    except TsqError as exc:
        # remaining library errors come from parameter values the config supplied
        _err(str(exc))
        return EXIT_CONFIG
    for key in ("P_s", "drift", "absorbed_fraction"):
        val = getattr(report, key)
        if val is not None:
            print(f"{key} = {val:.12g}")
    for name, p in report.detector_probabilities.items():
        print(f"P({name}) = {p:.12g}")
    print(f"wrote {len(report.files)} files; wall time {report.wall_time:.2f} s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
