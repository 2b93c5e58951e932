"""Command-line entry point: ``oscillometer <subcommand> [options]``."""

from __future__ import annotations

import argparse
import sys

from .config import SUBCOMMANDS, RunConfig, from_mapping, load_config
from .errors import ConfigurationError, OscillometerError
from .output import emit
from .runner import artifact_version, run

# flag name -> config key; list-valued keys accept comma-separated values
_FLAGS = {
    "pair": "pairs",
    "N": "N",
    "p": "p",
    "eta": "eta",
    "mode": "mode",
    "hessian": "hessian",
    "variant": "variant",
    "r0": "r0",
    "K": "K",
    "M": "M",
    "x0": "x0",
    "centers": "centers",
    "tol": "tol",
    "out": "out",
    "workers": "workers",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="oscillometer",
                 description="Mean-oscillation and elliptic-regularity experiments on the unit disk.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {artifact_version()}")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="TOML file with run settings (flags override it)")
    ap.add_argument("--pair", help="pair id(s), comma separated")
    ap.add_argument("--N", help="grid sizes, comma separated")
    ap.add_argument("--p", help="exponents, comma separated")
    ap.add_argument("--eta")
    ap.add_argument("--mode", help="lsq or keystep")
    ap.add_argument("--hessian", help="analytic or solved")
    ap.add_argument("--variant", help="corollary or sharp (czsweep)")
    ap.add_argument("--r0", help="largest Hessian ladder radius")
    ap.add_argument("--K", help="ladder length")
    ap.add_argument("--M", help="Campanato levels")
    ap.add_argument("--x0", help="centre as x,y")
    ap.add_argument("--centers", help="strided or full")
    ap.add_argument("--tol", help="solver relative residual tolerance")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--workers", help="worker processes (0 = all cores)")
    return ap


def resolve_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(subcommand=ns.subcommand)
    if ns.config:
        file_cfg = load_config(ns.config)
        file_cfg.pop("subcommand", None)
        cfg = from_mapping(file_cfg, cfg)
    flags = {key: getattr(ns, flag) for flag, key in _FLAGS.items() if getattr(ns, flag) is not None}
    return from_mapping(flags, cfg).validate()


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
        report = run(cfg)
        emit(report, cfg.out)
    except ConfigurationError as exc:
        print(f"oscillometer: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OscillometerError as exc:
        print(f"oscillometer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"oscillometer: wrote {len(report.records)} records to {cfg.out} "
          f"({report.wall_time:.1f} s)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
