"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 config error, 3 calibration or
self-test failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .config import ConfigError, load_config, parse_config
from .link import calibration_checks, run_sweep
from .modem import canonical_name, get_scheme
from .report import constellation_csv, results_csv
from .selftest import run_selftest

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _snr_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) == 2:
        parts.append("1")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected START:STOP[:STEP]")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR range {text!r}") from None


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--mod", action="append", metavar="NAME", help="modulation (repeatable)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--snr", type=_snr_range, metavar="A:B:STEP", help="SNR grid in dB (Es/N0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for the sweep")
    common.add_argument("--profile", choices=("desk", "paper"), help="desk: 64/12, paper: 6400/1280")

    parser = _Parser(prog="mimo-mccdma", description="2x3 MIMO-MC-CDMA link-level BER simulator")
    parser.add_argument("--dump-constellation", metavar="NAME", help="print a constellation table and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("sweep", parents=[common], help="run BER sweeps and write CSV")
    sub.add_parser("calibrate", parents=[common], help="compare reference chains with closed forms")
    dump = sub.add_parser("dump-constellation", parents=[common], help="write label,I,Q for a scheme")
    dump.add_argument("name")
    sub.add_parser("selftest", parents=[common], help="run the fast invariant suite")
    return parser


def _fix_negative_values(argv: Sequence[str]) -> list[str]:
    # let "--snr -10:20:1" through; argparse would read -10:20:1 as an option
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--snr":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--snr={nxt}")
        else:
            out.append(tok)
    return out


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args) -> tuple[object, list[str]]:
    overrides = {}
    if args.profile:
        overrides["profile"] = args.profile
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.snr:
        overrides["snr_start_db"], overrides["snr_stop_db"], overrides["snr_step_db"] = args.snr
    cfg = load_config(args.config, overrides) if args.config else parse_config("", overrides)
    mods = [canonical_name(m) for m in args.mod] if args.mod else [cfg.modulation]
    return cfg, mods


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(_fix_negative_values(argv))
        if args.dump_constellation:
            sys.stdout.write(constellation_csv(get_scheme(args.dump_constellation)))
            return EXIT_OK
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.command == "dump-constellation":
            _write(constellation_csv(get_scheme(args.name)), args.out)
            return EXIT_OK
        cfg, mods = _load(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:  # unknown modulation names and the like
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "sweep":
        records = []
        for mod in mods:
            try:
                run_cfg = cfg.replace(modulation=mod)
            except ValueError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            records.extend(run_sweep(run_cfg, threads=args.threads))
        _write(results_csv(records), args.out)
        return EXIT_OK

    if args.command == "calibrate":
        lines = []
        ok = True
        for check in calibration_checks(seed=cfg.seed, threads=args.threads):
            ok &= check.passed
            lines.append(
                f"{'PASS' if check.passed else 'FAIL'}  {check.name}: measured {check.measured:.5e} "
                f"expected {check.expected:.5e} tolerance {check.rel_tol:.0%} ({check.bits} bits)"
            )
        _write("\n".join(lines) + "\n", args.out)
        return EXIT_OK if ok else EXIT_FAILED

    lines = []
    ok = run_selftest(lines.append)
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
