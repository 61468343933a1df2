"""Command-line front end: seeded, reproducible experiments with CSV/JSON out.

Subcommands: validate, classify, fourier, decay, orbit, digits, beta-orbit,
power-orbit, normality, correlations, spacings, martingale.  Exit codes:
0 success, 2 validation failure, 3 precision/budget exhaustion, 4 bad
configuration.  CSV output starts with '# key=value' metadata lines (tool
version, seed, system hash, parameters) and is byte-identical for identical
(config, seed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from . import __version__, experiments as exp
from .errors import (
    ConfigParseError,
    NormalityLabError,
    PrecisionError,
    ValidationError,
)
from .ifs import load_system
from .stats import TestFunction

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PRECISION = 3
EXIT_CONFIG = 4


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 4)."""

    def error(self, message):
        raise ConfigParseError(message)


def _add_common(p: _Parser, system_required: bool = True,
                default_tol: float = 1e-9):
    p.add_argument("--system", required=system_required,
                   help="system definition file (JSON)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=default_tol)
    p.add_argument("--budget", type=int, default=10 ** 7)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> _Parser:
    parser = _Parser(prog="normality-lab",
                     description="experiments on normality of self-similar measures")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", parents=[], help="check system invariants")
    _add_common(p)

    p = sub.add_parser("classify", help="obstruction-form classification")
    _add_common(p)
    p.add_argument("--base", type=int, required=True)

    p = sub.add_parser("fourier", help="exact transform at one frequency")
    _add_common(p)
    p.add_argument("--q", required=True, help="rational frequency, e.g. 17/2")

    p = sub.add_parser("decay", help="band sups of |F_q| and regime fit")
    _add_common(p, default_tol=1e-6)
    p.add_argument("--j-max", type=int, default=16)
    p.add_argument("--per-band", type=int, default=512)

    p = sub.add_parser("orbit", help="certified T_b orbit values")
    _add_common(p)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--guard", type=int, default=16)

    p = sub.add_parser("digits", help="certified base-b digit stream")
    _add_common(p)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--guard", type=int, default=16)

    p = sub.add_parser("beta-orbit", help="beta-transformation orbit")
    _add_common(p, system_required=False)
    p.add_argument("--beta", default=None, help="rational beta, e.g. 5/2")
    p.add_argument("--beta-poly", default=None,
                   help="monic integer polynomial, leading first: 1,-1,-1")
    p.add_argument("--beta-lo", default=None, help="enclosure low endpoint")
    p.add_argument("--beta-hi", default=None, help="enclosure high endpoint")
    p.add_argument("--x", default=None, help="exact rational start point")
    p.add_argument("--length", type=int, default=100)
    p.add_argument("--precision-bits", type=int, default=None,
                   help="minimum working precision for ball iteration")

    p = sub.add_parser("power-orbit", help="x^n mod 1 sequence")
    _add_common(p, system_required=False)
    p.add_argument("--x", required=True, help="rational x > 1, e.g. 3/2")
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--precision-bits", type=int, default=None,
                   help="minimum working precision for ball iteration")

    p = sub.add_parser("normality", help="discrepancy, digit and Weyl stats")
    _add_common(p)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--length", type=int, default=10000)
    p.add_argument("--q-max", type=int, default=10)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--guard", type=int, default=16)
    p.add_argument("--disc-threshold", type=float, default=0.05)
    p.add_argument("--weyl-threshold", type=float, default=0.05)

    p = sub.add_parser("correlations", help="k-level correlation R_k")
    _add_common(p, system_required=False)
    p.add_argument("--source", choices=("orbit", "power", "uniform"),
                   default="orbit")
    p.add_argument("--base", type=int, default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--length", type=int, default=10000)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--box", default=None, help="box half-width (rational)")
    p.add_argument("--triangle", default=None,
                   help="triangle half-width (rational)")
    p.add_argument("--samples", type=int, default=1)

    p = sub.add_parser("spacings", help="level-spacing distribution")
    _add_common(p, system_required=False)
    p.add_argument("--source", choices=("orbit", "power", "uniform"),
                   default="orbit")
    p.add_argument("--base", type=int, default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--length", type=int, default=10000)
    p.add_argument("--s-grid", default="0:5:0.1")
    p.add_argument("--samples", type=int, default=1)

    p = sub.add_parser("martingale", help="orbit vs cylinder-average modes")
    _add_common(p, default_tol=1e-6)
    p.add_argument("--base", type=int, required=True, help="integer base p")
    p.add_argument("--q", default="1", help="comma-separated integer q list")
    p.add_argument("--N-list", dest="n_list", default="100,1000,10000")
    p.add_argument("--samples", type=int, default=1)
    return parser


def _int_list(spec: str) -> list:
    try:
        return [int(t) for t in str(spec).split(",") if t != ""]
    except ValueError as exc:
        raise ConfigParseError(f"bad integer list {spec!r}") from exc


def _test_function(args) -> TestFunction:
    if args.box is not None and args.triangle is not None:
        raise ConfigParseError("choose one of --box / --triangle")
    if args.triangle is not None:
        return TestFunction.triangle(exp.as_fraction(args.triangle))
    width = args.box if args.box is not None else "1/2"
    return TestFunction.box(exp.as_fraction(width))


def _dispatch(args):
    sub = args.subcommand
    if sub == "validate":
        # unchecked load so the report covers every failed invariant
        system = load_system(args.system, check=False)
        rows, results = exp.run_validate(system)
        code = EXIT_OK if results["ok"] else EXIT_VALIDATION
        return rows, results, system, code
    system = load_system(args.system) if getattr(args, "system", None) else None
    if sub == "classify":
        return (*exp.run_classify(system, args.base), system, EXIT_OK)
    if sub == "fourier":
        return (*exp.run_fourier(system, args.q, args.tol, args.budget),
                system, EXIT_OK)
    if sub == "decay":
        return (*exp.run_decay(system, args.j_max, args.per_band, args.tol,
                               args.budget), system, EXIT_OK)
    if sub == "orbit":
        return (*exp.run_orbit(system, args.base, args.length, args.samples,
                               args.seed, args.guard), system, EXIT_OK)
    if sub == "digits":
        return (*exp.run_digits(system, args.base, args.count, args.guard,
                                args.seed), system, EXIT_OK)
    if sub == "beta-orbit":
        beta = exp.parse_beta(args.beta, args.beta_poly, args.beta_lo,
                               args.beta_hi)
        return (*exp.run_beta_orbit(system, beta, args.x, args.length,
                                    args.seed, args.precision_bits),
                system, EXIT_OK)
    if sub == "power-orbit":
        return (*exp.run_power_orbit(args.x, args.length, args.seed,
                                     args.precision_bits), system, EXIT_OK)
    if sub == "normality":
        return (*exp.run_normality(system, args.base, args.length, args.q_max,
                                   args.samples, args.seed, args.guard,
                                   args.disc_threshold, args.weyl_threshold),
                system, EXIT_OK)
    if sub == "correlations":
        return (*exp.run_correlations(args.source, system, args.base, args.x,
                                      args.length, args.k,
                                      _test_function(args), args.samples,
                                      args.seed), system, EXIT_OK)
    if sub == "spacings":
        return (*exp.run_spacings(args.source, system, args.base, args.x,
                                  args.length, args.s_grid, args.samples,
                                  args.seed), system, EXIT_OK)
    if sub == "martingale":
        return (*exp.run_martingale(system, args.base, _int_list(args.q),
                                    _int_list(args.n_list), args.samples,
                                    args.seed, args.tol), system, EXIT_OK)
    raise ConfigParseError(f"unknown subcommand {sub!r}")


def _metadata(args, system) -> dict:
    skip = {"out", "format", "subcommand", "system"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {
        "tool": "normality-lab",
        "version": __version__,
        "subcommand": args.subcommand,
        "seed": getattr(args, "seed", None),
        "system_hash": exp.system_hash(system) if system else None,
        "parameters": params,
    }


def _write_csv(stream, meta: dict, rows):
    for key in ("tool", "version", "subcommand", "seed", "system_hash"):
        stream.write(f"# {key}={meta[key]}\n")
    stream.write(f"# parameters={json.dumps(meta['parameters'], sort_keys=True)}\n")
    if not rows:
        return
    writer = csv.DictWriter(stream, fieldnames=list(rows[0].keys()),
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def _emit(args, meta: dict, rows, results) -> None:
    if args.format == "json":
        payload = dict(meta)
        payload["results"] = results
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        _write_csv(buf, meta, rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        rows, results, system, code = _dispatch(args)
        _emit(args, _metadata(args, system), rows, results)
        return code
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionError as exc:
        print(f"precision/budget error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NormalityLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
