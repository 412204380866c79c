"""Command-line batch runner: ``lhvlab {thresholds,simulate,chsh,integrals,toner}``.

Every option may also come from a JSON config file (``--config``) whose
keys are the option names with dashes replaced by underscores; explicit
flags override the file. Exit status is 0 when every check passes, 1 when
a check fails and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import experiments as E
from .errors import LHVError
from .verify import MATCH_FLOOR, thresholds_csv
from .verify.behavior import N_SIGMA

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "thresholds": {"family": "werner", "dmax": 20, "out": None},
    "simulate": {"model": "werner", "d": 2, "p": None, "n_settings": 10, "samples": None, "seed": None,
                 "n_sigma": N_SIGMA, "floor": MATCH_FLOOR, "a": "1,1,1", "cells": False, "out": None},
    "chsh": {"state": "werner", "p": None, "restarts": 20, "seed": 0, "tol": 1e-3, "out": None},
    "integrals": {"d": "2,3,4,5", "samples": None, "seed": None, "rel_tol": 0.01, "out": None},
    "toner": {"K": 25, "pairs": 100, "samples": None, "seed": None, "n_sigma": N_SIGMA, "out": None},
}
REQUIRED = {"simulate": ("samples", "seed"), "integrals": ("samples", "seed"), "toner": ("samples", "seed")}


def _int_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


def _float_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhvlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        # defaults stay None so that config values can fill the gaps
        sp = sub.add_parser(name, help=help_, argument_default=None)
        sp.add_argument("--config", help="JSON file with option values")
        sp.add_argument("--out", help="output path (default: stdout)")
        return sp

    sp = add("thresholds", "critical-probability table as CSV")
    sp.add_argument("--family", choices=("werner", "isotropic", "noisy"))
    sp.add_argument("--dmax", type=int)

    sp = add("simulate", "simulate a local model and compare with the Born rule")
    sp.add_argument("--model", choices=E.SIM_MODELS)
    sp.add_argument("--d", type=int)
    sp.add_argument("--p", type=float, help="mixing parameter of the reference state (default: model threshold)")
    sp.add_argument("--n-settings", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--n-sigma", type=float)
    sp.add_argument("--floor", type=float)
    sp.add_argument("--a", help="comma-separated parameters of the three-qubit class")
    sp.add_argument("--cells", action="store_const", const=True, help="include every cell in the report")

    sp = add("chsh", "maximal CHSH value of a two-qubit state")
    sp.add_argument("--state", choices=E.CHSH_STATES)
    sp.add_argument("--p", type=float)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)

    sp = add("integrals", "Monte-Carlo oracles for the simplex and half-sphere integrals")
    sp.add_argument("--d", help="comma-separated dimensions")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--rel-tol", type=float)

    sp = add("toner", "series and Monte-Carlo checks of the Gaussian-projection model")
    sp.add_argument("--K", type=int)
    sp.add_argument("--pairs", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--n-sigma", type=float)
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and explicit flags, in increasing priority."""
    cmd = args.command
    opts = dict(DEFAULTS[cmd])
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise LHVError("config file must hold a JSON object")
        cfg.pop("command", None)
        unknown = set(cfg) - set(opts)
        if unknown:
            raise LHVError(f"unknown config keys for {cmd}: {', '.join(sorted(unknown))}")
        opts.update(cfg)
    for key in opts:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    missing = [k for k in REQUIRED.get(cmd, ()) if opts.get(k) is None]
    if missing:
        raise LHVError(f"{cmd} needs {', '.join('--' + k.replace('_', '-') for k in missing)}")
    return opts


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def execute(cmd: str, opts: dict) -> tuple[str, bool]:
    """Run one command; returns the emitted text and whether every check passed."""
    if cmd == "thresholds":
        _, report = E.run_thresholds(opts["family"], opts["dmax"])
        if not report["pass"]:
            sys.stderr.write(dump_report(report))
        return thresholds_csv(opts["family"], opts["dmax"]), report["pass"]
    if cmd == "simulate":
        report = E.run_simulate(
            opts["model"], opts["d"], opts["samples"], opts["seed"], p=opts["p"],
            n_settings=opts["n_settings"], n_sigma=opts["n_sigma"], floor=opts["floor"],
            a=_float_list(opts["a"]), with_cells=bool(opts["cells"]),
        )
    elif cmd == "chsh":
        report = E.run_chsh(opts["state"], opts["p"], opts["restarts"], opts["seed"], opts["tol"])
    elif cmd == "integrals":
        report = E.run_integrals(_int_list(opts["d"]), opts["samples"], opts["seed"], opts["rel_tol"])
    else:
        report = E.run_toner(opts["K"], opts["pairs"], opts["samples"], opts["seed"], opts["n_sigma"])
    return dump_report(report), report["pass"]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        text, ok = execute(args.command, opts)
    except (LHVError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"lhvlab {args.command}: {exc}\n")
        return EXIT_INPUT
    _write(text, opts["out"])
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
