"""Command-line front end.

    lcqft verify SUITE --spectrum 1:2 --sites 8 [--steps 16 --dt 0.5
          --seed 0 --tolerance KEY=VAL --jobs 2 --out report.json]
    lcqft classify --spectrum 1:2,2:3 --sites 8 [--quantized/--classical
          --seed 0 --out report.json]

Exit codes: 0 all checks pass, 1 suite failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys

from . import serialize
from .classify import classify
from .errors import ConfigParse, LcqftError
from .spacetime import LatticeSpacetime, MassSpectrum
from .suites import RunConfig, SUITE_NAMES, run_suite


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--spectrum", required=True,
                        help='mass spectrum as "m:mult,..." e.g. "0:1,1.0:2"')
    parser.add_argument("--sites", type=int, default=8)
    parser.add_argument("--steps", type=int, default=16)
    parser.add_argument("--dt", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="write the JSON report here")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcqft",
        description="verification suites for lattice free scalar field structures")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run verification suites")
    verify.add_argument("suite", choices=list(SUITE_NAMES) + ["all"])
    _add_common(verify)
    verify.add_argument("--tolerance", action="append", default=[],
                        metavar="KEY=VAL", help="override a named tolerance")
    verify.add_argument("--jobs", type=int, default=1,
                        help="parallel suites bound")

    cls = sub.add_parser("classify",
                         help="classify endomorphism directions of the "
                              "solution space")
    _add_common(cls)
    cls.add_argument("--classical", action="store_true",
                     help="omit the affine (quantized) directions")
    return parser


def _parse_tolerances(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigParse(f"--tolerance needs KEY=VAL, got {pair!r}")
        key, val = pair.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigParse(f"bad tolerance value in {pair!r}") from exc
    return out


def _emit(report: dict, out_path: str | None):
    text = serialize.dumps(report) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(report: dict, out_path: str | None):
    # human summary on stdout; falls back to stderr when the JSON report
    # itself occupies stdout
    stream = sys.stdout if out_path else sys.stderr
    for suite in report["suites"]:
        worst = max(suite["residuals"].values(), default=0.0)
        print(f"[{suite['status']:4s}] {suite['name']:12s} "
              f"checks={len(suite['residuals'])} worst={worst:.3e}",
              file=stream)
        if suite["status"] != "pass":
            for line in suite["findings"]:
                print(f"       {line}", file=stream)
    print(f"overall: {report['status']}", file=stream)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            config = RunConfig(
                spectrum=args.spectrum, n_sites=args.sites, n_steps=args.steps,
                dt=args.dt, seed=args.seed, suite=args.suite,
                tolerances=_parse_tolerances(args.tolerance), jobs=args.jobs)
            report = run_suite(config)
            _emit(report, args.out)
            _summary(report, args.out)
            return 0 if report["status"] == "pass" else 1

        if args.command == "classify":
            try:
                st = LatticeSpacetime(args.sites, args.steps, args.dt,
                                      MassSpectrum.parse(args.spectrum))
            except LcqftError as exc:
                raise ConfigParse(str(exc)) from exc
            report = classify(st, quantized=not args.classical, seed=args.seed)
            _emit(report, args.out)
            ok = report["match"]
            print(f"dimension={report['dimension']} expected={report['expected']} "
                  f"match={ok}", file=sys.stderr)
            return 0 if ok else 1
    except ConfigParse as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LcqftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
