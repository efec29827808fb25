"""Command line interface: ``molcool run|estimate|sweep|check``.

Exit codes: 0 success, 1 validation error, 2 runtime/model violation, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_inputs, parse_config
from .engine import ModelError
from .estimates import PhysicalInputs, estimate_report

OUTPUT_ENV = "MOLCOOL_OUTPUT_DIR"

EXIT_OK, EXIT_VALIDATION, EXIT_MODEL, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("molcool")


def _output_dir(cfg: ScenarioConfig, cli_value: str | None) -> str:
    return cli_value or os.environ.get(OUTPUT_ENV) or cfg.output_dir


def _print_checks(checks) -> bool:
    ok = True
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        ok &= c.passed
    return ok


def cmd_run(args) -> int:
    from .runner import run

    cfg = parse_config(args.config)
    res = run(cfg, _output_dir(cfg, args.output))
    print(f"{res.n_samples} samples -> {res.output_dir}")
    print(f"final f(P): mean {res.final.mean():+.4f} hbar*k, FWHM {res.final.fwhm():.3f} hbar*k "
          f"(initial FWHM {res.initial.fwhm():.3f})")
    return EXIT_OK if _print_checks(res.checks) else EXIT_MODEL


def _run_one(path: str, out: str):
    from .runner import run

    cfg = parse_config(path)
    res = run(cfg, out)
    return path, all(c.passed for c in res.checks)


def cmd_sweep(args) -> int:
    paths = sorted(glob.glob(args.pattern))
    if not paths:
        print(f"no config files match {args.pattern!r}", file=sys.stderr)
        return EXIT_VALIDATION
    for p in paths:  # validate everything before starting any work
        parse_config(p)
    root = Path(args.output or os.environ.get(OUTPUT_ENV) or "sweep")
    outs = [str(root / Path(p).stem) for p in paths]
    if len(set(outs)) != len(outs):
        print("config file stems must be unique within a sweep", file=sys.stderr)
        return EXIT_VALIDATION
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(_run_one, paths, outs))
    ok = True
    for path, passed in results:
        print(f"[{'PASS' if passed else 'FAIL'}] {path}")
        ok &= passed
    return EXIT_OK if ok else EXIT_MODEL


def cmd_check(args) -> int:
    from .checks import Diagnostics
    from .engine import run_process
    from .entropy import cm_distribution

    cfg = parse_config(args.config) if args.config else ScenarioConfig()
    cc = cfg.cooling
    diag = Diagnostics(trace_tol=cc.trace_tol, overdraft_budget=cc.overdraft_budget)
    last = None
    for s in run_process(cc):
        diag.update(s)
        last = s
    ok = _print_checks(diag.results())
    f = cm_distribution(last.field)
    print(f"final f(P): mean {f.mean():+.4f} hbar*k, FWHM {f.fwhm():.3f} hbar*k")
    return EXIT_OK if ok else EXIT_MODEL


INPUT_FIELDS = [f.name for f in dataclasses.fields(PhysicalInputs)]


def cmd_estimate(args) -> int:
    inputs = load_inputs(args.inputs) if args.inputs else PhysicalInputs()
    overrides = {k: getattr(args, k) for k in INPUT_FIELDS if getattr(args, k) is not None}
    if overrides:
        try:
            inputs = dataclasses.replace(inputs, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc).split()[0], str(exc)) from exc
    try:
        report = estimate_report(inputs, rounding=args.rounding)
    except ValueError as exc:
        raise ConfigError(str(exc).split()[0], str(exc)) from exc
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
        return EXIT_OK
    d = report.to_dict()
    checks = d["reference_check"]
    print(f"{'quantity':<18}{'value':>16}  {'unit':<8}{'reference':>12}{'rel dev':>10}  check")
    for key, entry in d["values"].items():
        v = entry["value"]
        vs = str(v) if isinstance(v, (bool, list, int)) else f"{v:.6g}"
        line = f"{key:<18}{vs:>16}  {entry['unit']:<8}"
        if key in checks:
            c = checks[key]
            line += f"{c['reference']:>12.4g}{c['rel_dev']:>10.2%}  {'ok' if c['ok'] else 'OFF'}"
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="molcool", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write CSV data")
    p.add_argument("config")
    p.add_argument("-o", "--output", help=f"output directory (overrides config and ${OUTPUT_ENV})")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("estimate", help="print the engineering estimates")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--inputs", help="TOML/JSON file of physical inputs (must give mass_amu)")
    p.add_argument("--rounding", choices=("sig1", "nearest"), default="sig1",
                   help="cycle count used for times and drift: one significant figure or nearest")
    for name in INPUT_FIELDS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="run every config matching a glob, in parallel")
    p.add_argument("pattern")
    p.add_argument("-o", "--output", help="root directory; each config writes to <root>/<stem>")
    p.add_argument("-j", "--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run the invariant suite on a scenario (default: demo)")
    p.add_argument("config", nargs="?")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ModelError as exc:
        print(f"model violation: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
