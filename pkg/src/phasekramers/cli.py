"""Command-line experiment driver.

    phasekramers <experiment> [--config FILE] [--out DIR] [--gamma G]
                               [--grid-scale S]

Experiments: relax, slowcompare, decohere, linewidth, verify-ops.  Each run
writes CSV/JSON artifacts plus a run manifest into the output directory.
The only environment knob is PHASEKRAMERS_THREADS, which caps the BLAS
thread pools; results never depend on it.

Exit codes: 0 success; 1 verify-ops found a failing identity; 2 config
file problems; 3 unknown experiment; 4 invalid parameters or grid;
5 runtime/numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime, timezone

from .core import ParameterError
from .experiments import EXPERIMENTS, resolved_config, run_experiment
from .io import ConfigError, emit_report, load_config

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_UNKNOWN_EXPERIMENT = 3
EXIT_INVALID_PARAMS = 4
EXIT_RUNTIME = 5


def _apply_thread_env() -> int | None:
    raw = os.environ.get("PHASEKRAMERS_THREADS")
    if not raw:
        return None
    try:
        n = max(1, int(raw))
    except ValueError:
        return None
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(n)
    except Exception:
        pass
    return n


def _scale_grid(grid: dict, scale: float) -> dict:
    out = dict(grid)
    nx = max(4, int(round(grid["num_x"] * scale)))
    out["num_x"] = 1 << max(2, int(round(__import__("math").log2(nx))))
    out["num_p"] = max(8, int(round(grid["num_p"] * scale)))
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasekramers", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="experiment")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="INI experiment file overlaying the pinned defaults")
        sp.add_argument("--out", default=None, help="artifact directory (default runs/<experiment>)")
        sp.add_argument("--gamma", type=float, default=None, help="override the resistance rate")
        sp.add_argument("--grid-scale", type=float, default=None,
                        help="scale num_x (to a power of two) and num_p")
    return ap


def main(argv=None) -> int:
    args_list = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if args_list and not args_list[0].startswith("-") and args_list[0] not in EXPERIMENTS:
        print(f"error: unknown experiment {args_list[0]!r}; choose from {', '.join(EXPERIMENTS)}",
              file=sys.stderr)
        return EXIT_UNKNOWN_EXPERIMENT
    args = parser.parse_args(args_list)
    if not args.experiment:
        parser.print_help()
        return EXIT_UNKNOWN_EXPERIMENT

    threads = _apply_thread_env()
    try:
        overrides = load_config(args.config) if args.config else None
        if overrides is not None and overrides.experiment != args.experiment:
            raise ConfigError(
                f"config file declares experiment {overrides.experiment!r}, CLI asked for {args.experiment!r}"
            )
        cfg = resolved_config(args.experiment, overrides)
        if args.gamma is not None:
            cfg.params["gamma"] = args.gamma
        if args.grid_scale is not None and cfg.grid:
            cfg.grid = _scale_grid(cfg.grid, args.grid_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_experiment(cfg)
    except ParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID_PARAMS
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # numerical aborts, I/O failures: surfaced verbatim
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out_dir = args.out or os.path.join("runs", args.experiment)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    extra = {"threads": threads}
    capture = result.summary.get("grid_capture") if result.summary else None
    if capture is not None:
        extra["grid_capture"] = capture
    try:
        emit_report(result, out_dir, cfg.echo(), stamp, extra)
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if args.experiment == "verify-ops":
        header, rows = result.tables["checks"]
        width = max(len(r[0]) for r in rows)
        for r in rows:
            print(f"[{r[3]:>4s}] {r[0]:<{width}s} defect={r[1]:.3e} tol={r[2]:.0e}")
        if not result.summary["all_passed"]:
            print(f"{result.summary['n_failed']} identity check(s) failed", file=sys.stderr)
            return EXIT_VERIFY_FAILED
        print(f"all {result.summary['n_checks']} identity checks passed")
    else:
        print(f"{args.experiment}: artifacts written to {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
