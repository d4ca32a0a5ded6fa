"""Command-line entry point.

    attoscope <stage> --config <path> [--out <dir>] [--t-snapshots a,b,c]
              [--ts-list a,b,c] [--pd-file <path>]
    attoscope default-config > run.ini

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 missing prerequisite. Thread count can be overridden with the
ATTOSCOPE_THREADS environment variable.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, MissingPrerequisiteError, NumericalError
from .pipeline import Pipeline
from .runconfig import STAGES, default_config, validate_config


def _parse_times(s):
    return [float(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="attoscope",
        description="strong-field ionization pipeline: quantum run, "
                    "phase-space analysis, classical trajectories, "
                    "starting-time reconstruction")
    ap.add_argument("stage", choices=STAGES + ("default-config",),
                    help="pipeline stage to run")
    ap.add_argument("--config", help="run-configuration file (ini-style "
                                     "key=value sections)")
    ap.add_argument("--out", help="output directory (overrides [output])")
    ap.add_argument("--t-snapshots", type=_parse_times, default=None,
                    help="comma-separated snapshot times for the propagate "
                         "stage")
    ap.add_argument("--ts-list", type=_parse_times, default=None,
                    help="comma-separated starting times for trajectories/"
                         "reconstruct")
    ap.add_argument("--pd-file", default=None,
                    help="CSV with a p_d column: reconstruct from external "
                         "detected momenta")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.stage == "default-config":
        sys.stdout.write(default_config().serialize())
        return 0
    try:
        cfg = validate_config(args.config) if args.config else default_config()
    except ConfigError as err:
        for p in err.problems:
            print(f"config error: {p}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    try:
        pipe = Pipeline(cfg, out_dir=args.out)
        produced = pipe.run_stage(args.stage, ts_list=args.ts_list,
                                  snapshot_times=args.t_snapshots,
                                  pd_file=args.pd_file)
    except MissingPrerequisiteError as err:
        print(f"missing prerequisite: {err}", file=sys.stderr)
        return 3
    except ConfigError as err:
        for p in err.problems:
            print(f"config error: {p}", file=sys.stderr)
        return 1
    except NumericalError as err:
        print(f"numerical failure [{args.stage}]: {err}", file=sys.stderr)
        return 2
    print(f"stage {args.stage}: {len(produced)} files -> {pipe.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
