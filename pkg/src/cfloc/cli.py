"""Command-line entry points: `cfloc run` and `cfloc summarize`."""

import argparse
import sys

from ._validation import ConfigurationError
from .config import load_config_file
from .harness import run_experiment, spec_from_dict, summarize


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cfloc",
        description="Monte Carlo fingerprint-localization experiments for "
                    "cell-free massive MIMO deployments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment from a config file")
    run.add_argument("--config", required=True, help="YAML/JSON config file")
    run.add_argument("--sweep-axis", choices=["N", "K", "L", "shadow_sigma_db",
                                              "zscore_threshold"])
    run.add_argument("--sweep-values", help="comma-separated sweep values")
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--threads", type=int, help="worker processes")
    run.add_argument("--seed", type=int, help="master seed (overrides config)")
    run.add_argument("--dump-fingerprints", action="store_true",
                     help="write per-AP fingerprint CSVs")

    summ = sub.add_parser("summarize", help="aggregate a trial CSV")
    summ.add_argument("--in", dest="input", required=True, help="trials.csv path")
    summ.add_argument("--out", required=True, help="summary.csv path")
    summ.add_argument("--report", help="run report.json (defaults to the "
                                       "file next to the trial CSV)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            data = load_config_file(args.config)
            if args.sweep_axis:
                data["sweep_axis"] = args.sweep_axis
            if args.sweep_values:
                data["sweep_values"] = args.sweep_values
            if args.out:
                data["output_dir"] = args.out
            if args.threads:
                data["threads"] = args.threads
            if args.seed is not None:
                data["seed"] = args.seed
            if args.dump_fingerprints:
                data["dump_fingerprints"] = True
            spec = spec_from_dict(data)
            trials, summary, report, failures = run_experiment(spec)
            print(f"trials:  {trials}")
            print(f"summary: {summary}")
            print(f"report:  {report}")
            if failures:
                print(f"{failures} cell(s) failed; see the report", file=sys.stderr)
                return min(failures, 120)
            return 0
        summarize(args.input, args.out, args.report)
        print(f"summary: {args.out}")
        return 0
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
