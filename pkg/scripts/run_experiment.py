"""Run one experiment config and write its CSV, JSON and gnuplot files.

    python3 scripts/run_experiment.py configs/kruse.json [--workers 4]
"""

import argparse
import json
import sys

from starcount.experiments import ExperimentConfig, emit_report, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--seed", type=int)
    args = ap.parse_args(argv)
    with open(args.config) as fh:
        raw = json.load(fh)
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.seed is not None:
        raw["seed"] = args.seed
    report = run_experiment(ExperimentConfig.from_dict(raw))
    files = [emit_report(report, fmt) for fmt in ("csv", "json", "gnuplot")]
    print(json.dumps({"mode": report.config.mode, "summary": report.summary, "files": files},
                     indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
