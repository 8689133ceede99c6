"""Run every config in configs/ in turn and print a one-line summary per mode."""

import glob
import json
import os
import sys
import time

from starcount.experiments import ExperimentConfig, emit_report, run_experiment

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    paths = sorted(glob.glob(os.path.join(HERE, "..", "configs", "*.json")))
    for path in paths:
        with open(path) as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
        start = time.perf_counter()
        report = run_experiment(cfg)
        for fmt in ("csv", "json", "gnuplot"):
            emit_report(report, fmt)
        s = report.summary
        print(f"{cfg.mode:15s} rows={len(report.rows):3d} max_ratio={s.get('max_ratio')!s:22s} "
              f"{time.perf_counter() - start:7.1f}s -> {cfg.output}.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
