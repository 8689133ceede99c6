"""Run a config twice, once with 1 worker and once with 4, and compare CSV hashes."""

import hashlib
import json
import sys

from starcount.experiments import ExperimentConfig, csv_text, run_experiment


def digest(raw, workers):
    cfg = ExperimentConfig.from_dict({**raw, "workers": workers})
    return hashlib.sha256(csv_text(run_experiment(cfg)).encode()).hexdigest()


def main(path):
    with open(path) as fh:
        raw = json.load(fh)
    a, b = digest(raw, 1), digest(raw, 4)
    print(f"1 worker : {a}\n4 workers: {b}\n{'identical' if a == b else 'DIFFERENT'}")
    return 0 if a == b else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "configs/kruse.json"))
