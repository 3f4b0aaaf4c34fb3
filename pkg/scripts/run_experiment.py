#!/usr/bin/env python3
"""Run one or more experiments and print the summary of each table.

    python3 scripts/run_experiment.py uniform-bound double-limit --config configs/quick.ini

Options after the names are passed to every subcommand unchanged.
"""

import argparse
import json
import sys
from pathlib import Path

from snlslab.harness.cli import main
from snlslab.harness.config import RunConfig, load_config
from snlslab.harness.experiments import EXPERIMENTS
from snlslab.harness.output import read_table


def run(names, extra):
    worst = 0
    for name in names:
        code = main([name, *extra])
        worst = max(worst, code)
        if code == 1:
            continue
        args = argparse.ArgumentParser(add_help=False)
        args.add_argument("--config")
        args.add_argument("--out")
        known, _ = args.parse_known_args(extra)
        rc = load_config(known.config) if known.config else RunConfig()
        header, rows = read_table(Path(known.out or rc.out_dir) / f"{name}.csv")
        print(f"  verdict {header['verdict']}, {len(rows)} rows")
        print("  summary " + json.dumps(header["summary"], sort_keys=True))
    return worst


if __name__ == "__main__":
    argv = sys.argv[1:]
    names = [a for a in argv if a in EXPERIMENTS]
    extra = [a for a in argv if a not in EXPERIMENTS]
    if not names:
        print(f"usage: run_experiment.py NAME [NAME ...] [options]; names: {', '.join(EXPERIMENTS)}")
        sys.exit(1)
    sys.exit(run(names, extra))
