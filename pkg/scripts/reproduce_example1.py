"""Example 1 sweep: fraction of time at the efficient realizable CCE per epsilon.

    python scripts/reproduce_example1.py --out results/example1 --seeds 20 --workers 4
"""

import argparse

from cce_learning.experiments import EXAMPLE1_STEPS, format_table, reproduce_example1

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--out", default="results/example1")
parser.add_argument("--seeds", type=int, default=20)
parser.add_argument("--steps", type=int, default=EXAMPLE1_STEPS)
parser.add_argument("--workers", type=int, default=1)
parser.add_argument("--no-runs", action="store_true", help="skip per-run CSVs")
args = parser.parse_args()

rows = reproduce_example1(args.out, range(args.seeds), args.steps, args.workers, not args.no_runs)
print(format_table(rows))
