"""LP value, six-cell CCE and uniform Nash welfare for the Shapley variant."""

import argparse
import json

from cce_learning.experiments import reproduce_shapley

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="results/shapley")
parser.add_argument("--eps-s", default="0.1")
args = parser.parse_args()

print(json.dumps(reproduce_shapley(args.out, args.eps_s), indent=2, sort_keys=True))
