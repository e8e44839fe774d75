"""Stochastic potentials for Example 1 across omega and c, plus one resistance fit."""

import argparse
from fractions import Fraction

from cce_learning import example1_game
from cce_learning.learning import LearnerConfig
from cce_learning.stability import (
    build_resistance_graph,
    empirical_resistance,
    enumerate_recurrent_classes,
    stochastic_potentials_arborescence,
    stochastic_potentials_closed_form,
    stochastically_stable_states,
)

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--omegas", default="1,2")
parser.add_argument("--cs", default="9/4,3,6")
parser.add_argument("--skip-fit", action="store_true")
args = parser.parse_args()

game = example1_game()
for omega in map(int, args.omegas.split(",")):
    classes = enumerate_recurrent_classes(game, omega)
    print(f"omega={omega}: {classes.num_content} all-content classes, {len(classes.c_star)} realize a CCE")
    for c in map(Fraction, args.cs.split(",")):
        arb = stochastic_potentials_arborescence(build_resistance_graph(classes, c))
        same = arb.potentials == stochastic_potentials_closed_form(classes, c).potentials
        pred = stochastically_stable_states(classes, c, arb)
        stable = ", ".join(classes.label(x) for x in pred.stable)
        print(f"  c={c}: min potential {min(arb.potentials)} at {stable}; closed form agrees={same}; matches={pred.matches}")

if not args.skip_fit:
    classes = enumerate_recurrent_classes(game, 2)
    target = next(x for x in range(classes.num_content) if classes.label(x) == "(T,B|R,L)")
    fit = empirical_resistance(classes, LearnerConfig(), classes.d0, target, [0.2, 0.1, 0.05])
    print(f"D0 -> (T,B|R,L): slope {fit.slope:.3f} +/- {fit.stderr:.3f} (expected {float(classes.entry_resistance(target))})")
