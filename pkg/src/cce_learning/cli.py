"""Command line entry point: ``cce-learn <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from fractions import Fraction

from .equilibria import cce_check, efficient_cce, efficient_realizable, efficient_realizable_cce
from .experiments import (
    EXAMPLE1_PRESET,
    ExperimentSpec,
    format_table,
    load_game,
    load_spec,
    reproduce_example1,
    reproduce_shapley,
    run_sweep,
)
from .game import Game, is_interdependent
from .learning import LearnerConfig
from .signals import format_strategy
from .stability import (
    build_resistance_graph,
    empirical_resistance,
    enumerate_recurrent_classes,
    stochastic_potentials_arborescence,
    stochastic_potentials_closed_form,
    stochastically_stable_states,
)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _cell(game: Game, k: int) -> str:
    return "(" + ",".join(game.action_sets[i][a] for i, a in enumerate(game.joint_actions(k))) + ")"


def _support(game: Game, masses) -> dict[str, str]:
    return {_cell(game, k): str(m) for k, m in enumerate(masses) if m}


def cmd_solve_cce(args) -> int:
    game = load_game(args.game, args.normalize)
    out: dict = {"game": game.name}
    if args.realizable:
        best = efficient_realizable_cce(game, args.omega)
        branch = "cce"
        if best is None:
            best, branch = efficient_realizable(game, args.omega), "unconstrained"
        out.update(
            omega=args.omega,
            target=branch,
            value=str(best.value),
            value_float=float(best.value),
            profiles=[
                [format_strategy(s, game.action_sets[i]) for i, s in enumerate(p)] for p in best.profiles
            ],
            supports=[_support(game, q.masses) for q in best.distributions],
        )
    else:
        sol = efficient_cce(game)
        cert = cce_check(game, sol.q)
        out.update(
            value=sol.value,
            status=sol.status,
            degenerate=sol.degenerate,
            support={_cell(game, k): round(float(p), 12) for k, p in enumerate(sol.q) if p > 1e-12},
            certificate={"is_cce": cert.is_cce, "worst_violation": cert.worst_violation},
        )
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for key, val in out.items():
            print(f"{key}: {val}")
    return 0


def _config(args, game: Game) -> LearnerConfig:
    cfg = replace(
        EXAMPLE1_PRESET,
        delta=args.delta,
        omega=args.omega,
        phase_len=args.phase_len,
        c=args.c,
    ).for_game(game)
    if args.paper_phase_len:
        cfg = replace(cfg, phase_len=LearnerConfig.theoretical_phase_len(cfg.delta, game.n, cfg.c))
    return cfg


def _sweep(args, epsilons: list[float]) -> int:
    game = load_game(args.game, args.normalize)
    spec = ExperimentSpec(
        game=args.game,
        config=_config(args, game),
        epsilons=tuple(epsilons),
        seeds=tuple(_ints(args.seeds)),
        steps=args.steps,
        window=args.window,
        output_dir=args.out,
        normalize=args.normalize,
    )
    result = run_sweep(spec, write_runs=not args.no_runs, workers=args.workers)
    print("epsilon,seed,fraction_at_target")
    for (eps, seed), v in result.fractions.items():
        print(f"{eps:g},{seed},{v:.6f}")
    print(format_table(result.table()))
    return 0


def cmd_run_sim(args) -> int:
    return _sweep(args, [args.epsilon])


def cmd_sweep(args) -> int:
    if args.spec:
        spec = load_spec(args.spec)
        result = run_sweep(spec, write_runs=not args.no_runs, workers=args.workers)
        print(format_table(result.table()))
        return 0
    if not args.game:
        raise ValueError("sweep needs a game file or --spec")
    return _sweep(args, _floats(args.epsilons))


def cmd_analyze_chain(args) -> int:
    game = load_game(args.game, args.normalize)
    classes = enumerate_recurrent_classes(game, args.omega)
    c = Fraction(str(args.c)) if args.c is not None else Fraction(game.n) + Fraction(1, 4)
    graph = build_resistance_graph(classes, c)
    arb = stochastic_potentials_arborescence(graph)
    closed = stochastic_potentials_closed_form(classes, c)
    pred = stochastically_stable_states(classes, c, arb)
    inter, witness = is_interdependent(game)
    out = {
        "game": game.name,
        "omega": args.omega,
        "c": str(c),
        "interdependent": inter,
        "content_classes": classes.num_content,
        "cce_classes": len(classes.c_star),
        "total_classes": classes.num_nodes,
        "potentials": [
            {"class": classes.label(k), "arborescence": str(a), "closed_form": str(b), "cce": k in classes.c_star}
            for k, (a, b) in enumerate(zip(arb.potentials, closed.potentials))
        ],
        "methods_agree": arb.potentials == closed.potentials,
        "stochastically_stable": [classes.label(k) for k in pred.stable],
        "prediction": {
            "branch": pred.branch,
            "classes": [classes.label(k) for k in pred.predicted],
            "supports": [_support(game, q.masses) for q in pred.distributions],
            "matches": pred.matches,
        },
    }
    if witness is not None:
        out["interdependence_witness"] = {"a": list(witness[0]), "J": sorted(witness[1])}
    if args.verify_resistance:
        target = pred.stable[0]
        fit = empirical_resistance(
            classes, LearnerConfig(phase_len=args.phase_len), classes.d0, target, _floats(args.resistance_epsilons)
        )
        out["resistance_check"] = {
            "transition": f"D0 -> {classes.label(target)}",
            "expected": float(classes.entry_resistance(target)),
            "slope": fit.slope,
            "stderr": fit.stderr,
            "probabilities": list(fit.probabilities),
            "samples": list(fit.samples),
        }
    if args.json:
        print(json.dumps(out, indent=2))
        return 0
    print(f"game {out['game']}  omega={args.omega}  c={out['c']}  interdependent={inter}")
    print(f"classes: {classes.num_content} all-content (+ D0), {len(classes.c_star)} realize a CCE")
    print(f"arborescence == closed form: {out['methods_agree']}")
    print("class\tgamma\tcce")
    for row in out["potentials"]:
        print(f"{row['class']}\t{row['arborescence']}\t{int(row['cce'])}")
    print("stochastically stable:", ", ".join(out["stochastically_stable"]))
    print(f"prediction (branch {pred.branch}):", ", ".join(out["prediction"]["classes"]), f"matches={pred.matches}")
    if "resistance_check" in out:
        rc = out["resistance_check"]
        print(f"resistance {rc['transition']}: slope {rc['slope']:.3f} +/- {rc['stderr']:.3f} (expected {rc['expected']:.3f})")
    return 0


def cmd_reproduce(args) -> int:
    if args.which == "example1":
        rows = reproduce_example1(
            args.out, seeds=range(args.seeds), steps=args.steps, workers=args.workers, write_runs=not args.no_runs
        )
        print(format_table(rows))
    else:
        print(json.dumps(reproduce_shapley(args.out), indent=2, sort_keys=True))
    return 0


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=EXAMPLE1_PRESET.delta)
    p.add_argument("--omega", type=int, default=EXAMPLE1_PRESET.omega)
    p.add_argument("--phase-len", type=int, default=EXAMPLE1_PRESET.phase_len)
    p.add_argument("--paper-phase-len", action="store_true", help="use ceil(1/delta^(n c + 1))")
    p.add_argument("--c", type=float, default=None, help="default: players + 0.25")
    p.add_argument("--steps", type=int, default=10**5, help="time steps per run")
    p.add_argument("--window", type=int, default=None, help="measure the last N steps (default: last half)")
    p.add_argument("--seeds", default="0")
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-runs", action="store_true", help="skip per-run CSVs")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cce-learn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-cce", help="efficient CCE by LP, or the best realizable one")
    p.add_argument("game")
    p.add_argument("--omega", type=int, default=2)
    p.add_argument("--realizable", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_solve_cce)

    p = sub.add_parser("run-sim", help="simulate the learning dynamics")
    p.add_argument("game")
    p.add_argument("--epsilon", type=float, required=True)
    _add_sim_flags(p)
    p.set_defaults(func=cmd_run_sim)

    p = sub.add_parser("sweep", help="simulate over a list of epsilon values")
    p.add_argument("game", nargs="?")
    p.add_argument("--epsilons", default="0.15,0.1,0.015,0.01")
    p.add_argument("--spec", help="JSON experiment spec")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze-chain", help="recurrent classes and stochastic potentials")
    p.add_argument("game")
    p.add_argument("--omega", type=int, default=2)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--verify-resistance", action="store_true")
    p.add_argument("--resistance-epsilons", default="0.2,0.1,0.05")
    p.add_argument("--phase-len", type=int, default=50)
    p.add_argument("--json", action="store_true")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_analyze_chain)

    p = sub.add_parser("reproduce", help="reproduce the Example 1 table or the Shapley summary")
    p.add_argument("which", choices=("example1", "shapley"))
    p.add_argument("--out", default="results")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds (0..N-1)")
    p.add_argument("--steps", type=int, default=10**5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-runs", action="store_true")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
