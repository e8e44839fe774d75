"""Experiment drivers: game files, sweeps over epsilon, and the reproduction presets.

Outputs are CSV files plus a JSON manifest; identical inputs give
byte-identical CSVs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .equilibria import cce_check, efficient_cce, learning_target
from .game import Game, JointDistribution, normalize_payoffs, shapley_game, to_fraction, welfare
from .learning import LearnerConfig, SimulationResult, periods_for_steps, simulate
from .signals import enumerate_strategies

BUILTIN_GAMES = ("example1", "shapley")

# artifact defaults where the source experiment is silent
EXAMPLE1_EPSILONS = (0.15, 0.1, 0.015, 0.01)
EXAMPLE1_PRESET = LearnerConfig(epsilon=0.01, delta=0.14, c=None, omega=2, phase_len=50)  # c -> n + 0.25
EXAMPLE1_STEPS = 10**5
EXAMPLE1_WINDOW = 5 * 10**4

RUN_COLUMNS = ("period", "k", "mood_vector", "baseline_ids", "u_b", "u_t", "u_a", "at_target")
SUMMARY_COLUMNS = ("epsilon", "seed", "fraction_at_target")


class GameFormatError(ValueError):
    """A game document does not match the expected schema."""


# -- game files --


def _parse_number(value, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise GameFormatError(f"{path}: expected a number, got {type(value).__name__}")
    try:
        f = to_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise GameFormatError(f"{path}: {exc}") from None
    return f


def game_from_dict(doc, normalize: bool | None = None) -> Game:
    if not isinstance(doc, dict):
        raise GameFormatError("<root>: expected an object")
    players = doc.get("players")
    if not isinstance(players, list) or len(players) < 2:
        raise GameFormatError("players: expected a list of at least two action lists")
    for i, acts in enumerate(players):
        if not isinstance(acts, list) or not acts or not all(isinstance(a, str) for a in acts):
            raise GameFormatError(f"players[{i}]: expected a non-empty list of labels")
        if len(set(acts)) != len(acts):
            raise GameFormatError(f"players[{i}]: duplicate action labels")
    size = math.prod(len(a) for a in players)
    payoffs = doc.get("payoffs")
    if not isinstance(payoffs, list) or len(payoffs) != len(players):
        raise GameFormatError(f"payoffs: expected {len(players)} per-player lists")
    rows = []
    for i, row in enumerate(payoffs):
        if not isinstance(row, list) or len(row) != size:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise GameFormatError(f"payoffs[{i}]: expected {size} entries, got {got}")
        rows.append([_parse_number(u, f"payoffs[{i}][{k}]") for k, u in enumerate(row)])
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise GameFormatError("name: expected a string")
    flag = doc.get("normalize", False)
    if not isinstance(flag, bool):
        raise GameFormatError("normalize: expected a boolean")
    if normalize is None:
        normalize = flag
    if normalize:
        return normalize_payoffs(players, rows, name)
    return Game(tuple(map(tuple, players)), tuple(map(tuple, rows)), name)


def _builtin_path(name: str):
    return resources.files("cce_learning") / "games" / f"{name}.json"


def read_game_text(path) -> str:
    p = str(path)
    if p.startswith("builtin:"):
        name = p.split(":", 1)[1]
        if name not in BUILTIN_GAMES:
            raise GameFormatError(f"unknown builtin game {name!r}; choose from {BUILTIN_GAMES}")
        return _builtin_path(name).read_text()
    return Path(p).read_text()


def load_game(path, normalize: bool | None = None) -> Game:
    """Load a JSON game file (or ``builtin:<name>``); ``normalize`` overrides the file flag."""
    text = read_game_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"<root>: invalid JSON ({exc})") from None
    return game_from_dict(doc, normalize)


def _encode_number(f: Fraction):
    if f.denominator == 1:
        return int(f)
    if Fraction(repr(float(f))) == f:
        return float(f)
    return f"{f.numerator}/{f.denominator}"


def game_to_dict(game: Game) -> dict:
    return {
        "name": game.name,
        "players": [list(a) for a in game.action_sets],
        "payoffs": [[_encode_number(u) for u in row] for row in game.exact_payoffs],
    }


def dump_game(game: Game, path) -> None:
    Path(path).write_text(json.dumps(game_to_dict(game), indent=2) + "\n")


def git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# -- experiment specs --


@dataclass(frozen=True)
class ExperimentSpec:
    game: str
    config: LearnerConfig = EXAMPLE1_PRESET
    epsilons: tuple[float, ...] = EXAMPLE1_EPSILONS
    seeds: tuple[int, ...] = tuple(range(20))
    steps: int = EXAMPLE1_STEPS
    window: int | None = EXAMPLE1_WINDOW  # measure over the last `window` steps
    output_dir: str = "results"
    normalize: bool | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seed list must be non-empty")
        if not self.epsilons or any(not 0 < e < 1 for e in self.epsilons):
            raise ValueError("epsilon values must lie in (0, 1)")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


def load_spec(path) -> ExperimentSpec:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "game" not in doc:
        raise GameFormatError("spec: expected an object with a 'game' field")
    cfg_fields = {f for f in LearnerConfig.__dataclass_fields__}
    cfg = doc.get("config", {})
    unknown = set(cfg) - cfg_fields
    if unknown:
        raise GameFormatError(f"config: unknown fields {sorted(unknown)}")
    game = doc["game"]
    if not game.startswith("builtin:") and not Path(game).is_absolute():
        game = str((Path(path).parent / game).resolve())
    return ExperimentSpec(
        game=game,
        config=replace(EXAMPLE1_PRESET, **cfg),
        epsilons=tuple(doc.get("epsilons", EXAMPLE1_EPSILONS)),
        seeds=tuple(doc.get("seeds", range(20))),
        steps=int(doc.get("steps", EXAMPLE1_STEPS)),
        window=doc.get("window", EXAMPLE1_WINDOW),
        output_dir=doc.get("output_dir", "results"),
        normalize=doc.get("normalize"),
    )


# -- runs --


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def run_rows(result: SimulationResult, strategies) -> list[list[str]]:
    index = [{s: j for j, s in enumerate(ss)} for ss in strategies]
    rows = []
    period_len = result.config.period_len
    for rec, flags in zip(result.records, result.phase_at_target):
        rows.append(
            [
                str(rec.k),
                str(period_len * rec.k + 1),
                "".join(m.value for m in rec.mood_before),
                ";".join(str(index[i][s]) for i, s in enumerate(rec.baseline)),
                ";".join(_fmt(u) for u in rec.u_b),
                ";".join(_fmt(u) for u in rec.u_t),
                ";".join(_fmt(u) for u in rec.u_a),
                _fmt(float(flags.mean())),
            ]
        )
    return rows


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


@dataclass(frozen=True)
class _Cell:
    game: Game
    config: LearnerConfig
    steps: int
    window: int | None
    target: frozenset
    run_path: str | None


def _run_cell(cell: _Cell) -> float:
    result = simulate(
        cell.game, cell.config, target=set(cell.target), horizon=cell.steps, keep_records=cell.run_path is not None
    )
    if cell.run_path is not None:
        strategies = [enumerate_strategies(m, cell.config.omega) for m in cell.game.shape]
        write_csv(Path(cell.run_path), RUN_COLUMNS, run_rows(result, strategies))
    window = cell.steps - cell.steps // 2 if cell.window is None else cell.window
    return result.fraction_at_target(cell.steps - window, cell.steps)


@dataclass
class SweepResult:
    spec: ExperimentSpec
    fractions: dict[tuple[float, int], float] = field(default_factory=dict)

    def table(self) -> list[dict]:
        rows = []
        for eps in self.spec.epsilons:
            vals = np.array([self.fractions[(eps, s)] for s in self.spec.seeds])
            rows.append({"epsilon": eps, "mean": float(vals.mean()), "std": float(vals.std()), "runs": len(vals)})
        return rows


def run_sweep(spec: ExperimentSpec, write_runs: bool = True, workers: int = 1) -> SweepResult:
    """Run every (epsilon, seed) cell and write per-run CSVs, a summary and a manifest."""
    game = load_game(spec.game, spec.normalize)
    out = Path(spec.output_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    base = spec.config.for_game(game)
    target = frozenset(learning_target(game, base.omega).target_set())
    periods = periods_for_steps(spec.steps, base.phase_len)

    keys, cells = [], []
    for eps in spec.epsilons:
        for seed in spec.seeds:
            cfg = replace(base, epsilon=eps, seed=seed, periods=periods)
            path = str(runs_dir / f"eps{eps:g}_seed{seed}.csv") if write_runs else None
            keys.append((eps, seed))
            cells.append(_Cell(game, cfg, spec.steps, spec.window, target, path))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_run_cell, cells))
    else:
        values = [_run_cell(c) for c in cells]

    result = SweepResult(spec, dict(zip(keys, values)))
    write_csv(
        out / "summary.csv",
        SUMMARY_COLUMNS,
        [[f"{eps:g}", str(seed), _fmt(v)] for (eps, seed), v in zip(keys, values)],
    )
    write_csv(
        out / "table.csv",
        ("epsilon", "mean", "std", "runs"),
        [[f"{r['epsilon']:g}", _fmt(r["mean"]), _fmt(r["std"]), str(r["runs"])] for r in result.table()],
    )
    manifest = {
        "game": spec.game,
        "game_hash": git_blob_hash(read_game_text(spec.game).encode()),
        "config": asdict(base),
        "epsilons": list(spec.epsilons),
        "seeds": list(spec.seeds),
        "steps": spec.steps,
        "window": spec.window,
        "periods": periods,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return result


def format_table(rows: list[dict]) -> str:
    lines = ["| epsilon | % time in efficient CCE |", "|---|---|"]
    for r in rows:
        lines.append(f"| {r['epsilon']:g} | {100 * r['mean']:.1f}% +/- {100 * r['std']:.1f}% |")
    return "\n".join(lines)


def reproduce_example1(
    output_dir, seeds: Sequence[int] = tuple(range(20)), steps: int = EXAMPLE1_STEPS, workers: int = 1, write_runs: bool = True
) -> list[dict]:
    spec = ExperimentSpec(
        game="builtin:example1",
        seeds=tuple(seeds),
        steps=steps,
        window=min(EXAMPLE1_WINDOW, steps - steps // 2),
        output_dir=str(output_dir),
    )
    rows = run_sweep(spec, write_runs=write_runs, workers=workers).table()
    (Path(output_dir) / "table.md").write_text(format_table(rows) + "\n")
    return rows


def shapley_six_cell(game: Game) -> JointDistribution:
    cells = [("T", "L"), ("T", "M"), ("M", "M"), ("M", "R"), ("B", "L"), ("B", "R")]
    return JointDistribution.from_cells(game, {c: Fraction(1, 6) for c in cells})


def shapley_nash(game: Game) -> JointDistribution:
    return JointDistribution.uniform(game.num_joint)


def reproduce_shapley(output_dir=None, eps_s="0.1") -> dict:
    raw = shapley_game(eps_s)
    norm = shapley_game(eps_s, normalize=True)
    lp = efficient_cce(raw)
    six, nash = shapley_six_cell(raw), shapley_nash(raw)
    summary = {
        "eps_s": str(to_fraction(eps_s)),
        "lp_value": lp.value,
        "lp_degenerate": lp.degenerate,
        "six_cell_welfare": float(welfare(raw, six, exact=True)),
        "six_cell_is_cce": cce_check(raw, six).is_cce,
        "nash_welfare": float(welfare(raw, nash, exact=True)),
        "nash_is_cce": cce_check(raw, nash).is_cce,
        "normalized_lp_value": efficient_cce(norm).value,
        "normalized_six_cell_is_cce": cce_check(norm, shapley_six_cell(norm)).is_cce,
    }
    summary["lp_matches_six_cell"] = abs(summary["lp_value"] - summary["six_cell_welfare"]) <= 1e-8
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "shapley.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
