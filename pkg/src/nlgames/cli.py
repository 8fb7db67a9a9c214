"""Command-line front end.

Exit codes: 0 success, 2 parse/input error, 3 budget exceeded, 4 validation failure.
Game arguments accept a file path or ``corpus:NAME`` for a bundled game.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import corpus
from .game import (
    BudgetExceededError,
    DEFAULT_BUDGET,
    NotSynchronousError,
    classical_value,
    eval_deterministic,
    is_synchronous,
    self_losing_pairs,
)
from .graphs import (
    classical_strategy_from_independent_set,
    independence_number,
    induced_subgraph,
    perfect_classical_strategy,
)
from .io import FormatError, dump_packing, dump_strategy, load_game, load_packing, load_strategy, read_graph
from .packing_search import SearchConfig, seesaw_search
from .quantum import (
    DEFAULT_TOL,
    GeneralStrategy,
    PMEStrategy,
    PackingError,
    StrategyError,
    Tolerances,
    entangled_lower_bound,
    general_diagnostics,
    general_probabilities,
    loss_breakdown,
    pme_diagnostics,
    pme_probabilities,
    winning_probability,
)
from .reductions import game_graph, reduce_pme_to_qindependence

EXIT_OK, EXIT_PARSE, EXIT_BUDGET, EXIT_INVALID = 0, 2, 3, 4


class ValidationFailure(Exception):
    pass


@dataclass
class RunReport:
    command: list
    inputs: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def exact(self, name: str, value):
        if isinstance(value, Fraction):
            value = str(value)
        self.results.append({"name": name, "value": value, "exact": True})

    def approx(self, name: str, value: float, tol: float):
        self.results.append({"name": name, "value": value, "tolerance": tol})

    def result(self, name: str):
        for r in self.results:
            if r["name"] == name:
                return r["value"]
        raise KeyError(name)

    def to_text(self) -> str:
        lines = ["command: " + " ".join(self.command)]
        for path, digest in self.inputs.items():
            lines.append(f"input {path} sha256:{digest}")
        for r in self.results:
            ann = "exact" if r.get("exact") else f"tol {r['tolerance']:g}"
            lines.append(f"{r['name']}: {_show(r['value'])} ({ann})")
        for d in self.diagnostics:
            lines.append(f"diagnostic: {d}")
        for k, v in self.artifacts.items():
            lines.append(f"wrote {k}: {v}")
        for k, v in self.timings.items():
            lines.append(f"time {k}: {v:.3f}s")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, default=str)


def _show(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, default=str)
    return str(v)


def _read_input(ref: str, report: RunReport) -> str:
    if ref.startswith("corpus:"):
        path = corpus.corpus_path(ref[len("corpus:"):])
    else:
        path = Path(ref)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {ref}: {exc.strerror}") from None
    report.inputs[ref] = hashlib.sha256(text.encode()).hexdigest()
    return text


def _tolerances(args) -> Tolerances:
    if getattr(args, "tol", None) is None:
        return DEFAULT_TOL
    return Tolerances(proj=args.tol, orth=args.tol)


class _Timer:
    def __init__(self, report: RunReport, name: str):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timings[self.name] = time.perf_counter() - self.t0


# --- commands ---------------------------------------------------------------------

def cmd_reduce(args, report: RunReport):
    game = load_game(_read_input(args.game, report))
    with _Timer(report, "reduce"):
        art = reduce_pme_to_qindependence(game)
    X = art.game_graph
    report.exact("vertices", len(X.vertices))
    report.exact("edges", len(X.edges))
    report.exact("target_t", art.target_t)
    if args.out:
        report.artifacts.update(art.save(args.out))


def cmd_values(args, report: RunReport):
    game = load_game(_read_input(args.game, report))
    with _Timer(report, "classical_value"):
        omega, witness = classical_value(game, budget=args.budget)
    report.exact("classical_value", omega)
    report.exact("classical_witness", {"f_A": _pairs(witness.f_A), "f_B": _pairs(witness.f_B)})
    if not is_synchronous(game):
        report.diagnostics.append("game is not synchronous; game-graph section omitted")
        return
    nq = len(game.alice_questions)
    X = game_graph(game)
    with _Timer(report, "independence_number"):
        alpha, S = independence_number(X)
    report.exact("alpha_game_graph", alpha)
    report.exact("num_questions", nq)
    dead = set(self_losing_pairs(game))
    report.exact("self_losing_pairs", len(dead))
    perfect_by_value = omega == 1
    perfect_by_alpha = alpha == nq
    report.exact("perfect_classical_by_value", perfect_by_value)
    report.exact("perfect_classical_by_alpha", perfect_by_alpha)
    strategy = perfect_classical_strategy(game, X)
    if strategy is not None:
        report.exact("perfect_strategy", _pairs(strategy.f_A))
    if perfect_by_value != (strategy is not None):
        raise ValidationFailure("classical value and independent-set search disagree on perfection")
    if perfect_by_value != perfect_by_alpha:
        report.diagnostics.append(
            "alpha(X) = |Q| only through vertices (a,q) with V(a,a|q,q) = 0; "
            "the game graph cannot see these losses")
    if dead.intersection(S):
        _, S = independence_number(induced_subgraph(X, [v for v in X.vertices if v not in dead]))
        report.diagnostics.append("bound uses an independent set avoiding V(a,a|q,q) = 0 vertices")
    if game.is_uniform:
        s, guarantee = classical_strategy_from_independent_set(game, X, S)
        report.exact("classical_bound", guarantee)
        report.exact("bound_witness_value", eval_deterministic(game, s))
    else:
        report.diagnostics.append("distribution not uniform; (alpha/|Q|)^2 bound omitted")


def _pairs(f: dict) -> list:
    return [[k, v] for k, v in f.items()]


def cmd_verify(args, report: RunReport):
    tol = _tolerances(args)
    game = load_game(_read_input(args.game, report))
    s = load_strategy(_read_input(args.strategy, report))
    want = PMEStrategy if args.kind == "pme" else GeneralStrategy
    if not isinstance(s, want):
        raise FormatError(f"strategy file holds a {type(s).__name__}, --kind is {args.kind}", "$.kind")
    with _Timer(report, "evaluate"):
        if isinstance(s, PMEStrategy):
            problems = pme_diagnostics(game, s, tol)
            pr = pme_probabilities(game, s)
        else:
            problems = general_diagnostics(game, s, tol)
            pr = general_probabilities(game, s)
    value = winning_probability(game, pr)
    report.approx("winning_probability", value, 1e-9)
    losses = {f"{q!s}|{r!s}": v for (q, r), v in loss_breakdown(game, pr).items() if abs(v) > 1e-12}
    report.approx("loss_by_question_pair", losses, 1e-12)
    report.diagnostics.extend(str(p) for p in problems)
    if problems:
        raise ValidationFailure(f"{len(problems)} validation problem(s)")


def cmd_search(args, report: RunReport):
    tol = _tolerances(args)
    text = _read_input(args.input, report)
    game = None
    if text.lstrip().startswith("{"):
        game = load_game(text)
        X = game_graph(game)  # NotSynchronousError -> validation failure
    else:
        X = read_graph(text)
    initial = None
    if args.init:
        initial = load_packing(_read_input(args.init, report))
    cfg = SearchConfig(dimension=args.dim, seed=args.seed, restarts=args.restarts,
                       max_iters=args.max_iters)
    with _Timer(report, "search"):
        res = seesaw_search(X, cfg, initial, tol)
    report.approx("packing_value", res.value, tol.orth)
    report.exact("dimension", args.dim)
    report.diagnostics.append("search results are lower bounds only")
    if game is not None:
        nq = len(game.alice_questions)
        report.exact("num_questions", nq)
        if game.is_uniform:
            bound, witness = entangled_lower_bound(game, res.packing, tol)
            report.approx("entangled_value_lower_bound", bound, 1e-9)
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                (out / "witness_strategy.json").write_text(dump_strategy(witness))
                report.artifacts["witness_strategy"] = str(out / "witness_strategy.json")
        if res.value > nq + 1e-8:
            raise ValidationFailure(f"packing value {res.value} exceeds |Q| = {nq}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "packing.json").write_text(dump_packing(res.packing))
        report.artifacts["packing"] = str(out / "packing.json")


def cmd_corpus(args, report: RunReport):
    if args.name is None:
        report.exact("games", corpus.names())
        return
    path = corpus.corpus_path(args.name)
    report.exact("path", str(path))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / path.name).write_text(path.read_text())
        report.artifacts[args.name] = str(out / path.name)


# --- wiring -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlgames", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("text", "structured"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", help="synchronous extension and game graph of a game")
    r.add_argument("game")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("values", help="exact classical value and game-graph checks")
    v.add_argument("game")
    v.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    v.set_defaults(func=cmd_values)

    ver = sub.add_parser("verify", help="evaluate and validate a strategy file")
    ver.add_argument("game")
    ver.add_argument("strategy")
    ver.add_argument("--kind", choices=("pme", "general"), default="pme")
    ver.add_argument("--tol", type=float)
    ver.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="seesaw search for a projective packing")
    s.add_argument("input", help="game file (JSON) or graph file (edge list / DIMACS)")
    s.add_argument("--dim", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--max-iters", type=int, default=200)
    s.add_argument("--init", help="packing file to start from")
    s.add_argument("--tol", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("corpus", help="list or export bundled games")
    c.add_argument("name", nargs="?")
    c.add_argument("--out")
    c.set_defaults(func=cmd_corpus)

    for sp in (r, v, ver, s, c):
        sp.add_argument("--format", choices=("text", "structured"), default=argparse.SUPPRESS)
    return p


def run(argv: list[str] | None = None) -> tuple[int, RunReport]:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    code, report = _dispatch(args, argv)
    return code, report


def _dispatch(args, argv) -> tuple[int, RunReport]:
    report = RunReport(command=["nlgames", *argv])
    code = EXIT_OK
    try:
        args.func(args, report)
    except (FormatError, KeyError) as exc:
        report.diagnostics.append(f"parse error: {exc}")
        code = EXIT_PARSE
    except BudgetExceededError as exc:
        report.diagnostics.append(f"budget exceeded: {exc}")
        code = EXIT_BUDGET
    except (ValidationFailure, StrategyError, PackingError, NotSynchronousError, ValueError) as exc:
        report.diagnostics.append(f"validation failure: {exc}")
        code = EXIT_INVALID
    return code, report


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    code, report = _dispatch(args, argv)
    print(report.to_json() if args.format == "structured" else report.to_text())
    return code


if __name__ == "__main__":
    sys.exit(main())
