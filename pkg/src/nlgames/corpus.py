"""Bundled example games, shipped as game files under ``nlgames/corpus_data``."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .game import (
    NonlocalGame,
    make_chsh,
    make_homomorphism_game,
    make_independent_set_game,
    make_magic_square,
)
from .graphs import complete_graph, cycle_graph, empty_graph

BUILDERS = {
    "chsh": make_chsh,
    "magic_square": make_magic_square,
    "is_K2_1": lambda: make_independent_set_game(complete_graph(2), 1),
    "is_K2_2": lambda: make_independent_set_game(complete_graph(2), 2),
    "is_K3_2": lambda: make_independent_set_game(complete_graph(3), 2),
    "is_C5_2": lambda: make_independent_set_game(cycle_graph(5), 2),
    "is_C5_3": lambda: make_independent_set_game(cycle_graph(5), 3),
    "is_empty3_3": lambda: make_independent_set_game(empty_graph(3), 3),
    "hom_K3_K3": lambda: make_homomorphism_game(complete_graph(3), complete_graph(3)),
    "hom_K3_K2": lambda: make_homomorphism_game(complete_graph(3), complete_graph(2)),
    "hom_C5_K3": lambda: make_homomorphism_game(cycle_graph(5), complete_graph(3)),
    "hom_C5_K2": lambda: make_homomorphism_game(cycle_graph(5), complete_graph(2)),
    "hom_K2_K2": lambda: make_homomorphism_game(complete_graph(2), complete_graph(2)),
}


def names() -> list[str]:
    return sorted(BUILDERS)


def corpus_path(name: str) -> Path:
    if name not in BUILDERS:
        raise KeyError(f"no corpus game {name!r}; available: {', '.join(names())}")
    return Path(str(resources.files("nlgames") / "corpus_data" / f"{name}.json"))


def load(name: str) -> NonlocalGame:
    from .io import load_game

    return load_game(corpus_path(name).read_text())


def regenerate(directory: Path | None = None) -> list[Path]:
    """Rewrite the bundled files from their builders."""
    from .io import dump_game

    directory = directory or Path(__file__).parent / "corpus_data"
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in BUILDERS.items():
        path = directory / f"{name}.json"
        path.write_text(dump_game(build()))
        written.append(path)
    return written
