"""Synchronous extension, game graphs, homomorphic products and the strategy maps between them."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .game import (
    NonlocalGame,
    is_symmetric,
    make_independent_set_game,
    require_synchronous,
    uniform_distribution,
)
from .graphs import Graph
from .quantum import DEFAULT_TOL, PMEStrategy, Tolerances, require_valid_pme

ALICE_TAG = 0
BOB_TAG = 1


def synchronous_extension(game: NonlocalGame) -> NonlocalGame:
    """The synchronous game where either player may get either side's question.

    Labels are tagged for disjointness: Alice's questions and answers become
    (x, 0), Bob's become (x, 1). Questions are uniform on the extended square.
    """
    Q, R = game.alice_questions, game.bob_questions
    A, B = game.alice_answers, game.bob_answers
    nQ, nR, nA, nB = len(Q), len(R), len(A), len(B)
    Qt = tuple((q, ALICE_TAG) for q in Q) + tuple((r, BOB_TAG) for r in R)
    At = tuple((a, ALICE_TAG) for a in A) + tuple((b, BOB_TAG) for b in B)
    n, m = nQ + nR, nA + nB

    # default: 1 everywhere not constrained below
    V = np.ones((m, m, n, n), dtype=bool)
    sA, sB = slice(0, nA), slice(nA, m)
    sQ, sR = slice(0, nQ), slice(nQ, n)

    # answers from the other side's answer set are never accepted
    wrong = np.zeros((m, n), dtype=bool)  # wrong[y, x]
    wrong[sB, sQ] = True
    wrong[sA, sR] = True
    V &= ~wrong[:, None, :, None]
    V &= ~wrong[None, :, None, :]

    # equal questions require equal answers
    diag = np.arange(n)
    V[:, :, diag, diag] &= np.eye(m, dtype=bool)[:, :, None]

    # original predicate in both orientations
    V[sA, sB, sQ, sR] = game.predicate
    V[sB, sA, sR, sQ] = game.predicate.transpose(1, 0, 3, 2)

    return NonlocalGame(Qt, Qt, At, At, uniform_distribution(n, n), V)


def game_graph(game: NonlocalGame) -> Graph:
    """Vertices (a, q); adjacent when V(a,a'|q,q') = 0 or V(a',a|q',q) = 0.

    Vertices are ordered question-major and the V_q blocks are recorded as the
    clique partition.
    """
    require_synchronous(game)
    Q, A = game.alice_questions, game.alice_answers
    lose = ~game.predicate
    lose = lose | lose.transpose(1, 0, 3, 2)
    # reorder [a, b, q, r] -> [q, a, r, b] so rows match question-major vertices
    adj = lose.transpose(2, 0, 3, 1).reshape(len(Q) * len(A), -1)
    np.fill_diagonal(adj, False)
    vertices = [(a, q) for q in Q for a in A]
    blocks = [[(a, q) for a in A] for q in Q]
    return Graph.from_adjacency(vertices, adj, blocks)


def homomorphic_product(X: Graph, Y: Graph) -> Graph:
    """X ⋉ Y: (x,y) ~ (x',y') iff [x = x' and y != y'] or [x ~ x' and y !~ y']."""
    nx, ny = len(X.vertices), len(Y.vertices)
    same_x = np.eye(nx, dtype=bool)[:, None, :, None]
    same_y = np.eye(ny, dtype=bool)[None, :, None, :]
    ex = X.adjacency[:, None, :, None]
    ey = Y.adjacency[None, :, None, :]
    adj = ((same_x & ~same_y) | (ex & ~ey)).reshape(nx * ny, nx * ny)
    vertices = [(x, y) for x in X.vertices for y in Y.vertices]
    blocks = [[(x, y) for y in Y.vertices] for x in X.vertices]
    return Graph.from_adjacency(vertices, adj, blocks)


@dataclass(frozen=True)
class ReductionArtifact:
    original: NonlocalGame
    extended_game: NonlocalGame
    game_graph: Graph
    target_t: int

    @property
    def question_map(self) -> dict:
        """Original question label (per side) to extended question label."""
        return {"alice": {q: (q, ALICE_TAG) for q in self.original.alice_questions},
                "bob": {r: (r, BOB_TAG) for r in self.original.bob_questions}}

    @property
    def answer_map(self) -> dict:
        return {"alice": {a: (a, ALICE_TAG) for a in self.original.alice_answers},
                "bob": {b: (b, BOB_TAG) for b in self.original.bob_answers}}

    def vertex_origin(self, v) -> dict:
        """Invert a game-graph vertex ((answer, tag), (question, tag)) to original labels."""
        (a, atag), (q, qtag) = v
        side = {ALICE_TAG: "alice", BOB_TAG: "bob"}
        return {"answer": a, "answer_side": side[atag], "question": q, "question_side": side[qtag]}

    def provenance(self) -> dict:
        qm, am = self.question_map, self.answer_map
        return {
            "target_t": self.target_t,
            "questions": [{"side": s, "original": k, "extended": v}
                          for s in ("alice", "bob") for k, v in qm[s].items()],
            "answers": [{"side": s, "original": k, "extended": v}
                        for s in ("alice", "bob") for k, v in am[s].items()],
            "vertices": [{"vertex": v, **self.vertex_origin(v)} for v in self.game_graph.vertices],
        }

    def save(self, out_dir) -> dict:
        from .io import dump_game, write_edge_list, _encode

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "extended_game": out / "extended_game.json",
            "game_graph": out / "game_graph.txt",
            "provenance": out / "provenance.json",
        }
        paths["extended_game"].write_text(dump_game(self.extended_game))
        paths["game_graph"].write_text(write_edge_list(self.game_graph))
        paths["provenance"].write_text(json.dumps(_encode(self.provenance()), indent=1))
        return {k: str(v) for k, v in paths.items()}


def reduce_pme_to_qindependence(game: NonlocalGame) -> ReductionArtifact:
    """Game G to the graph X(G~) and target |Q| + |R| of the independent set game."""
    ext = synchronous_extension(game)
    X = game_graph(ext)
    return ReductionArtifact(game, ext, X, len(game.alice_questions) + len(game.bob_questions))


def lift_pme_strategy(game: NonlocalGame, s: PMEStrategy,
                      tol: Tolerances = DEFAULT_TOL) -> PMEStrategy:
    """Play the extension with P_q on Alice-questions and R_r^T on Bob-questions.

    The result is transpose-paired: Bob's operators for (q, 0) are P_q^T and
    for (r, 1) are R_r, exactly the original Bob measurement.
    """
    require_valid_pme(game, s, tol)
    alice = {}
    for q in game.alice_questions:
        for a in game.alice_answers:
            alice[((q, ALICE_TAG), (a, ALICE_TAG))] = s.alice_op(q, a)
    for r in game.bob_questions:
        for b in game.bob_answers:
            alice[((r, BOB_TAG), (b, BOB_TAG))] = s.bob_op(r, b).T
    return PMEStrategy(s.dimension, alice)


def independent_set_game_of(game: NonlocalGame) -> NonlocalGame:
    """The (X(G), |Q|)-independent set game carrying G's question distribution."""
    require_synchronous(game)
    return make_independent_set_game(game_graph(game), len(game.alice_questions),
                                     distribution=game.distribution)


def strategy_to_is_game(game: NonlocalGame, s: PMEStrategy,
                        tol: Tolerances = DEFAULT_TOL) -> PMEStrategy:
    """Answer vertex (a, q) on question q, where a is what s answers on q.

    Question i of the independent set game is the i-th question of G. Any
    numerical remainder of a measurement goes to the first vertex of V_q.
    Use ``independent_set_game_of(game)`` for the matching game.
    """
    require_synchronous(game)
    if not is_symmetric(game):
        raise ValueError("strategy_to_is_game needs a symmetric synchronous game")
    require_valid_pme(game, s, tol)
    Q, A = game.alice_questions, game.alice_answers
    eye = np.eye(s.dimension)

    def side(op):
        out = {}
        for i, q in enumerate(Q):
            ops = {a: op(q, a) for a in A}
            remainder = eye - sum(ops.values())
            ops[A[0]] = ops[A[0]] + remainder
            for a, P in ops.items():
                out[(i, (a, q))] = P
        return out

    alice = side(s.alice_op)
    bob = None if s.bob is None else side(s.bob_op)
    return PMEStrategy(s.dimension, alice, bob)


def restricted_value(ext: NonlocalGame, original: NonlocalGame, s: PMEStrategy) -> float:
    """Winning probability of s on the extension, conditioned on original question pairs (q,0),(r,1)."""
    from .quantum import pme_probabilities

    pr = pme_probabilities(ext, s)
    nQ = len(original.alice_questions)
    nA = len(original.alice_answers)
    sub = pr[:nA, nA:, :nQ, nQ:] * ext.predicate[:nA, nA:, :nQ, nQ:]
    return float(np.einsum("qr,abqr->", original.weights, sub))

