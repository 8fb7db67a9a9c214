"""Simple undirected graphs, exact independence number, and classical strategies from independent sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .game import (
    BudgetExceededError,
    DeterministicStrategy,
    Label,
    NonlocalGame,
    eval_deterministic,
    require_synchronous,
    self_losing_pairs,
)

DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class Graph:
    vertices: tuple
    edges: frozenset
    clique_partition: tuple | None = None

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertex labels")
        vset = set(verts)
        edges = set()
        for e in self.edges:
            pair = tuple(e)
            if len(pair) == 1 or (len(pair) == 2 and pair[0] == pair[1]):
                raise ValueError(f"self-loop at {pair[0]!r}")
            if len(pair) != 2:
                raise ValueError(f"edge {pair!r} is not a vertex pair")
            u, v = pair
            if u not in vset or v not in vset:
                raise ValueError(f"edge {u!r}-{v!r} references unknown vertex")
            edges.add(frozenset((u, v)))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(edges))
        if self.clique_partition is not None:
            blocks = tuple(tuple(b) for b in self.clique_partition)
            object.__setattr__(self, "clique_partition", blocks)
            problems = partition_problems(self, blocks)
            if problems:
                raise ValueError("inconsistent clique partition: " + "; ".join(problems))

    @classmethod
    def from_adjacency(cls, vertices: Sequence[Label], adj: np.ndarray,
                       clique_partition=None) -> "Graph":
        vertices = tuple(vertices)
        iu, ju = np.nonzero(np.triu(np.asarray(adj, dtype=bool), 1))
        edges = frozenset(frozenset((vertices[i], vertices[j])) for i, j in zip(iu, ju))
        return cls(vertices, edges, clique_partition)

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adjacency(self) -> np.ndarray:
        n = len(self.vertices)
        adj = np.zeros((n, n), dtype=bool)
        for e in self.edges:
            u, v = e
            i, j = self.index[u], self.index[v]
            adj[i, j] = adj[j, i] = True
        adj.flags.writeable = False
        return adj

    @cached_property
    def _masks(self) -> list[int]:
        return [sum(1 << int(j) for j in np.flatnonzero(row)) for row in self.adjacency]

    def adjacent(self, u: Label, v: Label) -> bool:
        return frozenset((u, v)) in self.edges

    def neighbors(self, u: Label) -> list[Label]:
        row = self.adjacency[self.index[u]]
        return [self.vertices[j] for j in np.flatnonzero(row)]

    def relabel(self, mapping) -> "Graph":
        f = mapping if callable(mapping) else mapping.__getitem__
        blocks = None
        if self.clique_partition is not None:
            blocks = tuple(tuple(f(v) for v in b) for b in self.clique_partition)
        return Graph(tuple(f(v) for v in self.vertices),
                     frozenset(frozenset(f(v) for v in e) for e in self.edges), blocks)

    def same_labeled(self, other: "Graph") -> bool:
        """Equal vertex and edge sets, ignoring vertex order and partitions."""
        return set(self.vertices) == set(other.vertices) and self.edges == other.edges

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.vertices == other.vertices and self.edges == other.edges
                and self.clique_partition == other.clique_partition)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"Graph(|V|={len(self.vertices)}, |E|={len(self.edges)})"


def partition_problems(X: Graph, blocks) -> list[str]:
    problems = []
    seen: dict = {}
    vset = set(X.vertices)
    for k, block in enumerate(blocks):
        for v in block:
            if v not in vset:
                problems.append(f"block {k} has unknown vertex {v!r}")
            elif v in seen:
                problems.append(f"vertex {v!r} in blocks {seen[v]} and {k}")
            else:
                seen[v] = k
        for u, v in itertools.combinations(block, 2):
            if frozenset((u, v)) not in X.edges:
                problems.append(f"block {k} pair {u!r},{v!r} is not an edge")
    missing = vset - set(seen)
    if missing:
        problems.append(f"vertices not covered: {sorted(map(repr, missing))}")
    return problems


# --- constructors -------------------------------------------------------------

def empty_graph(n: int) -> Graph:
    return Graph(tuple(range(n)), frozenset())


def complete_graph(n: int) -> Graph:
    return Graph(tuple(range(n)),
                 frozenset(frozenset(e) for e in itertools.combinations(range(n), 2)))


def cycle_graph(n: int) -> Graph:
    return Graph(tuple(range(n)), frozenset(frozenset((i, (i + 1) % n)) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(tuple(range(n)), frozenset(frozenset((i, i + 1)) for i in range(n - 1)))


def random_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    upper = np.triu(rng.random((n, n)) < p, 1)
    return Graph.from_adjacency(range(n), upper | upper.T)


# --- operations ---------------------------------------------------------------

def is_independent_set(X: Graph, S: Iterable[Label]) -> bool:
    S = list(S)
    for v in S:
        if v not in X.index:
            raise KeyError(f"unknown vertex {v!r}")
    idx = [X.index[v] for v in S]
    return not X.adjacency[np.ix_(idx, idx)].any()


def complement(X: Graph) -> Graph:
    n = len(X.vertices)
    adj = ~X.adjacency & ~np.eye(n, dtype=bool)
    return Graph.from_adjacency(X.vertices, adj)


def induced_subgraph(X: Graph, keep: Iterable[Label]) -> Graph:
    """Subgraph on ``keep`` (in X's vertex order); partition blocks are restricted, empty ones dropped."""
    keep = set(keep)
    verts = tuple(v for v in X.vertices if v in keep)
    edges = frozenset(e for e in X.edges if e <= keep)
    blocks = None
    if X.clique_partition is not None:
        blocks = tuple(b for b in (tuple(v for v in blk if v in keep) for blk in X.clique_partition) if b)
    return Graph(verts, edges, blocks)


def _clique_cover_bound(cand: int, masks: list[int]) -> int:
    """Greedy clique cover size of the candidate set (an upper bound on alpha)."""
    count = 0
    while cand:
        count += 1
        v = (cand & -cand).bit_length() - 1
        clique = cand & masks[v]
        cand &= ~(1 << v)
        while clique:
            w = (clique & -clique).bit_length() - 1
            cand &= ~(1 << w)
            clique &= masks[w]
    return count


def independence_number(X: Graph, budget: int = DEFAULT_NODE_BUDGET) -> tuple[int, list[Label]]:
    """Exact alpha(X) with the lexicographically smallest maximum independent set.

    Depth-first branch and bound over the lowest-index candidate, include
    branch first, so sets are visited in lexicographic order and only strict
    improvements replace the incumbent. The bound is the smaller of a greedy
    clique cover and, when X carries a clique partition, the number of blocks
    still meeting the candidates.
    """
    n = len(X.vertices)
    masks = X._masks
    block_of = None
    if X.clique_partition is not None:
        block_of = [0] * n
        block_masks = []
        for k, block in enumerate(X.clique_partition):
            m = 0
            for v in block:
                block_of[X.index[v]] = k
                m |= 1 << X.index[v]
            block_masks.append(m)

    best_size = 0
    best_set: tuple[int, ...] = ()
    nodes = 0

    def bound(cand: int) -> int:
        b = _clique_cover_bound(cand, masks)
        if block_of is not None:
            b = min(b, sum(1 for m in block_masks if m & cand))
        return b

    def search(chosen: list[int], cand: int):
        nonlocal best_size, best_set, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(nodes, budget, "branch-and-bound nodes")
        if not cand:
            if len(chosen) > best_size:
                best_size, best_set = len(chosen), tuple(chosen)
            return
        if len(chosen) + bound(cand) <= best_size:
            return
        v = (cand & -cand).bit_length() - 1
        chosen.append(v)
        search(chosen, cand & ~masks[v] & ~(1 << v))
        chosen.pop()
        search(chosen, cand & ~(1 << v))

    search([], (1 << n) - 1)
    return best_size, [X.vertices[i] for i in best_set]


def _block_lookup(game: NonlocalGame, X: Graph) -> dict:
    """Map each game-graph vertex (a, q) to its answer and question, checking V_q blocks."""
    Q = game.alice_questions
    parts = X.clique_partition
    if parts is None or len(parts) != len(Q):
        raise ValueError("graph must carry a clique partition with one block per question")
    lookup = {}
    for q, block in zip(Q, parts):
        for v in block:
            a, q2 = v
            if q2 != q:
                raise ValueError(f"vertex {v!r} is in the block of question {q!r}")
            lookup[v] = (a, q)
    return lookup


def perfect_classical_strategy(game: NonlocalGame, X: Graph,
                               budget: int = DEFAULT_NODE_BUDGET) -> DeterministicStrategy | None:
    """A perfect deterministic strategy read off a size-|Q| independent set, or None.

    Vertices (a, q) with V(a,a|q,q) = 0 are left out of the search, since an
    independent set through them does not give a winning strategy.
    """
    require_synchronous(game)
    lookup = _block_lookup(game, X)
    dead = set(self_losing_pairs(game))
    if dead:
        X = induced_subgraph(X, [v for v in X.vertices if v not in dead])
    nq = len(game.alice_questions)
    if X.clique_partition is None or len(X.clique_partition) < nq:
        return None
    alpha, S = independence_number(X, budget)
    if alpha != nq:
        return None
    f = {}
    for v in S:
        a, q = lookup[v]
        f[q] = a
    s = DeterministicStrategy.symmetric(f)
    if eval_deterministic(game, s) != 1:
        raise ValueError("graph does not match the game: extracted strategy is not perfect")
    return s


def classical_strategy_from_independent_set(
    game: NonlocalGame, X: Graph, S: Iterable[Label]
) -> tuple[DeterministicStrategy, Fraction]:
    """Answer f(q) on questions covered by S, the first answer elsewhere.

    Returns the strategy and its guaranteed value (|S|/|Q|)^2. The guarantee
    needs V(a,a|q,q) = 1 for every (a, q) in S, so other sets are refused.
    """
    require_synchronous(game)
    if not game.is_uniform:
        raise ValueError("the (|S|/|Q|)^2 guarantee needs a uniform distribution")
    S = list(S)
    if not is_independent_set(X, S):
        raise ValueError("S is not an independent set")
    lookup = _block_lookup(game, X)
    dead = set(self_losing_pairs(game)).intersection(S)
    if dead:
        raise ValueError(f"S uses vertices with V(a,a|q,q) = 0, which void the guarantee: {sorted(dead, key=repr)}")
    default = game.alice_answers[0]
    f = {q: default for q in game.alice_questions}
    for v in S:
        a, q = lookup[v]
        f[q] = a
    nq = len(game.alice_questions)
    return DeterministicStrategy.symmetric(f), Fraction(len(S), nq) ** 2
