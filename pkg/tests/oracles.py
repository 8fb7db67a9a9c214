"""Slow, independent reference implementations used only by the tests."""

import itertools
from fractions import Fraction

import numpy as np

from nlgames.game import NonlocalGame, uniform_distribution
from nlgames.graphs import Graph


def naive_classical_value(game: NonlocalGame) -> Fraction:
    """Double loop over every (f_A, f_B) with Fraction arithmetic."""
    Q, R = game.alice_questions, game.bob_questions
    best = Fraction(-1)
    for fa in itertools.product(range(len(game.alice_answers)), repeat=len(Q)):
        for fb in itertools.product(range(len(game.bob_answers)), repeat=len(R)):
            v = Fraction(0)
            for i in range(len(Q)):
                for j in range(len(R)):
                    if game.predicate[fa[i], fb[j], i, j]:
                        v += game.distribution[i][j]
            best = max(best, v)
    return best


def brute_alpha(X: Graph) -> int:
    """Largest pairwise-nonadjacent subset by checking all 2^n subsets."""
    n = len(X.vertices)
    edges = [(X.index[u], X.index[v]) for u, v in (tuple(e) for e in X.edges)]
    best = 0
    for mask in range(1 << n):
        if all(not (mask >> i & 1 and mask >> j & 1) for i, j in edges):
            best = max(best, bin(mask).count("1"))
    return best


def brute_homomorphism_exists(X: Graph, Y: Graph) -> bool:
    xs, ys = X.vertices, Y.vertices
    for f in itertools.product(ys, repeat=len(xs)):
        m = dict(zip(xs, f))
        if all(frozenset((m[u], m[v])) in Y.edges for u, v in (tuple(e) for e in X.edges)):
            return True
    return False


def naive_edges_product(X: Graph, Y: Graph) -> set:
    """X ⋉ Y edge set by a double loop over vertex pairs."""
    out = set()
    V = [(x, y) for x in X.vertices for y in Y.vertices]
    for (x, y), (x2, y2) in itertools.combinations(V, 2):
        if (x == x2 and y != y2) or (X.adjacent(x, x2) and not Y.adjacent(y, y2)):
            out.add(frozenset(((x, y), (x2, y2))))
    return out


def extension_predicate(game: NonlocalGame, x, y, x2, y2) -> int:
    """Synchronous-extension predicate, case by case on tagged labels."""
    (qx, sx), (ay, ty), (qx2, sx2), (ay2, ty2) = x, y, x2, y2
    # wrong-role answers lose
    if sx != ty or sx2 != ty2:
        return 0
    if x == x2:
        return int(y == y2)
    if sx == 0 and sx2 == 1:
        return game.V(ay, ay2, qx, qx2)
    if sx == 1 and sx2 == 0:
        return game.V(ay2, ay, qx2, qx)
    return 1


def random_game(rng, nq, nr, na, nb, p_win=0.6) -> NonlocalGame:
    Q = tuple(f"q{i}" for i in range(nq))
    R = tuple(f"r{i}" for i in range(nr))
    A = tuple(f"a{i}" for i in range(na))
    B = tuple(f"b{i}" for i in range(nb))
    pred = rng.random((na, nb, nq, nr)) < p_win
    weights = rng.integers(0, 4, size=(nq, nr))
    if weights.sum() == 0:
        weights[0, 0] = 1
    total = int(weights.sum())
    dist = [[Fraction(int(w), total) for w in row] for row in weights]
    return NonlocalGame(Q, R, A, B, dist, pred)


def random_synchronous_game(rng, nq, na, p_win=0.7, symmetric=False, uniform=True,
                            live_diagonal=False) -> NonlocalGame:
    """Random synchronous game; ``live_diagonal`` forces V(a,a|q,q) = 1."""
    Q = tuple(range(nq))
    A = tuple(f"v{i}" for i in range(na))
    pred = rng.random((na, na, nq, nq)) < p_win
    if symmetric:
        pred = pred & pred.transpose(1, 0, 3, 2)
    for q in range(nq):
        pred[:, :, q, q] &= np.eye(na, dtype=bool)
        if live_diagonal:
            pred[:, :, q, q] = np.eye(na, dtype=bool)
    if uniform:
        dist = uniform_distribution(nq, nq)
    else:
        w = rng.integers(1, 4, size=(nq, nq))
        dist = [[Fraction(int(x), int(w.sum())) for x in row] for row in w]
    return NonlocalGame(Q, Q, A, A, dist, pred)


def random_independent_set(X: Graph, rng) -> list:
    order = rng.permutation(len(X.vertices))
    chosen = []
    for i in order:
        v = X.vertices[i]
        if rng.random() < 0.7 and all(not X.adjacent(v, u) for u in chosen):
            chosen.append(v)
    return chosen


def random_valid_packing(X: Graph, d: int, rng) -> dict:
    """Greedy random packing: each vertex draws a random subspace orthogonal to its earlier neighbours."""
    P = {}
    for i in rng.permutation(len(X.vertices)):
        v = X.vertices[i]
        taken = [P[u] for u in X.neighbors(v) if u in P]
        M = np.eye(d, dtype=complex)
        if taken:
            w, vecs = np.linalg.eigh(sum(taken))
            span = vecs[:, w > 1e-9]
            M = M - span @ span.conj().T
        w, vecs = np.linalg.eigh(M)
        free = vecs[:, w > 0.5]
        k = int(rng.integers(0, free.shape[1] + 1))
        if k:
            z = rng.standard_normal((free.shape[1], k)) + 1j * rng.standard_normal((free.shape[1], k))
            basis, _ = np.linalg.qr(free @ z)
            P[v] = basis @ basis.conj().T
    return P


def backtrack_homomorphism_exists(X: Graph, Y: Graph) -> bool:
    """Exhaustive search that prunes a partial map as soon as an edge breaks."""
    xs = X.vertices
    nbr = {x: [u for u in xs[:i] if X.adjacent(x, u)] for i, x in enumerate(xs)}
    m = {}

    def extend(i):
        if i == len(xs):
            return True
        x = xs[i]
        for y in Y.vertices:
            if all(Y.adjacent(y, m[u]) for u in nbr[x]):
                m[x] = y
                if extend(i + 1):
                    return True
        m.pop(x, None)
        return False

    return extend(0)


def all_graphs(n: int):
    """Every labelled simple graph on vertices 0..n-1."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph(tuple(range(n)),
                    frozenset(frozenset(p) for k, p in enumerate(pairs) if mask >> k & 1))
