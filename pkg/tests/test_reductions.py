import itertools
import json

import numpy as np
import pytest

from nlgames import (
    classical_value,
    eval_pme,
    game_graph,
    homomorphic_product,
    independence_number,
    is_symmetric,
    is_synchronous,
    make_chsh,
    make_homomorphism_game,
    make_independent_set_game,
    make_magic_square,
    synchronous_extension,
)
from nlgames.game import DeterministicStrategy, NonlocalGame
from nlgames.graphs import Graph, complete_graph, cycle_graph, random_graph
from nlgames.quantum import (
    PMEStrategy,
    deterministic_as_pme,
    magic_square_pme_strategy,
    random_pme_strategy,
    random_unitary,
)
from nlgames.reductions import (
    independent_set_game_of,
    lift_pme_strategy,
    reduce_pme_to_qindependence,
    restricted_value,
    strategy_to_is_game,
)

from oracles import (
    extension_predicate,
    naive_edges_product,
    random_game,
    random_synchronous_game,
)


def test_chsh_extension_sizes():
    ext = synchronous_extension(make_chsh())
    assert len(ext.alice_questions) == 4 and len(ext.alice_answers) == 4
    assert is_synchronous(ext) and ext.is_uniform


def test_extension_matches_definition(rng):
    for _ in range(10):
        g = random_game(rng, *rng.integers(1, 4, size=4))
        ext = synchronous_extension(g)
        for x, x2 in itertools.product(ext.alice_questions, repeat=2):
            for y, y2 in itertools.product(ext.alice_answers, repeat=2):
                assert ext.V(y, y2, x, x2) == extension_predicate(g, x, y, x2, y2)


def test_extension_original_and_swapped_cells(rng):
    g = random_game(rng, 2, 3, 2, 2)
    ext = synchronous_extension(g)
    for a, b, q, r in itertools.product(g.alice_answers, g.bob_answers, g.alice_questions, g.bob_questions):
        v = g.V(a, b, q, r)
        assert ext.V((a, 0), (b, 1), (q, 0), (r, 1)) == v
        assert ext.V((b, 1), (a, 0), (r, 1), (q, 0)) == v
    # Bob's answer to an Alice-origin question always loses
    q, q2 = g.alice_questions[0], g.alice_questions[1]
    for b, a in itertools.product(g.bob_answers, g.alice_answers):
        assert ext.V((b, 1), (a, 0), (q, 0), (q2, 0)) == 0


def test_game_graph_blocks_are_cliques(rng):
    g = random_synchronous_game(rng, 3, 3)
    X = game_graph(g)
    assert len(X.clique_partition) == 3
    for block in X.clique_partition:
        for u, v in itertools.combinations(block, 2):
            assert X.adjacent(u, v)


def test_all_winning_offdiagonal_gives_disjoint_cliques():
    Q, A = (0, 1, 2), ("x", "y")
    g = NonlocalGame.from_rule(Q, Q, A, A, lambda a, b, q, r: q != r or a == b)
    X = game_graph(g)
    assert len(X.edges) == 3  # one edge per K2 block
    assert all(u[1] == v[1] for u, v in map(tuple, X.edges))


def test_game_graph_edges_by_definition(rng):
    for _ in range(10):
        g = random_synchronous_game(rng, 3, 2, p_win=0.6)
        X = game_graph(g)
        for (a, q), (b, r) in itertools.combinations(X.vertices, 2):
            lost = g.V(a, b, q, r) == 0 or g.V(b, a, r, q) == 0
            assert X.adjacent((a, q), (b, r)) == lost


def _product_relabel(v):
    y, x = v
    return (x, y)


def test_product_with_single_vertex_is_clique():
    K1 = Graph(("x",), frozenset())
    Y = cycle_graph(4)
    assert homomorphic_product(K1, Y).relabel(lambda v: v[1]).same_labeled(complete_graph(4))


def test_hom_game_graph_is_product(rng):
    for _ in range(20):
        X = random_graph(int(rng.integers(1, 5)), 0.5, rng)
        Y = random_graph(int(rng.integers(1, 5)), 0.5, rng)
        G = game_graph(make_homomorphism_game(X, Y)).relabel(_product_relabel)
        assert G.same_labeled(homomorphic_product(X, Y))


def test_product_edge_count_matches_recount(rng):
    for _ in range(20):
        X, Y = random_graph(5, 0.5, rng), random_graph(5, 0.5, rng)
        P = homomorphic_product(X, Y)
        assert P.edges == naive_edges_product(X, Y)


@pytest.mark.parametrize("build, nv, t", [(make_chsh, 16, 4), (make_magic_square, 48, 6)])
def test_reduction_sizes(build, nv, t):
    art = reduce_pme_to_qindependence(build())
    assert len(art.game_graph.vertices) == nv
    assert art.target_t == t


def test_chsh_extension_alpha_below_target():
    art = reduce_pme_to_qindependence(make_chsh())
    assert independence_number(art.game_graph)[0] < art.target_t


def test_artifact_save(tmp_path):
    art = reduce_pme_to_qindependence(make_chsh())
    written = art.save(tmp_path)
    assert set(written) >= {"extended_game", "game_graph", "provenance"}
    prov = json.loads((tmp_path / "provenance.json").read_text())
    assert prov["target_t"] == 4
    assert (tmp_path / "game_graph.txt").read_text().startswith("vertices:")


def test_question_and_answer_maps():
    art = reduce_pme_to_qindependence(make_chsh())
    assert art.question_map["alice"]["x0"] == ("x0", 0)
    assert art.answer_map["bob"]["b1"] == ("b1", 1)
    origin = art.vertex_origin((("a1", 0), ("y0", 1)))
    assert origin == {"answer": "a1", "answer_side": "alice", "question": "y0", "question_side": "bob"}


def test_lift_deterministic_perfect_strategy():
    g = make_independent_set_game(cycle_graph(5), 2)
    value, s = classical_value(g)
    assert value == 1
    lifted = lift_pme_strategy(g, deterministic_as_pme(g, s))
    assert eval_pme(synchronous_extension(g), lifted) == pytest.approx(1, abs=1e-12)


def test_lift_magic_square():
    g = make_magic_square()
    lifted = lift_pme_strategy(g, magic_square_pme_strategy(g))
    assert abs(eval_pme(synchronous_extension(g), lifted) - 1) <= 1e-9


def test_lift_keeps_value_on_original_pairs(rng):
    g = make_chsh()
    ext = synchronous_extension(g)
    for _ in range(10):
        s = random_pme_strategy(g, 2, rng, transpose_paired=False)
        v = eval_pme(g, s)
        assert restricted_value(ext, g, lift_pme_strategy(g, s)) >= v - 1e-12


def _homomorphism_pme(d):
    """Perfect strategy for the K3-to-K3 game: a random rotation of a permutation strategy."""
    g = make_homomorphism_game(complete_graph(3), complete_graph(3))
    f = {0: 1, 1: 2, 2: 0}
    s = deterministic_as_pme(g, DeterministicStrategy.symmetric(f))
    alice = {k: np.eye(d) * m[0, 0] for k, m in s.alice.items()}
    return g, PMEStrategy(d, alice)


def test_hom_strategy_to_is_game(rng):
    from nlgames.quantum import rotate_pme

    g, s = _homomorphism_pme(3)
    s = rotate_pme(s, random_unitary(3, rng))
    is_game = independent_set_game_of(g)
    out = strategy_to_is_game(g, s)
    assert abs(eval_pme(is_game, out) - 1) <= 1e-9
    # the IS game lives on K3 ⋉ K3
    X = game_graph(g).relabel(lambda v: (v[1], v[0]))
    K = complete_graph(3)
    assert X.same_labeled(homomorphic_product(K, K))
    assert is_game.alice_answers == game_graph(g).vertices


def test_deterministic_strategy_to_is_game():
    g = make_independent_set_game(cycle_graph(5), 2)
    _, s = classical_value(g)
    out = strategy_to_is_game(g, deterministic_as_pme(g, s))
    assert eval_pme(independent_set_game_of(g), out) == pytest.approx(1, abs=1e-12)


def test_to_is_game_never_loses_value(rng):
    for _ in range(20):
        g = random_synchronous_game(rng, 3, 3, symmetric=True)
        s = random_pme_strategy(g, int(rng.integers(1, 4)), rng)
        out = strategy_to_is_game(g, s)
        assert eval_pme(independent_set_game_of(g), out) >= eval_pme(g, s) - 1e-9


def test_to_is_game_rejects_asymmetric(rng):
    g = random_synchronous_game(rng, 3, 3)
    while is_symmetric(g):
        g = random_synchronous_game(rng, 3, 3)
    with pytest.raises(ValueError, match="symmetric"):
        strategy_to_is_game(g, random_pme_strategy(g, 2, rng))
