import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from nlgames import NonlocalGame, classical_value, make_chsh, make_magic_square
from nlgames.cli import main, run
from nlgames.io import dump_game, dump_strategy, game_to_dict, write_edge_list
from nlgames.graphs import empty_graph
from nlgames.quantum import PMEStrategy, deterministic_as_pme, magic_square_pme_strategy


def test_values_c5():
    code, rep = run(["values", "corpus:is_C5_2"])
    assert code == 0
    assert rep.result("classical_value") == "1"
    assert rep.result("alpha_game_graph") == 2 == rep.result("num_questions")
    assert rep.result("perfect_classical_by_value") and rep.result("perfect_classical_by_alpha")


def test_values_chsh_omits_graph_section():
    code, rep = run(["values", "corpus:chsh"])
    assert code == 0
    assert rep.result("classical_value") == "3/4"
    with pytest.raises(KeyError):
        rep.result("alpha_game_graph")
    assert any("not synchronous" in d for d in rep.diagnostics)


def test_values_hom_k3_k2_consistent():
    code, rep = run(["values", "corpus:hom_K3_K2"])
    assert code == 0
    assert rep.result("classical_value") == "7/9"
    assert rep.result("alpha_game_graph") < 3
    assert rep.result("perfect_classical_by_alpha") is False


def test_values_self_losing_cell(tmp_path):
    pred = np.zeros((2, 2, 1, 1), bool)
    pred[1, 1, 0, 0] = True
    f = tmp_path / "g.json"
    f.write_text(dump_game(NonlocalGame((0,), (0,), ("u", "w"), ("u", "w"), [[Fraction(1)]], pred)))
    code, rep = run(["values", str(f)])
    assert code == 0
    assert rep.result("self_losing_pairs") == 1
    assert rep.result("perfect_strategy") == [[0, "w"]]
    assert rep.result("bound_witness_value") == "1"
    assert any("avoiding" in d for d in rep.diagnostics)


@pytest.mark.parametrize("name, nv, t", [("chsh", 16, 4), ("magic_square", 48, 6)])
def test_reduce(name, nv, t, tmp_path):
    code, rep = run(["reduce", f"corpus:{name}", "--out", str(tmp_path)])
    assert code == 0
    assert rep.result("vertices") == nv and rep.result("target_t") == t
    assert (tmp_path / "game_graph.txt").exists()
    assert len(rep.inputs[f"corpus:{name}"]) == 64


def test_verify_magic_square(tmp_path):
    s = tmp_path / "s.json"
    s.write_text(dump_strategy(magic_square_pme_strategy()))
    code, rep = run(["verify", "corpus:magic_square", str(s)])
    assert code == 0
    assert abs(rep.result("winning_probability") - 1) <= 1e-9


def test_verify_chsh_deterministic(tmp_path):
    g = make_chsh()
    s = tmp_path / "s.json"
    s.write_text(dump_strategy(deterministic_as_pme(g, classical_value(g)[1])))
    code, rep = run(["verify", "corpus:chsh", str(s)])
    assert code == 0 and rep.result("winning_probability") == 0.75


def test_verify_reports_bad_cell(tmp_path):
    bad = np.array([[0.5, 0], [0, 0.5]])
    alice = {(q, a): bad for q in ("x0", "x1") for a in ("a0", "a1")}
    bob = {(r, b): bad for r in ("y0", "y1") for b in ("b0", "b1")}
    s = tmp_path / "s.json"
    s.write_text(dump_strategy(PMEStrategy(2, alice, bob)))
    code, rep = run(["verify", "corpus:chsh", str(s)])
    assert code == 4
    assert any("('x0', 'a0')" in d and "idempotent" in d for d in rep.diagnostics)


def test_verify_kind_mismatch(tmp_path):
    s = tmp_path / "s.json"
    s.write_text(dump_strategy(magic_square_pme_strategy()))
    code, _ = run(["verify", "corpus:magic_square", str(s), "--kind", "general"])
    assert code == 2


def test_search_empty_graph(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text(write_edge_list(empty_graph(4)))
    code, rep = run(["search", str(f), "--restarts", "1", "--out", str(tmp_path)])
    assert code == 0 and rep.result("packing_value") == pytest.approx(4)
    assert (tmp_path / "packing.json").exists()


def test_search_game_seeded(tmp_path):
    from nlgames import corpus, game_graph
    from nlgames.io import dump_packing
    from nlgames.quantum import packing_from_independent_set

    g = corpus.load("is_C5_2")
    init = tmp_path / "init.json"
    init.write_text(dump_packing(packing_from_independent_set(game_graph(g), [(0, 0), (2, 1)])))
    code, rep = run(["search", "corpus:is_C5_2", "--init", str(init), "--restarts", "1",
                     "--max-iters", "5", "--out", str(tmp_path)])
    assert code == 0
    assert rep.result("entangled_value_lower_bound") == pytest.approx(1)
    assert rep.result("packing_value") <= rep.result("num_questions") + 1e-8
    assert (tmp_path / "witness_strategy.json").exists()


def test_exit_code_parse_error(tmp_path):
    assert run(["values", str(tmp_path / "missing.json")])[0] == 2
    doc = game_to_dict(make_chsh())
    doc["distribution"] = doc["distribution"][:3]
    f = tmp_path / "g.json"
    f.write_text(json.dumps(doc))
    code, rep = run(["values", str(f)])
    assert code == 2
    assert any("sum to 3/4" in d for d in rep.diagnostics)
    assert run(["values", "corpus:nope"])[0] == 2


def test_exit_code_budget():
    code, rep = run(["values", "corpus:magic_square", "--budget", "10"])
    assert code == 3
    assert any("budget" in d for d in rep.diagnostics)


def test_exit_code_validation():
    # search needs a synchronous game
    assert run(["search", "corpus:chsh", "--restarts", "1"])[0] == 4


def test_corpus_command(tmp_path):
    code, rep = run(["corpus"])
    assert code == 0 and "magic_square" in rep.result("games")
    code, rep = run(["corpus", "magic_square", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "magic_square.json").read_text() == dump_game(make_magic_square())


def test_structured_output(capsys):
    assert main(["values", "corpus:chsh", "--format", "structured"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"command", "inputs", "results", "artifacts", "timings", "diagnostics"}
    assert {"name": "classical_value", "value": "3/4", "exact": True} in doc["results"]


def test_text_output(capsys):
    assert main(["values", "corpus:chsh"]) == 0
    out = capsys.readouterr().out
    assert "classical_value: 3/4 (exact)" in out
    assert "sha256:" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nlgames.cli", "values", "corpus:is_K2_2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "classical_value: 1/2 (exact)" in proc.stdout
