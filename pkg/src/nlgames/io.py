"""Text formats for games, graphs, strategies and packings.

Labels may be strings, integers or (nested) tuples of those; JSON carries
tuples as arrays and they are turned back into tuples on load.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from .game import NonlocalGame
from .graphs import Graph
from .quantum import GeneralStrategy, PMEStrategy, ProjectivePacking


class FormatError(ValueError):
    """Unparseable or inconsistent input; ``where`` locates the problem."""

    def __init__(self, message: str, where: str | None = None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


def _encode(x: Any):
    if isinstance(x, tuple):
        return [_encode(v) for v in x]
    if isinstance(x, list):
        return [_encode(v) for v in x]
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def _label(x: Any, where: str):
    if isinstance(x, list):
        return tuple(_label(v, where) for v in x)
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise FormatError(f"labels must be strings, integers or arrays, got {x!r}", where)
    return x


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None


def _field(doc: dict, key: str, where: str = "$"):
    if not isinstance(doc, dict) or key not in doc:
        raise FormatError(f"missing field {key!r}", where)
    return doc[key]


# --- games ----------------------------------------------------------------------

def game_to_dict(game: NonlocalGame) -> dict:
    Q, R, A, B = (game.alice_questions, game.bob_questions,
                  game.alice_answers, game.bob_answers)
    dist = [[q, r, p.numerator, p.denominator]
            for i, q in enumerate(Q) for j, r in enumerate(R)
            if (p := game.distribution[i][j])]
    ones = np.argwhere(game.predicate)
    zeros = np.argwhere(~game.predicate)
    if len(zeros) <= len(ones):
        pred = {"default": 1, "zeros": [[A[a], B[b], Q[q], R[r]] for a, b, q, r in zeros]}
    else:
        pred = {"default": 0, "ones": [[A[a], B[b], Q[q], R[r]] for a, b, q, r in ones]}
    return _encode({
        "alice_questions": Q, "bob_questions": R,
        "alice_answers": A, "bob_answers": B,
        "distribution": dist, "predicate": pred,
    })


def dump_game(game: NonlocalGame) -> str:
    d = game_to_dict(game)
    lines = ["{"]
    for k in ("alice_questions", "bob_questions", "alice_answers", "bob_answers"):
        lines.append(f' "{k}": {json.dumps(d[k])},')
    lines.append(' "distribution": [')
    lines.append(",\n".join("  " + json.dumps(e) for e in d["distribution"]))
    lines.append(" ],")
    pred = d["predicate"]
    key = "zeros" if "zeros" in pred else "ones"
    lines.append(f' "predicate": {{"default": {pred["default"]}, "{key}": [')
    lines.append(",\n".join("  " + json.dumps(e) for e in pred[key]))
    lines.append(" ]}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def game_from_dict(doc: dict) -> NonlocalGame:
    sets = []
    for key in ("alice_questions", "bob_questions", "alice_answers", "bob_answers"):
        raw = _field(doc, key)
        if not isinstance(raw, list) or not raw:
            raise FormatError("must be a nonempty array", f"$.{key}")
        labels = tuple(_label(x, f"$.{key}[{i}]") for i, x in enumerate(raw))
        if len(set(labels)) != len(labels):
            raise FormatError("duplicate labels", f"$.{key}")
        sets.append(labels)
    Q, R, A, B = sets
    qi, ri, ai, bi = ({x: i for i, x in enumerate(s)} for s in sets)

    dist = [[Fraction(0)] * len(R) for _ in Q]
    raw = _field(doc, "distribution")
    if not isinstance(raw, list):
        raise FormatError("must be an array of [q, r, numerator, denominator]", "$.distribution")
    for n, entry in enumerate(raw):
        where = f"$.distribution[{n}]"
        if not isinstance(entry, list) or len(entry) != 4:
            raise FormatError("expected [q, r, numerator, denominator]", where)
        q, r = _label(entry[0], where), _label(entry[1], where)
        num, den = entry[2], entry[3]
        if q not in qi or r not in ri:
            raise FormatError(f"unknown question pair ({q!r}, {r!r})", where)
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (num, den)) or den <= 0:
            raise FormatError("numerator and denominator must be integers, denominator positive", where)
        if num < 0:
            raise FormatError("negative probability", where)
        dist[qi[q]][ri[r]] += Fraction(num, den)
    total = sum(sum(row) for row in dist)
    if total != 1:
        listed = ", ".join(f"({e[0]!r},{e[1]!r})={e[2]}/{e[3]}" for e in raw)
        raise FormatError(f"probabilities sum to {total}, not 1; entries: {listed}", "$.distribution")

    pred_doc = _field(doc, "predicate")
    shape = (len(A), len(B), len(Q), len(R))
    if "table" in pred_doc:
        table = np.array(pred_doc["table"])
        if table.shape != shape or not np.isin(table, (0, 1)).all():
            raise FormatError(f"table must be a 0/1 array of shape {shape}", "$.predicate.table")
        pred = table.astype(bool)
    else:
        default = pred_doc.get("default")
        key = "zeros" if default == 1 else "ones" if default == 0 else None
        if key is None or key not in pred_doc:
            raise FormatError('expected {"default": 1, "zeros": [...]}, '
                              '{"default": 0, "ones": [...]} or {"table": ...}', "$.predicate")
        pred = np.full(shape, bool(default))
        for n, entry in enumerate(pred_doc[key]):
            where = f"$.predicate.{key}[{n}]"
            if not isinstance(entry, list) or len(entry) != 4:
                raise FormatError("expected [a, b, q, r]", where)
            a, b, q, r = (_label(x, where) for x in entry)
            try:
                pred[ai[a], bi[b], qi[q], ri[r]] = not default
            except KeyError as exc:
                raise FormatError(f"unknown label {exc.args[0]!r}", where) from None
    return NonlocalGame(Q, R, A, B, dist, pred)


def load_game(text: str) -> NonlocalGame:
    return game_from_dict(_loads(text))


# --- graphs ---------------------------------------------------------------------

def _token(label) -> str:
    tok = json.dumps(_encode(label), separators=(",", ":"))
    if any(c.isspace() for c in tok):
        raise FormatError(f"label {label!r} contains whitespace; use the JSON graph format")
    return tok


def _untoken(tok: str, where: str):
    try:
        return _label(json.loads(tok), where)
    except json.JSONDecodeError:
        raise FormatError(f"bad vertex token {tok!r}", where) from None


def write_edge_list(X: Graph) -> str:
    """``vertices:`` header, one ``u v`` line per edge, ``block:`` lines for the partition."""
    lines = ["vertices: " + " ".join(_token(v) for v in X.vertices)]
    idx = X.index
    for e in sorted(X.edges, key=lambda e: sorted(idx[v] for v in e)):
        u, v = sorted(e, key=idx.__getitem__)
        lines.append(f"{_token(u)} {_token(v)}")
    for block in X.clique_partition or ():
        lines.append("block: " + " ".join(_token(v) for v in block))
    return "\n".join(lines) + "\n"


def read_edge_list(text: str) -> Graph:
    vertices = None
    edges = []
    blocks = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        where = f"line {n}"
        if line.startswith("vertices:"):
            vertices = [_untoken(t, where) for t in line[len("vertices:"):].split()]
        elif line.startswith("block:"):
            blocks.append([_untoken(t, where) for t in line[len("block:"):].split()])
        else:
            parts = line.split()
            if len(parts) != 2:
                raise FormatError("expected 'u v'", where)
            edges.append(tuple(_untoken(t, where) for t in parts))
    if vertices is None:
        raise FormatError("missing 'vertices:' header")
    try:
        return Graph(tuple(vertices), frozenset(frozenset(e) for e in edges), blocks or None)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def write_dimacs(X: Graph) -> str:
    """DIMACS edge format with labels and blocks in ``c`` comment lines."""
    idx = X.index
    lines = [f"p edge {len(X.vertices)} {len(X.edges)}"]
    for i, v in enumerate(X.vertices, 1):
        lines.append(f"c v {i} {_token(v)}")
    for block in X.clique_partition or ():
        lines.append("c block " + " ".join(str(idx[v] + 1) for v in block))
    for e in sorted(X.edges, key=lambda e: sorted(idx[v] for v in e)):
        i, j = sorted(idx[v] + 1 for v in e)
        lines.append(f"e {i} {j}")
    return "\n".join(lines) + "\n"


def read_dimacs(text: str) -> Graph:
    n = None
    labels: dict[int, Any] = {}
    edges = []
    blocks = []
    for k, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        where = f"line {k}"
        try:
            if parts[0] == "p":
                n = int(parts[2])
            elif parts[0] == "e":
                edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "c" and len(parts) >= 4 and parts[1] == "v":
                labels[int(parts[2])] = _untoken(parts[3], where)
            elif parts[0] == "c" and len(parts) >= 2 and parts[1] == "block":
                blocks.append([int(x) for x in parts[2:]])
        except (IndexError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"cannot parse {line.strip()!r}", where) from None
    if n is None:
        raise FormatError("missing 'p edge n m' line")
    name = lambda i: labels.get(i, i)  # noqa: E731
    try:
        return Graph(tuple(name(i) for i in range(1, n + 1)),
                     frozenset(frozenset((name(i), name(j))) for i, j in edges),
                     [[name(i) for i in b] for b in blocks] or None)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def read_graph(text: str) -> Graph:
    first = next((ln.strip() for ln in text.splitlines() if ln.strip()), "")
    if first.startswith("p ") or first.startswith("c "):
        return read_dimacs(text)
    return read_edge_list(text)


# --- matrices, strategies, packings ---------------------------------------------

def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, complex)]


def _matrix_from_json(raw, d: int, where: str) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise FormatError("matrix entries must be [real, imag] number pairs", where) from None
    if arr.shape != (d, d, 2):
        raise FormatError(f"expected a {d}x{d} matrix of [real, imag] pairs, got shape {arr.shape}", where)
    return arr[..., 0] + 1j * arr[..., 1]


def _ops_to_json(ops: dict) -> list:
    return [{"question": _encode(q), "answer": _encode(a), "matrix": _matrix_to_json(m)}
            for (q, a), m in ops.items()]


def _ops_from_json(raw, d: int, where: str) -> dict:
    if not isinstance(raw, list):
        raise FormatError("expected an array of operators", where)
    out = {}
    for n, entry in enumerate(raw):
        w = f"{where}[{n}]"
        q = _label(_field(entry, "question", w), w)
        a = _label(_field(entry, "answer", w), w)
        out[(q, a)] = _matrix_from_json(_field(entry, "matrix", w), d, f"{w}.matrix")
    return out


def dump_strategy(s: PMEStrategy | GeneralStrategy) -> str:
    if isinstance(s, PMEStrategy):
        doc = {"kind": "pme", "dimension": s.dimension, "alice": _ops_to_json(s.alice)}
        if s.bob is not None:
            doc["bob"] = _ops_to_json(s.bob)
    else:
        doc = {"kind": "general", "dims": list(s.dims),
               "state": [[float(z.real), float(z.imag)] for z in s.state],
               "alice": _ops_to_json(s.alice), "bob": _ops_to_json(s.bob)}
    return json.dumps(doc)


def load_strategy(text: str) -> PMEStrategy | GeneralStrategy:
    doc = _loads(text)
    kind = _field(doc, "kind")
    if kind == "pme":
        d = _field(doc, "dimension")
        if not isinstance(d, int) or d < 1:
            raise FormatError("dimension must be a positive integer", "$.dimension")
        alice = _ops_from_json(_field(doc, "alice"), d, "$.alice")
        bob = _ops_from_json(doc["bob"], d, "$.bob") if "bob" in doc else None
        return PMEStrategy(d, alice, bob)
    if kind == "general":
        dims = _field(doc, "dims")
        if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(x, int) and x > 0 for x in dims)):
            raise FormatError("dims must be two positive integers", "$.dims")
        st = np.array(_field(doc, "state"), dtype=float)
        if st.shape != (dims[0] * dims[1], 2):
            raise FormatError(f"state must have {dims[0] * dims[1]} [real, imag] pairs", "$.state")
        return GeneralStrategy(tuple(dims), st[:, 0] + 1j * st[:, 1],
                               _ops_from_json(_field(doc, "alice"), dims[0], "$.alice"),
                               _ops_from_json(_field(doc, "bob"), dims[1], "$.bob"))
    raise FormatError(f"unknown strategy kind {kind!r}", "$.kind")


def dump_packing(p: ProjectivePacking) -> str:
    return json.dumps({
        "kind": "packing", "dimension": p.dimension,
        "projectors": [{"vertex": _encode(v), "matrix": _matrix_to_json(m)}
                       for v, m in p.projectors.items()],
    })


def load_packing(text: str) -> ProjectivePacking:
    doc = _loads(text)
    if _field(doc, "kind") != "packing":
        raise FormatError("not a packing file", "$.kind")
    d = _field(doc, "dimension")
    if not isinstance(d, int) or d < 1:
        raise FormatError("dimension must be a positive integer", "$.dimension")
    proj = {}
    for n, entry in enumerate(_field(doc, "projectors")):
        w = f"$.projectors[{n}]"
        proj[_label(_field(entry, "vertex", w), w)] = _matrix_from_json(_field(entry, "matrix", w), d, f"{w}.matrix")
    return ProjectivePacking(d, proj)
