"""Finite two-player nonlocal games with exact rational question distributions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

Label = Hashable

DEFAULT_BUDGET = 10**8


class BudgetExceededError(RuntimeError):
    def __init__(self, required: int, budget: int, what: str = "predicate evaluations"):
        super().__init__(f"enumeration needs {required} {what}, budget is {budget}")
        self.required = required
        self.budget = budget


class NotSynchronousError(ValueError):
    pass


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError(f"distribution entries must be exact rationals, got float {x!r}")
    return Fraction(x)


@dataclass(frozen=True, eq=False)
class NonlocalGame:
    """A game (pi, V) on question sets Q, R and answer sets A, B.

    ``distribution`` is a |Q| x |R| tuple of Fractions and ``predicate`` a
    read-only boolean array indexed ``[a, b, q, r]`` by position in the
    declared label orderings.
    """

    alice_questions: tuple
    bob_questions: tuple
    alice_answers: tuple
    bob_answers: tuple
    distribution: tuple
    predicate: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("alice_questions", "bob_questions", "alice_answers", "bob_answers"):
            labels = tuple(getattr(self, name))
            if not labels:
                raise ValueError(f"{name} must be nonempty")
            if len(set(labels)) != len(labels):
                raise ValueError(f"{name} contains duplicate labels")
            object.__setattr__(self, name, labels)
        nq, nr = len(self.alice_questions), len(self.bob_questions)
        dist = tuple(tuple(_as_fraction(x) for x in row) for row in self.distribution)
        if len(dist) != nq or any(len(row) != nr for row in dist):
            raise ValueError(f"distribution must have shape {nq}x{nr}")
        bad = [(self.alice_questions[i], self.bob_questions[j], p)
               for i, row in enumerate(dist) for j, p in enumerate(row) if p < 0]
        if bad:
            raise ValueError(f"negative probabilities: {bad}")
        total = sum(sum(row) for row in dist)
        if total != 1:
            raise ValueError(f"distribution sums to {total}, not 1")
        object.__setattr__(self, "distribution", dist)

        pred = np.asarray(self.predicate)
        shape = (len(self.alice_answers), len(self.bob_answers), nq, nr)
        if pred.shape != shape:
            raise ValueError(f"predicate must have shape {shape}, got {pred.shape}")
        if pred.dtype != bool:
            if not np.isin(pred, (0, 1)).all():
                raise ValueError("predicate entries must be 0 or 1")
            pred = pred.astype(bool)
        pred = pred.copy()
        pred.flags.writeable = False
        object.__setattr__(self, "predicate", pred)

    @classmethod
    def from_rule(
        cls,
        alice_questions: Sequence[Label],
        bob_questions: Sequence[Label],
        alice_answers: Sequence[Label],
        bob_answers: Sequence[Label],
        wins: Callable[[Label, Label, Label, Label], bool],
        distribution=None,
    ) -> "NonlocalGame":
        """Build a game from a predicate ``wins(a, b, q, r)``; uniform by default."""
        Q, R, A, B = map(tuple, (alice_questions, bob_questions, alice_answers, bob_answers))
        pred = np.zeros((len(A), len(B), len(Q), len(R)), dtype=bool)
        for (i, a), (j, b), (k, q), (m, r) in itertools.product(
            enumerate(A), enumerate(B), enumerate(Q), enumerate(R)
        ):
            pred[i, j, k, m] = bool(wins(a, b, q, r))
        if distribution is None:
            dist = uniform_distribution(len(Q), len(R))
        elif isinstance(distribution, Mapping):
            dist = [[Fraction(distribution.get((q, r), 0)) for r in R] for q in Q]
        else:
            dist = distribution
        return cls(Q, R, A, B, dist, pred)

    @cached_property
    def _index(self) -> tuple[dict, dict, dict, dict]:
        return tuple(
            {label: i for i, label in enumerate(labels)}
            for labels in (self.alice_questions, self.bob_questions,
                           self.alice_answers, self.bob_answers)
        )

    def qindex(self, q: Label) -> int:
        return self._index[0][q]

    def rindex(self, r: Label) -> int:
        return self._index[1][r]

    def aindex(self, a: Label) -> int:
        return self._index[2][a]

    def bindex(self, b: Label) -> int:
        return self._index[3][b]

    def V(self, a: Label, b: Label, q: Label, r: Label) -> int:
        """Predicate value looked up by label."""
        return int(self.predicate[self.aindex(a), self.bindex(b), self.qindex(q), self.rindex(r)])

    def prob(self, q: Label, r: Label) -> Fraction:
        return self.distribution[self.qindex(q)][self.rindex(r)]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.predicate.shape

    @cached_property
    def is_uniform(self) -> bool:
        nq, nr = len(self.alice_questions), len(self.bob_questions)
        p = Fraction(1, nq * nr)
        return all(x == p for row in self.distribution for x in row)

    @cached_property
    def weights(self) -> np.ndarray:
        """Float copy of the distribution, shape (|Q|, |R|)."""
        return np.array([[float(x) for x in row] for row in self.distribution])

    def __eq__(self, other):
        if not isinstance(other, NonlocalGame):
            return NotImplemented
        return (
            self.alice_questions == other.alice_questions
            and self.bob_questions == other.bob_questions
            and self.alice_answers == other.alice_answers
            and self.bob_answers == other.bob_answers
            and self.distribution == other.distribution
            and np.array_equal(self.predicate, other.predicate)
        )

    __hash__ = object.__hash__


def uniform_distribution(nq: int, nr: int) -> list[list[Fraction]]:
    p = Fraction(1, nq * nr)
    return [[p] * nr for _ in range(nq)]


@dataclass(frozen=True)
class DeterministicStrategy:
    f_A: Mapping[Label, Label]
    f_B: Mapping[Label, Label]

    @classmethod
    def symmetric(cls, f: Mapping[Label, Label]) -> "DeterministicStrategy":
        return cls(dict(f), dict(f))


@dataclass(frozen=True)
class SynchronousTag:
    """Witness that a game passed all three synchronicity checks."""

    questions: tuple
    answers: tuple


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: tuple = ()

    def __str__(self):
        return f"{self.kind}: {self.detail}" if self.detail else self.kind


def validate_synchronous(game: NonlocalGame) -> SynchronousTag | list[Violation]:
    """Check Q=R, A=B, pi(q,q)>0 and V(a,b|q,q)=0 for a != b.

    Returns the tag when every condition holds, otherwise every violation found.
    """
    violations: list[Violation] = []
    if game.alice_questions != game.bob_questions:
        violations.append(Violation("question sets differ",
                                    (game.alice_questions, game.bob_questions)))
    if game.alice_answers != game.bob_answers:
        violations.append(Violation("answer sets differ",
                                    (game.alice_answers, game.bob_answers)))
    if violations:
        return violations
    Q, A = game.alice_questions, game.alice_answers
    for i, q in enumerate(Q):
        if game.distribution[i][i] <= 0:
            violations.append(Violation("pi(q,q) = 0", (q,)))
    for k, q in enumerate(Q):
        for i, a in enumerate(A):
            for j, b in enumerate(A):
                if i != j and game.predicate[i, j, k, k]:
                    violations.append(Violation("V(a,b|q,q) = 1 with a != b", (a, b, q)))
    if violations:
        return violations
    return SynchronousTag(Q, A)


def require_synchronous(game: NonlocalGame) -> SynchronousTag:
    result = validate_synchronous(game)
    if isinstance(result, SynchronousTag):
        return result
    raise NotSynchronousError("game is not synchronous: " + "; ".join(map(str, result)))


def is_synchronous(game: NonlocalGame) -> bool:
    return isinstance(validate_synchronous(game), SynchronousTag)


def self_losing_pairs(game: NonlocalGame) -> list[tuple[Label, Label]]:
    """Pairs (a, q) with V(a,a|q,q) = 0 in a synchronous game.

    Such an answer always loses when both players get q, yet the game graph
    has no self-loops to record it. Independent sets and packings that use
    these vertices do not give winning strategies.
    """
    require_synchronous(game)
    Q, A = game.alice_questions, game.alice_answers
    return [(A[i], Q[k]) for k in range(len(Q)) for i in range(len(A))
            if not game.predicate[i, i, k, k]]


def is_symmetric(game: NonlocalGame) -> bool:
    """True iff V(a,a'|q,q') = V(a',a|q',q) everywhere. Requires a synchronous game."""
    require_synchronous(game)
    return bool(np.array_equal(game.predicate, game.predicate.transpose(1, 0, 3, 2)))


def eval_deterministic(game: NonlocalGame, s: DeterministicStrategy) -> Fraction:
    total = Fraction(0)
    for i, q in enumerate(game.alice_questions):
        a = game.aindex(s.f_A[q])
        for j, r in enumerate(game.bob_questions):
            p = game.distribution[i][j]
            if p and game.predicate[a, game.bindex(s.f_B[r]), i, j]:
                total += p
    return total


def _integer_weights(game: NonlocalGame) -> tuple[np.ndarray, int]:
    """Distribution as integer numerators over a common denominator."""
    den = 1
    for row in game.distribution:
        for x in row:
            den = den * x.denominator // np.gcd(den, x.denominator)
    nums = [[int(x * den) for x in row] for row in game.distribution]
    nq, nr = len(nums), len(nums[0])
    # object dtype keeps sums exact once they could overflow int64
    dtype = np.int64 if den * nq * nr < 2**62 else object
    return np.array(nums, dtype=dtype), den


def classical_value(
    game: NonlocalGame, budget: int = DEFAULT_BUDGET
) -> tuple[Fraction, DeterministicStrategy]:
    """Exact classical value with the lexicographically first optimal strategy.

    One side's functions are enumerated; for each of them the other side's
    best response decomposes over its questions, so the optimum over pairs is
    exact. The cheaper side is enumerated. Ties resolve to the smallest
    (f_A, f_B) compared as answer-index tuples in declared question order.
    """
    nA, nB, nQ, nR = game.shape
    cost_alice = nA**nQ * nQ * nR * nB
    cost_bob = nB**nR * nQ * nR * nA
    required = min(cost_alice, cost_bob)
    if required > budget:
        raise BudgetExceededError(required, budget)

    W, den = _integer_weights(game)
    # M[a, b, q, r] = pi(q, r) * V(a, b | q, r) as integer numerators
    M = game.predicate.astype(W.dtype) * W[None, None, :, :]

    if cost_alice <= cost_bob:
        best, fa, fb = _enumerate_side(M, nA, nQ)
    else:
        # enumerate f_B; Alice's best response is the per-question argmin index
        best, fb, fa = _enumerate_side(M.transpose(1, 0, 3, 2), nB, nR, swapped=True)

    value = Fraction(int(best), den)
    f_A = {q: game.alice_answers[fa[i]] for i, q in enumerate(game.alice_questions)}
    f_B = {r: game.bob_answers[fb[j]] for j, r in enumerate(game.bob_questions)}
    return value, DeterministicStrategy(f_A, f_B)


def _enumerate_side(M: np.ndarray, n_ans: int, n_q: int, swapped: bool = False,
                    chunk: int = 4096):
    """Enumerate functions for the first axis pair of M and best-respond with the second.

    M is indexed [x, y, s, t]; enumerated functions map s -> x. Returns the
    optimum and the tie-broken pair (enumerated, response). With ``swapped``
    the tie-break is lexicographic on (response, enumerated) instead.
    """
    best = None
    best_pair = None
    s_idx = np.arange(n_q)
    funcs = itertools.product(range(n_ans), repeat=n_q)
    while True:
        block = np.array(list(itertools.islice(funcs, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, n_q)
        # scores[n, y, t] = sum_s M[f_n(s), y, s, t]
        scores = M[block, :, s_idx[None, :], :].sum(axis=1)
        per_t = scores.max(axis=1)
        totals = per_t.sum(axis=1)
        top = totals.max()
        responses = (scores == per_t[:, None, :]).argmax(axis=1)
        for n in np.flatnonzero(totals == top):
            f = tuple(int(x) for x in block[n])
            g = tuple(int(x) for x in responses[n])
            key = (g, f) if swapped else (f, g)
            if best is None or top > best or (top == best and key < best_pair[0]):
                best, best_pair = top, (key, f, g)
            if not swapped:
                break  # enumeration order already lexicographic in f
    _, f, g = best_pair
    return best, f, g


# --- builders ---------------------------------------------------------------

def make_independent_set_game(X, t: int, distribution=None) -> NonlocalGame:
    """The (X, t)-independent set game with questions 0..t-1 and answers V(X)."""
    if t < 1:
        raise ValueError("t must be a positive integer")
    if not X.vertices:
        raise ValueError("graph must be nonempty")
    Q = tuple(range(t))
    adj = X.adjacency
    n = len(X.vertices)
    same_q = np.eye(t, dtype=bool)[None, None, :, :]
    same_v = np.eye(n, dtype=bool)[:, :, None, None]
    edge = adj[:, :, None, None]
    lose = (same_q & ~same_v) | (~same_q & same_v) | (~same_q & edge)
    dist = distribution if distribution is not None else uniform_distribution(t, t)
    return NonlocalGame(Q, Q, X.vertices, X.vertices, dist, ~lose)


def make_homomorphism_game(X, Y) -> NonlocalGame:
    """The (X, Y)-homomorphism game: questions V(X), answers V(Y), uniform."""
    if not X.vertices or not Y.vertices:
        raise ValueError("graphs must be nonempty")
    nx, ny = len(X.vertices), len(Y.vertices)
    same_x = np.eye(nx, dtype=bool)[None, None, :, :]
    same_y = np.eye(ny, dtype=bool)[:, :, None, None]
    ex = X.adjacency[None, None, :, :]
    ey = Y.adjacency[:, :, None, None]
    lose = (same_x & ~same_y) | (ex & ~ey)
    return NonlocalGame(X.vertices, X.vertices, Y.vertices, Y.vertices,
                        uniform_distribution(nx, nx), ~lose)


def make_coloring_game(X, c: int) -> NonlocalGame:
    from .graphs import complete_graph

    return make_homomorphism_game(X, complete_graph(c))


def make_chsh() -> NonlocalGame:
    """CHSH with disjoint labels: x0/x1 to Alice, y0/y1 to Bob, answers a*/b*."""
    return NonlocalGame.from_rule(
        ("x0", "x1"), ("y0", "y1"), ("a0", "a1"), ("b0", "b1"),
        lambda a, b, q, r: (int(a[1]) ^ int(b[1])) == (int(q[1]) & int(r[1])),
    )


EVEN_TRIPLES = ("000", "011", "101", "110")
ODD_TRIPLES = ("001", "010", "100", "111")


def make_magic_square() -> NonlocalGame:
    """Mermin-Peres square: Alice fills a row (even parity), Bob a column (odd parity)."""
    rows = ("row0", "row1", "row2")
    cols = ("col0", "col1", "col2")
    return NonlocalGame.from_rule(
        rows, cols, EVEN_TRIPLES, ODD_TRIPLES,
        lambda a, b, q, r: a[int(r[3])] == b[int(q[3])],
    )


def all_deterministic_strategies(game: NonlocalGame) -> Iterable[DeterministicStrategy]:
    Q, R = game.alice_questions, game.bob_questions
    for fa in itertools.product(game.alice_answers, repeat=len(Q)):
        for fb in itertools.product(game.bob_answers, repeat=len(R)):
            yield DeterministicStrategy(dict(zip(Q, fa)), dict(zip(R, fb)))
