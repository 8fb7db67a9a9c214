"""Entangled strategies, their evaluation, and projective packings of game graphs.

All matrices are dense complex numpy arrays. Probabilities against the
canonical maximally entangled state use phi*(A (x) B) phi = tr(A B^T) / d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .game import Label, NonlocalGame, Violation, require_synchronous, self_losing_pairs


@dataclass(frozen=True)
class Tolerances:
    proj: float = 1e-8  # Frobenius norm of P - P* and P^2 - P, and of completeness residuals
    orth: float = 1e-8  # |tr(P_u P_v)| on edges
    supp: float = 1e-7  # eigenvalue cutoff for supports
    perfect: float = 1e-6  # distance from 1 still treated as perfect
    psd: float = 1e-8  # most negative POVM eigenvalue tolerated


DEFAULT_TOL = Tolerances()


class StrategyError(ValueError):
    pass


class NotPerfectError(StrategyError):
    pass


class PackingError(ValueError):
    pass


def _mat(x, d: int | None = None) -> np.ndarray:
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StrategyError(f"expected a square matrix, got shape {m.shape}")
    if d is not None and m.shape[0] != d:
        raise StrategyError(f"expected a {d}x{d} matrix, got {m.shape}")
    return m


def _freeze(ops: Mapping, d: int) -> dict:
    out = {}
    for key, m in ops.items():
        m = _mat(m, d).copy()
        m.flags.writeable = False
        out[tuple(key)] = m
    return out


@dataclass(frozen=True, eq=False)
class PMEStrategy:
    """Projective measurements on the canonical maximally entangled state.

    ``alice`` maps (question, answer) to a projector; missing keys are zero.
    ``bob`` holds Bob's operators when they are not simply the transposes of
    Alice's (general games); ``None`` means Bob uses ``alice[(r, b)].T``.
    """

    dimension: int
    alice: Mapping = field(repr=False)
    bob: Mapping | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise StrategyError("dimension must be positive")
        object.__setattr__(self, "alice", _freeze(self.alice, self.dimension))
        if self.bob is not None:
            object.__setattr__(self, "bob", _freeze(self.bob, self.dimension))

    @property
    def transpose_paired(self) -> bool:
        return self.bob is None

    def alice_op(self, q: Label, a: Label) -> np.ndarray:
        m = self.alice.get((q, a))
        return np.zeros((self.dimension,) * 2, complex) if m is None else m

    def bob_op(self, r: Label, b: Label) -> np.ndarray:
        if self.bob is None:
            return self.alice_op(r, b).T
        m = self.bob.get((r, b))
        return np.zeros((self.dimension,) * 2, complex) if m is None else m

    def alice_stack(self, game: NonlocalGame) -> np.ndarray:
        _check_keys(self.alice, game.alice_questions, game.alice_answers, "Alice")
        return np.array([[self.alice_op(q, a) for a in game.alice_answers]
                         for q in game.alice_questions])

    def bob_stack(self, game: NonlocalGame) -> np.ndarray:
        if self.bob is None:
            _check_keys(self.alice, game.bob_questions, game.bob_answers, "Bob (transposed)",
                        extra_ok=(game.alice_questions, game.alice_answers))
        else:
            _check_keys(self.bob, game.bob_questions, game.bob_answers, "Bob")
        return np.array([[self.bob_op(r, b) for b in game.bob_answers]
                         for r in game.bob_questions])


def _check_keys(ops, questions, answers, who, extra_ok=None):
    qs, ans = set(questions), set(answers)
    if extra_ok is not None:
        qs |= set(extra_ok[0])
        ans |= set(extra_ok[1])
    bad = [k for k in ops if k[0] not in qs or k[1] not in ans]
    if bad:
        raise StrategyError(f"{who} operators use labels unknown to the game: {bad[:5]}")


@dataclass(frozen=True, eq=False)
class GeneralStrategy:
    """Pure state in C^dA (x) C^dB with POVMs keyed by (question, answer)."""

    dims: tuple[int, int]
    state: np.ndarray = field(repr=False)
    alice: Mapping = field(repr=False)
    bob: Mapping = field(repr=False)

    def __post_init__(self):
        dA, dB = (int(x) for x in self.dims)
        object.__setattr__(self, "dims", (dA, dB))
        psi = np.asarray(self.state, dtype=complex).reshape(-1).copy()
        if psi.shape[0] != dA * dB:
            raise StrategyError(f"state has length {psi.shape[0]}, expected {dA * dB}")
        psi.flags.writeable = False
        object.__setattr__(self, "state", psi)
        object.__setattr__(self, "alice", _freeze(self.alice, dA))
        object.__setattr__(self, "bob", _freeze(self.bob, dB))

    @property
    def state_matrix(self) -> np.ndarray:
        return self.state.reshape(self.dims)

    def alice_stack(self, game: NonlocalGame) -> np.ndarray:
        _check_keys(self.alice, game.alice_questions, game.alice_answers, "Alice")
        z = np.zeros((self.dims[0],) * 2, complex)
        return np.array([[self.alice.get((q, a), z) for a in game.alice_answers]
                         for q in game.alice_questions])

    def bob_stack(self, game: NonlocalGame) -> np.ndarray:
        _check_keys(self.bob, game.bob_questions, game.bob_answers, "Bob")
        z = np.zeros((self.dims[1],) * 2, complex)
        return np.array([[self.bob.get((r, b), z) for b in game.bob_answers]
                         for r in game.bob_questions])


# --- evaluation ---------------------------------------------------------------

def pme_probabilities(game: NonlocalGame, s: PMEStrategy) -> np.ndarray:
    """pr[a, b, q, r] = (1/d) Re tr(P_aq B_br^T), laid out like the predicate."""
    P = s.alice_stack(game)
    B = s.bob_stack(game)
    # tr(P B^T) = sum_ij P_ij B_ij
    return np.einsum("qaij,rbij->abqr", P, B).real / s.dimension


def general_probabilities(game: NonlocalGame, s: GeneralStrategy) -> np.ndarray:
    """pr[a, b, q, r] = Re psi*(M_aq (x) N_br) psi."""
    psi = s.state_matrix
    M = s.alice_stack(game)
    N = s.bob_stack(game)
    # (M (x) N) psi reshaped is M Psi N^T
    M_psi = np.einsum("qaij,jk->qaik", M, psi)
    return np.einsum("ik,qail,rbkl->abqr", psi.conj(), M_psi, N).real


def winning_probability(game: NonlocalGame, pr: np.ndarray) -> float:
    return float(np.einsum("qr,abqr->", game.weights, pr * game.predicate))


def loss_breakdown(game: NonlocalGame, pr: np.ndarray) -> dict:
    """Per question pair: pi(q,r) times the probability of a losing answer pair."""
    lost = np.einsum("abqr->qr", pr * ~game.predicate) * game.weights
    return {(q, r): float(lost[i, j])
            for i, q in enumerate(game.alice_questions)
            for j, r in enumerate(game.bob_questions)}


def eval_pme(game: NonlocalGame, s: PMEStrategy) -> float:
    return winning_probability(game, pme_probabilities(game, s))


def eval_general(game: NonlocalGame, s: GeneralStrategy) -> float:
    return winning_probability(game, general_probabilities(game, s))


# --- validation ---------------------------------------------------------------

def _projector_problems(m: np.ndarray, tol: float) -> list[str]:
    problems = []
    herm = np.linalg.norm(m - m.conj().T)
    if herm > tol:
        problems.append(f"not Hermitian (|P-P*|={herm:.3g})")
    idem = np.linalg.norm(m @ m - m)
    if idem > tol:
        problems.append(f"not idempotent (|P^2-P|={idem:.3g})")
    return problems


def _completeness(ops_for, questions, answers, d, tol, who) -> list[Violation]:
    out = []
    eye = np.eye(d)
    for q in questions:
        resid = np.linalg.norm(sum(ops_for(q, a) for a in answers) - eye)
        if resid > tol:
            out.append(Violation(f"{who} measurement incomplete", (q, f"|sum-I|={resid:.3g}")))
    return out


def pme_diagnostics(game: NonlocalGame, s: PMEStrategy,
                    tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
    """Projectivity and completeness problems, each naming its (question, answer) cell."""
    out = []
    for (q, a), m in s.alice.items():
        for msg in _projector_problems(m, tol.proj):
            out.append(Violation(f"Alice projector {msg}", (q, a)))
    if s.bob is not None:
        for (r, b), m in s.bob.items():
            for msg in _projector_problems(m, tol.proj):
                out.append(Violation(f"Bob projector {msg}", (r, b)))
    d = s.dimension
    out += _completeness(s.alice_op, game.alice_questions, game.alice_answers, d, tol.proj, "Alice")
    out += _completeness(s.bob_op, game.bob_questions, game.bob_answers, d, tol.proj, "Bob")
    return out


def general_diagnostics(game: NonlocalGame, s: GeneralStrategy,
                        tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
    out = []
    norm = np.linalg.norm(s.state)
    if abs(norm - 1) > tol.proj:
        out.append(Violation("state not normalized", (f"|psi|={norm:.12g}",)))
    for who, ops in (("Alice", s.alice), ("Bob", s.bob)):
        for key, m in ops.items():
            herm = np.linalg.norm(m - m.conj().T)
            if herm > tol.proj:
                out.append(Violation(f"{who} POVM element not Hermitian", key))
                continue
            low = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
            if low < -tol.psd:
                out.append(Violation(f"{who} POVM element not positive (min eig {low:.3g})", key))
    z = lambda d: np.zeros((d, d), complex)  # noqa: E731
    out += _completeness(lambda q, a: s.alice.get((q, a), z(s.dims[0])), game.alice_questions,
                         game.alice_answers, s.dims[0], tol.proj, "Alice")
    out += _completeness(lambda r, b: s.bob.get((r, b), z(s.dims[1])), game.bob_questions,
                         game.bob_answers, s.dims[1], tol.proj, "Bob")
    return out


def require_valid_pme(game: NonlocalGame, s: PMEStrategy, tol: Tolerances = DEFAULT_TOL):
    problems = pme_diagnostics(game, s, tol)
    if problems:
        raise StrategyError("invalid PME strategy: " + "; ".join(map(str, problems[:5])))


# --- constructions ------------------------------------------------------------

def maximally_entangled_state(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def pme_as_general(game: NonlocalGame, s: PMEStrategy) -> GeneralStrategy:
    d = s.dimension
    alice = {(q, a): s.alice_op(q, a) for q in game.alice_questions for a in game.alice_answers}
    bob = {(r, b): s.bob_op(r, b) for r in game.bob_questions for b in game.bob_answers}
    return GeneralStrategy((d, d), maximally_entangled_state(d), alice, bob)


def deterministic_as_pme(game: NonlocalGame, s) -> PMEStrategy:
    """The d = 1 PME strategy whose 0/1 scalars encode a deterministic strategy."""
    one = np.ones((1, 1))
    alice = {(q, s.f_A[q]): one for q in game.alice_questions}
    bob = {(r, s.f_B[r]): one for r in game.bob_questions}
    return PMEStrategy(1, alice, bob)


def rotate_pme(s: PMEStrategy, U: np.ndarray) -> PMEStrategy:
    """Conjugate Alice by U and Bob by conj(U); phi is invariant under U (x) conj(U)."""
    U = np.asarray(U, complex)
    alice = {k: U @ m @ U.conj().T for k, m in s.alice.items()}
    bob = None
    if s.bob is not None:
        bob = {k: U.conj() @ m @ U.T for k, m in s.bob.items()}
    return PMEStrategy(s.dimension, alice, bob)


def _block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), complex)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def direct_sum_strategy(game: NonlocalGame, blocks: Sequence[PMEStrategy],
                        weights: Sequence[float]) -> GeneralStrategy:
    """Run block k with probability weights[k] on a shared state sqrt(w_k) phi_k.

    Perfect blocks give a perfect strategy whose state is not maximally
    entangled unless w_k / d_k is constant.
    """
    w = np.asarray(weights, float)
    if len(w) != len(blocks) or (w <= 0).any():
        raise ValueError("need one positive weight per block")
    w = w / w.sum()
    psi = _block_diag([np.sqrt(wk / b.dimension) * np.eye(b.dimension) for wk, b in zip(w, blocks)])
    alice = {(q, a): _block_diag([b.alice_op(q, a) for b in blocks])
             for q in game.alice_questions for a in game.alice_answers}
    bob = {(r, b_): _block_diag([b.bob_op(r, b_) for b in blocks])
           for r in game.bob_questions for b_ in game.bob_answers}
    D = psi.shape[0]
    return GeneralStrategy((D, D), psi.reshape(-1), alice, bob)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_projective_measurement(d: int, n: int, rng: np.random.Generator) -> list[np.ndarray]:
    """n orthogonal projectors summing to I, from a random frame split at random."""
    U = random_unitary(d, rng)
    owner = rng.integers(0, n, size=d)
    out = []
    for k in range(n):
        cols = U[:, owner == k]
        out.append(cols @ cols.conj().T)
    return out


def random_pme_strategy(game: NonlocalGame, d: int, rng: np.random.Generator,
                        transpose_paired: bool = True) -> PMEStrategy:
    alice = {}
    for q in game.alice_questions:
        for a, P in zip(game.alice_answers, random_projective_measurement(d, len(game.alice_answers), rng)):
            alice[(q, a)] = P
    bob = None
    if not transpose_paired:
        bob = {}
        for r in game.bob_questions:
            for b, P in zip(game.bob_answers, random_projective_measurement(d, len(game.bob_answers), rng)):
                bob[(r, b)] = P
    return PMEStrategy(d, alice, bob)


_I2 = np.eye(2)
_X = np.array([[0, 1], [1, 0]], complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0, -1.0]).astype(complex)

MAGIC_SQUARE_OBSERVABLES = (
    (np.kron(_I2, _Z), np.kron(_Z, _I2), np.kron(_Z, _Z)),
    (np.kron(_X, _I2), np.kron(_I2, _X), np.kron(_X, _X)),
    (-np.kron(_X, _Z), -np.kron(_Z, _X), np.kron(_Y, _Y)),
)


def magic_square_pme_strategy(game: NonlocalGame | None = None) -> PMEStrategy:
    """The two-ebit perfect strategy for the game from ``make_magic_square``.

    Cell (i, j) carries observable O_ij; bit 0 means eigenvalue +1. Rows
    multiply to +I and columns to -I, so only even rows and odd columns get
    nonzero projectors. Bob measures the transposed observables.
    """
    from .game import EVEN_TRIPLES, ODD_TRIPLES, make_magic_square

    game = game or make_magic_square()
    O = MAGIC_SQUARE_OBSERVABLES
    eye = np.eye(4)

    def proj(obs, bits):
        P = eye.astype(complex)
        for o, bit in zip(obs, bits):
            P = P @ (eye + (-1) ** int(bit) * o) / 2
        return P

    alice = {(q, a): proj(O[i], a)
             for i, q in enumerate(game.alice_questions) for a in EVEN_TRIPLES}
    bob = {(r, b): proj([O[k][j].T for k in range(3)], b)
           for j, r in enumerate(game.bob_questions) for b in ODD_TRIPLES}
    return PMEStrategy(4, alice, bob)


# --- perfect general strategy -> PME strategy ---------------------------------

def residual_states(game: NonlocalGame, s: GeneralStrategy) -> dict:
    """Bob's unnormalized post-measurement states tr_A((M_aq (x) I) psi psi*)."""
    psi = s.state_matrix
    out = {}
    for q in game.alice_questions:
        for a in game.alice_answers:
            M = s.alice.get((q, a))
            if M is None:
                out[(q, a)] = np.zeros((s.dims[1],) * 2, complex)
            else:
                out[(q, a)] = psi.T @ M.T @ psi.conj()
    return out


def support_projector(rho: np.ndarray, cutoff: float) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = v[:, w > cutoff]
    return keep @ keep.conj().T


def pme_from_perfect(game: NonlocalGame, s: GeneralStrategy, tol: float = 1e-6,
                     tols: Tolerances = DEFAULT_TOL) -> PMEStrategy:
    """Perfect PME strategy from a perfect general one on a synchronous game.

    The state is first restricted to its Schmidt support; Alice's projector for
    (q, a) becomes the support of Bob's residual state and Bob uses transposes.
    """
    require_synchronous(game)
    value = eval_general(game, s)
    if value < 1 - tol:
        raise NotPerfectError(f"input strategy wins with probability {value:.12g} < 1 - {tol}")
    psi = s.state_matrix
    _, sv, vh = np.linalg.svd(psi)
    keep = sv**2 > tols.supp
    # Bob-side Schmidt basis: rho lives in span(conj(V))
    W = vh[keep].T
    k = int(keep.sum())
    rho = residual_states(game, s)
    alice = {}
    for key, r in rho.items():
        r_restricted = W.conj().T @ r @ W
        alice[key] = support_projector(r_restricted, tols.supp)
    eye = np.eye(k)
    for q in game.alice_questions:
        resid = np.linalg.norm(sum(alice[(q, a)] for a in game.alice_answers) - eye)
        if resid > tols.perfect:
            raise StrategyError(
                f"support projectors for question {q!r} miss completeness by {resid:.3g}; "
                "input is numerically degenerate")
    return PMEStrategy(k, alice)


# --- projective packings ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProjectivePacking:
    dimension: int
    projectors: Mapping = field(repr=False)

    def __post_init__(self):
        out = {}
        for v, m in self.projectors.items():
            m = _mat(m, self.dimension).copy()
            m.flags.writeable = False
            out[v] = m
        object.__setattr__(self, "projectors", out)

    def projector(self, v: Label) -> np.ndarray:
        m = self.projectors.get(v)
        return np.zeros((self.dimension,) * 2, complex) if m is None else m

    @property
    def value(self) -> float:
        return float(sum(np.trace(m).real for m in self.projectors.values()) / self.dimension)


@dataclass(frozen=True)
class PackingReport:
    value: float
    violations: list

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_packing(X, p: ProjectivePacking, tol: Tolerances = DEFAULT_TOL) -> PackingReport:
    unknown = [v for v in p.projectors if v not in X.index]
    if unknown:
        raise PackingError(f"packing assigns unknown vertices: {unknown[:5]}")
    violations = []
    for v in X.vertices:
        if v in p.projectors:
            for msg in _projector_problems(p.projectors[v], tol.proj):
                violations.append(Violation(msg, (v,)))
    for e in X.edges:
        u, v = tuple(e)
        if u in p.projectors and v in p.projectors:
            ov = np.trace(p.projectors[u] @ p.projectors[v]).real
            if abs(ov) > tol.orth:
                if X.index[u] > X.index[v]:
                    u, v = v, u
                violations.append(Violation(f"tr(PuPv)={ov:.3g} on an edge", (u, v)))
    violations.sort(key=lambda x: str(x))
    return PackingReport(p.value, violations)


def packing_from_independent_set(X, S) -> ProjectivePacking:
    from .graphs import is_independent_set

    S = list(S)
    if not is_independent_set(X, S):
        raise PackingError("S is not an independent set")
    return ProjectivePacking(1, {v: np.ones((1, 1)) for v in S})


def packing_from_strategy(game: NonlocalGame, s: PMEStrategy,
                          tol: Tolerances = DEFAULT_TOL) -> ProjectivePacking:
    """Alice's projectors of a perfect transpose-paired strategy, placed on the game graph."""
    from .reductions import game_graph

    require_synchronous(game)
    if s.bob is not None:
        for r in game.bob_questions:
            for b in game.bob_answers:
                if np.linalg.norm(s.bob_op(r, b) - s.alice_op(r, b).T) > tol.proj:
                    raise StrategyError("Bob's projectors must be transposes of Alice's")
    value = eval_pme(game, s)
    if value < 1 - tol.perfect:
        raise NotPerfectError(f"strategy wins with probability {value:.12g}, not 1")
    X = game_graph(game)
    p = ProjectivePacking(s.dimension, {(a, q): s.alice_op(q, a)
                                        for q in game.alice_questions
                                        for a in game.alice_answers})
    report = validate_packing(X, p, tol)
    if report.violations:
        raise PackingError("packing validation failed: " + "; ".join(map(str, report.violations[:5])))
    return p


def _check_self_losing(game: NonlocalGame, p: ProjectivePacking, tol: float):
    used = [v for v in self_losing_pairs(game) if np.trace(p.projector(v)).real > tol]
    if used:
        raise PackingError("packing puts weight on vertices with V(a,a|q,q) = 0, "
                           f"so it certifies nothing: {used[:5]}")


def strategy_from_packing(game: NonlocalGame, p: ProjectivePacking, tol: float = 1e-6,
                          tols: Tolerances = DEFAULT_TOL) -> PMEStrategy:
    """Perfect PME strategy from a packing of the game graph with value |Q|."""
    from .reductions import game_graph

    require_synchronous(game)
    X = game_graph(game)
    report = validate_packing(X, p, tols)
    if report.violations:
        raise PackingError("invalid packing: " + "; ".join(map(str, report.violations[:5])))
    _check_self_losing(game, p, tol)
    nq = len(game.alice_questions)
    if report.value < nq - tol:
        raise PackingError(f"packing value {report.value:.12g} is below |Q| = {nq}")
    eye = np.eye(p.dimension)
    alice = {}
    for q in game.alice_questions:
        ops = [p.projector((a, q)) for a in game.alice_answers]
        resid = np.linalg.norm(sum(ops) - eye)
        if resid > tol:
            raise PackingError(f"projectors for question {q!r} miss completeness by {resid:.3g}")
        for a, P in zip(game.alice_answers, ops):
            alice[(q, a)] = P
    return PMEStrategy(p.dimension, alice)


def entangled_lower_bound(game: NonlocalGame, p: ProjectivePacking,
                          tol: Tolerances = DEFAULT_TOL) -> tuple[float, PMEStrategy]:
    """Bound gamma^2/|Q|^2 on the entangled value, with the strategy attaining it.

    Each question's measurement is (P_aq)_a plus the remainder I - sum_a P_aq,
    which is reported as the first answer.
    """
    from .reductions import game_graph

    require_synchronous(game)
    if not game.is_uniform:
        raise ValueError("the packing bound needs a uniform question distribution")
    X = game_graph(game)
    report = validate_packing(X, p, tol)
    if report.violations:
        raise PackingError("invalid packing: " + "; ".join(map(str, report.violations[:5])))
    _check_self_losing(game, p, tol.orth)
    nq = len(game.alice_questions)
    eye = np.eye(p.dimension)
    first = game.alice_answers[0]
    alice = {}
    for q in game.alice_questions:
        ops = {a: p.projector((a, q)) for a in game.alice_answers}
        remainder = eye - sum(ops.values())
        ops[first] = ops[first] + remainder
        for a, P in ops.items():
            alice[(q, a)] = P
    return report.value**2 / nq**2, PMEStrategy(p.dimension, alice)
