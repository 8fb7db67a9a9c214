"""Seesaw search for high-value projective packings.

Search results are lower bounds only: failing to find a packing says
nothing about whether one exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graphs import Graph
from .quantum import (
    DEFAULT_TOL,
    ProjectivePacking,
    Tolerances,
    packing_from_independent_set,
    validate_packing,
)

__all__ = [
    "SearchConfig",
    "SearchResult",
    "seesaw_packing",
    "seesaw_search",
    "packing_from_independent_set",
]

_TIE = 1e-12


@dataclass(frozen=True)
class SearchConfig:
    dimension: int = 1
    seed: int = 0
    restarts: int = 1
    max_iters: int = 200
    eps_conv: float = 1e-10
    rank_profile: Mapping | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SearchResult:
    packing: ProjectivePacking
    value: float
    restart_values: list = field(default_factory=list)

    @property
    def best_restart(self) -> int | None:
        if not self.restart_values:
            return None
        return int(np.argmax(self.restart_values))


def _projector(basis: np.ndarray) -> np.ndarray:
    return basis @ basis.conj().T


def _random_basis(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Top-k eigenvectors of a random Hermitian matrix."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    _, vecs = np.linalg.eigh(z + z.conj().T)
    return vecs[:, d - k:] if k else vecs[:, :0]


def _overlap(P: list, nbrs: list) -> float:
    total = 0.0
    for u, ns in enumerate(nbrs):
        for v in ns:
            if v > u:
                total += np.vdot(P[u], P[v]).real  # tr(Pu Pv) for Hermitian Pu
    return total


def _neighbor_sum(P: list, ns, d: int) -> np.ndarray:
    N = np.zeros((d, d), complex)
    for v in ns:
        N += P[v]
    return N


def _ranked_pass(nbrs, ranks, d, cfg, rng, start=None) -> list:
    """Fixed ranks per vertex; each projector moves to the least-overlapping subspace."""
    n = len(nbrs)
    if start is None:
        P = [_projector(_random_basis(d, ranks[u], rng)) for u in range(n)]
    else:
        P = list(start)
    prev = None
    for _ in range(cfg.max_iters):
        for u in range(n):
            if ranks[u] == 0:
                continue
            _, vecs = np.linalg.eigh(_neighbor_sum(P, nbrs[u], d))
            P[u] = _projector(vecs[:, :ranks[u]])
        soft = (sum(ranks) - _overlap(P, nbrs)) / d
        if prev is not None and abs(soft - prev) < cfg.eps_conv:
            break
        prev = soft
    return P


def _complement_basis(W: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(W) minus the direction W x (x a unit vector in W-coordinates)."""
    r = W.shape[1]
    _, vecs = np.linalg.eigh(np.eye(r) - np.outer(x, x.conj()))
    return W @ vecs[:, 1:]


def _block_pass(nbrs, blocks, d, cfg, rng) -> list:
    """Each block becomes a full projective measurement, dimension by dimension.

    Every sweep rebuilds a block's projectors greedily: the next basis vector
    goes to whichever block vertex has the smallest overlap with its
    out-of-block neighbours inside the still-unassigned subspace.
    """
    n = len(nbrs)
    P = [_projector(_random_basis(d, 1, rng)) for _ in range(n)]
    in_block = [None] * n
    for k, b in enumerate(blocks):
        for u in b:
            in_block[u] = k
    outer = [[v for v in nbrs[u] if in_block[v] != in_block[u]] for u in range(n)]
    prev = None
    for _ in range(cfg.max_iters):
        for block in blocks:
            N = {u: _neighbor_sum(P, outer[u], d) for u in block}
            bases = {u: [] for u in block}
            W = np.eye(d, dtype=complex)
            for _step in range(d):
                best = None
                for u in block:
                    w, vecs = np.linalg.eigh(W.conj().T @ N[u] @ W)
                    if best is None or w[0] < best[0] - _TIE:
                        best = (w[0], u, vecs[:, 0])
                _, u, x = best
                bases[u].append(W @ x)
                W = _complement_basis(W, x)
            for u in block:
                P[u] = (_projector(np.array(bases[u]).T) if bases[u]
                        else np.zeros((d, d), complex))
        soft = (len(blocks) * d - _overlap(P, nbrs)) / d
        if prev is not None and abs(soft - prev) < cfg.eps_conv:
            break
        prev = soft
    return P


def _harden(P: list, nbrs, d: int) -> list:
    """Project each vertex off the span of its earlier neighbours, in vertex order.

    Afterwards every edge is orthogonal up to rounding; eigenvalues are rounded
    at 1/2, so ties go to the lower rank.
    """
    out = []
    eye = np.eye(d)
    for u, Pu in enumerate(P):
        earlier = [out[v] for v in nbrs[u] if v < u]
        if earlier:
            w, vecs = np.linalg.eigh(sum(earlier))
            span = vecs[:, w > 1e-9]
            C = eye - span @ span.conj().T
            Pu = C @ Pu @ C
        w, vecs = np.linalg.eigh((Pu + Pu.conj().T) / 2)
        out.append(_projector(vecs[:, w > 0.5]))
    return out


def _to_packing(X: Graph, P: list, d: int) -> ProjectivePacking:
    return ProjectivePacking(d, {v: P[i] for i, v in enumerate(X.vertices)
                                 if np.trace(P[i]).real > 0.5})


def _finalize(X: Graph, P: list, nbrs, d: int, tol: Tolerances) -> ProjectivePacking:
    P = _harden(P, nbrs, d)
    p = _to_packing(X, P, d)
    report = validate_packing(X, p, tol)
    if report.violations:
        # rounding-level leftovers: drop the later endpoint of every bad edge
        bad = set()
        for viol in report.violations:
            bad.add(viol.detail[-1])
        p = ProjectivePacking(d, {v: m for v, m in p.projectors.items() if v not in bad})
    return p


def seesaw_search(X: Graph, cfg: SearchConfig, initial: ProjectivePacking | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> SearchResult:
    """Best packing over restarts; restart i uses seed ``cfg.seed + i``.

    Each restart runs a fixed-rank pass (rank 1 unless ``rank_profile`` says
    otherwise) and, on graphs with a clique partition, a block pass that
    keeps every block a complete measurement. ``initial`` is hardened and
    refined as an extra candidate.
    """
    d = cfg.dimension
    nbrs = [list(np.flatnonzero(row)) for row in X.adjacency]
    idx = X.index
    profile = cfg.rank_profile or {}
    ranks = [min(d, int(profile.get(v, 1))) for v in X.vertices]
    blocks = None
    if X.clique_partition is not None:
        blocks = [[idx[v] for v in b] for b in X.clique_partition]

    best: ProjectivePacking | None = None
    best_value = -1.0

    def consider(p: ProjectivePacking):
        nonlocal best, best_value
        if p.value > best_value + _TIE:
            best, best_value = p, p.value

    if initial is not None:
        if initial.dimension != d:
            raise ValueError(f"initial packing has dimension {initial.dimension}, search uses {d}")
        start = [initial.projector(v) for v in X.vertices]
        consider(_finalize(X, start, nbrs, d, tol))
        init_ranks = [int(round(np.trace(m).real)) for m in start]
        refined = _ranked_pass(nbrs, init_ranks, d, cfg, None, start=start)
        consider(_finalize(X, refined, nbrs, d, tol))

    restart_values = []
    for i in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + i)
        run_best = -1.0
        candidates = [_ranked_pass(nbrs, ranks, d, cfg, rng)]
        if blocks is not None:
            candidates.append(_block_pass(nbrs, blocks, d, cfg, rng))
        for P in candidates:
            p = _finalize(X, P, nbrs, d, tol)
            run_best = max(run_best, p.value)
            consider(p)
        restart_values.append(run_best)

    if best is None:
        best = ProjectivePacking(d, {})
        best_value = 0.0
    return SearchResult(best, best.value, restart_values)


def seesaw_packing(X: Graph, cfg: SearchConfig, initial: ProjectivePacking | None = None,
                   tol: Tolerances = DEFAULT_TOL) -> ProjectivePacking:
    return seesaw_search(X, cfg, initial, tol).packing
