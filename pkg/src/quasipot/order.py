"""Ascending digraph, cyclic quasi-monotonicity and the induced pre-orders.

Edge ``i -> j`` exists when some generator ``p`` of ``F(x_i)`` satisfies
``(x_j - x_i) . p > tol * (1 + |x_j - x_i|)``.  The strict pre-order is
reachability along edges; the large one is the one-point characterization
``i <= j  iff  every w with an edge w -> i satisfies strict(w, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .multimap import SampledMultiMap

_BLOCK = 512


@dataclass(frozen=True, eq=False)
class AscendingDigraph:
    """Dense adjacency with, per edge, the index of a witnessing generator."""

    n: int
    adj: NDArray[np.bool_]
    witness: NDArray[np.int16]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adj))]

    def successors(self, i: int) -> NDArray[np.intp]:
        return np.flatnonzero(self.adj[i])


@dataclass(frozen=True)
class CqmVerdict:
    """Outcome of :func:`check_cqm`.

    On violation ``cycle`` is closed (first index repeated at the end) and
    ``witnesses[k]`` is the generator used on edge ``cycle[k] -> cycle[k+1]``.
    """

    is_cqm: bool
    cycle: tuple[int, ...] = ()
    witnesses: tuple[int, ...] = ()

    def to_json(self) -> dict:
        if self.is_cqm:
            return {"verdict": "cqm"}
        return {"verdict": "violation", "cycle": list(self.cycle), "witnesses": list(self.witnesses)}


class CqmViolationError(ValueError):
    """Raised where an acyclic ascending digraph is required."""

    def __init__(self, verdict: CqmVerdict):
        super().__init__(f"F-ascending cycle {list(verdict.cycle)}")
        self.verdict = verdict


@dataclass(frozen=True, eq=False)
class PreorderPair:
    strict: NDArray[np.bool_]
    large: NDArray[np.bool_]
    graph: AscendingDigraph | None = field(default=None, repr=False)


@dataclass(frozen=True)
class TotalityVerdict:
    is_total: bool
    pair: tuple[int, int] | None = None


def edge_threshold(tol: float, dist: NDArray[np.float64] | float):
    return tol * (1.0 + dist)


def ascending_edges(sample: SampledMultiMap) -> AscendingDigraph:
    """All length-one F-ascending paths between sample points."""
    n = sample.n
    pts = sample.points
    gens, mask = sample.padded
    adj = np.zeros((n, n), dtype=bool)
    witness = np.full((n, n), -1, dtype=np.int16)
    if n == 0:
        return AscendingDigraph(0, adj, witness)
    for lo in range(0, n, _BLOCK):
        hi = min(n, lo + _BLOCK)
        diff = pts[None, :, :] - pts[lo:hi, None, :]  # (b, n, d)
        thresh = edge_threshold(sample.tol, np.sqrt(np.einsum("bnd,bnd->bn", diff, diff)))
        blk_adj = np.zeros((hi - lo, n), dtype=bool)
        blk_wit = np.full((hi - lo, n), -1, dtype=np.int16)
        for g in range(gens.shape[1]):
            valid = mask[lo:hi, g]
            if not valid.any():
                continue
            dots = np.einsum("bnd,bd->bn", diff, gens[lo:hi, g])
            hit = (dots > thresh) & valid[:, None] & ~blk_adj
            blk_wit[hit] = g
            blk_adj |= hit
        np.fill_diagonal(blk_adj[:, lo:hi], False)
        blk_wit[~blk_adj] = -1
        adj[lo:hi] = blk_adj
        witness[lo:hi] = blk_wit
    return AscendingDigraph(n, adj, witness)


def _topological_order(graph: AscendingDigraph) -> tuple[NDArray[np.intp], NDArray[np.bool_]]:
    """Kahn's algorithm in waves; returns the order and the leftover (cyclic) mask."""
    n = graph.n
    adj = graph.adj
    indeg = adj.sum(axis=0).astype(np.int64)
    removed = np.zeros(n, dtype=bool)
    order = []
    wave = np.flatnonzero(indeg == 0)
    while len(wave):
        order.append(wave)
        removed[wave] = True
        indeg -= adj[wave].sum(axis=0)
        wave = np.flatnonzero((indeg == 0) & ~removed)
    order_arr = np.concatenate(order) if order else np.array([], dtype=np.intp)
    return order_arr, ~removed


def check_cqm(graph: AscendingDigraph) -> CqmVerdict:
    """CQM iff the ascending digraph is acyclic; otherwise one witness cycle."""
    _, leftover = _topological_order(graph)
    if not leftover.any():
        return CqmVerdict(True)
    # every leftover node has a leftover predecessor: walk backwards until a repeat
    adj = graph.adj
    node = int(np.flatnonzero(leftover)[0])
    seen: dict[int, int] = {}
    trail = []
    while node not in seen:
        seen[node] = len(trail)
        trail.append(node)
        preds = np.flatnonzero(adj[:, node] & leftover)
        node = int(preds[0])
    back = trail[seen[node]:]
    cycle = back[::-1]  # forward order
    cycle.append(cycle[0])
    wit = tuple(int(graph.witness[a, b]) for a, b in zip(cycle[:-1], cycle[1:]))
    return CqmVerdict(False, tuple(cycle), wit)


def _bit_test(packed: NDArray[np.uint8], idx: NDArray[np.intp]) -> NDArray[np.bool_]:
    return ((packed[idx >> 3] >> (7 - (idx & 7))) & 1).astype(bool)


def strict_preorder(graph: AscendingDigraph) -> NDArray[np.bool_]:
    """Reachability via at least one edge (transitive closure).

    Processes nodes in reverse topological order on packed bit rows; a
    successor already covered by an earlier merged row is skipped, since
    its own reach set is contained in that row.
    """
    order, leftover = _topological_order(graph)
    if leftover.any():
        raise CqmViolationError(check_cqm(graph))
    n = graph.n
    nbytes = (n + 7) // 8
    reach = np.zeros((n, nbytes), dtype=np.uint8)
    pos = np.empty(n, dtype=np.intp)
    pos[order] = np.arange(n)
    for i in order[::-1]:
        succ = np.flatnonzero(graph.adj[i])
        if len(succ) == 0:
            continue
        succ = succ[np.argsort(pos[succ], kind="stable")]
        row = np.zeros(nbytes, dtype=np.uint8)
        while len(succ):
            j = int(succ[0])
            row |= reach[j]
            row[j >> 3] |= np.uint8(1 << (7 - (j & 7)))
            succ = succ[~_bit_test(row, succ)]
        reach[i] = row
    return np.unpackbits(reach, axis=1, count=n).astype(bool)


def large_preorder(sample: SampledMultiMap, strict: NDArray[np.bool_], graph: AscendingDigraph | None = None) -> PreorderPair:
    """One-point characterization restricted to sample points.

    ``large[i, j]`` holds iff no ``w`` has an edge ``w -> i`` while
    ``strict[w, j]`` fails.
    """
    if graph is None:
        graph = ascending_edges(sample)
    pred = graph.adj.astype(np.float32)  # pred[w, i]
    bad = (~strict).astype(np.float32)  # bad[w, j]
    count = pred.T @ bad
    return PreorderPair(strict=strict, large=count < 0.5, graph=graph)


def preorders(sample: SampledMultiMap) -> PreorderPair:
    """Edges, strict and large relations in one call (raises on a cycle)."""
    graph = ascending_edges(sample)
    strict = strict_preorder(graph)
    return large_preorder(sample, strict, graph)


def check_totality(pair: PreorderPair) -> TotalityVerdict:
    comparable = pair.large | pair.large.T
    if comparable.all():
        return TotalityVerdict(True)
    i, j = np.argwhere(~comparable)[0]
    return TotalityVerdict(False, (int(min(i, j)), int(max(i, j))))


def equivalence_classes(large: NDArray[np.bool_]) -> list[list[int]]:
    """Groups of mutually large-related indices, in index order."""
    mutual = large & large.T
    n = len(large)
    label = np.full(n, -1)
    classes = []
    for i in range(n):
        if label[i] >= 0:
            continue
        members = np.flatnonzero(mutual[i] & (label < 0))
        label[members] = len(classes)
        classes.append([int(m) for m in members])
    return classes
