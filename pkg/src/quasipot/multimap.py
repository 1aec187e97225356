"""Finite samples of multi-valued maps ``F : R^d -o R^d``.

A sample stores, at each point, a finite set of unit generators whose
positive span is the cone ``F(x)``.  The empty set encodes ``F(x) = {0}``;
the whole space is encoded by ``{+-e_1, ..., +-e_d}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

DEFAULT_TOL = 1e-9
_ZERO_NORM = 1e-12


class SampleError(ValueError):
    """Malformed sample input (dimension mismatch, non-finite value)."""


def whole_space(d: int) -> NDArray[np.float64]:
    """Generator set whose positive span is ``R^d``."""
    eye = np.eye(d)
    return np.vstack([eye, -eye])


def _canonical_generators(gens: NDArray[np.float64]) -> NDArray[np.float64]:
    d = gens.shape[1]
    if len(gens) == 0:
        return np.empty((0, d))
    norms = np.linalg.norm(gens, axis=1)
    keep = norms > _ZERO_NORM
    gens, norms = gens[keep], norms[keep]
    # already-unit rows are left untouched so rebuilding is bit-exact
    norms = np.where(np.abs(norms - 1.0) <= 4e-16, 1.0, norms)
    gens = gens / norms[:, None]
    if len(gens) == 0:
        return np.empty((0, d))
    # dedupe on a 1e-12 rounded key, keep the first representative
    keys = np.round(gens, 12) + 0.0
    _, first = np.unique(keys, axis=0, return_index=True)
    gens = gens[np.sort(first)]
    order = np.lexsort(gens.T[::-1])
    return np.ascontiguousarray(gens[order])


@dataclass(frozen=True, eq=False)
class SampledMultiMap:
    """Points with a cone of output directions at each one.

    ``cones[i]`` is a ``(k_i, d)`` array of unit generators.  Instances are
    treated as immutable; use :func:`build_sample` to construct them.
    """

    dimension: int
    points: NDArray[np.float64]
    cones: tuple[NDArray[np.float64], ...]
    tol: float = DEFAULT_TOL
    cone_interpreted: bool = field(default=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def padded(self) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        """Generators as an ``(n, G, d)`` array plus a validity mask."""
        gmax = max((len(c) for c in self.cones), default=0)
        gens = np.zeros((self.n, max(gmax, 1), self.dimension))
        mask = np.zeros((self.n, max(gmax, 1)), dtype=bool)
        for i, c in enumerate(self.cones):
            gens[i, : len(c)] = c
            mask[i, : len(c)] = True
        return gens, mask

    def is_trivial(self, i: int) -> bool:
        return len(self.cones[i]) == 0

    def cone_contains(self, i: int, v: Sequence[float], tol: float = 1e-9) -> bool:
        """Whether ``v`` lies in the positive span of the generators at ``i``."""
        v = np.asarray(v, dtype=float)
        if np.linalg.norm(v) <= tol:
            return True
        gens = self.cones[i]
        if len(gens) == 0:
            return False
        from scipy.optimize import nnls

        coef, resid = nnls(gens.T, v)
        return bool(resid <= tol * (1.0 + np.linalg.norm(v)))

    def same_as(self, other: "SampledMultiMap") -> bool:
        if self.dimension != other.dimension or self.n != other.n:
            return False
        if not np.array_equal(self.points, other.points):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.cones, other.cones))

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "tol": self.tol,
            "samples": [
                {"x": [float(c) for c in x], "F": [[float(c) for c in g] for g in gens]}
                for x, gens in zip(self.points, self.cones)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def build_sample_indexed(
    points: Sequence[Sequence[float]] | NDArray[np.float64],
    raw_cones: Sequence[Iterable[Sequence[float]]],
    tol: float = DEFAULT_TOL,
) -> tuple[SampledMultiMap, NDArray[np.intp]]:
    """Like :func:`build_sample`, also returning the sample index of each input."""
    if not tol > 0:
        raise SampleError("tol must be positive")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if len(pts) else pts.reshape(0, 1)
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise SampleError("points must be an (n, d) array with d >= 1")
    n, d = pts.shape
    if len(raw_cones) != n:
        raise SampleError(f"{n} points but {len(raw_cones)} cone entries")
    if not np.all(np.isfinite(pts)):
        raise SampleError("non-finite coordinate in points")

    gens_in = []
    for k, cone in enumerate(raw_cones):
        g = np.asarray(list(cone), dtype=float)
        if g.size == 0:
            g = np.empty((0, d))
        g = g.reshape(-1, d) if g.ndim == 1 and g.size == d else g
        if g.ndim != 2 or g.shape[1] != d:
            raise SampleError(f"cone {k}: generators must have dimension {d}")
        if not np.all(np.isfinite(g)):
            raise SampleError(f"cone {k}: non-finite generator")
        gens_in.append(g)

    # union-find over pairs closer than tol
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if n > 1:
        for a, b in cKDTree(pts).query_pairs(tol):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(a) for a in range(n)], dtype=np.intp)

    groups: dict[int, list[int]] = {}
    for a, r in enumerate(roots):
        groups.setdefault(int(r), []).append(a)
    reps = []
    for members in groups.values():
        sub = pts[members]
        rep = members[int(np.lexsort(sub.T[::-1])[0])]
        reps.append((rep, members))
    rep_pts = np.array([pts[r] for r, _ in reps]).reshape(-1, d)
    order = np.lexsort(rep_pts.T[::-1]) if len(reps) else np.array([], dtype=np.intp)

    out_pts = np.ascontiguousarray(rep_pts[order]).reshape(-1, d)
    cones = []
    owner = np.empty(n, dtype=np.intp)
    for new_idx, g_idx in enumerate(order):
        _, members = reps[g_idx]
        owner[members] = new_idx
        cones.append(_canonical_generators(np.vstack([gens_in[m] for m in members])))
    sample = SampledMultiMap(dimension=d, points=out_pts, cones=tuple(cones), tol=float(tol))
    return sample, owner


def build_sample(
    points: Sequence[Sequence[float]] | NDArray[np.float64],
    raw_cones: Sequence[Iterable[Sequence[float]]],
    tol: float = DEFAULT_TOL,
) -> SampledMultiMap:
    """Canonical sample: merged duplicates, unit generators, lexicographic order.

    Points closer than ``tol`` are merged and their cones united; zero
    generators are dropped.
    """
    return build_sample_indexed(points, raw_cones, tol)[0]


def cone_envelope(sample: SampledMultiMap) -> SampledMultiMap:
    """Convex cone envelope.

    Generator sets already stand for their positive span, so only the
    interpretation flag changes.
    """
    return replace(sample, cone_interpreted=True)


def restrict(sample: SampledMultiMap, mask: Callable[[NDArray[np.float64]], bool]) -> SampledMultiMap:
    """``1_M(x) F(x)``: points where ``mask`` is false get the trivial cone."""
    d = sample.dimension
    cones = tuple(
        c if bool(mask(x)) else np.empty((0, d)) for x, c in zip(sample.points, sample.cones)
    )
    return replace(sample, cones=cones)


def from_json(obj: dict | str) -> SampledMultiMap:
    """Parse the sample JSON format ``{"dimension", "tol", "samples": [...]}``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        d = int(obj["dimension"])
        tol = float(obj.get("tol", DEFAULT_TOL))
        samples = obj["samples"]
        pts = [s["x"] for s in samples]
        cones = [s.get("F", []) for s in samples]
    except (KeyError, TypeError) as exc:
        raise SampleError(f"malformed sample JSON: {exc}") from exc
    for k, p in enumerate(pts):
        if len(p) != d:
            raise SampleError(f"sample {k}: point has dimension {len(p)}, expected {d}")
    arr = np.array(pts, dtype=float).reshape(-1, d)
    return build_sample(arr, cones, tol)


def load(path: str) -> SampledMultiMap:
    with open(path) as fh:
        return from_json(json.load(fh))
