"""Half-space polyhedra for the level sets ``C^F(x)`` and the LP queries on them.

An :class:`HPolyhedron` is ``{z : A z <= b}`` with unit rows.  Linear
programs ``max c.z`` over it are solved through the LP dual
``min b.y  s.t.  A^T y = c, y >= 0``, which has only ``d`` equality rows,
with a dense revised simplex using Bland's rule.  The primal optimum is
read off the simplex multipliers.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .multimap import SampledMultiMap

CONTAIN_TOL = 1e-9
LP_VALUE_TOL = 1e-7
_PIVOT_TOL = 1e-11
_COST_TOL = 1e-10
_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class HalfSpace:
    """``{z : normal . z <= offset}`` with a unit normal."""

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.normal)) - 1.0) > 1e-12:
            raise ValueError("half-space normal must have unit length")


def _dedupe_rows(A: NDArray[np.float64], b: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if len(A) == 0:
        return A, b
    keys = np.round(np.column_stack([A, b]), 12) + 0.0
    _, first = np.unique(keys, axis=0, return_index=True)
    first = np.sort(first)
    return np.ascontiguousarray(A[first]), np.ascontiguousarray(b[first])


@dataclass(frozen=True, eq=False)
class HPolyhedron:
    """Finite intersection of closed half-spaces; no rows means ``R^d``."""

    dimension: int
    A: NDArray[np.float64]
    b: NDArray[np.float64]

    @classmethod
    def from_arrays(cls, A, b, dimension: int | None = None) -> "HPolyhedron":
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).ravel()
        if dimension is None:
            dimension = A.shape[1]
        A = A.reshape(-1, dimension)
        if len(A) != len(b):
            raise ValueError("A and b have different numbers of rows")
        norms = np.linalg.norm(A, axis=1)
        keep = norms > 1e-12
        if not np.all(keep):
            # a zero row 0 <= b is either vacuous or makes the set empty
            if np.any(b[~keep] < -CONTAIN_TOL):
                A = np.vstack([np.eye(1, dimension), -np.eye(1, dimension)])
                return cls(dimension, A, np.array([-1.0, 0.0]))
            A, b, norms = A[keep], b[keep], norms[keep]
        norms = np.where(np.abs(norms - 1.0) <= 4e-16, 1.0, norms)
        A, b = _dedupe_rows(A / norms[:, None], b / norms)
        return cls(dimension, A, b)

    @classmethod
    def whole(cls, d: int) -> "HPolyhedron":
        return cls(d, np.empty((0, d)), np.empty(0))

    @classmethod
    def from_halfspaces(cls, d: int, halfspaces: Sequence[HalfSpace]) -> "HPolyhedron":
        if not halfspaces:
            return cls.whole(d)
        return cls.from_arrays([h.normal for h in halfspaces], [h.offset for h in halfspaces], d)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def halfspaces(self) -> tuple[HalfSpace, ...]:
        return tuple(HalfSpace(tuple(float(c) for c in a), float(o)) for a, o in zip(self.A, self.b))

    @cached_property
    def _row_keys(self) -> frozenset:
        keys = np.round(np.column_stack([self.A, self.b]), 12) + 0.0
        return frozenset(map(tuple, keys))

    def intersect(self, other: "HPolyhedron") -> "HPolyhedron":
        return HPolyhedron.from_arrays(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]), self.dimension)

    def to_json(self) -> dict:
        return {"d": self.dimension, "hs": [{"a": [float(c) for c in a], "b": float(o)} for a, o in zip(self.A, self.b)]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict | str) -> "HPolyhedron":
        if isinstance(obj, str):
            obj = json.loads(obj)
        d = int(obj["d"])
        hs = obj.get("hs", [])
        if not hs:
            return cls.whole(d)
        return cls.from_arrays([h["a"] for h in hs], [h["b"] for h in hs], d)


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class LPOutcome:
    status: LPStatus
    value: float | None = None
    argument: NDArray[np.float64] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


# ---- standard-form simplex ------------------------------------------------


@dataclass(frozen=True)
class _StdResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float = 0.0
    duals: NDArray[np.float64] | None = None


def _bland_iterate(M, cost, basis, rhs_b, allowed):
    """Phase loop on equality system ``M y = rhs_b``; mutates ``basis``.

    Entering column: lowest index with negative reduced cost.  Leaving
    row: minimum ratio, ties broken by the lowest basic variable index.
    """
    r = M.shape[0]
    max_iter = 50 * (M.shape[1] + r) + 1000
    for _ in range(max_iter):
        B = M[:, basis]
        xb = np.linalg.solve(B, rhs_b)
        pi = np.linalg.solve(B.T, cost[basis])
        reduced = cost - pi @ M
        reduced[basis] = 0.0
        cand = np.flatnonzero((reduced < -_COST_TOL) & allowed)
        if len(cand) == 0:
            return "optimal", xb, pi
        j = int(cand[0])
        direction = np.linalg.solve(B, M[:, j])
        pos = direction > _PIVOT_TOL
        if not pos.any():
            return "unbounded", xb, pi
        ratios = np.full(r, np.inf)
        ratios[pos] = np.maximum(xb[pos], 0.0) / direction[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-14 * max(1.0, abs(best)))
        leave = int(ties[np.argmin(np.asarray(basis)[ties])])
        basis[leave] = j
    raise RuntimeError("simplex iteration limit reached")


def simplex_standard(M: NDArray[np.float64], rhs: NDArray[np.float64], cost: NDArray[np.float64]) -> _StdResult:
    """``min cost.y  s.t.  M y = rhs, y >= 0`` by two-phase revised simplex.

    On optimality ``duals`` holds the multipliers ``pi`` with
    ``cost - M^T pi >= 0``; redundant equality rows get multiplier 0.
    """
    M = np.asarray(M, dtype=float)
    rhs = np.asarray(rhs, dtype=float).copy()
    cost = np.asarray(cost, dtype=float)
    r, m = M.shape
    sign = np.where(rhs < 0, -1.0, 1.0)
    Ms = M * sign[:, None]
    rhs_s = rhs * sign
    # phase one with artificial columns m..m+r-1
    big = np.hstack([Ms, np.eye(r)])
    c1 = np.concatenate([np.zeros(m), np.ones(r)])
    basis = list(range(m, m + r))
    allowed = np.ones(m + r, dtype=bool)
    _, xb, _ = _bland_iterate(big, c1, basis, rhs_s, allowed)
    infeas = float(c1[basis] @ xb)
    if infeas > _FEAS_TOL * (1.0 + np.abs(rhs_s).sum()):
        return _StdResult("infeasible")
    # drive artificials out, dropping redundant rows
    keep_rows = list(range(r))
    for k in range(r):
        if basis[k] < m:
            continue
        B = big[:, basis]
        row_k = np.linalg.solve(B.T, np.eye(r)[k]) @ big[:, :m]
        nonbasic = np.array([j for j in range(m) if j not in basis], dtype=np.intp)
        cand = nonbasic[np.abs(row_k[nonbasic]) > 1e-9] if len(nonbasic) else nonbasic
        if len(cand):
            basis[k] = int(cand[0])
        else:
            keep_rows.remove(k)
    rows = np.array(keep_rows, dtype=np.intp)
    basis2 = [basis[k] for k in keep_rows]
    if len(rows) == 0:
        # every row redundant: all constraints are 0 = 0
        if np.any(cost < -_COST_TOL):
            return _StdResult("unbounded")
        return _StdResult("optimal", 0.0, np.zeros(r))
    M2 = Ms[rows]
    status, xb, pi = _bland_iterate(M2, cost, basis2, rhs_s[rows], np.ones(m, dtype=bool))
    if status == "unbounded":
        return _StdResult("unbounded")
    duals = np.zeros(r)
    duals[rows] = pi
    return _StdResult("optimal", float(cost[basis2] @ xb), duals * sign)


def _primal_feasible(H: HPolyhedron) -> bool:
    """Farkas test: infeasible iff some ``y >= 0, A^T y = 0, 1.y = 1`` has ``b.y < 0``."""
    M = np.vstack([H.A.T, np.ones((1, H.m))])
    rhs = np.concatenate([np.zeros(H.dimension), [1.0]])
    res = simplex_standard(M, rhs, H.b)
    if res.status != "optimal":
        return True
    return res.value >= -_FEAS_TOL


def lp_max(H: HPolyhedron, objective: Sequence[float]) -> LPOutcome:
    """Maximize ``objective . z`` over ``H``."""
    c = np.asarray(objective, dtype=float)
    if c.shape != (H.dimension,):
        raise ValueError("objective dimension mismatch")
    if H.m == 0:
        if np.linalg.norm(c) == 0:
            return LPOutcome(LPStatus.OPTIMAL, 0.0, np.zeros(H.dimension))
        return LPOutcome(LPStatus.UNBOUNDED)
    dual = simplex_standard(H.A.T, c, H.b)
    if dual.status == "unbounded":
        return LPOutcome(LPStatus.INFEASIBLE)
    if dual.status == "infeasible":
        return LPOutcome(LPStatus.UNBOUNDED if _primal_feasible(H) else LPStatus.INFEASIBLE)
    z = dual.duals
    if np.any(H.A @ z > H.b + 1e-7 * (1.0 + np.abs(H.b))):
        # multipliers drifted: confirm feasibility before trusting the value
        if not _primal_feasible(H):
            return LPOutcome(LPStatus.INFEASIBLE)
    return LPOutcome(LPStatus.OPTIMAL, float(c @ z), z)


def is_empty(H: HPolyhedron) -> bool:
    return H.m > 0 and not _primal_feasible(H)


# ---- queries ----------------------------------------------------------------


def contains(H: HPolyhedron, z: Sequence[float], tol: float = CONTAIN_TOL) -> bool:
    z = np.asarray(z, dtype=float)
    if z.shape != (H.dimension,):
        raise ValueError("point dimension mismatch")
    return bool(np.all(H.A @ z <= H.b + tol))


def contains_many(H: HPolyhedron, Z: NDArray[np.float64], tol: float = CONTAIN_TOL) -> NDArray[np.bool_]:
    Z = np.asarray(Z, dtype=float).reshape(-1, H.dimension)
    if H.m == 0:
        return np.ones(len(Z), dtype=bool)
    return np.all(Z @ H.A.T <= H.b[None, :] + tol, axis=1)


class OutsidePolyhedronError(ValueError):
    """The base point of a normal-cone query is not in the polyhedron."""


def normal_cone_slack(H: HPolyhedron, x: Sequence[float], p: Sequence[float]) -> float:
    """``sup_{z in H} p.(z - x)``; ``inf`` when unbounded."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if not contains(H, x):
        raise OutsidePolyhedronError(f"point {x.tolist()} is outside the polyhedron")
    out = lp_max(H, p)
    if out.status is LPStatus.UNBOUNDED:
        return float("inf")
    if out.status is LPStatus.INFEASIBLE:
        return float("-inf")
    return out.value - float(p @ x)


def normal_cone_contains(H: HPolyhedron, x: Sequence[float], p: Sequence[float]) -> bool:
    """Whether ``p`` is in the normal cone ``N_H(x)``."""
    return normal_cone_slack(H, x, p) <= LP_VALUE_TOL


def includes(A: HPolyhedron, B: HPolyhedron) -> bool:
    """Whether ``B`` is a subset of ``A``."""
    if A.dimension != B.dimension:
        raise ValueError("dimension mismatch")
    if A.m == 0 or A._row_keys <= B._row_keys:
        return True
    if is_empty(B):
        return True
    for a, b in zip(A.A, A.b):
        out = lp_max(B, a)
        if out.status is LPStatus.INFEASIBLE:
            return True
        if out.status is LPStatus.UNBOUNDED or out.value > b + LP_VALUE_TOL:
            return False
    return True


# ---- level sets -------------------------------------------------------------


def level_polyhedron(sample: SampledMultiMap, strict: NDArray[np.bool_], i: int) -> HPolyhedron:
    """Sampled ``C^F(x_i)``: constraints ``p_w.(z - w) <= 0`` for ``w`` not strictly below ``x_i``."""
    gens, mask = sample.padded
    active = ~strict[:, i]
    sel = mask & active[:, None]
    A = gens[sel]
    owners = np.nonzero(sel)[0]
    b = np.einsum("kd,kd->k", A, sample.points[owners])
    if len(A) == 0:
        return HPolyhedron.whole(sample.dimension)
    return HPolyhedron.from_arrays(A, b, sample.dimension)


def level_polyhedra(sample: SampledMultiMap, strict: NDArray[np.bool_]) -> list[HPolyhedron]:
    """:func:`level_polyhedron` for every sample index, sharing identical constraint sets."""
    out: list[HPolyhedron] = []
    cache: dict[bytes, HPolyhedron] = {}
    for i in range(sample.n):
        key = np.packbits(~strict[:, i]).tobytes()
        if key not in cache:
            cache[key] = level_polyhedron(sample, strict, i)
        out.append(cache[key])
    return out


# ---- 2-D clipping ------------------------------------------------------------


def clip_polygon(H: HPolyhedron, box: tuple[float, float, float, float]) -> NDArray[np.float64]:
    """Vertices (counter-clockwise) of ``H`` intersected with an axis box ``(xmin, ymin, xmax, ymax)``."""
    if H.dimension != 2:
        raise ValueError("clipping is for planar polyhedra")
    x0, y0, x1, y1 = box
    poly = np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], dtype=float)
    for a, b in zip(H.A, H.b):
        f = poly @ a - b
        if np.all(f <= 0):
            continue
        if np.all(f > 0):
            return np.empty((0, 2))
        nxt = np.roll(poly, -1, axis=0)
        fn = np.roll(f, -1)
        keep = f <= 0
        cross = (f < 0) & (fn > 0) | (f > 0) & (fn < 0)
        t = np.where(cross, f / np.where(cross, f - fn, 1.0), 0.0)
        hits = poly + t[:, None] * (nxt - poly)
        # interleave kept vertices and crossing points in edge order
        stacked = np.stack([poly, hits], axis=1).reshape(-1, 2)
        mask = np.stack([keep, cross], axis=1).ravel()
        poly = stacked[mask]
        if len(poly) == 0:
            break
    return poly
