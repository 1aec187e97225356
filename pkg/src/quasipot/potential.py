"""Quasi-convex potentials built from ordered families of level sets.

* :func:`rank_potential` turns a total sampled pre-order into integer
  ranks attached to nested polyhedra; :func:`evaluate` reads the
  resulting lsc quasi-convex function.
* :func:`gaussian_level_value` is the dimension-graded Gaussian measure
  ``dim C + (2 pi)^(-dim/2) int_C exp(-|w|^2 / 2)``.
* :func:`sublsc_envelope_1d` computes the sublevel-stable lsc envelope of
  a piecewise affine function of one variable in exact arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import ndtr

from .geometry import (
    HPolyhedron,
    LP_VALUE_TOL,
    clip_polygon,
    contains,
    includes,
    normal_cone_slack,
)
from .multimap import SampledMultiMap, build_sample, whole_space
from .order import PreorderPair, check_totality, equivalence_classes


class NotTotalError(ValueError):
    """The sampled large pre-order has an incomparable pair."""

    def __init__(self, i: int, j: int, points: tuple | None = None):
        msg = f"pre-order is not total: {i} and {j} are incomparable"
        if points is not None:
            msg += f" (points {points[0]} and {points[1]})"
        super().__init__(msg)
        self.i, self.j = i, j
        self.points = points


class ClassRegionMismatch(RuntimeError):
    """Members of one equivalence class carry different level polyhedra."""


@dataclass(frozen=True, eq=False)
class PotentialTable:
    """Ranked equivalence classes with their common level polyhedron.

    ``classes[k]`` has rank ``k``; ``regions[k]`` is its level set, and
    regions are nested increasingly.
    """

    classes: tuple[tuple[int, ...], ...]
    regions: tuple[HPolyhedron, ...]
    rank_of_index: NDArray[np.int64]

    @property
    def outside_value(self) -> int:
        return len(self.classes)

    def rank_of_class(self, k: int) -> int:
        return k

    def to_json(self) -> dict:
        return {
            "classes": [
                {"rank": k, "members": list(c), "region": r.to_json()}
                for k, (c, r) in enumerate(zip(self.classes, self.regions))
            ],
            "outside_value": self.outside_value,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def rank_potential(sample: SampledMultiMap, pair: PreorderPair, regions: Sequence[HPolyhedron]) -> PotentialTable:
    """Integer ranks on the classes of a total sampled pre-order."""
    verdict = check_totality(pair)
    if not verdict.is_total:
        i, j = verdict.pair
        raise NotTotalError(i, j, (tuple(sample.points[i].tolist()), tuple(sample.points[j].tolist())))
    large = pair.large
    classes = equivalence_classes(large)
    # under a total pre-order the number of points below a class orders it
    below = large.sum(axis=0)
    classes.sort(key=lambda c: (int(below[c[0]]), c[0]))
    out_regions = []
    rank = np.empty(sample.n, dtype=np.int64)
    for k, members in enumerate(classes):
        rep = regions[members[0]]
        for m in members[1:]:
            other = regions[m]
            if other is rep or (np.array_equal(other.A, rep.A) and np.array_equal(other.b, rep.b)):
                continue
            if not (includes(rep, other) and includes(other, rep)):
                raise ClassRegionMismatch(f"indices {members[0]} and {m} share a class but not a region")
        out_regions.append(rep)
        rank[members] = k
    return PotentialTable(tuple(tuple(c) for c in classes), tuple(out_regions), rank)


def evaluate(table: PotentialTable, z: Sequence[float]) -> int:
    """Least rank whose region contains ``z``, else ``outside_value``."""
    z = np.asarray(z, dtype=float)
    for k, region in enumerate(table.regions):
        if contains(region, z):
            return k
    return table.outside_value


def region_nesting_violations(table: PotentialTable) -> list[int]:
    """Ranks ``k`` whose region is not inside the region of rank ``k + 1``."""
    return [k for k in range(len(table.regions) - 1) if not includes(table.regions[k + 1], table.regions[k])]


# ---- Gaussian level value ---------------------------------------------------


class UnsupportedDimension(ValueError):
    pass


@dataclass(frozen=True)
class PointRegion:
    point: tuple[float, ...]


@dataclass(frozen=True)
class SegmentRegion:
    start: tuple[float, ...]
    end: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class PlanarRegion:
    polyhedron: HPolyhedron
    box_half_width: float = 8.0


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _gaussian_polygon_mass(vertices: NDArray[np.float64]) -> float:
    """Standard Gaussian probability of a convex polygon, sliced along ``x``."""
    if len(vertices) < 3:
        return 0.0
    xs = np.unique(np.round(vertices[:, 0], 14))
    total = 0.0
    edges = list(zip(vertices, np.roll(vertices, -1, axis=0)))
    for x0, x1 in zip(xs[:-1], xs[1:]):
        t = 0.5 * (x1 - x0) * _GL_NODES + 0.5 * (x1 + x0)
        lo = np.full_like(t, np.inf)
        hi = np.full_like(t, -np.inf)
        for P, Q in edges:
            if P[0] == Q[0]:
                continue
            a, b = (P, Q) if P[0] < Q[0] else (Q, P)
            if a[0] > x0 + 1e-14 or b[0] < x1 - 1e-14:
                continue
            y = a[1] + (t - a[0]) * (b[1] - a[1]) / (b[0] - a[0])
            lo = np.minimum(lo, y)
            hi = np.maximum(hi, y)
        ok = hi > lo
        dens = np.exp(-0.5 * t**2) / math.sqrt(2 * math.pi)
        slab = np.where(ok, ndtr(np.where(ok, hi, 0.0)) - ndtr(np.where(ok, lo, 0.0)), 0.0)
        total += 0.5 * (x1 - x0) * float(_GL_WEIGHTS @ (dens * slab))
    return total


def gaussian_level_value(region: PointRegion | SegmentRegion | PlanarRegion, dim: int) -> float:
    """``dim + (2 pi)^(-dim/2) * int_C exp(-|w|^2/2) dH^dim`` for ``dim`` in 0, 1, 2."""
    if dim not in (0, 1, 2):
        raise UnsupportedDimension(f"dimension {dim} is not supported (0, 1 or 2 only)")
    if dim == 0:
        if not isinstance(region, PointRegion):
            raise ValueError("dimension 0 needs a point")
        p = np.asarray(region.point, dtype=float)
        return float(np.exp(-0.5 * p @ p))
    if dim == 1:
        if not isinstance(region, SegmentRegion):
            raise ValueError("dimension 1 needs a segment")
        a = np.asarray(region.start, dtype=float)
        b = np.asarray(region.end, dtype=float)
        length = float(np.linalg.norm(b - a))
        if length == 0:
            raise ValueError("degenerate segment")
        u = (b - a) / length
        s0 = float(a @ u)
        perp = a - s0 * u
        # along the line |w|^2 = |perp|^2 + s^2
        mass = math.exp(-0.5 * float(perp @ perp)) * float(ndtr(s0 + length) - ndtr(s0))
        return 1.0 + mass
    if not isinstance(region, PlanarRegion) or region.polyhedron.dimension != 2:
        raise ValueError("dimension 2 needs a planar polyhedron")
    w = region.box_half_width
    verts = clip_polygon(region.polyhedron, (-w, -w, w, w))
    return 2.0 + _gaussian_polygon_mass(verts)


def region_dimension(H: HPolyhedron, box_half_width: float = 8.0, tol: float = 1e-9) -> int:
    """Affine dimension of a planar polyhedron clipped to a box; ``-1`` if empty."""
    verts = clip_polygon(H, (-box_half_width,) * 2 + (box_half_width,) * 2)
    if len(verts) == 0:
        return -1
    centred = verts - verts.mean(axis=0)
    if len(verts) == 1:
        return 0
    sv = np.linalg.svd(centred, compute_uv=False)
    return int(np.sum(sv > tol))


def region_descriptor(H: HPolyhedron, box_half_width: float = 8.0):
    """Descriptor and dimension suitable for :func:`gaussian_level_value`."""
    dim = region_dimension(H, box_half_width)
    verts = clip_polygon(H, (-box_half_width,) * 2 + (box_half_width,) * 2)
    if dim < 0:
        raise ValueError("empty region")
    if dim == 0:
        return PointRegion(tuple(verts.mean(axis=0).tolist())), 0
    if dim == 1:
        direction = verts[np.argmax(np.linalg.norm(verts - verts[0], axis=1))] - verts[0]
        proj = (verts - verts[0]) @ direction
        return SegmentRegion(tuple(verts[np.argmin(proj)].tolist()), tuple(verts[np.argmax(proj)].tolist())), 1
    return PlanarRegion(H, box_half_width), 2


# ---- inclusion of F in the normal cones of the level sets ------------------


@dataclass(frozen=True)
class InclusionFailure:
    index: int
    generator: int
    slack: float


@dataclass(frozen=True)
class InclusionReport:
    checked: int
    failures: tuple[InclusionFailure, ...] = ()
    max_slack: float = float("-inf")

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_inclusion(sample: SampledMultiMap, regions: Sequence[HPolyhedron]) -> InclusionReport:
    """Check every generator ``p`` of ``F(x_i)`` lies in ``N_{regions[i]}(x_i)``."""
    failures = []
    checked = 0
    worst = float("-inf")
    for i, gens in enumerate(sample.cones):
        for g, p in enumerate(gens):
            checked += 1
            slack = normal_cone_slack(regions[i], sample.points[i], p)
            worst = max(worst, slack)
            if slack > LP_VALUE_TOL:
                failures.append(InclusionFailure(i, g, slack))
    return InclusionReport(checked, tuple(failures), worst)


# ---- 1-D piecewise functions and the sublevel-stable lsc envelope ------------


def _q(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class PiecewiseFn1D:
    """Piecewise affine function on the line with exact rational data.

    ``pieces[k] = (slope, intercept)`` on the open interval between
    ``breakpoints[k-1]`` and ``breakpoints[k]``; ``point_values[k]`` is the
    value at ``breakpoints[k]``.
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[tuple[Fraction, Fraction], ...]
    point_values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) + 1 or len(self.point_values) != len(self.breakpoints):
            raise ValueError("need one more piece than breakpoints and one value per breakpoint")
        if any(b >= c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must increase strictly")

    @classmethod
    def make(cls, breakpoints, pieces, point_values) -> "PiecewiseFn1D":
        return cls(
            tuple(_q(b) for b in breakpoints),
            tuple((_q(s), _q(c)) for s, c in pieces),
            tuple(_q(v) for v in point_values),
        )

    def _locate(self, x: Fraction) -> tuple[str, int]:
        for k, b in enumerate(self.breakpoints):
            if x < b:
                return "piece", k
            if x == b:
                return "point", k
        return "piece", len(self.breakpoints)

    def __call__(self, x) -> Fraction:
        x = _q(x)
        kind, k = self._locate(x)
        if kind == "point":
            return self.point_values[k]
        s, c = self.pieces[k]
        return s * x + c

    def left_limit(self, k: int) -> Fraction:
        s, c = self.pieces[k]
        return s * self.breakpoints[k] + c

    def right_limit(self, k: int) -> Fraction:
        s, c = self.pieces[k + 1]
        return s * self.breakpoints[k] + c

    def lsc_value(self, k: int) -> Fraction:
        """Lower semi-continuous envelope at breakpoint ``k``."""
        return min(self.point_values[k], self.left_limit(k), self.right_limit(k))

    def is_lsc(self) -> bool:
        return all(self.lsc_value(k) == self.point_values[k] for k in range(len(self.breakpoints)))

    def probe_points(self) -> list[Fraction]:
        """Breakpoints, midpoints between them and one point beyond each end."""
        b = list(self.breakpoints)
        if not b:
            return [Fraction(0)]
        pts = [b[0] - 1]
        for u, v in zip(b, b[1:]):
            pts += [u, (u + v) / 2]
        pts += [b[-1], b[-1] + 1]
        return pts

    def interval_ranges(self) -> list[tuple[Fraction | None, Fraction | None, bool, bool]]:
        """Value range of each open piece as ``(lo, hi, lo_closed, hi_closed)``; ``None`` is infinite."""
        out = []
        n = len(self.breakpoints)
        for k, (s, c) in enumerate(self.pieces):
            left = self.breakpoints[k - 1] if k > 0 else None
            right = self.breakpoints[k] if k < n else None
            if s == 0:
                out.append((c, c, True, True))
                continue
            ends = [None if e is None else s * e + c for e in (left, right)]
            if s > 0:
                lo, hi = ends
            else:
                hi, lo = ends
            out.append((lo, hi, False, False))
        return out


class NotSublevelClosed(ValueError):
    """Some sublevel ``{g <= g(x)}`` is not closed."""

    def __init__(self, x: Fraction, level: Fraction):
        super().__init__(f"sublevel {{g <= {level}}} is not closed at x = {x}")
        self.x = x
        self.level = level


def _range_meets(g: PiecewiseFn1D, lo: Fraction, hi: Fraction) -> bool:
    """Whether the range of ``g`` meets the open interval ``(lo, hi)``."""
    if any(lo < v < hi for v in g.point_values):
        return True
    for a, b, _, _ in g.interval_ranges():
        a_ok = a is None or a < hi
        b_ok = b is None or b > lo
        if a == b and a is not None:
            if lo < a < hi:
                return True
        elif a_ok and b_ok:
            return True
    return False


def _in_range(g: PiecewiseFn1D, v: Fraction) -> bool:
    if v in g.point_values:
        return True
    for a, b, ac, bc in g.interval_ranges():
        above = a is None or a < v or (ac and a == v)
        below = b is None or v < b or (bc and b == v)
        if above and below:
            return True
    return False


def check_sublevels_closed(g: PiecewiseFn1D) -> None:
    """Raise :class:`NotSublevelClosed` unless every ``{g <= g(x)}`` is closed.

    A sublevel can only lose closedness at a breakpoint ``b`` where a level
    ``v < g(b)`` of ``g`` is approached from one side.
    """
    for k, b in enumerate(g.breakpoints):
        gb = g.point_values[k]
        for lim, slope_ok in (
            (g.left_limit(k), g.pieces[k][0] >= 0),
            (g.right_limit(k), g.pieces[k + 1][0] <= 0),
        ):
            if lim >= gb:
                continue
            if _range_meets(g, lim, gb):
                raise NotSublevelClosed(b, _witness_level(g, lim, gb))
            if slope_ok and _in_range(g, lim):
                raise NotSublevelClosed(b, lim)


def _witness_level(g: PiecewiseFn1D, lo: Fraction, hi: Fraction) -> Fraction:
    for v in g.point_values:
        if lo < v < hi:
            return v
    for a, b, _, _ in g.interval_ranges():
        a_eff = lo if a is None or a < lo else a
        b_eff = hi if b is None or b > hi else b
        if a == b and a is not None and lo < a < hi:
            return a
        if a_eff < b_eff:
            return (a_eff + b_eff) / 2
    return lo


def sublsc_envelope_1d(g: PiecewiseFn1D) -> PiecewiseFn1D:
    """``ĝ(x) = inf {ḡ(x') : g(x') = g(x)}`` with ``ḡ`` the lsc envelope of ``g``.

    Inside open pieces ``ḡ = g``, so only breakpoints can lower a level:
    ``ĝ(x) = min(g(x), min {ḡ(b) : g(b) = g(x)})``.  Points of affine
    pieces that hit a lowered level become new breakpoints.
    """
    check_sublevels_closed(g)
    lowered: dict[Fraction, Fraction] = {}
    for k, v in enumerate(g.point_values):
        lv = g.lsc_value(k)
        if lv < v:
            lowered[v] = min(lowered.get(v, v), lv)

    def hat(v: Fraction) -> Fraction:
        return lowered.get(v, v)

    new_bp: dict[Fraction, Fraction] = {b: hat(v) for b, v in zip(g.breakpoints, g.point_values)}
    n = len(g.breakpoints)
    for k, (s, c) in enumerate(g.pieces):
        if s == 0:
            continue
        left = g.breakpoints[k - 1] if k > 0 else None
        right = g.breakpoints[k] if k < n else None
        for v in lowered:
            x = (v - c) / s
            if (left is None or x > left) and (right is None or x < right):
                new_bp[x] = lowered[v]
    bps = sorted(new_bp)
    pieces = []
    for k in range(len(bps) + 1):
        # the open interval sits inside one original piece
        if not bps:
            mid = Fraction(0)
        elif k == 0:
            mid = bps[0] - 1
        elif k == len(bps):
            mid = bps[-1] + 1
        else:
            mid = (bps[k - 1] + bps[k]) / 2
        kind, idx = g._locate(mid)
        s, c = g.pieces[idx]
        if s == 0:
            pieces.append((Fraction(0), hat(c)))
        else:
            pieces.append((s, c))
    return PiecewiseFn1D(tuple(bps), tuple(pieces), tuple(new_bp[b] for b in bps))


def sublevels_agree(g: PiecewiseFn1D, h: PiecewiseFn1D, points: Sequence[Fraction]) -> bool:
    """``{g <= g(x)} = {h <= h(x)}`` restricted to ``points`` for every ``x`` in ``points``."""
    gv = [g(p) for p in points]
    hv = [h(p) for p in points]
    for a in range(len(points)):
        for b in range(len(points)):
            if (gv[b] <= gv[a]) != (hv[b] <= hv[a]):
                return False
    return True


# ---- normal cone maps of fixture potentials ----------------------------------


def _unit(v: NDArray[np.float64]) -> NDArray[np.float64]:
    return (v / np.linalg.norm(v))[None, :]


_EPS = 1e-9


def _norm_value(x):
    return float(np.linalg.norm(x))


def _norm_cone(x):
    r = np.linalg.norm(x)
    return whole_space(len(x)) if r <= _EPS else _unit(x)


def _plateau_value(x):
    r = float(np.linalg.norm(x))
    return min(r, max(r - 2.0, 0.0) + 1.0)


def _plateau_cone(x):
    r = np.linalg.norm(x)
    if r <= _EPS:
        return whole_space(len(x))
    if r < 1.0 - _EPS or r >= 2.0 - _EPS:
        return _unit(x)
    return np.empty((0, len(x)))


def _plateau_bar_value(x):
    r = float(np.linalg.norm(x))
    return 2.0 if 1.0 < r <= 2.0 else r


def _plateau_bar_cone(x):
    r = np.linalg.norm(x)
    if r <= _EPS:
        return whole_space(len(x))
    if r <= 1.0 + _EPS or r >= 2.0 - _EPS:
        return _unit(x)
    return np.empty((0, len(x)))


def _ray_proj(x):
    p = np.zeros_like(x)
    p[0] = max(x[0], 0.0)
    return p


def _d_ray_value(x):
    return float(np.linalg.norm(x - _ray_proj(x)))


def _d_ray_cone(x):
    d = len(x)
    off = x - _ray_proj(x)
    if np.linalg.norm(off) > _EPS:
        return _unit(off)
    gens = whole_space(d)
    if abs(x[0]) <= _EPS:
        return gens[np.arange(2 * d) != 0]  # {p_1 <= 0}
    return gens[(np.arange(2 * d) % d) != 0]  # {p_1 = 0}


def _seg_proj(x):
    return np.array([0.0, min(1.0, max(-1.0, x[1]))])


def _d_segment_value(x):
    return float(np.linalg.norm(x - _seg_proj(x)))


def _d_segment_cone(x):
    off = x - _seg_proj(x)
    if np.linalg.norm(off) > _EPS:
        return _unit(off)
    horiz = np.array([[1.0, 0.0], [-1.0, 0.0]])
    if x[1] >= 1.0 - _EPS:
        return np.vstack([horiz, [[0.0, 1.0]]])
    if x[1] <= -1.0 + _EPS:
        return np.vstack([horiz, [[0.0, -1.0]]])
    return horiz


def _f1_value(x):
    return 0.0 if np.linalg.norm(x) <= 1.0 else 1.0


def _f1_cone(x):
    r = np.linalg.norm(x)
    return _unit(x) if abs(r - 1.0) <= _EPS else np.empty((0, len(x)))


@dataclass(frozen=True)
class FixturePotential:
    """A quasi-convex function with its normal cone map in closed form."""

    name: str
    value: Callable[[NDArray[np.float64]], float] = field(repr=False)
    normal_cone: Callable[[NDArray[np.float64]], NDArray[np.float64]] = field(repr=False)
    dimensions: tuple[int, ...] | None = None  # None: any dimension


FIXTURE_POTENTIALS: dict[str, FixturePotential] = {
    p.name: p
    for p in (
        FixturePotential("norm", _norm_value, _norm_cone),
        FixturePotential("plateau", _plateau_value, _plateau_cone),
        FixturePotential("plateau_bar", _plateau_bar_value, _plateau_bar_cone),
        FixturePotential("d_ray", _d_ray_value, _d_ray_cone),
        FixturePotential("d_segment", _d_segment_value, _d_segment_cone, (2,)),
        FixturePotential("f1", _f1_value, _f1_cone, (2,)),
    )
}


def normal_cone_map_of(f: str | FixturePotential, grid: Sequence[Sequence[float]], tol: float = 1e-9) -> SampledMultiMap:
    """Sample ``N_f(x) = N_{f <= f(x)}(x)`` on ``grid``."""
    pot = FIXTURE_POTENTIALS[f] if isinstance(f, str) else f
    pts = np.asarray(grid, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pot.dimensions is not None and pts.shape[1] not in pot.dimensions:
        raise ValueError(f"{pot.name} is defined in dimension {pot.dimensions} only")
    return build_sample(pts, [pot.normal_cone(p) for p in pts], tol)
