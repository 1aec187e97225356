"""Analytic example fields with membership oracles for their level sets.

Every field is encoded with the :mod:`quasipot.multimap` conventions: a
ray ``spn+(v)`` becomes ``{v/|v|}``, ``R^d`` becomes ``{+-e_k}`` and
``{0}`` the empty set.  Oracles give the closed convex set ``C^F(x)`` as a
signed distance (negative inside).

Closed forms used by the oracles (``r`` is the level of the base point):

* hedgehog: ``B(0, |x|)``; plateau_jump: balls of radius ``|x|`` or ``2``.
* half_hedgehog: sublevels of the distance to the ray ``{x_1 >= 0, x' = 0}``.
* half_const: half-disk ``B(0, |x|) ∩ {z_1 <= 0}`` or half-space ``z_1 <= x_1``.
* single_circle: unit ball for ``|x| <= 1``, else ``conv(B(0,1) ∪ {x})``.
* three_quarters: ``B(0, r) ∪ [0, r]^2`` with ``r = |x|`` off the open
  positive quadrant and ``r = max(x_1, x_2)`` inside it.
* stadium: sublevels of the distance to ``Σ = {0} x [-1, 1]``.

All of them except half_hedgehog have ``C^F(0) = {0}``; there the origin
carries the half-space cone ``{p_1 <= 0}`` and ``C^F(0)`` is the ray itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .multimap import SampledMultiMap, build_sample, whole_space

FIXTURE_NAMES = (
    "hedgehog",
    "plateau_jump",
    "stadium",
    "three_quarters",
    "single_circle",
    "half_hedgehog",
    "half_const",
)
ANY_DIMENSION = {"hedgehog", "plateau_jump", "half_hedgehog", "half_const"}
_EPS = 1e-9


class Membership(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


class UnknownFixtureError(KeyError):
    pass


def _check_name(name: str) -> None:
    if name not in FIXTURE_NAMES:
        raise UnknownFixtureError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")


def _ray(x: NDArray[np.float64]) -> NDArray[np.float64]:
    return (x / np.linalg.norm(x))[None, :]


def _none(d: int) -> NDArray[np.float64]:
    return np.empty((0, d))


def _left_half_space(d: int) -> NDArray[np.float64]:
    """Generators of the cone ``{p : p_1 <= 0}``."""
    gens = whole_space(d)
    return gens[np.arange(2 * d) != 0]


def _segment_proj(x: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.array([0.0, min(1.0, max(-1.0, x[1]))])


def field_eval(name: str, x: Sequence[float]) -> NDArray[np.float64]:
    """Unit generators of ``F(x)`` for fixture ``name``."""
    _check_name(name)
    x = np.asarray(x, dtype=float)
    d = len(x)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite point")
    if name not in ANY_DIMENSION and d != 2:
        raise ValueError(f"{name} is defined in dimension 2 only")
    r = float(np.linalg.norm(x))
    at_origin = r <= _EPS
    if name == "hedgehog":
        return whole_space(d) if at_origin else _ray(x)
    if name == "plateau_jump":
        if at_origin:
            return whole_space(d)
        if r < 1.0 - _EPS or r >= 2.0 - _EPS:
            return _ray(x)
        return _none(d)
    if name == "half_hedgehog":
        if at_origin:
            return _left_half_space(d)
        return _ray(x) if x[0] <= _EPS else _none(d)
    if name == "half_const":
        if at_origin:
            return _left_half_space(d)
        if x[0] <= _EPS:
            return _ray(x)
        e1 = np.zeros((1, d))
        e1[0, 0] = 1.0
        return e1
    if name == "three_quarters":
        if at_origin:
            return whole_space(2)
        return _ray(x) if min(x[0], x[1]) <= _EPS else _none(2)
    if name == "single_circle":
        return _ray(x) if abs(r - 1.0) <= _EPS else _none(2)
    # stadium
    if at_origin:
        return whole_space(2)
    if abs(x[0]) <= _EPS and abs(x[1]) <= 1.0 + _EPS:
        horiz = np.array([[1.0, 0.0], [-1.0, 0.0]])
        if abs(x[1] - 1.0) <= _EPS:
            return np.vstack([horiz, [[0.0, 1.0]]])
        if abs(x[1] + 1.0) <= _EPS:
            return np.vstack([horiz, [[0.0, -1.0]]])
        return horiz
    return _ray(x - _segment_proj(x))


# ---- signed distances -------------------------------------------------------


def _segment_dist(Z: NDArray[np.float64], P: NDArray[np.float64], Q: NDArray[np.float64]) -> NDArray[np.float64]:
    e = Q - P
    t = np.clip((Z - P) @ e / (e @ e), 0.0, 1.0)
    return np.linalg.norm(Z - (P + t[:, None] * e), axis=1)


def _arc_dist(Z: NDArray[np.float64], r: float, a0: float, a1: float) -> NDArray[np.float64]:
    """Distance to the circle arc of radius ``r`` from angle ``a0`` counter-clockwise to ``a1``."""
    ang = np.mod(np.arctan2(Z[:, 1], Z[:, 0]) - a0, 2 * np.pi)
    on_arc = ang <= (a1 - a0)
    radial = np.abs(np.linalg.norm(Z, axis=1) - r)
    ends = np.minimum(
        np.linalg.norm(Z - r * np.array([np.cos(a0), np.sin(a0)]), axis=1),
        np.linalg.norm(Z - r * np.array([np.cos(a1), np.sin(a1)]), axis=1),
    )
    return np.where(on_arc, radial, ends)


def _in_triangle(Z: NDArray[np.float64], a, b, c) -> NDArray[np.bool_]:
    def side(p, q):
        e = q - p
        return e[0] * (Z[:, 1] - p[1]) - e[1] * (Z[:, 0] - p[0])

    s1, s2, s3 = side(a, b), side(b, c), side(c, a)
    return ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))


def _drop_sdist(x: NDArray[np.float64], Z: NDArray[np.float64]) -> NDArray[np.float64]:
    """Signed distance to ``conv(B(0,1) ∪ {x})`` for ``|x| > 1``."""
    rho = float(np.linalg.norm(x))
    phi = float(np.arctan2(x[1], x[0]))
    half = float(np.arccos(1.0 / rho))
    tp = np.array([np.cos(phi + half), np.sin(phi + half)])
    tm = np.array([np.cos(phi - half), np.sin(phi - half)])
    dist = np.minimum.reduce([
        _segment_dist(Z, x, tp),
        _segment_dist(Z, x, tm),
        _arc_dist(Z, 1.0, phi + half, phi + 2 * np.pi - half),
    ])
    inside = (np.linalg.norm(Z, axis=1) <= 1.0) | _in_triangle(Z, x, tp, tm)
    return np.where(inside, -dist, dist)


def _three_quarter_sdist(r: float, Z: NDArray[np.float64]) -> NDArray[np.float64]:
    """Signed distance to ``B(0, r) ∪ [0, r]^2``."""
    corner = np.array([r, r])
    dist = np.minimum.reduce([
        _segment_dist(Z, np.array([0.0, r]), corner),
        _segment_dist(Z, corner, np.array([r, 0.0])),
        _arc_dist(Z, r, np.pi / 2, 2 * np.pi),
    ])
    in_square = (Z[:, 0] >= 0) & (Z[:, 0] <= r) & (Z[:, 1] >= 0) & (Z[:, 1] <= r)
    inside = (np.linalg.norm(Z, axis=1) <= r) | in_square
    return np.where(inside, -dist, dist)


def _dist_ray(Z: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.where(Z[:, 0] >= 0, np.linalg.norm(Z[:, 1:], axis=1), np.linalg.norm(Z, axis=1))


def _dist_segment(Z: NDArray[np.float64]) -> NDArray[np.float64]:
    proj = np.column_stack([np.zeros(len(Z)), np.clip(Z[:, 1], -1.0, 1.0)])
    return np.linalg.norm(Z - proj, axis=1)


def level_sdist_many(name: str, x: Sequence[float], Z: NDArray[np.float64]) -> NDArray[np.float64]:
    """Signed distance from each row of ``Z`` to the closed convex set ``C^F(x)``."""
    _check_name(name)
    x = np.asarray(x, dtype=float)
    Z = np.asarray(Z, dtype=float).reshape(-1, len(x))
    rx = float(np.linalg.norm(x))
    rz = np.linalg.norm(Z, axis=1)
    if name == "half_hedgehog":
        return _dist_ray(Z) - _dist_ray(x[None, :])[0]
    if name == "single_circle":
        # F(0) = {0}, so the origin falls in the unit-ball case
        if rx <= 1.0 + _EPS:
            return rz - 1.0
        return _drop_sdist(x, Z)
    if rx <= _EPS:
        return rz
    if name == "hedgehog":
        return rz - rx
    if name == "plateau_jump":
        radius = 2.0 if 1.0 - _EPS <= rx < 2.0 - _EPS else rx
        return rz - radius
    if name == "half_const":
        if x[0] > _EPS:
            return Z[:, 0] - x[0]
        lateral = np.linalg.norm(Z[:, 1:], axis=1)
        outside = np.where(Z[:, 0] <= 0, rz - rx, np.hypot(Z[:, 0], np.maximum(lateral - rx, 0.0)))
        inside = np.maximum(rz - rx, Z[:, 0])
        return np.where(outside > 0, outside, inside)
    if name == "three_quarters":
        r = rx if min(x[0], x[1]) <= _EPS else float(max(x[0], x[1]))
        return _three_quarter_sdist(r, Z)
    # stadium
    return _dist_segment(Z) - _dist_segment(x[None, :])[0]


def level_sdist(name: str, x: Sequence[float], z: Sequence[float]) -> float:
    """Signed distance from ``z`` to the closed convex set ``C^F(x)``."""
    return float(level_sdist_many(name, x, np.asarray(z, dtype=float)[None, :])[0])


def oracle_membership(name: str, x: Sequence[float], z: Sequence[float], margin: float) -> Membership:
    """Classify ``z`` against ``C^F(x)`` with a safety ``margin``."""
    if not margin > 0:
        raise ValueError("margin must be positive")
    s = level_sdist(name, x, z)
    if s <= -margin:
        return Membership.INSIDE
    if s >= margin:
        return Membership.OUTSIDE
    return Membership.BOUNDARY


@dataclass(frozen=True)
class FixtureField:
    name: str
    dimension: int = 2

    def eval(self, x: Sequence[float]) -> NDArray[np.float64]:
        return field_eval(self.name, x)

    def oracle(self, x: Sequence[float], z: Sequence[float], margin: float) -> Membership:
        return oracle_membership(self.name, x, z, margin)


# ---- sampling ---------------------------------------------------------------


def square_grid(n: int, half_width: float = 3.0, d: int = 2) -> NDArray[np.float64]:
    """``n^d`` regularly spaced points over ``[-half_width, half_width]^d``."""
    axis = np.linspace(-half_width, half_width, n)
    # snap the exact zero so fields see the origin
    axis[np.abs(axis) < 1e-12] = 0.0
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def structural_points(name: str, n: int) -> NDArray[np.float64]:
    """Points a Cartesian grid misses but the field depends on."""
    if name == "single_circle":
        k = 4 * max(n, 4)
        t = 2 * np.pi * np.arange(k) / k
        return np.column_stack([np.cos(t), np.sin(t)])
    if name == "stadium":
        return np.array([[0.0, 1.0], [0.0, -1.0]])
    return np.empty((0, 2))


def fixture_sample(
    name: str, n: int = 41, half_width: float = 3.0, d: int = 2, tol: float = 1e-9
) -> SampledMultiMap:
    """Field ``name`` sampled on the ``n^d`` grid plus its structural points."""
    _check_name(name)
    pts = square_grid(n, half_width, d)
    extra = structural_points(name, n)
    if len(extra) and d == 2:
        pts = np.vstack([pts, extra])
    cones = [field_eval(name, p) for p in pts]
    return build_sample(pts, cones, tol)


def field_sample(field: Callable[[NDArray[np.float64]], NDArray[np.float64]], points, tol: float = 1e-9) -> SampledMultiMap:
    pts = np.asarray(points, dtype=float)
    return build_sample(pts, [field(p) for p in pts], tol)


# ---- perturbation of paths along a level boundary ---------------------------


class PerturbationError(ValueError):
    pass


@dataclass(frozen=True)
class PerturbedPath:
    points: NDArray[np.float64]
    eps: NDArray[np.float64]
    dots: NDArray[np.float64]
    offsets: NDArray[np.float64]


def perturb_path(
    field: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    base_points: Sequence[Sequence[float]],
    delta: float,
    A: float,
    L: float,
    M: float,
    T: float,
    step_tol: float = 1e-9,
) -> PerturbedPath:
    """Push a path on a level boundary off it so every step ascends.

    ``field`` must return a unit vector.  The first point is kept, point
    ``i`` moves by ``eps_i F(x_{i-1})`` with ``eps_1 = 2 A delta / L`` and
    ``eps_{i+1} = (1 + 3 L delta / (1 - M L delta)) eps_i``.  Returns the
    perturbed points together with the step dot products
    ``(x~_{i+1} - x~_i) . F(x~_i)`` and offsets ``|x~_i - x_i|``.
    """
    x = np.asarray(base_points, dtype=float)
    n = len(x) - 1
    if n < 1:
        raise PerturbationError("need at least two base points")
    if M * L * delta > 0.5:
        raise PerturbationError(f"M L delta = {M * L * delta:.3g} exceeds 1/2")
    steps = np.linalg.norm(np.diff(x, axis=0), axis=1)
    if np.any(np.abs(steps - delta) > step_tol * max(1.0, delta)):
        raise PerturbationError("consecutive base points must be exactly delta apart")
    if n * delta > 2 * T * (1 + 1e-12):
        raise PerturbationError("n delta exceeds 2T")
    growth = 1.0 + 3.0 * L * delta / (1.0 - M * L * delta)
    eps = np.zeros(n + 1)
    eps[1] = 2.0 * A * delta / L
    for i in range(1, n):
        eps[i + 1] = growth * eps[i]
    fx = np.array([field(p) for p in x])
    pert = x.copy()
    pert[1:] += eps[1:, None] * fx[:-1]
    f_pert = np.array([field(p) for p in pert])
    dots = np.einsum("kd,kd->k", np.diff(pert, axis=0), f_pert[:-1])
    offsets = np.linalg.norm(pert - x, axis=1)
    return PerturbedPath(pert, eps, dots, offsets)


def find_delta0(
    field: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    path_for_delta: Callable[[float], NDArray[np.float64]],
    delta: float,
    A: float,
    L: float,
    M: float,
    T: float,
    min_delta: float = 1e-4,
) -> float:
    """Halve ``delta`` until the perturbed path ascends by at least ``A delta^2``.

    Gives up below ``min_delta``; the path length grows like ``1 / delta``.
    """
    while delta >= min_delta:
        if M * L * delta <= 0.5:
            out = perturb_path(field, path_for_delta(delta), delta, A, L, M, T)
            if np.all(out.dots >= A * delta**2 * (1 - 1e-9)) and np.all(out.offsets <= M * delta * (1 + 1e-9)):
                return delta
        delta /= 2.0
    raise PerturbationError("no admissible delta found")


def circle_arc_path(delta: float, length: float = np.pi / 2, radius: float = 1.0) -> NDArray[np.float64]:
    """Points on a circle arc with consecutive chord length exactly ``delta``."""
    dtheta = 2.0 * np.arcsin(delta / (2.0 * radius))
    k = int(np.floor(length / (radius * dtheta) + 1e-12))
    t = dtheta * np.arange(k + 1)
    return radius * np.column_stack([np.cos(t), np.sin(t)])
