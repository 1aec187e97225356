"""Exact potentials for sampled fields on the real line.

With ``alpha`` the largest point carrying a negative generator and
``beta`` the smallest carrying a positive one, a cyclically
quasi-monotone sample has ``alpha <= beta`` and ``f(x) = |x - (alpha+beta)/2|``
is a potential.  With only one sign present the identity or its negative
works, and a vanishing field takes a constant.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .geometry import HPolyhedron
from .multimap import SampledMultiMap
from .order import CqmViolationError, ascending_edges, check_cqm, strict_preorder
from .potential import InclusionReport, verify_inclusion


class OneDCase(enum.Enum):
    COMPACT_INTERVAL = "CompactInterval"
    HALF_LINE_OR_EMPTY = "HalfLineOrEmpty"
    IDENTICALLY_ZERO = "IdenticallyZero"


@dataclass(frozen=True)
class AbsPower:
    center: float
    q: float = 1.0

    def __call__(self, x: float) -> float:
        return abs(x - self.center) ** self.q

    def describe(self) -> str:
        return f"f(x) = |x - {self.center!r}|^{self.q:g}"


@dataclass(frozen=True)
class Linear:
    sign: int

    def __call__(self, x: float) -> float:
        return self.sign * x

    def describe(self) -> str:
        return "f(x) = x" if self.sign > 0 else "f(x) = -x"


@dataclass(frozen=True)
class Constant:
    value: float = 0.0

    def __call__(self, x: float) -> float:
        return self.value

    def describe(self) -> str:
        return f"f(x) = {self.value!r}"


Potential1D = AbsPower | Linear | Constant


@dataclass(frozen=True)
class OneDReport:
    case: OneDCase
    alpha: float
    beta: float
    potential: Potential1D

    def describe(self) -> str:
        return self.potential.describe()

    def to_json(self) -> dict:
        pot = self.potential
        if isinstance(pot, AbsPower):
            desc = {"kind": "AbsPower", "center": pot.center, "q": pot.q}
        elif isinstance(pot, Linear):
            desc = {"kind": "Linear", "sign": pot.sign}
        else:
            desc = {"kind": "Constant", "value": pot.value}

        def enc(v: float):
            return v if np.isfinite(v) else ("-inf" if v < 0 else "inf")

        return {
            "case": self.case.value,
            "alpha": enc(self.alpha),
            "beta": enc(self.beta),
            "potential": desc,
            "formula": self.describe(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _require_1d(sample: SampledMultiMap) -> None:
    if sample.dimension != 1:
        raise ValueError(f"expected a 1-D sample, got dimension {sample.dimension}")


def solve_1d(sample: SampledMultiMap) -> OneDReport:
    """Classify the sample and emit an explicit potential."""
    _require_1d(sample)
    verdict = check_cqm(ascending_edges(sample))
    if not verdict.is_cqm:
        raise CqmViolationError(verdict)
    x = sample.points[:, 0]
    has_neg = np.array([bool(np.any(c[:, 0] < 0)) for c in sample.cones], dtype=bool)
    has_pos = np.array([bool(np.any(c[:, 0] > 0)) for c in sample.cones], dtype=bool)
    alpha = float(x[has_neg].max()) if has_neg.any() else -np.inf
    beta = float(x[has_pos].min()) if has_pos.any() else np.inf
    if not has_neg.any() and not has_pos.any():
        return OneDReport(OneDCase.IDENTICALLY_ZERO, alpha, beta, Constant(0.0))
    if np.isfinite(alpha) and np.isfinite(beta):
        return OneDReport(OneDCase.COMPACT_INTERVAL, alpha, beta, AbsPower((alpha + beta) / 2.0 + 0.0, 1.0))
    sign = 1 if has_pos.any() else -1
    return OneDReport(OneDCase.HALF_LINE_OR_EMPTY, alpha, beta, Linear(sign))


def sublevel_interval(potential: Potential1D, x: float) -> HPolyhedron:
    """``{f <= f(x)}`` as a 1-D polyhedron."""
    if isinstance(potential, Constant):
        return HPolyhedron.whole(1)
    if isinstance(potential, Linear):
        return HPolyhedron.from_arrays([[potential.sign]], [potential.sign * x], 1)
    r = abs(x - potential.center)
    c = potential.center
    return HPolyhedron.from_arrays([[1.0], [-1.0]], [c + r, -(c - r)], 1)


def sign_test(report: OneDReport, sample: SampledMultiMap) -> list[tuple[int, int]]:
    """``(point, generator)`` pairs whose sign disagrees with the potential's slope."""
    pot = report.potential
    bad = []
    for i, (x, gens) in enumerate(zip(sample.points[:, 0], sample.cones)):
        for g, p in enumerate(gens[:, 0]):
            if isinstance(pot, Constant):
                ok = False
            elif isinstance(pot, Linear):
                ok = p * pot.sign > 0
            else:
                ok = x == pot.center or (x > pot.center and p > 0) or (x < pot.center and p < 0)
            if not ok:
                bad.append((i, g))
    return bad


def verify_potential(report: OneDReport, sample: SampledMultiMap) -> InclusionReport:
    """Normal-cone inclusion of the sample in the emitted potential's sublevels."""
    regions = [sublevel_interval(report.potential, float(x)) for x in sample.points[:, 0]]
    return verify_inclusion(sample, regions)


def two_point_reduction_check(sample: SampledMultiMap) -> bool:
    """On the line, reachability coincides with single ascending steps."""
    _require_1d(sample)
    graph = ascending_edges(sample)
    return bool(np.array_equal(strict_preorder(graph), graph.adj))
