"""c-infinity cyclical monotonicity of coupling supports.

A support ``{(x_i, y_i)}`` passes when every simple cycle has
``min_i x_i . y_i >= min_i x_i . y_{i+1}``.  Passing supports give
cyclically quasi-monotone maps ``y_i -> x_i``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .multimap import DEFAULT_TOL, SampledMultiMap, build_sample

MAX_PAIRS = 10


@dataclass(frozen=True, eq=False)
class SupportPair:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be vectors of equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class CinftyVerdict:
    passes: bool
    cycle: tuple[int, ...] = ()

    def to_json(self) -> dict:
        if self.passes:
            return {"verdict": "passes"}
        return {"verdict": "violation", "cycle": list(self.cycle)}


class SizeLimitError(ValueError):
    pass


def simple_cycles(n: int, maxlen: int):
    """Index cycles of length 2..maxlen, each listed once starting at its minimum."""
    for length in range(2, maxlen + 1):
        for start in range(n):
            rest = range(start + 1, n)
            for tail in itertools.permutations(rest, length - 1):
                yield (start,) + tail


def cinfty_check(pairs: Sequence[SupportPair], maxlen: int | None = None, tol: float = DEFAULT_TOL) -> CinftyVerdict:
    """Brute force over simple cycles of at most ``maxlen`` pairs."""
    n = len(pairs)
    if n > MAX_PAIRS:
        raise SizeLimitError(f"{n} pairs exceed the brute-force limit of {MAX_PAIRS}")
    if maxlen is None:
        maxlen = n
    if n == 0:
        raise ValueError("no pairs")
    if n == 1:
        return CinftyVerdict(True)
    if not 2 <= maxlen <= n:
        raise ValueError("maxlen must lie in [2, number of pairs]")
    X = np.array([p.x for p in pairs])
    Y = np.array([p.y for p in pairs])
    G = X @ Y.T  # G[i, j] = x_i . y_j
    diag = np.diag(G)
    for cyc in simple_cycles(n, maxlen):
        idx = np.array(cyc)
        nxt = np.roll(idx, -1)
        if diag[idx].min() < G[idx, nxt].min() - tol:
            return CinftyVerdict(False, cyc + (cyc[0],))
    return CinftyVerdict(True)


def coupling_to_multimap(pairs: Sequence[SupportPair], tol: float = DEFAULT_TOL) -> SampledMultiMap:
    """Points ``y_i`` carrying generators ``x_i``; equal ``y`` merge their cones."""
    if not pairs:
        raise ValueError("no pairs")
    return build_sample([p.y for p in pairs], [[p.x] for p in pairs], tol)


def pairs_from_json(obj: dict | str) -> list[SupportPair]:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        return [SupportPair(np.array(p["x"]), np.array(p["y"])) for p in obj["pairs"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed pairs JSON: {exc}") from exc
