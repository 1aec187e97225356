"""Revealed-preference audits through the multi-map ``x_i -> -p_i``.

A panel of (bundle, price) observations satisfies GARP exactly when this
map has no ascending cycle.  Consistent panels are rationalized by
``u = -rank`` of the sampled rank potential, so ``u_i > u_j`` whenever
``x_j`` is revealed worse than ``x_i``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np
from numpy.typing import NDArray

from .geometry import level_polyhedra
from .multimap import DEFAULT_TOL, SampledMultiMap, build_sample_indexed
from .order import CqmVerdict, ascending_edges, check_cqm, large_preorder, strict_preorder
from .potential import rank_potential

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Observation:
    bundle: NDArray[np.float64]
    price: NDArray[np.float64]

    def __post_init__(self):
        b = np.asarray(self.bundle, dtype=float)
        p = np.asarray(self.price, dtype=float)
        if b.shape != p.shape or b.ndim != 1:
            raise ValueError("bundle and price must be vectors of equal length")
        if not np.any(p != 0):
            raise ValueError("price vector is zero")
        object.__setattr__(self, "bundle", b)
        object.__setattr__(self, "price", p)


class CsvFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _parse_header(row: list[str]) -> int:
    cols = [c.strip() for c in row]
    if len(cols) % 2 or not cols:
        raise CsvFormatError(1, "header must be x1..xd,p1..pd")
    d = len(cols) // 2
    expected = [f"x{k}" for k in range(1, d + 1)] + [f"p{k}" for k in range(1, d + 1)]
    if cols != expected:
        raise CsvFormatError(1, f"header must be {','.join(expected)}")
    return d


def read_observations(stream: TextIO) -> list[Observation]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError(1, "missing header") from None
    d = _parse_header(header)
    out = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2 * d:
            raise CsvFormatError(line, f"expected {2 * d} values, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise CsvFormatError(line, "non-numeric cell") from None
        if not np.all(np.isfinite(vals)):
            raise CsvFormatError(line, "non-finite cell")
        try:
            out.append(Observation(np.array(vals[:d]), np.array(vals[d:])))
        except ValueError as exc:
            raise CsvFormatError(line, str(exc)) from None
    if not out:
        log.warning("no observations in data section")
    return out


def ingest_csv(source: str | TextIO) -> list[Observation]:
    """Parse a ``x1..xd,p1..pd`` CSV file (path or open stream)."""
    if isinstance(source, str):
        with open(source, newline="") as fh:
            return read_observations(fh)
    return read_observations(source)


def ingest_csv_text(text: str) -> list[Observation]:
    return read_observations(io.StringIO(text))


def to_multimap(obs: Sequence[Observation], tol: float = DEFAULT_TOL) -> tuple[SampledMultiMap, NDArray[np.intp]]:
    """Sample ``x_i -> {-p_i}`` and the sample index of every observation."""
    if not obs:
        raise ValueError("no observations")
    pts = np.array([o.bundle for o in obs])
    cones = [[-o.price] for o in obs]
    return build_sample_indexed(pts, cones, tol)


@dataclass(frozen=True)
class GarpVerdict:
    consistent: bool
    cycle: tuple[int, ...] = ()

    def to_json(self) -> dict:
        if self.consistent:
            return {"verdict": "consistent"}
        return {"verdict": "violation", "cycle": list(self.cycle)}


def _observation_cycle(verdict: CqmVerdict, sample: SampledMultiMap, owner: NDArray[np.intp], obs) -> tuple[int, ...]:
    """Translate a sample cycle with generator witnesses to 1-based observation labels."""
    labels = []
    for node, g in zip(verdict.cycle[:-1], verdict.witnesses):
        gen = sample.cones[node][g]
        members = np.flatnonzero(owner == node)
        pick = members[0]
        for m in members:
            p = -obs[m].price
            if np.allclose(p / np.linalg.norm(p), gen, atol=1e-9):
                pick = m
                break
        labels.append(int(pick) + 1)
    labels.append(labels[0])
    return tuple(labels)


def garp_check(obs: Sequence[Observation], tol: float = DEFAULT_TOL) -> GarpVerdict:
    """GARP as absence of ascending cycles for ``x_i -> -p_i``.

    Cycles are reported with 1-based observation labels, first label repeated.
    """
    sample, owner = to_multimap(obs, tol)
    verdict = check_cqm(ascending_edges(sample))
    if verdict.is_cqm:
        return GarpVerdict(True)
    return GarpVerdict(False, _observation_cycle(verdict, sample, owner, obs))


@dataclass(frozen=True, eq=False)
class Rationalization:
    utility: NDArray[np.int64]
    strict: NDArray[np.bool_]

    def to_json(self) -> dict:
        return {"verdict": "consistent", "utility": [int(u) for u in self.utility]}


def rationalize(obs: Sequence[Observation], tol: float = DEFAULT_TOL) -> Rationalization:
    """Utility levels ``u_i = -rank`` per observation.

    ``strict`` is indexed by observation.  Raises ``CqmViolationError`` on
    GARP violations and ``NotTotalError`` when ranks cannot be formed.
    """
    sample, owner = to_multimap(obs, tol)
    graph = ascending_edges(sample)
    strict = strict_preorder(graph)
    pair = large_preorder(sample, strict, graph)
    table = rank_potential(sample, pair, level_polyhedra(sample, strict))
    util = -table.rank_of_index[owner]
    return Rationalization(util, strict[np.ix_(owner, owner)])


def garp_report(obs: Sequence[Observation], tol: float = DEFAULT_TOL) -> dict:
    verdict = garp_check(obs, tol)
    if not verdict.consistent:
        return verdict.to_json()
    return rationalize(obs, tol).to_json()


def dumps_report(report: dict) -> str:
    return json.dumps(report)
