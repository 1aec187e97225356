"""Compare sampled level polyhedra with the exact fixture level sets.

For each fixture, every grid point in the window is a base point.  Probes
that the exact set contains by at least ``margin`` count as missed when the
polyhedron excludes them, and probes outside by ``margin`` count as leaked
when it includes them.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from quasipot.fixtures import fixture_sample, level_sdist_many, square_grid
from quasipot.geometry import contains_many, level_polyhedron
from quasipot.order import ascending_edges, strict_preorder


@dataclass(frozen=True)
class CoverageConfig:
    fixtures: tuple[str, ...] = ("hedgehog", "plateau_jump", "single_circle", "half_hedgehog", "half_const")
    grids: tuple[int, ...] = (21, 41, 81)
    half_width: float = 3.0
    window: float = 2.0
    margin: float = 0.15
    probe_side: int = 33
    probe_offset: float = 0.0123


def coverage(name: str, n: int, cfg: CoverageConfig) -> dict:
    probes = square_grid(cfg.probe_side, cfg.window) + cfg.probe_offset
    t0 = time.perf_counter()
    s = fixture_sample(name, n, cfg.half_width)
    strict = strict_preorder(ascending_edges(s))
    missed = inside = leaked = outside = 0
    worst = None
    for i in np.flatnonzero(np.all(np.abs(s.points) <= cfg.window, axis=1)):
        sd = level_sdist_many(name, s.points[i], probes)
        H = level_polyhedron(s, strict, i)
        ins, out = sd <= -cfg.margin, sd >= cfg.margin
        hit_in = contains_many(H, probes[ins])
        inside += int(ins.sum())
        missed += int((~hit_in).sum())
        outside += int(out.sum())
        leaked += int(contains_many(H, probes[out]).sum())
        if worst is None and (~hit_in).any():
            worst = (s.points[i].tolist(), probes[ins][~hit_in][0].round(4).tolist())
    return {
        "fixture": name, "grid": n, "missed": missed, "inside": inside,
        "leaked": leaked, "outside": outside, "seconds": time.perf_counter() - t0, "example": worst,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixtures", nargs="*")
    ap.add_argument("--grids", nargs="*", type=int)
    args = ap.parse_args()
    cfg = CoverageConfig()
    for name in args.fixtures or cfg.fixtures:
        for n in args.grids or cfg.grids:
            r = coverage(name, n, cfg)
            print(
                f"{r['fixture']:14s} n={r['grid']:3d} missed {r['missed']:7d}/{r['inside']:7d} "
                f"leaked {r['leaked']:5d}/{r['outside']:7d} {r['seconds']:6.1f}s first miss {r['example']}"
            )


if __name__ == "__main__":
    main()
