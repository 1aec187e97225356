"""Step dot products and offsets of the perturbed hedgehog circle arc across delta and M."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from quasipot.fixtures import PerturbationError, circle_arc_path, find_delta0, perturb_path


@dataclass(frozen=True)
class ArcConfig:
    A: float = 1.0
    L: float = 2.0
    T: float = 1.0
    deltas: tuple[float, ...] = (0.04, 0.02, 0.01, 0.005, 0.0025)
    Ms: tuple[float, ...] = (1.0, 5.0, 25.0)
    deep: tuple[tuple[float, float], ...] = ((1e-5, 2e4), (1e-6, 2e4))  # (delta, M), slow


def radial(z):
    return np.asarray(z, dtype=float) / np.linalg.norm(z)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deep", action="store_true", help="also run the small-delta, large-M cases")
    args = ap.parse_args()
    cfg = ArcConfig()
    cases = [(d, M) for M in cfg.Ms for d in cfg.deltas] + (list(cfg.deep) if args.deep else [])
    for delta, M in cases:
        try:
            out = perturb_path(radial, circle_arc_path(delta), delta, cfg.A, cfg.L, M, cfg.T)
        except PerturbationError as exc:
            print(f"M={M:7.1f} delta={delta:.1e} rejected: {exc}")
            continue
        print(
            f"M={M:7.1f} delta={delta:.1e} n={len(out.points) - 1:7d} "
            f"min dot/(A d^2) {out.dots.min() / (cfg.A * delta**2):9.3g} "
            f"max offset/(M d) {out.offsets.max() / (M * delta):9.3g}"
        )
    for M in cfg.Ms:
        try:
            d0 = find_delta0(radial, circle_arc_path, cfg.deltas[0], cfg.A, cfg.L, M, cfg.T)
            print(f"M={M:5.1f} admissible delta0 = {d0:.3g}")
        except PerturbationError:
            print(f"M={M:5.1f} no admissible delta0 found")


if __name__ == "__main__":
    main()
