"""Fraction of incomparable point pairs in the large pre-order per fixture and grid."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from quasipot.fixtures import FIXTURE_NAMES, fixture_sample
from quasipot.order import check_totality, equivalence_classes, preorders


@dataclass(frozen=True)
class SurveyConfig:
    grids: tuple[int, ...] = (3, 5, 11, 21, 41)
    half_width: float = 3.0


def survey(name: str, n: int, cfg: SurveyConfig, d: int = 2) -> str:
    s = fixture_sample(name, n, cfg.half_width, d=d)
    pair = preorders(s)
    comparable = pair.large | pair.large.T
    verdict = check_totality(pair)
    classes = len(equivalence_classes(pair.large))
    witness = ""
    if not verdict.is_total:
        i, j = verdict.pair
        witness = f" e.g. {s.points[i].tolist()} vs {s.points[j].tolist()}"
    return (
        f"{name:14s} d={d} n={n:3d} {'Total' if verdict.is_total else 'NotTotal':8s} "
        f"incomparable {(~comparable).mean():.3f} classes {classes}{witness}"
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grids", nargs="*", type=int)
    args = ap.parse_args()
    cfg = SurveyConfig()
    for name in FIXTURE_NAMES:
        for n in args.grids or cfg.grids:
            print(survey(name, n, cfg))
    for n in args.grids or cfg.grids:
        print(survey("hedgehog", n, cfg, d=1))


if __name__ == "__main__":
    main()
