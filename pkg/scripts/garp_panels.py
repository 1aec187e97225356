"""GARP audit and rationalization over synthetic lattice-maximizer panels."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from oracles import consistent_panel  # noqa: E402

from quasipot.potential import NotTotalError  # noqa: E402
from quasipot.revealed import Observation, garp_check, rationalize  # noqa: E402


@dataclass(frozen=True)
class PanelConfig:
    panels: int = 100
    max_obs: int = 8
    seed: int = 10


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--panels", type=int, default=PanelConfig.panels)
    ap.add_argument("--seed", type=int, default=PanelConfig.seed)
    args = ap.parse_args()
    cfg = PanelConfig(panels=args.panels, seed=args.seed)
    rng = np.random.default_rng(cfg.seed)
    counts = {"consistent": 0, "violation": 0, "rationalized": 0, "not_total": 0, "misordered": 0}
    for k in range(cfg.panels):
        bundles, prices, _ = consistent_panel(rng, int(rng.integers(1, cfg.max_obs + 1)))
        obs = [Observation(b, p) for b, p in zip(bundles, prices)]
        if not garp_check(obs).consistent:
            counts["violation"] += 1
            continue
        counts["consistent"] += 1
        try:
            r = rationalize(obs)
        except NotTotalError as exc:
            counts["not_total"] += 1
            print(f"panel {k}: not total between observations {exc.i} and {exc.j}")
            continue
        counts["rationalized"] += 1
        n = len(obs)
        counts["misordered"] += any(r.strict[i, j] and r.utility[i] <= r.utility[j] for i in range(n) for j in range(n))
    print(counts)


if __name__ == "__main__":
    main()
