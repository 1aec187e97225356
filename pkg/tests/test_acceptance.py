"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.  Tolerances, corpus sizes and grids
are fixed constants below; nothing is tuned to make a criterion pass.
"""

from __future__ import annotations

import itertools
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.spatial import ConvexHull

sys.path.insert(0, str(Path(__file__).resolve().parent))

from acceptance_log import LINES  # noqa: E402
from oracles import (  # noqa: E402
    consistent_panel,
    has_simple_cycle,
    random_bounded_polygon,
    random_instance,
    raw_edges,
)

from quasipot.fixtures import (  # noqa: E402
    FIXTURE_NAMES,
    PerturbationError,
    circle_arc_path,
    find_delta0,
    fixture_sample,
    level_sdist_many,
    perturb_path,
    square_grid,
)
from quasipot.geometry import HPolyhedron, clip_polygon, contains_many, level_polyhedra, level_polyhedron  # noqa: E402
from quasipot.multimap import build_sample  # noqa: E402
from quasipot.oned import sign_test, solve_1d, two_point_reduction_check, verify_potential  # noqa: E402
from quasipot.order import ascending_edges, check_cqm, check_totality, preorders, strict_preorder  # noqa: E402
from quasipot.potential import (  # noqa: E402
    FIXTURE_POTENTIALS,
    NotSublevelClosed,
    NotTotalError,
    PiecewiseFn1D,
    PlanarRegion,
    check_sublevels_closed,
    gaussian_level_value,
    normal_cone_map_of,
    sublevels_agree,
    sublsc_envelope_1d,
    verify_inclusion,
)
from quasipot.revealed import Observation, garp_check, ingest_csv_text, rationalize  # noqa: E402
from quasipot.transport import SupportPair, cinfty_check, coupling_to_multimap  # noqa: E402

# ---- pinned constants ---------------------------------------------------------

C1_CASES, C1_SEED, C1_BUDGET_S = 1000, 20240101, 30.0
C3_FIXTURES = ("hedgehog", "plateau_jump", "single_circle", "half_hedgehog", "half_const")
C3_GRID, C3_REFINED, C3_HALF_WIDTH, C3_MARGIN, C3_BUDGET_S = 41, 81, 3.0, 0.15, 60.0
C3_PROBES = square_grid(33, 2.0) + 0.0123  # off-lattice probes in [-2, 2]^2
C3_WINDOW = 2.0  # base points with |x|_inf <= 2 keep probes away from the sampled border
C4_GRID, C4_SLACK = 41, 1e-7
C5_GRID = 41
C6_CASES, C6_SEED = 500, 6
C7_TOL, C7_PAIRS, C7_RADIUS, C7_SEED = 1e-3, 100, 0.05, 7
C8_CASES, C8_SEED = 200, 8
C9_DELTA, C9_A, C9_L, C9_T = 0.01, 1.0, 2.0, 1.0
C9_M = 1.0 / (2.0 * C9_L * C9_DELTA)  # largest M allowed by M L delta <= 1/2
C10_PANELS, C10_MAX_OBS, C10_SEED = 100, 8, 10
C11_GRIDS = (3, 5, 21, 41)
C12_DRAWS, C12_MAX_POINTS, C12_SEED = 200, 4, 12


def record(num: int, title: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {num:2d}  {title}: {detail}"
    LINES[num] = line
    print(line)
    return ok


def _raw_to_sample(inst):
    return build_sample(np.array(inst.points, dtype=float), [list(g) for g in inst.gens])


def _corpus():
    rng = np.random.default_rng(C1_SEED)
    return [random_instance(rng) for _ in range(C1_CASES)]


# ---- criteria -------------------------------------------------------------------


def criterion_1():
    corpus = _corpus()
    t0 = time.perf_counter()
    disagree = 0
    for inst in corpus:
        got = check_cqm(ascending_edges(_raw_to_sample(inst))).is_cqm
        want = not has_simple_cycle(raw_edges(inst))
        disagree += got != want
    elapsed = time.perf_counter() - t0
    ok = disagree == 0 and elapsed < C1_BUDGET_S
    return record(1, "CQM vs brute force", ok, f"{disagree} disagreements on {C1_CASES} samples in {elapsed:.1f}s (budget {C1_BUDGET_S:.0f}s)")


def criterion_2():
    checked = violations = 0
    for inst in _corpus():
        s = _raw_to_sample(inst)
        if not check_cqm(ascending_edges(s)).is_cqm:
            continue
        checked += 1
        pair = preorders(s)
        S, L = pair.strict, pair.large
        Si, Li = S.astype(int), L.astype(int)
        bad = (
            bool(np.any(np.diag(S)))
            or bool(np.any((Si @ Si > 0) & ~S))
            or not bool(np.all(np.diag(L)))
            or bool(np.any((Li @ Li > 0) & ~L))
            or bool(np.any(S & ~L))
            or bool(np.any((Si @ Li > 0) & ~S))
        )
        violations += bad
    return record(2, "pre-order axioms", violations == 0, f"{violations} violating instances among {checked} CQM samples")


def _c3_fixture(name: str) -> tuple[int, int, int, int, float]:
    t0 = time.perf_counter()
    s = fixture_sample(name, C3_GRID, C3_HALF_WIDTH)
    strict = strict_preorder(ascending_edges(s))
    missed = inside = 0
    for i in np.flatnonzero(np.all(np.abs(s.points) <= C3_WINDOW, axis=1)):
        ins = level_sdist_many(name, s.points[i], C3_PROBES) <= -C3_MARGIN
        inside += int(ins.sum())
        missed += int((~contains_many(level_polyhedron(s, strict, i), C3_PROBES[ins])).sum())
    s2 = fixture_sample(name, C3_REFINED, C3_HALF_WIDTH)
    strict2 = strict_preorder(ascending_edges(s2))
    leaked = outside = 0
    for i in np.flatnonzero(np.all(np.abs(s2.points) <= C3_WINDOW, axis=1)):
        out = level_sdist_many(name, s2.points[i], C3_PROBES) >= C3_MARGIN
        outside += int(out.sum())
        leaked += int(contains_many(level_polyhedron(s2, strict2, i), C3_PROBES[out]).sum())
    return missed, inside, leaked, outside, time.perf_counter() - t0


def criterion_3():
    parts, ok = [], True
    for name in C3_FIXTURES:
        missed, inside, leaked, outside, secs = _c3_fixture(name)
        ok &= missed == 0 and leaked == 0 and secs < C3_BUDGET_S
        parts.append(f"{name} inside-missed {missed}/{inside} outside-leaked {leaked}/{outside} {secs:.0f}s")
    return record(3, "fixture level sets", ok, "; ".join(parts))


def criterion_4():
    failures = checked = 0
    worst = -math.inf
    for name in FIXTURE_NAMES:
        s = fixture_sample(name, C4_GRID)
        rep = verify_inclusion(s, level_polyhedra(s, strict_preorder(ascending_edges(s))))
        failures += sum(f.slack > C4_SLACK for f in rep.failures)
        checked += rep.checked
        worst = max(worst, rep.max_slack)
    for inst in _corpus():
        s = _raw_to_sample(inst)
        graph = ascending_edges(s)
        if not check_cqm(graph).is_cqm:
            continue
        rep = verify_inclusion(s, level_polyhedra(s, strict_preorder(graph)))
        failures += sum(f.slack > C4_SLACK for f in rep.failures)
        checked += rep.checked
        worst = max(worst, rep.max_slack)
    return record(4, "normal-cone inclusion", failures == 0, f"{failures} failures over {checked} generators, max slack {worst:.1e}")


def criterion_5():
    expected = {
        "hedgehog d=2": (fixture_sample("hedgehog", C5_GRID), True),
        "hedgehog d=3": (fixture_sample("hedgehog", 9, d=3), True),
        "half_hedgehog": (fixture_sample("half_hedgehog", C5_GRID), True),
        "half_const": (fixture_sample("half_const", C5_GRID), True),
        "three_quarters": (fixture_sample("three_quarters", C5_GRID), True),
        "plateau_jump": (fixture_sample("plateau_jump", C5_GRID), True),
        "single_circle": (fixture_sample("single_circle", C5_GRID), False),
        "hedgehog d=1": (fixture_sample("hedgehog", C5_GRID, d=1), False),
    }
    parts, ok = [], True
    for label, (s, want) in expected.items():
        got = check_totality(preorders(s)).is_total
        ok &= got == want
        parts.append(f"{label} {'Total' if got else 'NotTotal'}{'' if got == want else ' (expected ' + ('Total' if want else 'NotTotal') + ')'}")
    return record(5, "totality verdicts", ok, "; ".join(parts))


def _random_1d_cqm(rng):
    cones = {"0": [], "+": [[1.0]], "-": [[-1.0]], "+-": [[1.0], [-1.0]]}
    while True:
        n = int(rng.integers(1, 10))
        xs = rng.choice(np.arange(-20, 21), size=n, replace=False).astype(float)
        signs = rng.choice(list(cones), size=n)
        s = build_sample(xs[:, None], [cones[k] for k in signs])
        if check_cqm(ascending_edges(s)).is_cqm:
            return s


def criterion_6():
    rng = np.random.default_rng(C6_SEED)
    fails = 0
    for _ in range(C6_CASES):
        s = _random_1d_cqm(rng)
        r = solve_1d(s)
        fails += bool(sign_test(r, s)) or not verify_potential(r, s).passed or not two_point_reduction_check(s)
    return record(6, "1-D solver", fails == 0, f"{fails} failures on {C6_CASES} samples")


def _disk(r, center=(0.0, 0.0), k=2048):
    t = 2 * np.pi * np.arange(k) / k
    A = np.column_stack([np.cos(t), np.sin(t)])
    return HPolyhedron.from_arrays(A, r + A @ np.asarray(center, dtype=float))


def _nested_pair(rng):
    """A polygon ``Q`` and ``P = conv(Q ∪ D)`` for a disk ``D`` disjoint from ``Q``."""
    A, b = random_bounded_polygon(rng)
    shift = rng.uniform(-1.0, 1.0, 2)
    Q = HPolyhedron.from_arrays(A, b + A @ shift)
    verts = clip_polygon(Q, (-10.0, -10.0, 10.0, 10.0))
    r = float(rng.uniform(C7_RADIUS, 0.5))
    u = rng.normal(size=2)
    u /= np.linalg.norm(u)
    reach = float(np.max(verts @ u))
    center = u * (reach + r + float(rng.uniform(0.01, 0.5)))
    t = 2 * np.pi * np.arange(256) / 256
    rim = center + (r / np.cos(np.pi / 256)) * np.column_stack([np.cos(t), np.sin(t)])
    hull = ConvexHull(np.vstack([verts, rim]))
    P = HPolyhedron.from_arrays(hull.equations[:, :2], -hull.equations[:, 2])
    return Q, P


def criterion_7():
    disk = gaussian_level_value(PlanarRegion(_disk(1.0)), 2)
    disk_ok = abs(disk - (2.0 + (1.0 - math.exp(-0.5)))) <= C7_TOL
    half = gaussian_level_value(PlanarRegion(HPolyhedron.from_arrays([[1.0, 0.0]], [0.0])), 2)
    half_ok = abs(half - 2.5) <= C7_TOL
    rng = np.random.default_rng(C7_SEED)
    mono_fail = 0
    for _ in range(C7_PAIRS):
        Q, P = _nested_pair(rng)
        mono_fail += not gaussian_level_value(PlanarRegion(P), 2) > gaussian_level_value(PlanarRegion(Q), 2)
    ok = disk_ok and half_ok and mono_fail == 0
    detail = f"disk {disk:.6f} (err {abs(disk - 3 + math.exp(-0.5)):.1e}), half-plane {half:.6f}, monotonicity failures {mono_fail}/{C7_PAIRS}"
    return record(7, "Gaussian level value", ok, detail)


def _random_piecewise(rng):
    k = int(rng.integers(1, 5))
    bps = sorted(rng.choice(np.arange(-6, 7), size=k, replace=False).tolist())
    pieces = []
    for _ in range(k + 1):
        slope = Fraction(int(rng.integers(-2, 3)), int(rng.integers(1, 3))) if rng.random() < 0.5 else Fraction(0)
        pieces.append((slope, Fraction(int(rng.integers(-3, 4)))))
    g0 = PiecewiseFn1D.make(bps, pieces, [0] * k)
    vals = []
    for j in range(k):
        lo, hi = sorted((g0.left_limit(j), g0.right_limit(j)))
        vals.append([lo, hi, lo - 1, hi + 1][int(rng.integers(0, 4))])
    return PiecewiseFn1D.make(bps, pieces, vals)


def criterion_8():
    rng = np.random.default_rng(C8_SEED)
    fails = accepted = drawn = 0
    while accepted < C8_CASES:
        drawn += 1
        g = _random_piecewise(rng)
        try:
            check_sublevels_closed(g)
        except NotSublevelClosed:
            continue
        accepted += 1
        h = sublsc_envelope_1d(g)
        probes = sorted(set(g.probe_points()) | set(h.probe_points()))
        fails += not (sublevels_agree(g, h, probes) and h.is_lsc())
    return record(8, "sublevel-stable envelope", fails == 0, f"{fails} failures on {accepted} closed-sublevel functions ({drawn} drawn)")


def _unit_radial(z):
    return np.asarray(z, dtype=float) / np.linalg.norm(z)


def criterion_9():
    path = circle_arc_path(C9_DELTA)
    out = perturb_path(_unit_radial, path, C9_DELTA, C9_A, C9_L, C9_M, C9_T)
    need = C9_A * C9_DELTA**2
    dot_ok = bool(np.all(out.dots >= need * (1 - 1e-12)))
    off_ok = bool(np.all(out.offsets <= C9_M * C9_DELTA * (1 + 1e-12)))
    try:
        d0 = f"{find_delta0(_unit_radial, circle_arc_path, C9_DELTA, C9_A, C9_L, C9_M, C9_T):.2e}"
    except PerturbationError:
        d0 = "none found"
    detail = (
        f"n={len(path) - 1} steps, min dot {out.dots.min():.3e} vs {need:.0e}, "
        f"max offset {out.offsets.max():.3e} vs M delta {C9_M * C9_DELTA:.2f} (M={C9_M:g}), admissible delta0 {d0}"
    )
    return record(9, "perturbed arc", dot_ok and off_ok, detail)


def criterion_10():
    v = garp_check(ingest_csv_text("x1,x2,p1,p2\n2,0,2,1\n0,2,1,2\n"))
    example_ok = not v.consistent and sorted(v.cycle[:2]) == [1, 2] and len(v.cycle) == 3
    rng = np.random.default_rng(C10_SEED)
    garp_fail = order_fail = not_total = 0
    for _ in range(C10_PANELS):
        bundles, prices, _ = consistent_panel(rng, int(rng.integers(1, C10_MAX_OBS + 1)))
        obs = [Observation(b, p) for b, p in zip(bundles, prices)]
        if not garp_check(obs).consistent:
            garp_fail += 1
            continue
        try:
            r = rationalize(obs)
        except NotTotalError:
            not_total += 1
            continue
        n = len(obs)
        # strict(i, j) is an ascending path i -> j of x -> -p: observation i is
        # revealed preferred to j, so i carries the higher utility
        order_fail += any(r.strict[i, j] and not r.utility[i] > r.utility[j] for i in range(n) for j in range(n))
    ok = example_ok and garp_fail == order_fail == not_total == 0
    detail = (
        f"example cycle {v.cycle}; {garp_fail} GARP failures, {not_total} not-total, "
        f"{order_fail} ordering failures on {C10_PANELS} panels"
    )
    return record(10, "GARP", ok, detail)


def criterion_11():
    fails, parts = 0, 0
    for name in sorted(FIXTURE_POTENTIALS):
        for n in C11_GRIDS:
            parts += 1
            fails += not check_cqm(ascending_edges(normal_cone_map_of(name, square_grid(n, 3.0)))).is_cqm
    return record(11, "normal-cone round trip", fails == 0, f"{fails} failures over {parts} potential/grid pairs")


def criterion_12():
    rng = np.random.default_rng(C12_SEED)
    grid = np.array([(a, b) for a in range(-3, 4) for b in range(-3, 4)], dtype=float)
    checked = passes = bad = 0
    for _ in range(C12_DRAWS):
        n = int(rng.integers(1, C12_MAX_POINTS + 1))
        X = grid[rng.choice(len(grid), n, replace=False)]
        Y = grid[rng.choice(len(grid), n, replace=False)]
        for perm in itertools.permutations(range(n)):
            pairs = [SupportPair(X[i], Y[perm[i]]) for i in range(n)]
            checked += 1
            if cinfty_check(pairs).passes:
                passes += 1
                bad += not check_cqm(ascending_edges(coupling_to_multimap(pairs))).is_cqm
    return record(12, "L-infinity reduction", bad == 0, f"{bad} counterexamples; {passes} passing of {checked} couplings")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{k + 1:02d}" for k in range(len(CRITERIA))])
def test_criterion(criterion):
    assert criterion(), LINES.get(CRITERIA.index(criterion) + 1)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    raise SystemExit(0 if all(results) else 1)
