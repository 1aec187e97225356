"""Command-line front end.

Exit codes: 0 success or consistent, 2 input error, 3 violation,
4 pre-order not total.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import fixtures as fx
from .geometry import level_polyhedra, level_polyhedron
from .multimap import DEFAULT_TOL, SampleError, SampledMultiMap, from_json
from .oned import solve_1d
from .order import CqmViolationError, ascending_edges, check_cqm, large_preorder, strict_preorder
from .potential import NotTotalError, rank_potential
from .revealed import CsvFormatError, garp_check, ingest_csv, rationalize
from .svg import SvgCanvas, palette, regions_svg
from .transport import SizeLimitError, cinfty_check, coupling_to_multimap, pairs_from_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATION = 3
EXIT_NOT_TOTAL = 4

SUBCOMMANDS = ("check", "order", "levels", "potential", "oned", "rp", "linf", "fixtures", "render")


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    input: str | None = None
    output: str | None = None
    report: str | None = None
    tol: float = DEFAULT_TOL
    grid: int = 41
    view: tuple[float, float, float, float] = (-3.0, -3.0, 3.0, 3.0)
    seed: int | None = None
    maxlen: int | None = None
    fixture: str | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand}")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        needs_input = {"check", "order", "levels", "potential", "oned", "rp", "linf"}
        if self.subcommand in needs_input and not self.input:
            raise InputError(f"{self.subcommand} requires --input")
        x0, y0, x1, y1 = self.view
        if not (x1 > x0 and y1 > y0):
            raise InputError("--view must satisfy x0 < x1 and y0 < y1")


def _parse_view(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("view must be x0,y0,x1,y1") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("view must be x0,y0,x1,y1")
    return vals


def _load_sample(cfg: RunConfig) -> SampledMultiMap:
    try:
        with open(cfg.input) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{cfg.input}: invalid JSON ({exc})") from exc
    if isinstance(obj, dict) and "tol" not in obj:
        obj = dict(obj, tol=cfg.tol)
    elif isinstance(obj, dict) and cfg.tol != DEFAULT_TOL:
        obj = dict(obj, tol=cfg.tol)
    try:
        return from_json(obj)
    except SampleError as exc:
        raise InputError(str(exc)) from exc


class _Out:
    """Collects text destined for ``--output`` or stdout."""

    def __init__(self, path: str | None, stdout):
        self.path = path
        self.stdout = stdout

    def write(self, text: str) -> None:
        if self.path:
            with open(self.path, "w") as fh:
                fh.write(text)
        else:
            self.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _matrix(m: np.ndarray) -> list[list[int]]:
    return [[int(v) for v in row] for row in m]


def _cmd_check(cfg, out, stdout) -> int:
    verdict = check_cqm(ascending_edges(_load_sample(cfg)))
    out.write(_dump(verdict.to_json()))
    return EXIT_OK if verdict.is_cqm else EXIT_VIOLATION


def _cmd_order(cfg, out, stdout) -> int:
    sample = _load_sample(cfg)
    graph = ascending_edges(sample)
    verdict = check_cqm(graph)
    if not verdict.is_cqm:
        out.write(_dump(verdict.to_json()))
        return EXIT_VIOLATION
    pair = large_preorder(sample, strict_preorder(graph), graph)
    out.write(_dump({"verdict": "cqm", "strict": _matrix(pair.strict), "large": _matrix(pair.large)}))
    return EXIT_OK


def _cmd_levels(cfg, out, stdout) -> int:
    sample = _load_sample(cfg)
    graph = ascending_edges(sample)
    verdict = check_cqm(graph)
    if not verdict.is_cqm:
        out.write(_dump(verdict.to_json()))
        return EXIT_VIOLATION
    strict = strict_preorder(graph)
    regions = level_polyhedra(sample, strict)
    out.write(_dump({"levels": [{"x": sample.points[i].tolist(), "region": r.to_json()} for i, r in enumerate(regions)]}))
    return EXIT_OK


def _not_total(exc: NotTotalError) -> dict:
    return {"verdict": "not_total", "pair": [exc.i, exc.j], "points": [list(p) for p in exc.points or ()]}


def _cmd_potential(cfg, out, stdout) -> int:
    sample = _load_sample(cfg)
    graph = ascending_edges(sample)
    verdict = check_cqm(graph)
    if not verdict.is_cqm:
        out.write(_dump(verdict.to_json()))
        return EXIT_VIOLATION
    strict = strict_preorder(graph)
    pair = large_preorder(sample, strict, graph)
    try:
        table = rank_potential(sample, pair, level_polyhedra(sample, strict))
    except NotTotalError as exc:
        out.write(_dump(_not_total(exc)))
        return EXIT_NOT_TOTAL
    out.write(_dump(table.to_json()))
    if sample.dimension == 2 and cfg.output:
        svg_path = cfg.output.rsplit(".", 1)[0] + ".svg"
        with open(svg_path, "w") as fh:
            fh.write(regions_svg(table.regions, cfg.view))
    return EXIT_OK


def _cmd_oned(cfg, out, stdout) -> int:
    sample = _load_sample(cfg)
    try:
        report = solve_1d(sample)
    except CqmViolationError as exc:
        out.write(_dump(exc.verdict.to_json()))
        return EXIT_VIOLATION
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    stdout.write(report.describe() + "\n")
    if cfg.report:
        with open(cfg.report, "w") as fh:
            fh.write(_dump(report.to_json()))
    return EXIT_OK


def _cmd_rp(cfg, out, stdout) -> int:
    try:
        obs = ingest_csv(cfg.input)
    except (OSError, CsvFormatError) as exc:
        raise InputError(str(exc)) from exc
    if not obs:
        raise InputError("no observations")
    verdict = garp_check(obs, cfg.tol)
    if not verdict.consistent:
        report, code = verdict.to_json(), EXIT_VIOLATION
    else:
        try:
            report, code = rationalize(obs, cfg.tol).to_json(), EXIT_OK
        except NotTotalError as exc:
            report, code = _not_total(exc), EXIT_NOT_TOTAL
    text = _dump(report)
    if cfg.report:
        with open(cfg.report, "w") as fh:
            fh.write(text)
    out.write(text)
    return code


def _cmd_linf(cfg, out, stdout) -> int:
    try:
        with open(cfg.input) as fh:
            pairs = pairs_from_json(json.load(fh))
        verdict = cinfty_check(pairs, cfg.maxlen, cfg.tol)
    except (OSError, ValueError, SizeLimitError) as exc:
        raise InputError(str(exc)) from exc
    report = verdict.to_json()
    report["multimap_cqm"] = check_cqm(ascending_edges(coupling_to_multimap(pairs, cfg.tol))).is_cqm
    out.write(_dump(report))
    return EXIT_OK if verdict.passes else EXIT_VIOLATION


def _cmd_fixtures(cfg, out, stdout) -> int:
    if cfg.fixture is None:
        out.write("\n".join(fx.FIXTURE_NAMES) + "\n")
        return EXIT_OK
    try:
        sample = fx.fixture_sample(cfg.fixture, cfg.grid, tol=cfg.tol)
    except fx.UnknownFixtureError as exc:
        raise InputError(str(exc)) from exc
    out.write(_dump(sample.to_json()))
    return EXIT_OK


def _cmd_render(cfg, out, stdout) -> int:
    if cfg.fixture is None and cfg.input is None:
        raise InputError("render requires --fixture or --input")
    if cfg.fixture is not None:
        try:
            sample = fx.fixture_sample(cfg.fixture, cfg.grid, half_width=max(map(abs, cfg.view)), tol=cfg.tol)
        except fx.UnknownFixtureError as exc:
            raise InputError(str(exc)) from exc
    else:
        sample = _load_sample(cfg)
    if sample.dimension != 2:
        raise InputError("render needs a planar sample")
    graph = ascending_edges(sample)
    verdict = check_cqm(graph)
    canvas = SvgCanvas(cfg.view)
    if verdict.is_cqm:
        strict = strict_preorder(graph)
        # a few level regions through points on the positive x-axis
        x0, y0, x1, y1 = cfg.view
        targets = np.linspace(0.25, 0.85, 4) * x1
        picks = []
        for t in targets:
            k = int(np.argmin(np.linalg.norm(sample.points - [t, 0.0], axis=1)))
            if k not in picks:
                picks.append(k)
        for c, k in reversed(list(enumerate(picks))):
            canvas.region(level_polyhedron(sample, strict, k), palette(c))
    span = cfg.view[2] - cfg.view[0]
    inside = np.all((sample.points >= cfg.view[:2]) & (sample.points <= cfg.view[2:]), axis=1)
    step = max(1, int(np.sqrt(inside.sum()) // 21))
    for k in np.flatnonzero(inside)[::step]:
        gens = sample.cones[k]
        if len(gens) == 0:
            canvas.dot(sample.points[k], "#999999", 0.8)
        for g in gens:
            canvas.arrow(sample.points[k], g, span / 60)
    out.write(canvas.render())
    return EXIT_OK if verdict.is_cqm else EXIT_VIOLATION


_HANDLERS = {
    "check": _cmd_check,
    "order": _cmd_order,
    "levels": _cmd_levels,
    "potential": _cmd_potential,
    "oned": _cmd_oned,
    "rp": _cmd_rp,
    "linf": _cmd_linf,
    "fixtures": _cmd_fixtures,
    "render": _cmd_render,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    out = _Out(cfg.output, stdout)
    try:
        return _HANDLERS[cfg.subcommand](cfg, out, stdout)
    except InputError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasipot", description="Quasi-convex potentials for sampled fields.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "check": "decide cyclic quasi-monotonicity of a sample",
        "order": "strict and large pre-order matrices",
        "levels": "level polyhedron of every sample point",
        "potential": "rank potential table (and SVG in the plane)",
        "oned": "explicit potential for a 1-D sample",
        "rp": "GARP audit and rationalizing utilities for a CSV panel",
        "linf": "c-infinity cyclical monotonicity of a coupling support",
        "fixtures": "list fixture fields or write one as a sample",
        "render": "SVG of a planar field with level regions",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--input")
        p.add_argument("--output")
        p.add_argument("--report")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--grid", type=int, default=41)
        p.add_argument("--view", type=_parse_view, default=(-3.0, -3.0, 3.0, 3.0))
        p.add_argument("--seed", type=int)
        p.add_argument("--maxlen", type=int)
        p.add_argument("--fixture")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            subcommand=args.subcommand,
            input=args.input,
            output=args.output,
            report=args.report,
            tol=args.tol,
            grid=args.grid,
            view=args.view,
            seed=args.seed,
            maxlen=args.maxlen,
            fixture=args.fixture,
        )
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
