import io
import json
from pathlib import Path

import pytest

from quasipot.cli import EXIT_INPUT, EXIT_NOT_TOTAL, EXIT_OK, EXIT_VIOLATION, InputError, RunConfig, main, run

DATA = Path(__file__).resolve().parents[1] / "data"


def _run(**kw):
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig(**kw), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _sample_json(points, cones):
    return {"dimension": len(points[0]), "samples": [{"x": x, "F": F} for x, F in zip(points, cones)]}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


class TestExamples:
    def test_check_hedgehog_grid(self):
        code, out, _ = _run(subcommand="check", input=str(DATA / "hedgehog_grid.json"))
        assert code == EXIT_OK and json.loads(out)["verdict"] == "cqm"

    def test_rp_violation(self):
        code, out, _ = _run(subcommand="rp", input=str(DATA / "violating.csv"))
        assert code == EXIT_VIOLATION
        assert len(json.loads(out)["cycle"]) == 3

    def test_oned_sign_field(self, tmp_path):
        rep = tmp_path / "r.json"
        code, out, _ = _run(subcommand="oned", input=str(DATA / "sign_field.json"), report=str(rep))
        assert code == EXIT_OK and out == "f(x) = |x - 0.0|^1\n"
        assert json.loads(rep.read_text())["case"] == "CompactInterval"


class TestExitCodes:
    def test_missing_input_flag(self):
        with pytest.raises(InputError):
            RunConfig(subcommand="check")

    def test_nonpositive_tol(self):
        with pytest.raises(InputError):
            RunConfig(subcommand="fixtures", tol=0.0)

    def test_missing_file(self, tmp_path):
        code, _, err = _run(subcommand="check", input=str(tmp_path / "none.json"))
        assert code == EXIT_INPUT and err.startswith("error:")

    def test_malformed_json(self, tmp_path):
        code, _, _ = _run(subcommand="check", input=_write(tmp_path, "bad.json", "{"))
        assert code == EXIT_INPUT

    def test_cycle_exit(self, tmp_path):
        sample = _sample_json([[0], [1]], [[[1]], [[-1]]])
        code, out, _ = _run(subcommand="check", input=_write(tmp_path, "s.json", sample))
        assert code == EXIT_VIOLATION and json.loads(out)["cycle"]

    def test_not_total_exit(self, tmp_path):
        pts = [[x] for x in (-1.0, -0.5, 0.0, 0.5, 1.0)]
        cones = [[[-1]], [[-1]], [[1], [-1]], [[1]], [[1]]]
        path = _write(tmp_path, "h.json", _sample_json(pts, cones))
        code, out, _ = _run(subcommand="potential", input=path)
        assert code == EXIT_NOT_TOTAL and json.loads(out)["verdict"] == "not_total"

    def test_linf(self, tmp_path):
        good = {"pairs": [{"x": [1, 0], "y": [1, 0]}, {"x": [0, 1], "y": [0, 1]}]}
        bad = {"pairs": [{"x": [1, 0], "y": [0, 1]}, {"x": [0, 1], "y": [1, 0]}]}
        assert _run(subcommand="linf", input=_write(tmp_path, "g.json", good))[0] == EXIT_OK
        assert _run(subcommand="linf", input=_write(tmp_path, "b.json", bad))[0] == EXIT_VIOLATION

    def test_unknown_fixture(self):
        assert _run(subcommand="fixtures", fixture="nope")[0] == EXIT_INPUT

    def test_main_parses_view(self, capsys):
        assert main(["fixtures"]) == EXIT_OK
        assert "hedgehog" in capsys.readouterr().out
        assert main(["render", "--fixture", "hedgehog", "--view", "1,0,0,1"]) == EXIT_INPUT


class TestOutputs:
    def test_order_matrices(self):
        code, out, _ = _run(subcommand="order", input=str(DATA / "hedgehog_grid.json"))
        obj = json.loads(out)
        assert code == EXIT_OK and len(obj["strict"]) == len(obj["large"]) == 121

    def test_levels_reruns_byte_identical(self):
        a = _run(subcommand="levels", input=str(DATA / "hedgehog_grid.json"))[1]
        b = _run(subcommand="levels", input=str(DATA / "hedgehog_grid.json"))[1]
        assert a == b and len(json.loads(a)["levels"]) == 121

    def test_potential_writes_svg(self, tmp_path):
        sample = _run(subcommand="fixtures", fixture="hedgehog", grid=3)[1]
        path = _write(tmp_path, "s.json", sample)
        out = tmp_path / "pot.json"
        code, _, _ = _run(subcommand="potential", input=path, output=str(out))
        assert code == EXIT_OK
        assert json.loads(out.read_text())["classes"]
        assert (tmp_path / "pot.svg").read_text().startswith("<svg")

    def test_render_dashes_clipped_edges(self):
        code, svg, _ = _run(subcommand="render", fixture="half_const", grid=21)
        assert code == EXIT_OK
        assert "stroke-dasharray" in svg and "<polygon" in svg
        assert svg == _run(subcommand="render", fixture="half_const", grid=21)[1]
