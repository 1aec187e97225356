import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasipot.multimap import (
    SampleError,
    build_sample,
    build_sample_indexed,
    cone_envelope,
    from_json,
    restrict,
    whole_space,
)

coords = st.integers(-3, 3)
point_lists = st.lists(st.tuples(coords, coords), min_size=1, max_size=8)
gen_lists = st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), max_size=3)


class TestBuildSample:
    def test_generators_are_normalized(self):
        s = build_sample([[0.0, 0.0]], [[[3.0, 4.0]]])
        np.testing.assert_allclose(s.cones[0], [[0.6, 0.8]])

    def test_zero_generator_is_dropped(self):
        s = build_sample([[1.0, 2.0]], [[[0.0, 0.0]]])
        assert s.is_trivial(0)

    def test_duplicates_merge_by_union(self):
        s = build_sample([[1.0, 1.0], [1.0, 1.0 + 1e-12]], [[[1.0, 0.0]], [[0.0, 1.0]]])
        assert s.n == 1
        assert len(s.cones[0]) == 2

    def test_points_sorted_lexicographically(self):
        s = build_sample([[1.0, 0.0], [0.0, 5.0], [0.0, -1.0]], [[], [], []])
        np.testing.assert_array_equal(s.points, [[0.0, -1.0], [0.0, 5.0], [1.0, 0.0]])

    def test_owner_maps_inputs(self):
        s, owner = build_sample_indexed([[2.0], [1.0], [2.0]], [[], [[1.0]], [[-1.0]]])
        assert owner.tolist() == [1, 0, 1]
        assert s.n == 2

    def test_dimension_mismatch(self):
        with pytest.raises(SampleError):
            build_sample([[0.0, 0.0]], [[[1.0, 0.0, 0.0]]])

    def test_non_finite_rejected(self):
        with pytest.raises(SampleError):
            build_sample([[np.nan, 0.0]], [[]])

    @given(point_lists, st.data())
    @settings(max_examples=60, deadline=None)
    def test_rebuild_is_idempotent(self, pts, data):
        cones = [data.draw(gen_lists) for _ in pts]
        s = build_sample(np.array(pts, dtype=float), cones)
        again = build_sample(s.points, list(s.cones))
        assert s.same_as(again)


class TestConventions:
    def test_whole_space_generators(self):
        np.testing.assert_array_equal(whole_space(2), [[1, 0], [0, 1], [-1, 0], [0, -1]])

    def test_cone_contains(self):
        s = build_sample([[0.0, 0.0]], [[[1.0, 0.0], [0.0, 1.0]]])
        assert s.cone_contains(0, [2.0, 3.0])
        assert not s.cone_contains(0, [-1.0, 0.5])

    def test_envelope_keeps_generators(self):
        s = build_sample([[0.0]], [[[1.0]]])
        env = cone_envelope(s)
        assert env.cone_interpreted and env.same_as(s)

    def test_restrict_zeroes_outside_mask(self):
        s = build_sample([[-1.0], [1.0]], [[[1.0]], [[1.0]]])
        r = restrict(s, lambda x: x[0] > 0)
        assert r.is_trivial(0) and not r.is_trivial(1)


class TestJson:
    def test_round_trip(self):
        s = build_sample([[0.0, 1.0], [2.0, 3.0]], [[[1.0, 1.0]], []])
        back = from_json(json.loads(s.dumps()))
        assert back.same_as(s)

    def test_point_dimension_checked(self):
        with pytest.raises(SampleError):
            from_json({"dimension": 2, "samples": [{"x": [1.0], "F": []}]})

    def test_missing_field(self):
        with pytest.raises(SampleError):
            from_json({"samples": []})
