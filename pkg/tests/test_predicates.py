import math
import random

import pytest
from hypothesis import given, strategies as st

from scenquery.config import GeometryConfig
from scenquery.demo import DEMO_PROGRAM, MATCHING_PED, SNIPPET_TIMESTEP, build_demo_scene
from scenquery.errors import MissingMap, UnboundAgent
from scenquery.ihefsm import ConditionRef, compile_program
from scenquery.predicates import (
    ABSENT,
    EXISTENTIAL,
    FALSE,
    THREE_VALUED,
    TRUE,
    UNKNOWN,
    eval_condition,
    eval_distance,
    eval_geometric,
    point_in_polygon,
    precompute_streams,
    wrap_angle,
)
from scenquery.scenic.ast import BinOp, DistanceFromTo, DistLit, Name, NumberLit
from scenquery.scenic.parser import parse_program
from scenquery.traces import KinematicSample, MapRegion, trace_from_dict


def sample(x, y, yaw=0.0):
    return KinematicSample(x=x, y=y, pose=(1.0, 0.0, 0.0, 0.0), yaw=yaw)


def distance_cond(bound_expr, op="<"):
    expr = BinOp(op, DistanceFromTo(Name("self"), Name("ped")), bound_expr)
    params = (bound_expr,) if isinstance(bound_expr, DistLit) else ()
    return ConditionRef(id="cond_interrupt_1_1", kind="interrupt", expr=expr,
                        referenced_agents=frozenset({"self", "ped"}),
                        free_params=params)


def range_lit(lo, hi):
    return DistLit("Range", (NumberLit(float(lo), True), NumberLit(float(hi), True)))


@pytest.fixture(scope="module")
def demo_trace():
    return trace_from_dict(build_demo_scene())


@pytest.fixture(scope="module")
def demo_machine():
    return compile_program(parse_program(DEMO_PROGRAM))["EgoBehavior"]


CORR = {"self": "ego_0", "ego": "ego_0", "ped": MATCHING_PED}


class TestDistance:
    def test_snippet_values(self):
        a = sample(2271.70, 877.18)
        b = sample(2274.82, 849.66)
        assert eval_distance(a, b) == pytest.approx(27.696, abs=1e-3)

    def test_identical_points(self):
        assert eval_distance(sample(1.5, -2.0), sample(1.5, -2.0)) == 0.0

    def test_pythagorean_triple(self):
        assert eval_distance(sample(0, 0), sample(3, 4)) == 5.0

    @given(
        st.tuples(*[st.floats(-1e3, 1e3) for _ in range(6)])
    )
    def test_symmetry_and_triangle_inequality(self, coords):
        ax, ay, bx, by, cx, cy = coords
        a, b, c = sample(ax, ay), sample(bx, by), sample(cx, cy)
        assert eval_distance(a, b) == pytest.approx(eval_distance(b, a), abs=1e-9)
        assert eval_distance(a, c) <= eval_distance(a, b) + eval_distance(b, c) + 1e-9


class TestEvalCondition:
    def test_snippet_step_false_in_both_modes(self, demo_trace):
        cond = distance_cond(range_lit(1, 10))
        for mode in (EXISTENTIAL, THREE_VALUED):
            assert eval_condition(cond, demo_trace, CORR, SNIPPET_TIMESTEP, mode) == FALSE

    def test_widened_range_splits_modes(self, demo_trace):
        # distance 27.696 sits inside [1, 30]: satisfiable but not forced
        cond = distance_cond(range_lit(1, 30))
        assert eval_condition(cond, demo_trace, CORR, SNIPPET_TIMESTEP, EXISTENTIAL) == TRUE
        assert eval_condition(cond, demo_trace, CORR, SNIPPET_TIMESTEP, THREE_VALUED) == UNKNOWN

    def test_absent_when_pedestrian_gone(self, demo_trace):
        cond = distance_cond(range_lit(1, 10))
        assert eval_condition(cond, demo_trace, CORR, 20) == ABSENT

    def test_absent_overrides_at_incomplete_row(self, demo_trace):
        cond = distance_cond(range_lit(1, 10))
        assert eval_condition(cond, demo_trace, CORR, 12) == ABSENT

    def test_unbound_agent(self, demo_trace):
        cond = distance_cond(range_lit(1, 10))
        with pytest.raises(UnboundAgent):
            eval_condition(cond, demo_trace, {"self": "ego_0"}, 0)

    def test_timestep_bounds(self, demo_trace):
        cond = distance_cond(range_lit(1, 10))
        with pytest.raises(IndexError):
            eval_condition(cond, demo_trace, CORR, 40)

    def test_nondet_condition_is_unknown(self, demo_trace):
        cond = ConditionRef(id="cond_do_0_0", kind="do", expr=None,
                            referenced_agents=frozenset(), free_params=(),
                            nondet=True)
        assert eval_condition(cond, demo_trace, CORR, 0) == UNKNOWN


class TestStreams:
    def test_demo_interrupt_stream(self, demo_trace, demo_machine):
        streams = precompute_streams(demo_machine, demo_trace, CORR)
        values = streams["cond_interrupt_1_1"].values
        assert values == [TRUE] * 10 + [FALSE] * 2 + [ABSENT] * 28

    def test_nondet_streams_all_unknown(self, demo_trace, demo_machine):
        streams = precompute_streams(demo_machine, demo_trace, CORR)
        assert set(streams["cond_do_2_0"].values) == {UNKNOWN}
        assert set(streams["cond_do_2_1"].values) == {UNKNOWN}

    def test_true_literal_stream(self, demo_trace):
        program = parse_program(
            "behavior B():\n  do FollowLaneBehavior() until True\n\n"
            "ego = new Car with behavior B()\n"
        )
        machine = compile_program(program)["B"]
        streams = precompute_streams(machine, demo_trace, {"self": "ego_0", "ego": "ego_0"})
        assert set(streams["cond_until_0_0"].values) == {TRUE}

    def test_absent_iff_referenced_agent_missing(self, demo_trace, demo_machine):
        streams = precompute_streams(demo_machine, demo_trace, CORR)
        ped = demo_trace.track(MATCHING_PED)
        for t, value in enumerate(streams["cond_interrupt_1_1"].values):
            expected_absent = not (ped.has_sample(t) and demo_trace.ego.has_sample(t))
            assert (value == ABSENT) == expected_absent

    def test_mode_refinement_on_random_conditions(self, demo_trace):
        rng = random.Random(5)
        for _ in range(200):
            lo = rng.randint(0, 15)
            hi = lo + rng.randint(1, 20)
            op = rng.choice(["<", "<=", ">", ">="])
            cond = distance_cond(range_lit(lo, hi), op=op)
            t = rng.randrange(12)
            ex = eval_condition(cond, demo_trace, CORR, t, EXISTENTIAL)
            tv = eval_condition(cond, demo_trace, CORR, t, THREE_VALUED)
            if tv == TRUE:
                assert ex == TRUE
            if tv == FALSE:
                assert ex == FALSE
            if tv == UNKNOWN:
                assert ex in (TRUE, FALSE)

    def test_modes_agree_without_parameters(self, demo_trace):
        cond = distance_cond(NumberLit(10.0))
        for t in range(12):
            assert (
                eval_condition(cond, demo_trace, CORR, t, EXISTENTIAL)
                == eval_condition(cond, demo_trace, CORR, t, THREE_VALUED)
            )


class TestGeometry:
    def test_can_see_dead_ahead(self):
        assert eval_geometric("CanSee", (sample(0, 0, 0.0), sample(10, 0)))

    def test_can_see_bearing_outside_view_angle(self):
        # bearing 90 degrees with a 90-degree cone (+-45) is out of view
        assert not eval_geometric("CanSee", (sample(0, 0, 0.0), sample(0, 10)))

    def test_can_see_beyond_visible_distance(self):
        cfg = GeometryConfig(visible_distance=5.0)
        assert not eval_geometric("CanSee", (sample(0, 0, 0.0), sample(10, 0)), cfg)

    def test_in_region_centroid(self):
        region = MapRegion("r", "road", ((0, 0), (4, 0), (4, 4), (0, 4)))
        assert eval_geometric("InRegion", ((2.0, 2.0), region))

    def test_in_region_boundary_counts_inside(self):
        region = MapRegion("r", "road", ((0, 0), (4, 0), (4, 4), (0, 4)))
        assert eval_geometric("InRegion", ((4.0, 2.0), region))
        assert eval_geometric("InRegion", ((0.0, 0.0), region))

    def test_in_region_outside(self):
        region = MapRegion("r", "road", ((0, 0), (4, 0), (4, 4), (0, 4)))
        assert not eval_geometric("InRegion", ((5.0, 2.0), region))

    def test_point_in_nonconvex_polygon(self):
        poly = ((0, 0), (6, 0), (6, 6), (3, 3), (0, 6))
        assert point_in_polygon((1, 1), poly)
        assert not point_in_polygon((3, 5), poly)

    def test_facing_road_direction(self):
        region = MapRegion("r", "road", ((0, 0), (4, 0), (4, 4), (0, 4)), heading=0.5)
        cfg = GeometryConfig(facing_tolerance=math.pi / 6)
        assert eval_geometric("FacingRoadDirection", (sample(1, 1, 0.6), region), cfg)
        assert not eval_geometric("FacingRoadDirection", (sample(1, 1, 2.0), region), cfg)

    def test_facing_requires_heading(self):
        region = MapRegion("r", "road", ((0, 0), (4, 0), (4, 4), (0, 4)))
        with pytest.raises(MissingMap):
            eval_geometric("FacingRoadDirection", (sample(1, 1, 0.0), region))

    def test_region_predicate_without_map_is_unknown_with_warning(self, demo_trace):
        program = parse_program(
            "behavior B():\n  do FollowLaneBehavior() until ped in intersection\n\n"
            "ego = new Car with behavior B()\nped = new Pedestrian\n"
        )
        machine = compile_program(program)["B"]
        sink = []
        streams = precompute_streams(machine, demo_trace, CORR, warn_sink=sink)
        assert streams["cond_until_0_0"].values[0] == UNKNOWN
        assert sink and "without map regions" in sink[0]

    def test_region_predicate_with_map(self):
        data = build_demo_scene()
        data["regions"] = [
            {"name": "crossing", "kind": "intersection",
             "polygon": [[2270, 845], [2280, 845], [2280, 855], [2270, 855]]}
        ]
        trace = trace_from_dict(data)
        program = parse_program(
            "behavior B():\n  do FollowLaneBehavior() until ped in intersection\n\n"
            "ego = new Car with behavior B()\nped = new Pedestrian\n"
        )
        machine = compile_program(program)["B"]
        streams = precompute_streams(machine, trace, CORR)
        # pedestrian at (2275, 849.65) sits inside the square for t < 12
        assert streams["cond_until_0_0"].values[0] == TRUE

    def test_wrap_angle(self):
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)

    def test_unknown_call_is_unknown(self, demo_trace):
        program = parse_program(
            "behavior B():\n"
            "  do FollowLaneBehavior() until withinDistanceToObjsInLane(self, 5)\n\n"
            "ego = new Car with behavior B()\n"
        )
        machine = compile_program(program)["B"]
        sink = []
        streams = precompute_streams(machine, demo_trace, {"self": "ego_0", "ego": "ego_0"},
                                     warn_sink=sink)
        assert streams["cond_until_0_0"].values[5] == UNKNOWN
