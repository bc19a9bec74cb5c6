import copy
import random

import pytest

from scenquery.config import Budgets, EngineConfig
from scenquery.demo import DEMO_PROGRAM, MATCHING_PED, build_demo_scene
from scenquery.engine import MatchQuery, membership
from scenquery.ihefsm import compile_program
from scenquery.predicates import precompute_streams
from scenquery.scenic.parser import parse_program
from scenquery.search import (
    build_domains,
    dependency_groups,
    match_dataset,
    match_trace,
)
from scenquery.traces import Dataset, trace_from_dict

from gen import QueryGen
from reference import count_correspondences, reference_match_trace


@pytest.fixture(scope="module")
def demo_trace():
    return trace_from_dict(build_demo_scene())


@pytest.fixture(scope="module")
def demo_program():
    return parse_program(DEMO_PROGRAM)


class TestDomains:
    def test_demo_scene_domains(self, demo_program, demo_trace):
        domains = build_domains(demo_program, demo_trace, 10)
        assert domains["ego"] == ["ego_0"]
        assert len(domains["ped"]) == 15
        # descending longest-run ordering: the long-lived distant pedestrian
        # is tried before the triggering one
        assert domains["ped"][0] == "human.pedestrian.adult_0"
        assert domains["ped"][1] == MATCHING_PED

    def test_pigeonhole_infeasible(self, demo_trace):
        program = parse_program(
            "behavior B():\n  do FollowLaneBehavior()\n\n"
            "ego = new Car with behavior B()\ncar2 = new Car\n"
        )
        # only one car track exists; two car agents cannot both bind
        assert build_domains(program, demo_trace, 1) is not None  # domains exist...
        report = match_trace(program, demo_trace, 1)
        assert not report.matched  # ...but injectivity cannot be satisfied

    def test_empty_domain_infeasible(self, demo_trace):
        program = parse_program(
            "ego = new Car\nbike = new Bicycle\n"
        )
        assert build_domains(program, demo_trace, 1) is None

    def test_alphabet_subset_excludes(self, demo_program, demo_trace):
        data = build_demo_scene()
        # give one candidate pedestrian a vehicle-only action label
        track = next(t for t in data["tracks"] if t["id"].endswith("adult_3"))
        track["actions"][4] = "LANE_CHANGE"
        trace = trace_from_dict(data)
        domains = build_domains(demo_program, trace, 10)
        assert "human.pedestrian.adult_3" not in domains["ped"]
        assert len(domains["ped"]) == 14

    def test_run_length_filter(self, demo_program, demo_trace):
        domains = build_domains(demo_program, demo_trace, 14)
        assert domains is not None
        assert MATCHING_PED not in domains["ped"]


class TestDependencyGroups:
    def test_demo_single_group(self, demo_program):
        groups = dependency_groups(demo_program)
        assert groups == [("ego", "ped")]

    def test_independent_behaviors_split(self):
        program = parse_program(
            "behavior A():\n  do FollowLaneBehavior()\n\n"
            "behavior B():\n  do WaitBehavior()\n\n"
            "ego = new Car with behavior A()\n"
            "walker = new Pedestrian with behavior B()\n"
        )
        groups = dependency_groups(program)
        assert groups == [("ego",), ("walker",)]

    def test_transitive_chain(self):
        program = parse_program(
            "behavior A():\n  do FollowLaneBehavior() until distance from self to b < 5\n\n"
            "behavior B():\n  do WaitBehavior() until distance from self to c < 5\n\n"
            "ego = new Car with behavior A()\n"
            "b = new Pedestrian with behavior B()\n"
            "c = new Pedestrian\n"
        )
        groups = dependency_groups(program)
        assert groups == [("ego", "b", "c")]

    def test_unreferenced_agent_is_singleton(self):
        program = parse_program(
            "behavior A():\n  do FollowLaneBehavior()\n\n"
            "ego = new Car with behavior A()\nbystander = new Pedestrian\n"
        )
        groups = dependency_groups(program)
        assert ("bystander",) in groups

    def test_require_merges_groups(self):
        program = parse_program(
            "behavior A():\n  do FollowLaneBehavior()\n\n"
            "ego = new Car with behavior A()\nped = new Pedestrian\n"
            "require distance from ego to ped > 1\n"
        )
        groups = dependency_groups(program)
        assert groups == [("ego", "ped")]


class TestMatchTrace:
    def test_demo_end_to_end(self, demo_program, demo_trace):
        report = match_trace(demo_program, demo_trace, 10)
        assert report.matched
        assert report.correspondence == {"ego": "ego_0", "ped": MATCHING_PED}
        assert report.windows == [{"agents_group": ["ego", "ped"], "j": 2, "k": 12}]
        assert report.stats["candidates_tried"] == 2  # one nogood, then the match
        assert "ego" in report.witness

    def test_matched_report_revalidates(self, demo_program, demo_trace):
        config = EngineConfig()
        report = match_trace(demo_program, demo_trace, 10, config)
        machines = compile_program(demo_program, config.behavior_map)
        machine = machines["EgoBehavior"]
        corr = dict(report.correspondence)
        corr["self"] = corr["ego"]
        streams = precompute_streams(machine, demo_trace, corr)
        window = report.windows[0]
        q = MatchQuery(machine=machine, streams=streams,
                       observed=list(demo_trace.ego.actions), m=10)
        result = membership(q)
        assert result.matched
        assert result.window == (window["j"], window["k"])

    def test_no_match_at_large_m(self, demo_program, demo_trace):
        report = match_trace(demo_program, demo_trace, 11)
        assert not report.matched

    def test_second_candidate_after_nogood(self, demo_trace):
        """Two interchangeable pedestrians; only the second satisfies the
        interrupt timing."""
        report = match_trace(parse_program(DEMO_PROGRAM), demo_trace, 10)
        assert report.correspondence["ped"] == MATCHING_PED
        assert report.stats["candidates_tried"] == 2

    def test_timeout_reported_distinctly(self, demo_program, demo_trace):
        config = EngineConfig(budgets=Budgets(timeout_s=0.0))
        report = match_trace(demo_program, demo_trace, 10, config)
        assert not report.matched
        assert report.error and "budget_exceeded" in report.error

    def test_static_require_false_blocks(self, demo_trace):
        program = parse_program(DEMO_PROGRAM + "require 1 > 2\n")
        report = match_trace(program, demo_trace, 10)
        assert not report.matched

    def test_dynamic_require_gates_windows(self, demo_trace):
        # distance(ego, ped) > 5 fails during the approach; the matched
        # window disappears
        program = parse_program(
            DEMO_PROGRAM + "require distance from ego to ped > 5\n"
        )
        report = match_trace(program, demo_trace, 10)
        assert not report.matched

    def test_terminate_when_caps_windows(self, demo_trace):
        program = parse_program(
            DEMO_PROGRAM + "terminate when distance from ego to ped > 20\n"
        )
        # scenario ends at t=10 (distance jumps to 27.7); only 8 usable steps
        report = match_trace(program, demo_trace, 10)
        assert not report.matched
        report8 = match_trace(program, demo_trace, 8)
        assert report8.matched
        assert report8.windows[0]["k"] <= 10

    def test_terminate_after_caps_window_length(self, demo_trace):
        program = parse_program(DEMO_PROGRAM + "terminate after 3 seconds\n")
        # 3 s at dt=0.5 caps windows at 6 steps
        report = match_trace(program, demo_trace, 10)
        assert not report.matched
        assert match_trace(program, demo_trace, 6, None).matched


class TestMatchDataset:
    def test_demo_dataset_single_match(self, demo_program, demo_trace):
        ds = Dataset(traces=[demo_trace])
        reports = match_dataset(demo_program, ds, 10)
        assert len(reports) == 1 and reports[0].matched

    def test_reports_stable_and_repeatable(self, demo_program, demo_trace):
        ds = Dataset(traces=[demo_trace])
        a = [r.to_json() for r in match_dataset(demo_program, ds, 10)]
        b = [r.to_json() for r in match_dataset(demo_program, ds, 10)]
        for report in a + b:
            report["stats"].pop("wall_ms")
        assert a == b

    def test_missing_tracks_is_a_clean_no_match(self, demo_program, demo_trace):
        empty = copy.deepcopy(demo_trace)
        empty.id = "empty-trace"
        empty.tracks = []
        ds = Dataset(traces=[demo_trace, empty])
        reports = match_dataset(demo_program, ds, 10)
        assert [r.trace_id for r in reports] == ["empty-trace", "scene-0103"]
        assert not reports[0].matched and reports[0].error is None
        assert reports[1].matched

    def test_error_isolated_per_trace(self, demo_program, demo_trace):
        bad = copy.deepcopy(demo_trace)
        bad.id = "bad-trace"
        ds = Dataset(traces=[demo_trace, bad])
        bad.tracks = None  # corrupt in-memory trace; match_trace raises
        reports = match_dataset(demo_program, ds, 10)
        assert [r.trace_id for r in reports] == ["bad-trace", "scene-0103"]
        assert reports[0].error and not reports[0].matched
        assert reports[1].matched

    def test_alien_action_dataset_has_zero_matches(self, demo_program):
        """Every track labeled with an action outside its type alphabet is
        filtered out, so the dataset yields no matches."""
        data = build_demo_scene()
        for track in data["tracks"]:
            track["actions"] = [
                None if a in (None, "(init)", "(end)") else "TURN_LEFT"
                for a in track["actions"]
            ]
        trace = trace_from_dict(data)
        reports = match_dataset(demo_program, Dataset(traces=[trace]), 10)
        assert not any(r.matched for r in reports)

    def test_parallel_jobs_equal_serial(self, demo_program, demo_trace):
        other = copy.deepcopy(demo_trace)
        other.id = "scene-0104"
        ds = Dataset(traces=[demo_trace, other])
        serial = [(r.trace_id, r.matched) for r in match_dataset(demo_program, ds, 10)]
        parallel = [(r.trace_id, r.matched)
                    for r in match_dataset(demo_program, ds, 10, jobs=2)]
        assert serial == parallel


class TestCompletenessVsReference:
    def test_small_random_instances(self):
        from scenquery.errors import BudgetExceeded

        rng = random.Random(2024)
        gen = QueryGen(rng, max_t=8, max_bits=10)
        config = EngineConfig()
        checked = 0
        while checked < 60:
            program, trace, m = gen.instance()
            if count_correspondences(program, trace, m, config) > 6:
                continue
            try:
                expected = reference_match_trace(program, trace, m, config)
            except BudgetExceeded:
                continue
            report = match_trace(program, trace, m, config)
            assert report.error is None
            assert report.matched == expected
            checked += 1
