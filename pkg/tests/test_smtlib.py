import random
import re

import pytest

from scenquery.errors import UnsupportedConstruct
from scenquery.ihefsm import ConditionRef, compile_program
from scenquery.predicates import EXISTENTIAL, TRUE, eval_condition
from scenquery.scenic.ast import BinOp, DistanceFromTo, DistLit, Name, NumberLit
from scenquery.scenic.parser import parse_program
from scenquery.smtlib import emit_correspondence_smtlib, emit_smtlib, format_real
from scenquery.traces import KinematicSample, LabeledTrace, ObjectTrack

SNIPPET_BINDINGS = {
    "self": (2271.70, 877.18, 2.95),
    "ped": (2274.82, 849.66, -0.70),
}


def snippet_condition():
    machines = compile_program(parse_program(
        "behavior EgoBehavior():\n"
        "  try:\n"
        "    do FollowLaneBehavior()\n"
        "  interrupt when (distance from self to ped) < Range(1,10):\n"
        "    do BrakeBehavior()\n\n"
        "ego = new Car with behavior EgoBehavior()\n"
        "ped = new Pedestrian\n"
    ))
    return machines["EgoBehavior"].condition("cond_interrupt_1_1")


class TestSnippet:
    def test_full_emission(self):
        text = emit_smtlib(snippet_condition(), SNIPPET_BINDINGS)
        lines = text.splitlines()
        assert lines[0] == "(set-logic QF_NRA)"
        assert "(declare-fun self_position_x () Real)" in lines
        assert "(declare-fun self_position_y () Real)" in lines
        assert "(declare-fun self_angle () Real)" in lines
        assert "(declare-fun ped_position_x () Real)" in lines
        assert "(declare-fun ped_position_y () Real)" in lines
        assert "(declare-fun ped_angle () Real)" in lines
        assert "(declare-fun range0 () Real)" in lines
        assert "(assert (and (<= 1 range0) (<= range0 10)))" in lines
        assert "(assert (= self_position_x 2271.70))" in lines
        assert "(assert (= self_position_y 877.18))" in lines
        assert "(assert (= self_angle 2.95))" in lines
        assert "(assert (= ped_position_x 2274.82))" in lines
        assert "(assert (= ped_position_y 849.66))" in lines
        assert "(assert (= ped_angle (- 0.70)))" in lines
        assert lines[-3:] == ["(check-sat)", "(get-model)", "(exit)"]

    def test_declaration_order(self):
        text = emit_smtlib(snippet_condition(), SNIPPET_BINDINGS)
        decl_order = [
            line.split()[1] for line in text.splitlines()
            if line.startswith("(declare-fun")
        ]
        assert decl_order == [
            "self_position_x", "self_position_y", "self_angle",
            "ped_position_x", "ped_position_y", "ped_angle", "range0",
        ]

    def test_squared_distance_form(self):
        text = emit_smtlib(snippet_condition(), SNIPPET_BINDINGS)
        assert "(* (- self_position_x ped_position_x) (- self_position_x ped_position_x))" in text
        assert "(* range0 range0)" in text

    def test_kinematic_sample_bindings(self):
        bindings = {
            "self": KinematicSample(2271.70, 877.18, (1, 0, 0, 0), 2.95),
            "ped": KinematicSample(2274.82, 849.66, (1, 0, 0, 0), -0.70),
        }
        text = emit_smtlib(snippet_condition(), bindings)
        assert "(assert (= self_position_x 2271.70))" in text


class TestShapes:
    def test_no_params_no_range_assertion(self):
        cond = ConditionRef(
            id="cond_until_0_0", kind="until",
            expr=BinOp("<", DistanceFromTo(Name("self"), Name("ped")), NumberLit(5.0)),
            referenced_agents=frozenset({"self", "ped"}), free_params=(),
        )
        text = emit_smtlib(cond, SNIPPET_BINDINGS)
        assert "range0" not in text
        assert "(<=" not in text

    def test_nondet_condition_rejected(self):
        cond = ConditionRef(id="cond_do_0_0", kind="do", expr=None,
                            referenced_agents=frozenset(), free_params=(), nondet=True)
        with pytest.raises(UnsupportedConstruct):
            emit_smtlib(cond, {})

    def test_missing_binding_rejected(self):
        with pytest.raises(UnsupportedConstruct):
            emit_smtlib(snippet_condition(), {"self": (0, 0, 0)})

    def test_format_real(self):
        assert format_real(1, is_int=True) == "1"
        assert format_real(-3, is_int=True) == "(- 3)"
        assert format_real(2271.70) == "2271.70"
        assert format_real(-0.70) == "(- 0.70)"
        assert format_real(27.696) == "27.696"


class TestCorrespondenceDump:
    def test_injective_encoding(self):
        text = emit_correspondence_smtlib(
            {"ego": ["ego_0"], "ped": ["p_1", "p_2"]}
        )
        assert "(set-logic QF_LIA)" in text
        assert "(declare-fun map_ego () Int)" in text
        assert "(assert (distinct map_ego map_ped))" in text


def _solver_available():
    try:
        import z3  # noqa: F401
        return True
    except ImportError:
        return False


@pytest.mark.skipif(not _solver_available(), reason="z3 not installed")
def test_solver_agrees_with_existential_eval():
    """External-solver differential: sat iff existential evaluation is True."""
    import z3

    rng = random.Random(3)
    agree = 0
    for i in range(100):
        lo = rng.randint(0, 10)
        hi = lo + rng.randint(1, 15)
        op = rng.choice(["<", "<=", ">", ">="])
        expr = BinOp(op, DistanceFromTo(Name("self"), Name("ped")),
                     DistLit("Range", (NumberLit(float(lo), True),
                                       NumberLit(float(hi), True))))
        cond = ConditionRef(id="c", kind="until", expr=expr,
                            referenced_agents=frozenset({"self", "ped"}),
                            free_params=(expr.right,))
        sx, sy = rng.uniform(-20, 20), rng.uniform(-20, 20)
        px, py = rng.uniform(-20, 20), rng.uniform(-20, 20)
        ego = ObjectTrack("ego_0", "vehicle.car", "", [sx], [sy],
                          [[1.0, 0.0, 0.0, 0.0]], [0.0], ["BRAKE"])
        ped = ObjectTrack("ped_0", "human.pedestrian.adult", "", [px], [py],
                          [[1.0, 0.0, 0.0, 0.0]], [0.0], ["WAIT"])
        trace = LabeledTrace("t", 0.5, 1, "ego_0", [ego, ped])
        expected = eval_condition(
            cond, trace, {"self": "ego_0", "ped": "ped_0"}, 0, EXISTENTIAL
        )
        text = emit_smtlib(cond, {"self": (sx, sy, 0.0), "ped": (px, py, 0.0)})
        solver = z3.Solver()
        solver.from_string(
            "\n".join(l for l in text.splitlines()
                      if not l.startswith(("(set-logic", "(check-sat", "(get-model",
                                           "(exit"))))
        sat = solver.check() == z3.sat
        assert sat == (expected == TRUE), text
        agree += 1
    assert agree == 100
