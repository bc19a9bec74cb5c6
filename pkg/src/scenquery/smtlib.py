"""SMT-LIB2 (QF_NRA) emission of abstracted conditions.

The emitted text binds one Real per referenced agent coordinate/angle and per
free distribution parameter, asserts the parameter ranges, the condition
(distance comparisons in squared form), and the concrete sample values, then
closes with (check-sat)(get-model)(exit).  Output is meant for interchange
and differential testing against an external QF_NRA solver; the engine never
executes it.
"""
from __future__ import annotations

from .errors import UnsupportedConstruct
from .ihefsm import ConditionRef
from .predicates import ParamSpec, derive_param_spec
from .scenic.ast import (
    BinOp,
    BoolLit,
    DistanceFromTo,
    DistLit,
    Name,
    NumberLit,
    UnaryOp,
    walk_expr,
)
from .traces import KinematicSample

_CMP_OPS = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "=", "!=": "distinct"}


def format_real(value, is_int=False) -> str:
    if is_int:
        value = int(value)
    if isinstance(value, int):
        return f"(- {-value})" if value < 0 else str(value)
    if value < 0:
        return f"(- {format_real(-value)})"
    if round(value, 2) == value:
        return f"{value:.2f}"
    return repr(value)


def _coord_vars(agent: str):
    return (f"{agent}_position_x", f"{agent}_position_y", f"{agent}_angle")


class _Emitter:
    def __init__(self, cond: ConditionRef, bindings: dict, params: dict | None):
        self.cond = cond
        self.bindings = bindings
        self.agent_order = []
        self.param_names: dict = {}  # id(DistLit) -> smt name
        self.param_specs: dict = {}
        counters: dict = {}
        for sub in walk_expr(cond.expr):
            if isinstance(sub, Name) and sub.id in cond.referenced_agents:
                if sub.id not in self.agent_order:
                    self.agent_order.append(sub.id)
            if isinstance(sub, DistLit) and id(sub) not in self.param_names:
                prefix = {"range": "range", "discreterange": "drange",
                          "uniform": "uniform", "normal": "normal",
                          "truncatednormal": "tnormal", "discrete": "discrete"}[
                    sub.kind.lower()
                ]
                n = counters.get(prefix, 0)
                counters[prefix] = n + 1
                self.param_names[id(sub)] = f"{prefix}{n}"
                spec = (params or {}).get(sub) if params else None
                self.param_specs[id(sub)] = spec or derive_param_spec(sub)

    def emit(self) -> str:
        lines = ["(set-logic QF_NRA)"]
        for agent in self.agent_order:
            for var in _coord_vars(agent):
                lines.append(f"(declare-fun {var} () Real)")
        for sub in walk_expr(self.cond.expr):
            if isinstance(sub, DistLit):
                lines.append(f"(declare-fun {self.param_names[id(sub)]} () Real)")
        for sub in walk_expr(self.cond.expr):
            if isinstance(sub, DistLit):
                assertion = self._param_assertion(sub)
                if assertion:
                    lines.append(assertion)
        lines.append(f"(assert {self._bool(self.cond.expr)})")
        for agent in self.agent_order:
            sample = self.bindings.get(agent)
            if sample is None:
                raise UnsupportedConstruct(f"no sample bound for agent {agent!r}")
            if isinstance(sample, KinematicSample):
                values = (sample.x, sample.y, sample.yaw)
            else:
                values = tuple(sample)[:3]
            for var, value in zip(_coord_vars(agent), values):
                lines.append(f"(assert (= {var} {format_real(float(value))}))")
        lines.extend(["(check-sat)", "(get-model)", "(exit)"])
        return "\n".join(lines) + "\n"

    def _param_assertion(self, lit: DistLit) -> str | None:
        name = self.param_names[id(lit)]
        spec: ParamSpec = self.param_specs[id(lit)]
        if spec.support is not None and lit.kind == "Discrete":
            options = " ".join(f"(= {name} {self._num_of(v)})" for v in spec.support)
            return f"(assert (or {options}))"
        import math

        if math.isinf(spec.lo) or math.isinf(spec.hi):
            return None
        lo = self._lit_arg_text(lit, spec.lo)
        hi = self._lit_arg_text(lit, spec.hi)
        return f"(assert (and (<= {lo} {name}) (<= {name} {hi})))"

    def _lit_arg_text(self, lit: DistLit, value: float) -> str:
        for arg in lit.args:
            if isinstance(arg, NumberLit) and arg.value == value:
                return format_real(arg.value, is_int=arg.is_int)
        return self._num_of(value)

    @staticmethod
    def _num_of(value: float) -> str:
        if float(value).is_integer():
            return format_real(int(value))
        return format_real(float(value))

    def _num(self, expr) -> str:
        if isinstance(expr, NumberLit):
            return format_real(expr.value, is_int=expr.is_int)
        if isinstance(expr, DistLit):
            return self.param_names[id(expr)]
        if isinstance(expr, Name):
            if expr.id in self.cond.referenced_agents:
                raise UnsupportedConstruct(
                    f"agent {expr.id!r} used as a number in SMT emission"
                )
            return expr.id
        if isinstance(expr, UnaryOp) and expr.op == "-":
            return f"(- {self._num(expr.operand)})"
        if isinstance(expr, BinOp) and expr.op in ("+", "-", "*", "/"):
            return f"({expr.op} {self._num(expr.left)} {self._num(expr.right)})"
        raise UnsupportedConstruct(f"cannot emit numeric expression {expr!r}")

    def _squared_distance(self, expr: DistanceFromTo) -> str:
        a = expr.source.id if isinstance(expr.source, Name) else None
        b = expr.target.id if isinstance(expr.target, Name) else None
        if a is None or b is None:
            raise UnsupportedConstruct("distance endpoints must be agents")
        ax, ay, _ = _coord_vars(a)
        bx, by, _ = _coord_vars(b)
        return (
            f"(+ (* (- {ax} {bx}) (- {ax} {bx})) "
            f"(* (- {ay} {by}) (- {ay} {by})))"
        )

    def _bool(self, expr) -> str:
        if isinstance(expr, BoolLit):
            return "true" if expr.value else "false"
        if isinstance(expr, UnaryOp) and expr.op == "not":
            return f"(not {self._bool(expr.operand)})"
        if isinstance(expr, BinOp) and expr.op in ("and", "or"):
            return f"({expr.op} {self._bool(expr.left)} {self._bool(expr.right)})"
        if isinstance(expr, BinOp) and expr.op in _CMP_OPS:
            left, right = expr.left, expr.right
            op = _CMP_OPS[expr.op]
            if isinstance(left, DistanceFromTo) or isinstance(right, DistanceFromTo):
                if isinstance(left, DistanceFromTo):
                    lhs = self._squared_distance(left)
                    rhs_term = self._num(right)
                    rhs = f"(* {rhs_term} {rhs_term})"
                else:
                    lhs_term = self._num(left)
                    lhs = f"(* {lhs_term} {lhs_term})"
                    rhs = self._squared_distance(right)
                return f"({op} {lhs} {rhs})"
            return f"({op} {self._num(left)} {self._num(right)})"
        if isinstance(expr, Name):
            raise UnsupportedConstruct(
                f"free boolean {expr.id!r} has no SMT encoding; it is a machine input"
            )
        raise UnsupportedConstruct(f"cannot emit condition {expr!r}")


def emit_smtlib(cond: ConditionRef, bindings: dict, params: dict | None = None) -> str:
    """Emit the QF_NRA satisfiability query for `cond` at one timestep.

    `bindings` maps each referenced agent to a KinematicSample (or an
    (x, y, yaw) triple); `params` optionally overrides the derived
    ParamSpec per distribution literal.
    """
    if cond.expr is None:
        raise UnsupportedConstruct("nondeterministic terminator has no SMT encoding")
    return _Emitter(cond, bindings, params).emit()


def emit_correspondence_smtlib(domains: dict) -> str:
    """Integer encoding of the injective agent-to-track assignment problem.

    `domains` maps agent name -> ordered list of track ids.  Each agent gets
    an Int constrained to an index into a shared track table; distinctness
    enforces injectivity.
    """
    agents = sorted(domains)
    track_ids = sorted({tid for tracks in domains.values() for tid in tracks})
    track_index = {tid: i for i, tid in enumerate(track_ids)}
    lines = ["(set-logic QF_LIA)"]
    for i, tid in enumerate(track_ids):
        lines.append(f"; track {i} = {tid}")
    for agent in agents:
        lines.append(f"(declare-fun map_{agent} () Int)")
    for agent in agents:
        options = " ".join(
            f"(= map_{agent} {track_index[tid]})" for tid in domains[agent]
        )
        lines.append(f"(assert (or {options}))" if options else "(assert false)")
    if len(agents) > 1:
        names = " ".join(f"map_{a}" for a in agents)
        lines.append(f"(assert (distinct {names}))")
    lines.extend(["(check-sat)", "(get-model)", "(exit)"])
    return "\n".join(lines) + "\n"
