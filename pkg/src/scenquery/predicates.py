"""Tri-valued evaluation of transition conditions against a trace.

Each compiled condition is evaluated per timestep under a fixed agent
correspondence, yielding one of TRUE/FALSE/UNKNOWN/ABSENT per step.  ABSENT
means a referenced agent has no complete kinematic sample at that timestep
and dominates everything else.

Free distribution parameters are handled by interval reasoning in negation
normal form.  Supported condition shapes (boolean combinations of
comparisons between distances/coordinates/constants and at most one
distribution literal per comparison) are decided exactly; the SMT-LIB
emitter exists for interchange and differential testing against an external
solver.  In the default existential mode a comparison involving parameters
becomes True iff some parameter value satisfies it, mirroring a per-timestep
satisfiability call; the opt-in three_valued mode keeps True only when every
parameter value satisfies it.  Undeclared identifiers, unrecognized calls
and region predicates without map data evaluate to UNKNOWN in both modes and
are left for the membership search to branch on.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .config import GeometryConfig
from .errors import MissingMap, UnboundAgent
from .ihefsm import ConditionRef, Ihefsm
from .scenic.ast import (
    Attr,
    BinOp,
    BoolLit,
    Call,
    CanSee,
    DictLit,
    DistanceFromTo,
    DistLit,
    InRegion,
    Name,
    NumberLit,
    StringLit,
    UnaryOp,
)
from .traces import KinematicSample, LabeledTrace, MapRegion

FALSE, TRUE, UNKNOWN, ABSENT = 0, 1, 2, 3

VALUE_NAMES = {FALSE: "False", TRUE: "True", UNKNOWN: "Unknown", ABSENT: "Absent"}

EXISTENTIAL = "existential"
THREE_VALUED = "three_valued"


class MissingMapWarning(UserWarning):
    pass


@dataclass
class PredicateStream:
    cond_id: str
    values: list  # length T of FALSE/TRUE/UNKNOWN/ABSENT

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ParamSpec:
    lo: float
    hi: float
    support: tuple | None = None  # finite support when known
    integral: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("parameter interval bounds out of order")


def derive_param_spec(lit: DistLit) -> ParamSpec:
    nums = [a.value for a in lit.args if isinstance(a, NumberLit)]
    if lit.kind in ("Range", "Uniform"):
        if len(nums) >= 2:
            return ParamSpec(min(nums), max(nums))
        if lit.kind == "Uniform" and nums and len(nums) == len(lit.args):
            return ParamSpec(min(nums), max(nums), support=tuple(sorted(nums)))
        return ParamSpec(-math.inf, math.inf)
    if lit.kind == "DiscreteRange":
        if len(nums) >= 2:
            lo, hi = min(nums), max(nums)
            support = tuple(float(v) for v in range(int(lo), int(hi) + 1))
            return ParamSpec(lo, hi, support=support, integral=True)
        return ParamSpec(-math.inf, math.inf, integral=True)
    if lit.kind == "TruncatedNormal":
        if len(nums) >= 4:
            return ParamSpec(nums[2], nums[3])
        return ParamSpec(-math.inf, math.inf)
    if lit.kind == "Normal":
        return ParamSpec(-math.inf, math.inf)
    if lit.kind == "Discrete":
        values = []
        for arg in lit.args:
            if isinstance(arg, DictLit):
                for key, _weight in arg.items:
                    if isinstance(key, NumberLit):
                        values.append(key.value)
        if values:
            return ParamSpec(min(values), max(values), support=tuple(sorted(values)))
        return ParamSpec(-math.inf, math.inf)
    raise ValueError(f"unknown distribution kind {lit.kind}")


# --------------------------------------------------------------------------
# Interval arithmetic (closed intervals; `tainted` marks values coming from
# undeclared identifiers rather than declared distributions)


@dataclass(frozen=True)
class _Iv:
    lo: float
    hi: float
    tainted: bool = False


def _iv_point(v):
    return _Iv(v, v)


_IV_FREE = _Iv(-math.inf, math.inf, tainted=True)


def _iv_add(a, b):
    return _Iv(a.lo + b.lo, a.hi + b.hi, a.tainted or b.tainted)


def _iv_sub(a, b):
    return _Iv(a.lo - b.hi, a.hi - b.lo, a.tainted or b.tainted)


def _safe_mul(x, y):
    if x == 0 or y == 0:
        return 0.0
    return x * y


def _iv_mul(a, b):
    products = [_safe_mul(a.lo, b.lo), _safe_mul(a.lo, b.hi),
                _safe_mul(a.hi, b.lo), _safe_mul(a.hi, b.hi)]
    return _Iv(min(products), max(products), a.tainted or b.tainted)


def _iv_div(a, b):
    if b.lo <= 0 <= b.hi:
        return _Iv(-math.inf, math.inf, a.tainted or b.tainted)
    inv = _Iv(1.0 / b.hi, 1.0 / b.lo, b.tainted)
    return _iv_mul(a, inv)


def _iv_neg(a):
    return _Iv(-a.hi, -a.lo, a.tainted)


# --------------------------------------------------------------------------
# Geometry


def eval_distance(a, b) -> float:
    """Euclidean 2D distance between two samples (or (x, y) pairs)."""
    ax, ay = (a.x, a.y) if isinstance(a, KinematicSample) else (a[0], a[1])
    bx, by = (b.x, b.y) if isinstance(b, KinematicSample) else (b[0], b[1])
    return math.hypot(ax - bx, ay - by)


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2 * math.pi)
    if wrapped <= 0:
        wrapped += 2 * math.pi
    return wrapped - math.pi


def point_in_polygon(point, polygon) -> bool:
    """Even-odd rule; points on the boundary count as inside."""
    x, y = point
    n = len(polygon)
    inside = False
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        # boundary check
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if (
            abs(cross) < 1e-9
            and min(x1, x2) - 1e-9 <= x <= max(x1, x2) + 1e-9
            and min(y1, y2) - 1e-9 <= y <= max(y1, y2) + 1e-9
        ):
            return True
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def eval_geometric(kind: str, args, cfg: GeometryConfig | None = None) -> bool:
    """Direct geometric predicate evaluation.

    kind "CanSee": args = (observer_sample, target_sample)
    kind "InRegion": args = (point_or_sample, MapRegion)
    kind "FacingRoadDirection": args = (sample, MapRegion)
    """
    cfg = cfg or GeometryConfig()
    if kind == "CanSee":
        observer, target = args
        if eval_distance(observer, target) > cfg.visible_distance:
            return False
        bearing = math.atan2(target.y - observer.y, target.x - observer.x)
        return abs(wrap_angle(bearing - observer.yaw)) <= cfg.view_angle / 2
    if kind == "InRegion":
        point, region = args
        if region is None:
            raise MissingMap("InRegion requires map regions")
        if isinstance(point, KinematicSample):
            point = (point.x, point.y)
        return point_in_polygon(point, region.polygon)
    if kind == "FacingRoadDirection":
        sample, region = args
        if region is None or region.heading is None:
            raise MissingMap("FacingRoadDirection requires a region heading")
        return abs(wrap_angle(sample.yaw - region.heading)) <= cfg.facing_tolerance
    raise ValueError(f"unknown geometric predicate {kind}")


# --------------------------------------------------------------------------
# Condition evaluation


class _Env:
    """Evaluation context for one (trace, correspondence, timestep)."""

    def __init__(self, trace: LabeledTrace, corr: dict, t: int,
                 geometry: GeometryConfig, mode: str, warn_sink=None):
        self.trace = trace
        self.corr = corr
        self.t = t
        self.geometry = geometry
        self.mode = mode
        self.warn_sink = warn_sink

    def sample(self, agent: str) -> KinematicSample | None:
        if agent not in self.corr:
            raise UnboundAgent(f"condition references unmapped agent {agent!r}")
        track = self.trace.track(self.corr[agent])
        return track.sample_at(self.t)

    def warn(self, message):
        if self.warn_sink is not None:
            if message not in self.warn_sink:
                self.warn_sink.append(message)
        else:
            warnings.warn(message, MissingMapWarning, stacklevel=4)

    def regions_named(self, name: str):
        exact = [r for r in self.trace.regions if r.name == name]
        if exact:
            return exact
        return [r for r in self.trace.regions if r.kind == name]

    def region_containing(self, point, kind: str):
        for region in self.trace.regions:
            if region.kind == kind and point_in_polygon(point, region.polygon):
                return region
        return None


_T = (True, True)
_F = (False, False)
_U = (False, True)


def _k_not(v):
    must, may = v
    return (not may, not must)


def _k_and(a, b):
    return (a[0] and b[0], a[1] and b[1])


def _k_or(a, b):
    return (a[0] or b[0], a[1] or b[1])


def _from_bool(b):
    return _T if b else _F


def _is_agent(env: _Env, name: str) -> bool:
    return name in env.corr


def _eval_num(expr, env: _Env) -> _Iv:
    if isinstance(expr, NumberLit):
        return _iv_point(expr.value)
    if isinstance(expr, DistLit):
        spec = derive_param_spec(expr)
        return _Iv(spec.lo, spec.hi)
    if isinstance(expr, Name):
        return _IV_FREE
    if isinstance(expr, UnaryOp) and expr.op == "-":
        return _iv_neg(_eval_num(expr.operand, env))
    if isinstance(expr, BinOp):
        left, right = _eval_num(expr.left, env), _eval_num(expr.right, env)
        if expr.op == "+":
            return _iv_add(left, right)
        if expr.op == "-":
            return _iv_sub(left, right)
        if expr.op == "*":
            return _iv_mul(left, right)
        if expr.op == "/":
            return _iv_div(left, right)
        return _IV_FREE
    if isinstance(expr, DistanceFromTo):
        a = _agent_name(expr.source)
        b = _agent_name(expr.target)
        if a is None or b is None:
            return _IV_FREE
        sa, sb = env.sample(a), env.sample(b)
        if sa is None or sb is None:
            return _IV_FREE
        return _iv_point(eval_distance(sa, sb))
    return _IV_FREE


def _agent_name(expr):
    if isinstance(expr, Name):
        return expr.id
    return None


def _cmp(op: str, left: _Iv, right: _Iv, mode: str):
    if left.tainted or right.tainted:
        return _U
    if op == ">":
        op, left, right = "<", right, left
    elif op == ">=":
        op, left, right = "<=", right, left
    if op == "<":
        may = left.lo < right.hi
        must = left.hi < right.lo
    elif op == "<=":
        may = left.lo <= right.hi
        must = left.hi <= right.lo
    elif op == "==":
        may = left.lo <= right.hi and right.lo <= left.hi
        must = left.lo == left.hi == right.lo == right.hi
    elif op == "!=":
        must_eq = left.lo == left.hi == right.lo == right.hi
        may_eq = left.lo <= right.hi and right.lo <= left.hi
        may, must = (not must_eq), (not may_eq)
    else:
        return _U
    if mode == EXISTENTIAL:
        return _from_bool(may)
    return (must, may)


_NEG_OP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def _eval_bool(expr, env: _Env, neg: bool):
    if isinstance(expr, BoolLit):
        return _from_bool(expr.value != neg)
    if isinstance(expr, UnaryOp) and expr.op == "not":
        return _eval_bool(expr.operand, env, not neg)
    if isinstance(expr, BinOp) and expr.op in ("and", "or"):
        op = expr.op
        if neg:
            op = "or" if op == "and" else "and"
        left = _eval_bool(expr.left, env, neg)
        right = _eval_bool(expr.right, env, neg)
        return _k_and(left, right) if op == "and" else _k_or(left, right)
    if isinstance(expr, BinOp) and expr.op in ("<", "<=", ">", ">=", "==", "!="):
        op = _NEG_OP[expr.op] if neg else expr.op
        return _cmp(op, _eval_num(expr.left, env), _eval_num(expr.right, env), env.mode)
    if isinstance(expr, InRegion):
        value = _eval_in_region(expr, env)
        want_neg = neg != expr.negated
        return _k_not(value) if want_neg else value
    if isinstance(expr, CanSee):
        value = _eval_can_see(expr, env)
        return _k_not(value) if neg else value
    if isinstance(expr, Call):
        value = _eval_call(expr, env)
        return _k_not(value) if neg else value
    if isinstance(expr, Name):
        # undeclared boolean input: free at every timestep
        return _U
    if isinstance(expr, (StringLit, NumberLit, DistLit)):
        return _U
    return _U


def _eval_can_see(expr: CanSee, env: _Env):
    a, b = _agent_name(expr.observer), _agent_name(expr.target)
    if a is None or b is None:
        return _U
    sa, sb = env.sample(a), env.sample(b)
    if sa is None or sb is None:
        return _U
    return _from_bool(eval_geometric("CanSee", (sa, sb), env.geometry))


def _resolve_region_expr(region_expr, env: _Env):
    """Resolve a region expression to a list of candidate regions."""
    if isinstance(region_expr, Name):
        return env.regions_named(region_expr.id)
    if isinstance(region_expr, Attr) and region_expr.attr == "lane":
        owner = _agent_name(region_expr.base)
        if owner is None:
            return None
        sample = env.sample(owner)
        if sample is None:
            return None
        region = env.region_containing((sample.x, sample.y), "lane")
        return [region] if region is not None else []
    return None


def _eval_in_region(expr: InRegion, env: _Env):
    item = _agent_name(expr.item)
    if item is None or not _is_agent(env, item):
        return _U
    sample = env.sample(item)
    if sample is None:
        return _U
    if not env.trace.regions:
        env.warn("region predicate evaluated without map regions; treating as unknown")
        return _U
    regions = _resolve_region_expr(expr.region, env)
    if regions is None:
        return _U
    if not regions:
        return _F
    hit = any(
        eval_geometric("InRegion", ((sample.x, sample.y), region), env.geometry)
        for region in regions
    )
    return _from_bool(hit)


def _eval_call(expr: Call, env: _Env):
    # network.intersectionAt(agent) -> agent inside any intersection region
    if (
        isinstance(expr.func, Attr)
        and expr.func.attr == "intersectionAt"
        and isinstance(expr.func.base, Name)
        and expr.func.base.id == "network"
        and len(expr.args) == 1
    ):
        agent = _agent_name(expr.args[0])
        if agent is None:
            return _U
        sample = env.sample(agent)
        if sample is None:
            return _U
        if not env.trace.regions:
            env.warn("region predicate evaluated without map regions; treating as unknown")
            return _U
        region = env.region_containing((sample.x, sample.y), "intersection")
        return _from_bool(region is not None)
    env.warn(f"unrecognized predicate call; treating as unknown")
    return _U


def eval_condition(cond: ConditionRef, trace: LabeledTrace, corr: dict, t: int,
                   mode: str = EXISTENTIAL,
                   geometry: GeometryConfig | None = None,
                   warn_sink=None) -> int:
    """Evaluate one condition at one timestep: TRUE/FALSE/UNKNOWN/ABSENT."""
    if t < 0 or t >= trace.T:
        raise IndexError(f"timestep {t} outside trace of length {trace.T}")
    if cond.nondet:
        return UNKNOWN
    for agent in cond.referenced_agents:
        if agent not in corr:
            raise UnboundAgent(f"condition {cond.id} references unmapped agent {agent!r}")
        if not trace.track(corr[agent]).has_sample(t):
            return ABSENT
    env = _Env(trace, corr, t, geometry or GeometryConfig(), mode, warn_sink)
    must, may = _eval_bool(cond.expr, env, neg=False)
    if must:
        return TRUE
    if not may:
        return FALSE
    return UNKNOWN


def precompute_streams(machine: Ihefsm, trace: LabeledTrace, corr: dict,
                       mode: str = EXISTENTIAL,
                       geometry: GeometryConfig | None = None,
                       warn_sink=None) -> dict:
    """One PredicateStream of length T per machine condition."""
    streams = {}
    for cond in machine.conditions:
        values = [
            eval_condition(cond, trace, corr, t, mode, geometry, warn_sink)
            for t in range(trace.T)
        ]
        streams[cond.id] = PredicateStream(cond_id=cond.id, values=values)
    return streams
