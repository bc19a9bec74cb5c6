"""Correspondence enumeration: injective agent-to-track assignment with
feasibility filtering, nogood blocking, and per-dependency-group membership.

The backtracking search replaces an external integer-solver formulation with
identical semantics: assignments are injective and class-compatible, every
target track carries a long-enough run whose observed actions stay inside
the agent type's action alphabet, and each failed dependency-group check
records its partial assignment as a nogood blocking every extension of it.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

from .config import EngineConfig
from .errors import BudgetExceeded
from .ihefsm import ConditionRef, analyze_condition, compile_program, resolve_params
from .predicates import (
    ABSENT,
    EXISTENTIAL,
    FALSE,
    TRUE,
    MissingMapWarning,
    eval_condition,
    eval_distance,
    eval_geometric,
    precompute_streams,
    wrap_angle,
)
from .scenic.ast import Name, NumberLit, Program
from .traces import Dataset, LabeledTrace, longest_run
from .engine.membership import MatchQuery, match_length, membership


@dataclass
class MatchReport:
    trace_id: str
    matched: bool
    correspondence: dict | None = None
    windows: list = field(default_factory=list)
    witness: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "matched": self.matched,
            "correspondence": self.correspondence,
            "windows": self.windows,
            "witness": self.witness,
            "stats": self.stats,
            **({"error": self.error} if self.error else {}),
        }


def _pseudo_condition(expr, program: Program, cond_id: str) -> ConditionRef:
    expr = resolve_params(expr, program)
    agent_names = frozenset(a.name for a in program.agents)
    params = frozenset(p.name for p in program.params)
    agents, free_params = analyze_condition(expr, agent_names, params)
    return ConditionRef(id=cond_id, kind="require", expr=expr,
                        referenced_agents=agents, free_params=free_params)


def build_domains(program: Program, trace: LabeledTrace, m: int,
                  config: EngineConfig | None = None):
    """Feasible track candidates per agent, or None when any agent has no
    counterpart (early exit)."""
    config = config or EngineConfig()
    bm = config.behavior_map
    domains: dict = {}
    for agent in program.agents:
        alphabet = bm.type_alphabet(agent.cls)
        candidates = []
        for track in trace.tracks:
            if agent.name == "ego" and track.id != trace.ego_id:
                continue
            if not bm.class_compatible(agent.cls, track.cls):
                continue
            run = longest_run(track)
            if run < m:
                continue
            observed = {
                track.actions[t]
                for start, length in track.runs()
                if length >= m
                for t in range(start, start + length)
                if track.actions[t] is not None
            }
            if not observed <= alphabet:
                continue
            candidates.append((run, track.id))
        if not candidates:
            return None
        candidates.sort(key=lambda item: (-item[0], item[1]))
        domains[agent.name] = [tid for _, tid in candidates]
    return domains


def dependency_groups(program: Program, machines: dict | None = None,
                      config: EngineConfig | None = None) -> list:
    """Partition agents: two agents share a group iff one's behavior
    conditions (or a shared require) reference the other, transitively."""
    config = config or EngineConfig()
    machines = machines or compile_program(program, config.behavior_map)
    order = {agent.name: i for i, agent in enumerate(program.agents)}
    parent = {name: name for name in order}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for agent in program.agents:
        behavior = agent.behavior
        if behavior is None:
            continue
        machine = machines[behavior]
        for cond in machine.conditions:
            for name in cond.referenced_agents:
                resolved = agent.name if name == "self" else name
                if resolved in order:
                    union(agent.name, resolved)
    extra_exprs = list(program.requires)
    if program.terminate_when is not None:
        extra_exprs.append(program.terminate_when)
    for i, expr in enumerate(extra_exprs):
        ref = _pseudo_condition(expr, program, f"cond_require_{i}")
        touched = [a for a in ref.referenced_agents if a in order]
        for a, b in zip(touched, touched[1:]):
            union(a, b)

    groups: dict = {}
    for name in order:
        groups.setdefault(find(name), []).append(name)
    out = [tuple(sorted(members, key=order.get)) for members in groups.values()]
    out.sort(key=lambda g: order[g[0]])
    return out


class _GroupChecker:
    """Evaluates one dependency group under a concrete partial assignment."""

    def __init__(self, program, machines, trace, m, config, warn_sink, deadline):
        self.program = program
        self.machines = machines
        self.trace = trace
        self.m = m
        self.config = config
        self.warn_sink = warn_sink
        self.deadline = deadline
        self.configs_peak = 0
        agent_names = frozenset(a.name for a in program.agents)
        self.require_refs = [
            _pseudo_condition(expr, program, f"cond_require_{i}")
            for i, expr in enumerate(program.requires)
        ]
        self.terminate_ref = (
            _pseudo_condition(program.terminate_when, program, "cond_terminate")
            if program.terminate_when is not None
            else None
        )
        self.max_window = None
        if program.terminate_after is not None:
            expr = program.terminate_after
            if isinstance(expr, NumberLit):
                self.max_window = max(1, int(expr.value / trace.dt + 1e-9))

    def static_requires_ok(self) -> bool:
        """Requires with no agent references hold for no timestep context."""
        for ref in self.require_refs:
            if ref.referenced_agents:
                continue
            if self.trace.T == 0:
                continue
            value = eval_condition(ref, self.trace, {}, 0, EXISTENTIAL,
                                   self.config.geometry, self.warn_sink)
            if value == FALSE:
                return False
        return True

    def _check_deadline(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceeded("wall-clock timeout during correspondence search")

    def _gates(self, group, corr):
        """usable-gate, valid-start vector for this group's assignment."""
        T = self.trace.T
        gate = [True] * T
        tracks = {a: self.trace.track(corr[a]) for a in group}
        for t in range(T):
            for track in tracks.values():
                if not track.has_position(t):
                    gate[t] = False
                    break
        for ref in self.require_refs:
            refs = {a for a in ref.referenced_agents if a != "self"}
            if not refs or not refs <= set(group):
                continue
            for t in range(T):
                if not gate[t]:
                    continue
                value = eval_condition(ref, self.trace, corr, t, EXISTENTIAL,
                                       self.config.geometry, self.warn_sink)
                if value == FALSE:
                    gate[t] = False
        if self.terminate_ref is not None:
            refs = {a for a in self.terminate_ref.referenced_agents if a != "self"}
            if refs <= set(group):
                for t in range(T):
                    value = eval_condition(self.terminate_ref, self.trace, corr, t,
                                           EXISTENTIAL, self.config.geometry,
                                           self.warn_sink)
                    if value == TRUE:
                        for rest in range(t, T):
                            gate[rest] = False
                        break
        starts = [gate[t] and self._specifiers_hold(group, corr, t) for t in range(T)]
        return gate, starts

    def _specifiers_hold(self, group, corr, t) -> bool:
        geo = self.config.geometry
        for name in group:
            agent = self.program.agent(name)
            track = self.trace.track(corr[name])
            for spec in agent.specifiers:
                if spec.kind in ("with_behavior", "with_prop"):
                    continue
                position = track.position_at(t)
                if position is None:
                    return False
                if spec.kind == "at":
                    x, y = spec.args
                    if isinstance(x, NumberLit) and isinstance(y, NumberLit):
                        if eval_distance(position, (x.value, y.value)) > geo.at_tolerance:
                            return False
                    continue
                if not self.trace.regions:
                    self._warn_once(
                        f"initial specifier '{spec.kind}' on {name!r} checked without "
                        "map regions; treated as satisfied"
                    )
                    continue
                if spec.kind == "on":
                    region_name = spec.args[0].id if isinstance(spec.args[0], Name) else None
                    regions = [
                        r for r in self.trace.regions
                        if region_name in (r.name, r.kind)
                    ]
                    if regions and not any(
                        eval_geometric("InRegion", (position, r), geo) for r in regions
                    ):
                        return False
                elif spec.kind == "facing":
                    sample = track.sample_at(t)
                    if sample is None:
                        return False
                    target = spec.args[0]
                    if isinstance(target, Name) and target.id == "roadDirection":
                        region = next(
                            (
                                r for r in self.trace.regions
                                if r.kind in ("road", "lane") and r.heading is not None
                                and eval_geometric("InRegion", (position, r), geo)
                            ),
                            None,
                        )
                        if region is None:
                            self._warn_once(
                                f"facing roadDirection on {name!r}: no region with "
                                "heading contains the agent; treated as satisfied"
                            )
                        elif not eval_geometric("FacingRoadDirection", (sample, region), geo):
                            return False
                    elif isinstance(target, NumberLit):
                        if abs(wrap_angle(sample.yaw - target.value)) > geo.facing_tolerance:
                            return False
        return True

    def _warn_once(self, message):
        if self.warn_sink is not None:
            if message not in self.warn_sink:
                self.warn_sink.append(message)
        else:
            warnings.warn(message, MissingMapWarning, stacklevel=2)

    def check(self, group, assignment):
        """Returns (ok, window, witness_by_agent)."""
        self._check_deadline()
        corr = {a: assignment[a] for a in group}
        machine_agents = [
            (name, self.machines[self.program.agent(name).behavior])
            for name in group
            if self.program.agent(name).behavior is not None
        ]
        if not machine_agents:
            return True, None, {}
        gate, starts = self._gates(group, corr)
        queries = []
        for name, machine in machine_agents:
            local = dict(corr)
            local["self"] = corr[name]
            streams = precompute_streams(machine, self.trace, local,
                                         self.config.predicate_mode,
                                         self.config.geometry, self.warn_sink)
            observed = list(self.trace.track(corr[name]).actions)
            queries.append((name, MatchQuery(machine=machine, streams=streams,
                                             observed=observed, m=self.m)))
        T = self.trace.T
        cap = self.config.budgets.config_cap
        rev = self.config.reverse_handler_priority
        for j in range(0, T - self.m + 1):
            if not gate[j] or not starts[j]:
                continue
            self._check_deadline()
            joint = None
            for _name, query in queries:
                length, _witness, _term, peak = match_length(
                    query, j, reverse_priority=rev, config_cap=cap,
                    extra_gate=gate, max_window=self.max_window,
                )
                self.configs_peak = max(self.configs_peak, peak)
                joint = length if joint is None else min(joint, length)
                if joint < self.m:
                    break
            if joint is not None and joint >= self.m:
                witness_by_agent = {}
                for name, query in queries:
                    _length, witness, _term, peak = match_length(
                        query, j, reverse_priority=rev, config_cap=cap,
                        extra_gate=gate, max_window=joint, want_witness=True,
                    )
                    self.configs_peak = max(self.configs_peak, peak)
                    witness_by_agent[name] = witness
                return True, (j, j + joint), witness_by_agent
        return False, None, {}


def match_trace(program: Program, trace: LabeledTrace, m: int,
                config: EngineConfig | None = None,
                machines: dict | None = None,
                warn_sink=None) -> MatchReport:
    """Algorithm-1 style search: iterate feasible correspondences, blocking
    failed group assignments, until every group matches or the space is
    exhausted."""
    config = config or EngineConfig()
    started = time.monotonic()
    deadline = (
        started + config.budgets.timeout_s
        if config.budgets.timeout_s is not None
        else None
    )
    machines = machines or compile_program(program, config.behavior_map)

    def report(**kwargs):
        stats = kwargs.pop("stats", {})
        stats.setdefault("wall_ms", (time.monotonic() - started) * 1000.0)
        return MatchReport(trace_id=trace.id, stats=stats, **kwargs)

    try:
        domains = build_domains(program, trace, m, config)
        if domains is None:
            return report(matched=False, stats={"candidates_tried": 0, "configs_peak": 0})
        checker = _GroupChecker(program, machines, trace, m, config, warn_sink, deadline)
        if not checker.static_requires_ok():
            return report(matched=False, stats={"candidates_tried": 0, "configs_peak": 0})
        groups = dependency_groups(program, machines, config)
        group_of = {name: g for g in groups for name in g}
        agents = sorted(domains, key=lambda a: (len(domains[a]), [x.name for x in program.agents].index(a)))
        nogoods: list = []
        memo: dict = {}
        counters = {"tried": 0}
        assignment: dict = {}
        used: set = set()
        results: dict = {}

        def blocked() -> bool:
            items = set(assignment.items())
            return any(ng <= items for ng in nogoods)

        def group_ready(name):
            g = group_of[name]
            return all(a in assignment for a in g)

        def solve(i: int) -> bool:
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded("wall-clock timeout during correspondence search")
            if i == len(agents):
                return True
            name = agents[i]
            for tid in domains[name]:
                if tid in used:
                    continue
                assignment[name] = tid
                used.add(tid)
                ok = not blocked()
                if ok and group_ready(name):
                    g = group_of[name]
                    key = (g, tuple(sorted((a, assignment[a]) for a in g)))
                    if key not in memo:
                        counters["tried"] += 1
                        memo[key] = checker.check(g, assignment)
                    ok, window, witness = memo[key]
                    if ok:
                        results[g] = (window, witness)
                    else:
                        nogoods.append(frozenset((a, assignment[a]) for a in g))
                if ok and solve(i + 1):
                    return True
                used.discard(tid)
                del assignment[name]
            return False

        matched = solve(0)
        stats = {
            "candidates_tried": counters["tried"],
            "configs_peak": checker.configs_peak,
        }
        if not matched:
            return report(matched=False, stats=stats)
        windows = []
        witness = {}
        for g in groups:
            window, group_witness = results.get(g, (None, {}))
            if window is not None:
                windows.append({"agents_group": list(g), "j": window[0], "k": window[1]})
            for agent_name, w in group_witness.items():
                witness[agent_name] = w
        return report(
            matched=True,
            correspondence=dict(assignment),
            windows=windows,
            witness=witness,
            stats=stats,
        )
    except BudgetExceeded as exc:
        return report(matched=False, error=f"budget_exceeded: {exc}",
                      stats={"candidates_tried": 0, "configs_peak": 0})


def match_dataset(program: Program, ds: Dataset, m: int,
                  config: EngineConfig | None = None,
                  jobs: int = 1) -> list:
    """One report per trace, stable by trace id; per-trace errors isolated."""
    config = config or EngineConfig()
    machines = compile_program(program, config.behavior_map)
    traces = sorted(ds.traces, key=lambda tr: tr.id)

    def run_one(trace):
        try:
            return match_trace(program, trace, m, config, machines)
        except Exception as exc:  # isolate per-trace failures
            return MatchReport(trace_id=trace.id, matched=False,
                               error=f"{type(exc).__name__}: {exc}")

    if jobs and jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_one, traces))
    return [run_one(trace) for trace in traces]
