"""Bounded trace-membership checking by nondeterministic state-set search.

A window (j, k) covers the k - j observed actions at timesteps j..k-1; a
query with minimum duration m matches when some window with k - j >= m lies
inside a stretch of timesteps where every predicate stream is defined and an
observed action exists, and the machine (branching over unknown inputs)
reproduces the observed actions exactly.  The search restarts a fresh
machine at each candidate j, keeps the reachable configuration set per step
(deduplicated, which bounds work by the number of distinct configurations),
and returns the earliest j with the maximal k for it.
"""
from __future__ import annotations

import importlib.util
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from ..config import END_ACTION
from ..errors import BudgetExceeded, StreamMismatch
from ..ihefsm import Ihefsm
from ..predicates import ABSENT, FALSE, TRUE, UNKNOWN
from .flat import FlatMachine, flatten
from . import _stepper as _imported_stepper

_FORCE_PURE = os.environ.get("SCENQUERY_PURE", "") not in ("", "0")


def load_pure_stepper():
    """Load the interpreted stepper from source even when the compiled
    extension shadows it (used by the backend benchmark and SCENQUERY_PURE)."""
    path = Path(__file__).with_name("_stepper.py")
    spec = importlib.util.spec_from_file_location(
        "scenquery.engine._stepper_pure", path
    )
    module = importlib.util.module_from_spec(spec)
    sys.modules[spec.name] = module
    spec.loader.exec_module(module)
    return module


if _FORCE_PURE and _imported_stepper.kernel_compiled():
    _stepper = load_pure_stepper()
else:
    _stepper = _imported_stepper


def backend_info() -> dict:
    return {
        "compiled": bool(_stepper.kernel_compiled()),
        "module": getattr(_stepper, "__file__", "<unknown>"),
        "forced_pure": _FORCE_PURE,
    }


@dataclass
class MatchQuery:
    machine: Ihefsm
    streams: dict  # cond_id -> PredicateStream
    observed: list  # length T of action label or None
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        T = len(self.observed)
        for cond in self.machine.conditions:
            stream = self.streams.get(cond.id)
            if stream is None:
                raise StreamMismatch(f"missing stream for {cond.id}")
            if len(stream.values) != T:
                raise StreamMismatch(
                    f"stream {cond.id} has length {len(stream.values)}, observed has {T}"
                )


@dataclass
class MatchResult:
    matched: bool
    window: tuple | None = None  # (j, k): actions at timesteps j..k-1
    witness: list | None = None  # per window step: {cond_id: bool} for unknowns
    terminated_early: bool = False
    configs_peak: int = 0
    stats: dict = field(default_factory=dict)


def initial_config(machine: Ihefsm, reverse_priority: bool = True) -> bytes:
    return flatten(machine, reverse_priority).init_config


def step(machine: Ihefsm, cfgs, inputs: dict, reverse_priority: bool = True) -> dict:
    """Public single-step interface: expand a set of configurations under
    per-condition inputs (True/False/"unknown"), grouping successors by the
    emitted action label."""
    fm = flatten(machine, reverse_priority)
    col = bytearray(len(fm.conditions))
    for i, cond in enumerate(fm.conditions):
        value = inputs.get(cond.id, "unknown")
        if value is True:
            col[i] = TRUE
        elif value is False:
            col[i] = FALSE
        elif value in ("unknown", UNKNOWN, None):
            col[i] = UNKNOWN
        else:
            col[i] = ABSENT
    col = bytes(col)
    out: dict = {}
    for cfg in cfgs:
        for action_id, new_cfg, _asg in _stepper.step_config(fm, cfg, col):
            label = fm.actions[action_id] if action_id >= 0 else END_ACTION
            out.setdefault(label, set()).add(new_cfg)
    return out


def _usable_mask(fm: FlatMachine, streams, observed, extra_gate=None):
    T = len(observed)
    usable = [True] * T
    for cond in fm.conditions:
        values = streams[cond.id].values
        for t in range(T):
            if values[t] == ABSENT:
                usable[t] = False
    for t in range(T):
        if observed[t] is None:
            usable[t] = False
        if extra_gate is not None and not extra_gate[t]:
            usable[t] = False
    return usable


def _prepare(q: MatchQuery, reverse_priority, extra_gate):
    fm = flatten(q.machine, reverse_priority)
    T = len(q.observed)
    observed_ids = [
        (-1 if label is None else fm.action_id(label)) for label in q.observed
    ]
    cols = fm.stream_value_columns(q.streams, T)
    usable = _usable_mask(fm, q.streams, q.observed, extra_gate)
    return fm, cols, observed_ids, usable


def _run_from(fm, cols, observed_ids, usable, j, limit, config_cap):
    """Maximum match length starting a fresh machine at j, with per-step
    parent pointers for witness reconstruction."""
    frontier = {fm.init_config: None}
    parents_hist = []
    length = 0
    peak = 0
    while length < limit:
        t = j + length
        if not usable[t] or observed_ids[t] < 0:
            break
        nxt = _stepper.advance_frontier(fm, frontier, cols[t], observed_ids[t])
        if not nxt:
            break
        if len(nxt) > config_cap:
            raise BudgetExceeded(
                f"configuration count {len(nxt)} exceeds cap {config_cap}"
            )
        peak = max(peak, len(nxt))
        parents_hist.append(nxt)
        frontier = nxt
        length += 1
    return length, parents_hist, peak


def match_length(q: MatchQuery, j: int, *,
                 reverse_priority: bool = True,
                 config_cap: int = 100_000,
                 extra_gate=None,
                 max_window=None,
                 want_witness: bool = False):
    """Match length from a fixed start j (used by the correspondence search
    to intersect windows across a dependency group)."""
    fm, cols, observed_ids, usable = _prepare(q, reverse_priority, extra_gate)
    T = len(q.observed)
    if j < 0 or j >= T or not usable[j]:
        return 0, None, False, 0
    limit = T - j if max_window is None else min(T - j, max_window)
    length, parents_hist, peak = _run_from(
        fm, cols, observed_ids, usable, j, limit, config_cap
    )
    witness = None
    terminated = False
    if want_witness and length:
        witness, final_cfg = _reconstruct(fm, parents_hist)
        terminated = bool(final_cfg[0] & 1)
    return length, witness, terminated, peak


def membership(q: MatchQuery, *,
               reverse_priority: bool = True,
               config_cap: int = 100_000,
               valid_starts=None,
               extra_gate=None,
               max_window=None) -> MatchResult:
    """Decide P1 window matching for one machine against one observed trace.

    `valid_starts[j]` gates window starts (initial-specifier checks),
    `extra_gate[t]` removes timesteps (dynamic requires, scenario
    termination), `max_window` caps the window length (terminate-after).
    Returns the earliest j whose maximal window reaches m.
    """
    fm, cols, observed_ids, usable = _prepare(q, reverse_priority, extra_gate)
    T = len(q.observed)
    peak = 0
    for j in range(0, T - q.m + 1):
        if not usable[j] or observed_ids[j] < 0:
            continue
        if valid_starts is not None and not valid_starts[j]:
            continue
        limit = T - j if max_window is None else min(T - j, max_window)
        length, parents_hist, run_peak = _run_from(
            fm, cols, observed_ids, usable, j, limit, config_cap
        )
        peak = max(peak, run_peak)
        if length >= q.m:
            witness, final_cfg = _reconstruct(fm, parents_hist)
            return MatchResult(
                matched=True,
                window=(j, j + length),
                witness=witness,
                terminated_early=bool(final_cfg[0] & 1),
                configs_peak=max(peak, 1),
            )
    return MatchResult(matched=False, configs_peak=peak)


def _reconstruct(fm: FlatMachine, parents_hist):
    """Walk parent pointers back from the lexicographically smallest final
    configuration, emitting one {cond_id: value} dict per window step."""
    final_cfg = min(parents_hist[-1])
    witness = []
    cfg = final_cfg
    for step_parents in reversed(parents_hist):
        parent, assigns = step_parents[cfg]
        witness.append({fm.conditions[ci].id: bool(v) for ci, v in assigns})
        cfg = parent
    witness.reverse()
    return witness, final_cfg


def resimulate(q: MatchQuery, result: MatchResult, *,
               reverse_priority: bool = True) -> bool:
    """Deterministically replay a matched window under its witness and check
    the emitted actions reproduce the observed ones."""
    if not result.matched:
        return False
    fm = flatten(q.machine, reverse_priority)
    j, k = result.window
    cols = fm.stream_value_columns(q.streams, len(q.observed))
    cfg = fm.init_config
    for offset, t in enumerate(range(j, k)):
        assignments = result.witness[offset]
        col = bytearray(cols[t])
        for i, cond in enumerate(fm.conditions):
            if cond.id in assignments:
                col[i] = TRUE if assignments[cond.id] else FALSE
            elif col[i] == UNKNOWN:
                col[i] = FALSE  # unread by this branch; any value replays
        branches = _stepper.step_config(fm, cfg, bytes(col))
        wanted = fm.action_id(q.observed[t])
        nxt = [c for action_id, c, _ in branches if action_id == wanted]
        if not nxt:
            return False
        cfg = nxt[0]
    return True
