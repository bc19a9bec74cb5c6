"""Brute-force membership oracle: explicit enumeration over windows and
unknown-input assignments, driving a direct tree-walking simulator.

This is deliberately a second, independent implementation of the machine
semantics (statuses held in dictionaries, recursion over the node objects,
no configuration encoding) so that the state-set search in `membership` can
be differentially tested against it on small instances.
"""
from __future__ import annotations

from itertools import product

from ..config import END_ACTION
from ..errors import BudgetExceeded
from ..ihefsm import (
    AtomicNode,
    CondNode,
    DoNode,
    Ihefsm,
    SeqNode,
    TerminateNode,
    TryInterruptNode,
)
from ..predicates import ABSENT, FALSE, TRUE, UNKNOWN
from .membership import MatchQuery, MatchResult

_ZDONE = object()  # subtree completed without consuming the step


class TreeSimulator:
    """Deterministic one-behavior interpreter; inputs must be concrete."""

    def __init__(self, machine: Ihefsm, reverse_priority: bool = True):
        self.machine = machine
        self.reverse_priority = reverse_priority
        self.reset()

    def reset(self):
        self.seq_pos: dict = {}
        self.try_active: dict = {}  # node_id -> None (try) or handler index
        self.cond_choice: dict = {}
        self.terminated = False

    def reset_subtree(self, node_id):
        node = self.machine.node(node_id)
        if isinstance(node, SeqNode):
            self.seq_pos.pop(node_id, None)
            for child in node.children:
                self.reset_subtree(child)
        elif isinstance(node, DoNode):
            self.reset_subtree(node.child)
        elif isinstance(node, TryInterruptNode):
            self.try_active.pop(node_id, None)
            self.reset_subtree(node.try_child)
            for _, child in node.handlers:
                self.reset_subtree(child)
        elif isinstance(node, CondNode):
            self.cond_choice.pop(node_id, None)
            for _, child in node.branches:
                self.reset_subtree(child)
            if node.else_child is not None:
                self.reset_subtree(node.else_child)

    def step(self, inputs: dict) -> str:
        """Advance one timestep; returns the emitted action label."""
        if self.terminated:
            return END_ACTION
        action, done = self._run(self.machine.root, inputs)
        if done:
            self.terminated = True
        if action is _ZDONE:
            return END_ACTION
        return action

    def _value(self, cond, inputs) -> bool:
        value = inputs[cond.id]
        if not isinstance(value, bool):
            raise ValueError(f"oracle simulator needs concrete input for {cond.id}")
        return value

    def _run(self, node_id, inputs):
        node = self.machine.node(node_id)
        if isinstance(node, AtomicNode):
            return node.action, node.once
        if isinstance(node, TerminateNode):
            # terminate ends the whole scenario, wherever it sits in the tree
            self.terminated = True
            return END_ACTION, True
        if isinstance(node, DoNode):
            action, done = self._run(node.child, inputs)
            if action is _ZDONE or done:
                return action, True
            return action, self._value(node.until, inputs)
        if isinstance(node, SeqNode):
            while True:
                pos = self.seq_pos.get(node_id, 0)
                action, done = self._run(node.children[pos], inputs)
                last = pos + 1 >= len(node.children)
                if action is _ZDONE:
                    if last:
                        return _ZDONE, True
                    self.seq_pos[node_id] = pos + 1
                    continue
                if done and not last:
                    self.seq_pos[node_id] = pos + 1
                    return action, False
                return action, done and last
        if isinstance(node, TryInterruptNode):
            return self._run_try(node_id, node, inputs)
        if isinstance(node, CondNode):
            return self._run_cond(node_id, node, inputs)
        raise TypeError(f"unknown node {node!r}")

    def _scan_order(self, node: TryInterruptNode):
        order = list(range(len(node.handlers)))
        if self.reverse_priority:
            order.reverse()
        return order

    def _run_try(self, node_id, node: TryInterruptNode, inputs):
        order = self._scan_order(node)
        active = self.try_active.get(node_id)  # None => try body
        eligible = order if active is None else order[: order.index(active)]
        for h in eligible:
            cond, _child = node.handlers[h]
            if self._value(cond, inputs):
                active = h
                self.try_active[node_id] = h
                break
        if active is None:
            action, done = self._run(node.try_child, inputs)
            return action, (done or action is _ZDONE)
        cond, child = node.handlers[active]
        action, done = self._run(child, inputs)
        if done or action is _ZDONE:
            self.reset_subtree(child)
            self.try_active[node_id] = None
            if action is _ZDONE:
                action, done2 = self._run(node.try_child, inputs)
                return action, (done2 or action is _ZDONE)
            return action, False
        return action, False

    def _run_cond(self, node_id, node: CondNode, inputs):
        choice = self.cond_choice.get(node_id)
        if choice is None:
            chosen = None
            for i, (cond, _child) in enumerate(node.branches):
                if self._value(cond, inputs):
                    chosen = i
                    break
            if chosen is None:
                if node.else_child is None:
                    return _ZDONE, True
                chosen = len(node.branches)
            self.cond_choice[node_id] = chosen
            choice = chosen
        if choice == len(node.branches):
            child = node.else_child
        else:
            child = node.branches[choice][1]
        action, done = self._run(child, inputs)
        return action, done


def _oracle_usable(q: MatchQuery, extra_gate):
    T = len(q.observed)
    usable = [True] * T
    for cond in q.machine.conditions:
        for t, value in enumerate(q.streams[cond.id].values):
            if value == ABSENT:
                usable[t] = False
    for t in range(T):
        if q.observed[t] is None:
            usable[t] = False
        if extra_gate is not None and not extra_gate[t]:
            usable[t] = False
    return usable


def oracle_match_length(q: MatchQuery, j: int, *,
                        reverse_priority: bool = True,
                        max_bits: int = 20,
                        extra_gate=None,
                        max_window=None) -> int:
    """Maximum match length from start j, by enumerating every assignment of
    the unknown stream cells inside the usable run."""
    T = len(q.observed)
    usable = _oracle_usable(q, extra_gate)
    if j < 0 or j >= T or not usable[j]:
        return 0
    conds = list(q.machine.conditions)
    end = j
    while end < T and usable[end]:
        end += 1
    if max_window is not None:
        end = min(end, j + max_window)
    cells = [
        (cond.id, t)
        for cond in conds
        for t in range(j, end)
        if q.streams[cond.id].values[t] == UNKNOWN
    ]
    if len(cells) > max_bits:
        raise BudgetExceeded(
            f"oracle limited to {max_bits} unknown inputs, got {len(cells)}"
        )
    horizon = end - j
    best = 0
    for assignment in product((False, True), repeat=len(cells)):
        bound = dict(zip(cells, assignment))
        sim = TreeSimulator(q.machine, reverse_priority)
        length = 0
        for t in range(j, end):
            inputs = {}
            for cond in conds:
                value = q.streams[cond.id].values[t]
                if value == TRUE:
                    inputs[cond.id] = True
                elif value == FALSE:
                    inputs[cond.id] = False
                else:
                    inputs[cond.id] = bound[(cond.id, t)]
            if sim.step(inputs) != q.observed[t]:
                break
            length += 1
        best = max(best, length)
        if best == horizon:
            break
    return best


def membership_oracle(q: MatchQuery, *,
                      reverse_priority: bool = True,
                      max_t: int = 16,
                      max_bits: int = 20,
                      valid_starts=None,
                      extra_gate=None,
                      max_window=None) -> MatchResult:
    """Exhaustive window x assignment enumeration; agrees with `membership`
    on matched verdicts and windows for in-budget instances."""
    T = len(q.observed)
    if T > max_t:
        raise BudgetExceeded(f"oracle limited to T <= {max_t}, got {T}")
    usable = _oracle_usable(q, extra_gate)
    for j in range(0, T - q.m + 1):
        if not usable[j]:
            continue
        if valid_starts is not None and not valid_starts[j]:
            continue
        best = oracle_match_length(
            q, j, reverse_priority=reverse_priority, max_bits=max_bits,
            extra_gate=extra_gate, max_window=max_window,
        )
        if best >= q.m:
            return MatchResult(matched=True, window=(j, j + best))
    return MatchResult(matched=False)
