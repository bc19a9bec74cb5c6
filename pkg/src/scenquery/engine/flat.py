"""Flattening of an Ihefsm tree into the integer tables the stepper runs on.

A machine configuration is a byte string: byte 0 holds flags (bit 0 set once
the machine has terminated), the remaining bytes are state slots.  Sequences
with more than one child get a slot for their active index, try-interrupt
nodes for their active path (0 = try body, 1+p = handler at scan position p),
conditionals for the chosen branch (0xFF until entered).
"""
from __future__ import annotations

from ..config import END_ACTION
from ..ihefsm import (
    AtomicNode,
    CondNode,
    DoNode,
    Ihefsm,
    SeqNode,
    TerminateNode,
    TryInterruptNode,
)

K_SEQ, K_DO, K_TRY, K_COND, K_ATOM, K_TERM = 0, 1, 2, 3, 4, 5

SLOT_UNSET = 0xFF


class FlatMachine:
    __slots__ = (
        "root", "kind", "child", "cond", "once", "slot",
        "seq_off", "seq_len", "seq_arr",
        "try_off", "try_len", "try_arr",
        "branch_off", "branch_len", "branch_arr", "else_child",
        "reset_arr", "n_slots", "conditions", "cond_index",
        "actions", "action_index", "init_config", "source",
    )

    def stream_value_columns(self, streams, T):
        """Pack per-condition stream values into one bytes column per step."""
        order = [streams[c.id] for c in self.conditions]
        return [bytes(s.values[t] for s in order) for t in range(T)]

    def action_id(self, label):
        return self.action_index.get(label, -1)


def _subtree_slots(fm, machine, node_id, out):
    node = machine.node(node_id)
    if fm.slot[node_id] >= 0:
        value = SLOT_UNSET if isinstance(node, CondNode) else 0
        out.append((fm.slot[node_id], value))
    if isinstance(node, SeqNode):
        for child in node.children:
            _subtree_slots(fm, machine, child, out)
    elif isinstance(node, DoNode):
        _subtree_slots(fm, machine, node.child, out)
    elif isinstance(node, TryInterruptNode):
        _subtree_slots(fm, machine, node.try_child, out)
        for _, child in node.handlers:
            _subtree_slots(fm, machine, child, out)
    elif isinstance(node, CondNode):
        for _, child in node.branches:
            _subtree_slots(fm, machine, child, out)
        if node.else_child is not None:
            _subtree_slots(fm, machine, node.else_child, out)


def flatten(machine: Ihefsm, reverse_priority: bool = True) -> FlatMachine:
    cache = getattr(machine, "_flat_cache", None)
    if cache is None:
        cache = {}
        machine._flat_cache = cache
    if reverse_priority in cache:
        return cache[reverse_priority]

    n = len(machine.nodes)
    fm = FlatMachine()
    fm.source = machine
    fm.root = machine.root
    fm.kind = [0] * n
    fm.child = [-1] * n
    fm.cond = [-1] * n
    fm.once = [0] * n
    fm.slot = [-1] * n
    fm.seq_off = [0] * n
    fm.seq_len = [0] * n
    fm.seq_arr = []
    fm.try_off = [0] * n
    fm.try_len = [0] * n
    fm.try_arr = []
    fm.branch_off = [0] * n
    fm.branch_len = [0] * n
    fm.branch_arr = []
    fm.else_child = [-1] * n
    fm.reset_arr = []

    fm.conditions = list(machine.conditions)
    fm.cond_index = {c.id: i for i, c in enumerate(fm.conditions)}

    actions = [END_ACTION]
    for node in machine.nodes:
        if isinstance(node, AtomicNode) and node.action not in actions:
            actions.append(node.action)
    fm.actions = actions
    fm.action_index = {a: i for i, a in enumerate(actions)}

    next_slot = 1
    for node_id, node in enumerate(machine.nodes):
        if isinstance(node, SeqNode):
            fm.kind[node_id] = K_SEQ
            if len(node.children) > 1:
                fm.slot[node_id] = next_slot
                next_slot += 1
        elif isinstance(node, DoNode):
            fm.kind[node_id] = K_DO
        elif isinstance(node, TryInterruptNode):
            fm.kind[node_id] = K_TRY
            fm.slot[node_id] = next_slot
            next_slot += 1
        elif isinstance(node, CondNode):
            fm.kind[node_id] = K_COND
            fm.slot[node_id] = next_slot
            next_slot += 1
        elif isinstance(node, AtomicNode):
            fm.kind[node_id] = K_ATOM
            fm.once[node_id] = 1 if node.once else 0
        elif isinstance(node, TerminateNode):
            fm.kind[node_id] = K_TERM
        else:
            raise TypeError(f"unknown node {node!r}")
    fm.n_slots = next_slot - 1

    for node_id, node in enumerate(machine.nodes):
        if isinstance(node, SeqNode):
            fm.seq_off[node_id] = len(fm.seq_arr)
            fm.seq_len[node_id] = len(node.children)
            fm.seq_arr.extend(node.children)
        elif isinstance(node, DoNode):
            fm.child[node_id] = node.child
            fm.cond[node_id] = fm.cond_index[node.until.id]
        elif isinstance(node, TryInterruptNode):
            fm.child[node_id] = node.try_child
            handlers = list(enumerate(node.handlers))
            if reverse_priority:
                handlers.reverse()  # last declared handler scans first
            fm.try_off[node_id] = len(fm.try_arr) // 4
            fm.try_len[node_id] = len(handlers)
            for _, (cond, child) in handlers:
                slots: list = []
                _subtree_slots(fm, machine, child, slots)
                reset_off = len(fm.reset_arr) // 2
                for s, v in slots:
                    fm.reset_arr.extend((s, v))
                fm.try_arr.extend(
                    (fm.cond_index[cond.id], child, reset_off, len(slots))
                )
        elif isinstance(node, CondNode):
            fm.branch_off[node_id] = len(fm.branch_arr) // 2
            fm.branch_len[node_id] = len(node.branches)
            for cond, child in node.branches:
                fm.branch_arr.extend((fm.cond_index[cond.id], child))
            fm.else_child[node_id] = (
                node.else_child if node.else_child is not None else -1
            )
        elif isinstance(node, AtomicNode):
            fm.cond[node_id] = fm.action_index[node.action]

    init = bytearray(1 + fm.n_slots)
    for node_id in range(n):
        if fm.kind[node_id] == K_COND:
            init[fm.slot[node_id]] = SLOT_UNSET
    fm.init_config = bytes(init)

    cache[reverse_priority] = fm
    return fm
