"""Compilation of behavior definitions into interrupt-driven hierarchical
extended finite state machines.

Node numbering follows the hierarchical module scheme: every structural node
carries a (depth, index) pair, where depth counts structural layers from the
behavior body (sequences are transparent) and index is a per-depth pre-order
counter.  Try bodies and interrupt handlers sit behind implicit Try/Interrupt
wrapper layers which consume a depth level and an index of their own, so a
top-level try-interrupt yields TryInterrupt_0_0, Try_1_0, Interrupt_1_1, and
Do_2_0/Do_2_1 below them.  Condition ids reuse these coordinates:
cond_interrupt_<d>_<i> for handler conditions (coordinates of the Interrupt
wrapper), cond_until_<d>_<i> for explicit do-until terminators and
cond_do_<d>_<i> for the undeclared terminator of a bare do (coordinates of
the Do node).  Conditional branches follow the handler pattern with
cond_if_<d>_<i>.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .config import BehaviorMap
from .errors import CycleError, UnsupportedConstruct
from .scenic.ast import (
    Assignment,
    Attr,
    BoolLit,
    Call,
    CanSee,
    Choose,
    Conditional,
    DistanceFromTo,
    DistLit,
    Do,
    InRegion,
    Name,
    Program,
    Shuffle,
    Take,
    Terminate,
    TryInterrupt,
    walk_expr,
)

SEQ, DO, TRY, COND, ATOM, TERM = "seq", "do", "try", "cond", "atom", "term"

# Status values a node moves through while the machine runs.
STATUS_START, STATUS_PROGRESS, STATUS_END = "start", "progress", "end"


@dataclass(frozen=True)
class ConditionRef:
    id: str
    kind: str  # "until" | "do" | "interrupt" | "if"
    expr: object  # BoolExpr, or None for an undeclared (nondeterministic) input
    referenced_agents: frozenset
    free_params: tuple
    nondet: bool = False

    def __repr__(self):
        return f"ConditionRef({self.id})"


@dataclass
class NodeMeta:
    depth: int
    index: int
    label: str  # display name for exports

    @property
    def coords(self):
        return (self.depth, self.index)


@dataclass
class SeqNode:
    children: tuple


@dataclass
class DoNode:
    child: int
    until: ConditionRef


@dataclass
class TryInterruptNode:
    try_child: int
    handlers: tuple  # ((ConditionRef, child_id), ...) in declaration order
    try_wrapper: tuple = (0, 0)  # (depth, index) of the Try layer
    handler_wrappers: tuple = ()  # (depth, index) per handler


@dataclass
class CondNode:
    branches: tuple  # ((ConditionRef, child_id), ...)
    else_child: int | None = None
    branch_wrappers: tuple = ()
    else_wrapper: tuple | None = None


@dataclass
class AtomicNode:
    action: str
    behavior_name: str
    once: bool = False  # True for take-compiled atoms: emit once, then done


@dataclass
class TerminateNode:
    pass


@dataclass
class Ihefsm:
    behavior_name: str
    nodes: list
    root: int
    conditions: list  # ConditionRef ordered by (depth, index)
    meta: dict  # node_id -> NodeMeta
    alphabet: tuple = ()  # actions this machine can emit

    def node(self, node_id: int):
        return self.nodes[node_id]

    def condition(self, cond_id: str) -> ConditionRef:
        for c in self.conditions:
            if c.id == cond_id:
                return c
        raise KeyError(cond_id)


def analyze_condition(expr, agent_names, param_names):
    """Collect agent references and distribution literals used by `expr`."""
    agents = set()
    params = []
    for sub in walk_expr(expr):
        if isinstance(sub, Name):
            if sub.id in agent_names or sub.id == "self":
                agents.add(sub.id)
        elif isinstance(sub, DistLit):
            params.append(sub)
    return frozenset(agents), tuple(params)


def resolve_params(expr, program: Program):
    """Substitute parameter names bound to distribution literals."""
    if expr is None:
        return None
    if isinstance(expr, Name):
        decl = program.param(expr.id)
        if decl is not None and isinstance(decl.value, DistLit):
            return decl.value
        if decl is not None:
            return decl.value
        return expr
    return expr


class _Compiler:
    def __init__(self, program: Program, behavior_map: BehaviorMap):
        self.program = program
        self.behavior_map = behavior_map
        self.agent_names = frozenset(a.name for a in program.agents)
        self.param_names = frozenset(p.name for p in program.params)

    def compile_behavior(self, name: str) -> Ihefsm:
        bdef = self.program.behavior(name)
        if bdef is None:
            if not self.behavior_map.is_atomic(name):
                raise UnsupportedConstruct(f"unknown behavior {name!r}")
            body = (Do(callee=name),)
        else:
            if bdef.params:
                raise UnsupportedConstruct(
                    f"behavior {name!r} declares parameters; only constant-free "
                    "behaviors compile"
                )
            body = bdef.body
        self.nodes: list = []
        self.meta: dict = {}
        self.conditions: list = []
        self.next_index: dict = {}
        self._cond_coords = {}
        root = self.build_sequence(body, 0, visiting=(name,))
        conditions = sorted(self.conditions, key=lambda c: self._cond_coords[c.id])
        alphabet = tuple(
            sorted({n.action for n in self.nodes if isinstance(n, AtomicNode)})
        )
        return Ihefsm(
            behavior_name=name,
            nodes=self.nodes,
            root=root,
            conditions=conditions,
            meta=self.meta,
            alphabet=alphabet,
        )

    # -- helpers -------------------------------------------------------------

    def alloc_index(self, depth: int) -> int:
        idx = self.next_index.get(depth, 0)
        self.next_index[depth] = idx + 1
        return idx

    def add_node(self, node, depth, index, label) -> int:
        node_id = len(self.nodes)
        self.nodes.append(node)
        self.meta[node_id] = NodeMeta(depth=depth, index=index, label=label)
        return node_id

    def make_condition(self, kind, expr, coords) -> ConditionRef:
        depth, index = coords
        cond_id = f"cond_{kind}_{depth}_{index}"
        if expr is None:
            ref = ConditionRef(
                id=cond_id, kind=kind, expr=None,
                referenced_agents=frozenset(), free_params=(), nondet=True,
            )
        else:
            expr = resolve_params(expr, self.program)
            agents, params = analyze_condition(expr, self.agent_names, self.param_names)
            ref = ConditionRef(
                id=cond_id, kind=kind, expr=expr,
                referenced_agents=agents, free_params=params,
            )
        self.conditions.append(ref)
        self._cond_coords[cond_id] = coords
        return ref

    # -- recursive construction (sequence/statement mutual recursion) --------

    def build_sequence(self, body, depth, visiting) -> int:
        if not body:
            raise UnsupportedConstruct("empty statement sequence")
        children = []
        for stmt in body:
            children.extend(self.build_statement(stmt, depth, visiting))
        node_id = self.add_node(SeqNode(children=tuple(children)), depth, -1, "Seq")
        return node_id

    def build_statement(self, stmt, depth, visiting) -> list:
        """Compile one statement, returning node ids to splice into the
        enclosing sequence (take with several actions yields several)."""
        if isinstance(stmt, Do):
            return [self.build_do(stmt, depth, visiting)]
        if isinstance(stmt, Take):
            return [self.build_take_action(a, depth) for a in stmt.actions]
        if isinstance(stmt, TryInterrupt):
            return [self.build_try(stmt, depth, visiting)]
        if isinstance(stmt, Conditional):
            return [self.build_conditional(stmt, depth, visiting)]
        if isinstance(stmt, Terminate):
            index = self.alloc_index(depth)
            return [self.add_node(TerminateNode(), depth, index, "Terminate")]
        if isinstance(stmt, (Choose, Shuffle)):
            raise UnsupportedConstruct(
                f"{type(stmt).__name__.lower()} statements are not compiled"
            )
        if isinstance(stmt, Assignment):
            raise UnsupportedConstruct("assignment statements are not compiled")
        raise UnsupportedConstruct(f"cannot compile {type(stmt).__name__}")

    def build_do(self, stmt: Do, depth, visiting) -> int:
        if stmt.args:
            raise UnsupportedConstruct(
                f"behavior arguments are not supported (do {stmt.callee}(...))"
            )
        index = self.alloc_index(depth)
        action = self.behavior_map.action_for(stmt.callee)
        if action is not None:
            child = self.add_node(
                AtomicNode(action=action, behavior_name=stmt.callee),
                depth + 1, self.alloc_index(depth + 1), stmt.callee,
            )
        else:
            callee = self.program.behavior(stmt.callee)
            if callee is None:
                raise UnsupportedConstruct(f"unknown behavior {stmt.callee!r}")
            if stmt.callee in visiting:
                raise CycleError(
                    f"recursive behavior invocation: {' -> '.join(visiting + (stmt.callee,))}"
                )
            if callee.params:
                raise UnsupportedConstruct(
                    f"behavior {stmt.callee!r} declares parameters; cannot inline"
                )
            child = self.build_sequence(callee.body, depth + 1, visiting + (stmt.callee,))
        kind = "until" if stmt.until is not None else "do"
        cond = self.make_condition(kind, stmt.until, (depth, index))
        node = DoNode(child=child, until=cond)
        return self.add_node(node, depth, index, "Do")

    def build_take_action(self, action_expr, depth) -> int:
        name = None
        if isinstance(action_expr, Name):
            name = action_expr.id
        elif isinstance(action_expr, Call) and isinstance(action_expr.func, Name):
            name = action_expr.func.id
        action = self.behavior_map.action_for(name) if name else None
        if action is None:
            raise UnsupportedConstruct(f"take requires an atomic behavior, got {name!r}")
        index = self.alloc_index(depth)
        return self.add_node(
            AtomicNode(action=action, behavior_name=name, once=True), depth, index, name
        )

    def build_try(self, stmt: TryInterrupt, depth, visiting) -> int:
        index = self.alloc_index(depth)
        try_wrapper = (depth + 1, self.alloc_index(depth + 1))
        try_child = self.build_sequence(stmt.try_body, depth + 2, visiting)
        handlers = []
        handler_wrappers = []
        for condition, body in stmt.handlers:
            wrapper = (depth + 1, self.alloc_index(depth + 1))
            cond = self.make_condition("interrupt", condition, wrapper)
            child = self.build_sequence(body, depth + 2, visiting)
            handlers.append((cond, child))
            handler_wrappers.append(wrapper)
        node = TryInterruptNode(
            try_child=try_child,
            handlers=tuple(handlers),
            try_wrapper=try_wrapper,
            handler_wrappers=tuple(handler_wrappers),
        )
        return self.add_node(node, depth, index, "TryInterrupt")

    def build_conditional(self, stmt: Conditional, depth, visiting) -> int:
        index = self.alloc_index(depth)
        branches = []
        wrappers = []
        for condition, body in stmt.branches:
            wrapper = (depth + 1, self.alloc_index(depth + 1))
            cond = self.make_condition("if", condition, wrapper)
            child = self.build_sequence(body, depth + 2, visiting)
            branches.append((cond, child))
            wrappers.append(wrapper)
        else_child = None
        else_wrapper = None
        if stmt.else_body:
            else_wrapper = (depth + 1, self.alloc_index(depth + 1))
            else_child = self.build_sequence(stmt.else_body, depth + 2, visiting)
        node = CondNode(
            branches=tuple(branches),
            else_child=else_child,
            branch_wrappers=tuple(wrappers),
            else_wrapper=else_wrapper,
        )
        return self.add_node(node, depth, index, "If")


def compile_behavior(program: Program, name: str,
                     behavior_map: BehaviorMap | None = None) -> Ihefsm:
    return _Compiler(program, behavior_map or BehaviorMap()).compile_behavior(name)


def compile_program(program: Program,
                    behavior_map: BehaviorMap | None = None) -> dict:
    """Compile every behavior (plus atomics attached directly to agents)."""
    behavior_map = behavior_map or BehaviorMap()
    machines: dict = {}
    for bdef in program.behaviors:
        machines[bdef.name] = compile_behavior(program, bdef.name, behavior_map)
    for agent in program.agents:
        name = agent.behavior
        if name is not None and name not in machines:
            machines[name] = compile_behavior(program, name, behavior_map)
    return machines


def iter_tree(machine: Ihefsm, node_id=None):
    """Pre-order walk yielding (node_id, node)."""
    if node_id is None:
        node_id = machine.root
    node = machine.node(node_id)
    yield node_id, node
    if isinstance(node, SeqNode):
        for child in node.children:
            yield from iter_tree(machine, child)
    elif isinstance(node, DoNode):
        yield from iter_tree(machine, node.child)
    elif isinstance(node, TryInterruptNode):
        yield from iter_tree(machine, node.try_child)
        for _, child in node.handlers:
            yield from iter_tree(machine, child)
    elif isinstance(node, CondNode):
        for _, child in node.branches:
            yield from iter_tree(machine, child)
        if node.else_child is not None:
            yield from iter_tree(machine, node.else_child)


def tree_depth(machine: Ihefsm) -> int:
    """Maximum structural depth over all nodes."""
    return max(meta.depth for meta in machine.meta.values())
