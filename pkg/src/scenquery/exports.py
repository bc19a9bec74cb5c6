"""Artifact exports: PlantUML statecharts and verifier-style module text.

Both renderings mirror the hierarchical module scheme: one composite state
(or module) per structural node, named Kind_depth_index, with atomic leaves
named after their behavior.  The verifier text is a debug artifact for
inspection and interchange; this engine never executes it.
"""
from __future__ import annotations

from .ihefsm import (
    AtomicNode,
    CondNode,
    DoNode,
    Ihefsm,
    SeqNode,
    TerminateNode,
    TryInterruptNode,
)

VERIFIER_PREFIX = "nusc_"


def _atom_base(behavior_name: str) -> str:
    if behavior_name.endswith("Behavior") and len(behavior_name) > len("Behavior"):
        return behavior_name[: -len("Behavior")]
    return behavior_name


def _alias(machine: Ihefsm, node_id: int) -> str:
    node = machine.node(node_id)
    meta = machine.meta[node_id]
    if isinstance(node, AtomicNode):
        base = _atom_base(node.behavior_name)
    else:
        base = meta.label
    return f"{base.lower()}_{meta.depth}_{meta.index}"


def _display(machine: Ihefsm, node_id: int) -> str:
    node = machine.node(node_id)
    if isinstance(node, AtomicNode):
        return node.behavior_name
    return machine.meta[node_id].label


def _wrapper_alias(kind: str, coords) -> str:
    return f"{kind.lower()}_{coords[0]}_{coords[1]}"


class _Chart:
    def __init__(self, machine: Ihefsm):
        self.machine = machine
        self.lines: list = []
        self.depth = 0

    def emit(self, text: str):
        self.lines.append("  " * self.depth + text)

    def open_state(self, display: str, alias: str):
        self.emit(f'state "{display}" as {alias} {{')
        self.depth += 1

    def close_state(self):
        self.depth -= 1
        self.emit("}")

    def render(self) -> str:
        machine = self.machine
        root_alias = machine.behavior_name.lower()
        self.emit("@startuml")
        self.emit(f"[*] --> {root_alias}")
        self.open_state(machine.behavior_name, root_alias)
        self.seq_region(machine.root)
        self.close_state()
        self.emit("@enduml")
        return "\n".join(self.lines) + "\n"

    def seq_region(self, seq_id: int):
        """Render a sequence's children inside the current region, chained
        by completion transitions."""
        node = self.machine.node(seq_id)
        assert isinstance(node, SeqNode)
        aliases = []
        for child in node.children:
            aliases.append(self.state(child))
        self.emit(f"[*] --> {aliases[0]}")
        for prev, nxt in zip(aliases, aliases[1:]):
            self.emit(f"{prev} --> {nxt}")
        self.emit(f"{aliases[-1]} --> [*]")

    def state(self, node_id: int) -> str:
        node = self.machine.node(node_id)
        alias = _alias(self.machine, node_id)
        if isinstance(node, AtomicNode):
            self.emit(f'state "{_display(self.machine, node_id)}" as {alias}')
            self.emit(f"{alias} --> {alias} : / {node.action}")
            return alias
        if isinstance(node, TerminateNode):
            self.emit(f'state "Terminate" as {alias}')
            return alias
        if isinstance(node, DoNode):
            self.open_state("Do", alias)
            inner = self.machine.node(node.child)
            if isinstance(inner, SeqNode):
                self.seq_region(node.child)
            else:
                child_alias = self.state(node.child)
                self.emit(f"[*] --> {child_alias}")
            self.close_state()
            self.emit(f"{alias} --> {alias} : {node.until.id}")
            return alias
        if isinstance(node, TryInterruptNode):
            self.open_state("TryInterrupt", alias)
            try_alias = _wrapper_alias("Try", node.try_wrapper)
            self.open_state("Try", try_alias)
            self.seq_region(node.try_child)
            self.close_state()
            handler_aliases = []
            for (cond, child), coords in zip(node.handlers, node.handler_wrappers):
                handler_alias = _wrapper_alias("Interrupt", coords)
                handler_aliases.append((handler_alias, cond))
                self.open_state("Interrupt", handler_alias)
                self.seq_region(child)
                self.close_state()
            self.emit(f"[*] --> {try_alias}")
            for handler_alias, cond in handler_aliases:
                self.emit(f"{try_alias} --> {handler_alias} : {cond.id}")
                self.emit(f"{handler_alias} --> {try_alias}")
            self.close_state()
            return alias
        if isinstance(node, CondNode):
            self.open_state("If", alias)
            branch_aliases = []
            for (cond, child), coords in zip(node.branches, node.branch_wrappers):
                branch_alias = _wrapper_alias("Branch", coords)
                branch_aliases.append((branch_alias, cond.id))
                self.open_state("Branch", branch_alias)
                self.seq_region(child)
                self.close_state()
            if node.else_child is not None:
                branch_alias = _wrapper_alias("Else", node.else_wrapper)
                branch_aliases.append((branch_alias, "else"))
                self.open_state("Else", branch_alias)
                self.seq_region(node.else_child)
                self.close_state()
            for branch_alias, label in branch_aliases:
                self.emit(f"[*] --> {branch_alias} : {label}")
            self.close_state()
            return alias
        raise TypeError(f"cannot render {node!r}")


def export_statechart(machine: Ihefsm) -> str:
    """PlantUML state diagram: one composite state per non-atomic node,
    condition ids on transitions, actions emitted by the deepest states."""
    return _Chart(machine).render()


# --------------------------------------------------------------------------
# Verifier-style module text


_TYPE_BLOCK = [
    "type atomic_t = input_generator.atomic_t;",
    "type data_t = input_generator.data_t;",
    "type status_t = input_generator.status_t;",
    "type reset_t = input_generator.reset_t;",
]


class _Verifier:
    def __init__(self, machine: Ihefsm, prefix: str):
        self.machine = machine
        self.prefix = prefix
        self.inputs = [f"{prefix}{c.id}" for c in machine.conditions]
        self.chunks: list = []

    def module_name(self, node_id: int) -> str:
        node = self.machine.node(node_id)
        meta = self.machine.meta[node_id]
        if isinstance(node, AtomicNode):
            return f"{_atom_base(node.behavior_name)}_{meta.depth}_{meta.index}"
        return f"{meta.label}_{meta.depth}_{meta.index}"

    def status_var(self, name: str) -> str:
        return f"status_{name.lower()}"

    def header(self, lines, extra_types=()):
        lines.extend(f"    {t}" for t in _TYPE_BLOCK)
        for t in extra_types:
            lines.append(f"    {t}")
        lines.append("")
        for inp in self.inputs:
            lines.append(f"    input {inp} : data_t;")
        lines.append("    sharedvar hfsm_trace : atomic_t;")
        lines.append("    sharedvar reset_target : reset_t;")
        lines.append("")

    def instance_block(self, child_name: str, child_status: str) -> list:
        lines = [f"    instance {child_name.lower()}: {child_name}("]
        lines.append("        hfsm_trace : (hfsm_trace),")
        lines.append("        reset_target : (reset_target),")
        for inp in self.inputs:
            lines.append(f"        {inp} : ({inp}),")
        lines.append(f"        {child_status} : ({child_status})")
        lines.append("    );")
        return lines

    def reset_proc(self, name, own_status, children) -> list:
        meta_suffix = name.split("_", 1)[1] if "_" in name else name.lower()
        modifies = ", ".join([own_status] + [c.lower() for c, _ in children])
        lines = [f"    procedure reset_{meta_suffix}()", f"        modifies {modifies};", "    {"]
        lines.append(f"        {own_status} = start;")
        for child_name, _ in children:
            suffix = child_name.split("_", 1)[1] if "_" in child_name else child_name.lower()
            lines.append(f"        call {child_name.lower()}.reset_{suffix}();")
        lines.append("    }")
        return lines

    def emit_module(self, node_id: int):
        node = self.machine.node(node_id)
        name = self.module_name(node_id)
        own_status = self.status_var(name)
        lines = [f"module {name} {{"]
        if isinstance(node, AtomicNode):
            self.header(lines)
            lines.append(f"    output {own_status} : status_t;")
            lines.append("")
            lines.extend(self.reset_proc(name, own_status, []))
            lines.append("")
            lines.append("    init {")
            lines.append(f"        {own_status} = start;")
            lines.append("    }")
            lines.append("    next {")
            lines.append(f"        hfsm_trace' = {node.behavior_name};")
            lines.append(f"        {own_status}' = progress;")
            lines.append("    }")
            lines.append("}")
            self.chunks.append("\n".join(lines))
            return
        if isinstance(node, TerminateNode):
            self.header(lines)
            lines.append(f"    output {own_status} : status_t;")
            lines.append("")
            lines.append("    init {")
            lines.append(f"        {own_status} = start;")
            lines.append("    }")
            lines.append("    next {")
            lines.append("        hfsm_trace' = END;")
            lines.append(f"        {own_status}' = end;")
            lines.append("    }")
            lines.append("}")
            self.chunks.append("\n".join(lines))
            return
        if isinstance(node, DoNode):
            children = self.seq_modules(node.child)
            if len(children) == 1:
                child_name, child_status = children[0]
                self.header(lines)
                lines.append(f"    var {child_status} : status_t;")
                lines.append(f"    output {own_status} : status_t;")
                lines.append("")
                lines.extend(self.instance_block(child_name, child_status))
                lines.append("")
                lines.extend(self.reset_proc(name, own_status, children))
                lines.append("")
                lines.append("    init {")
                lines.append(f"        {own_status} = start;")
                lines.append("    }")
                lines.append("    next {")
                lines.append("        case")
                lines.append(f"            ({own_status} != end) : {{")
                lines.append(f"                next({child_name.lower()});")
                lines.append("")
                lines.append(f"                if ({self.prefix}{node.until.id}) {{")
                lines.append(f"                    {own_status}' = end;")
                lines.append("                } else {")
                lines.append(f"                    {own_status}' = progress;")
                lines.append("                }")
                lines.append("            }")
                lines.append("        esac")
                lines.append("    }")
                lines.append("}")
                self.chunks.append("\n".join(lines))
            else:
                self.container_module(name, own_status, children,
                                      until=f"{self.prefix}{node.until.id}")
            return
        if isinstance(node, TryInterruptNode):
            self.try_interrupt_module(node_id, node, name, own_status)
            return
        if isinstance(node, CondNode):
            children = []
            for (cond, child), coords in zip(node.branches, node.branch_wrappers):
                children.extend(self.seq_modules(child))
            if node.else_child is not None:
                children.extend(self.seq_modules(node.else_child))
            self.container_module(name, own_status, children, until=None)
            return
        raise TypeError(f"cannot emit {node!r}")

    def seq_modules(self, seq_id: int) -> list:
        """Emit modules below a sequence; returns (name, status) per child."""
        node = self.machine.node(seq_id)
        if not isinstance(node, SeqNode):
            self.emit_module(seq_id)
            name = self.module_name(seq_id)
            return [(name, self.status_var(name))]
        out = []
        for child in node.children:
            out.extend(self.seq_modules(child))
        return out

    def container_module(self, name, own_status, children, until=None):
        """Sequence container: tracks the active child, advancing on child
        completion (Do-with-body and conditional containers share this)."""
        lines = [f"module {name} {{"]
        self.header(lines)
        for _, child_status in children:
            lines.append(f"    var {child_status} : status_t;")
        lines.append(f"    var active_child : integer;")
        lines.append(f"    output {own_status} : status_t;")
        lines.append("")
        for child_name, child_status in children:
            lines.extend(self.instance_block(child_name, child_status))
        lines.append("")
        lines.extend(self.reset_proc(name, own_status, children))
        lines.append("")
        lines.append("    init {")
        lines.append(f"        {own_status} = start;")
        lines.append("        active_child = 0;")
        lines.append("    }")
        lines.append("    next {")
        lines.append("        case")
        lines.append(f"            ({own_status} != end) : {{")
        for idx, (child_name, child_status) in enumerate(children):
            guard = f"(active_child == {idx})"
            lines.append(f"                case {guard} : {{")
            lines.append(f"                    next({child_name.lower()});")
            if idx + 1 < len(children):
                lines.append(f"                    if ({child_status}' == end) {{")
                lines.append(f"                        active_child' = {idx + 1};")
                lines.append("                    }")
            else:
                lines.append(f"                    if ({child_status}' == end) {{")
                lines.append(f"                        {own_status}' = end;")
                lines.append("                    }")
            lines.append("                } esac")
        if until is not None:
            lines.append(f"                if ({until}) {{")
            lines.append(f"                    {own_status}' = end;")
            lines.append("                }")
        lines.append("            }")
        lines.append("        esac")
        lines.append("    }")
        lines.append("}")
        self.chunks.append("\n".join(lines))

    def wrapper_module(self, name, own_status, children):
        """Try/Interrupt wrapper: runs its body, completing when it does."""
        lines = [f"module {name} {{"]
        self.header(lines)
        for _, child_status in children:
            lines.append(f"    var {child_status} : status_t;")
        lines.append(f"    output {own_status} : status_t;")
        lines.append("")
        for child_name, child_status in children:
            lines.extend(self.instance_block(child_name, child_status))
        lines.append("")
        lines.extend(self.reset_proc(name, own_status, children))
        lines.append("")
        lines.append("    init {")
        lines.append(f"        {own_status} = start;")
        lines.append("    }")
        last_status = children[-1][1]
        lines.append("    next {")
        lines.append("        case")
        lines.append(f"            ({own_status} != end) : {{")
        for child_name, _ in children:
            lines.append(f"                next({child_name.lower()});")
        lines.append("")
        lines.append(f"                if ({last_status}' == end) {{")
        lines.append(f"                    {own_status}' = end;")
        lines.append("                } else {")
        lines.append(f"                    {own_status}' = progress;")
        lines.append("                }")
        lines.append("            }")
        lines.append("        esac")
        lines.append("    }")
        lines.append("}")
        self.chunks.append("\n".join(lines))

    def try_interrupt_module(self, node_id, node: TryInterruptNode, name, own_status):
        try_children = self.seq_modules(node.try_child)
        try_name = f"Try_{node.try_wrapper[0]}_{node.try_wrapper[1]}"
        self.wrapper_module(try_name, self.status_var(try_name), try_children)
        handler_names = []
        for (cond, child), coords in zip(node.handlers, node.handler_wrappers):
            handler_children = self.seq_modules(child)
            handler_name = f"Interrupt_{coords[0]}_{coords[1]}"
            self.wrapper_module(handler_name, self.status_var(handler_name),
                                handler_children)
            handler_names.append((handler_name, cond))

        states = [f"TRY_{node.try_wrapper[0]}_{node.try_wrapper[1]}"] + [
            f"INT_{coords[0]}_{coords[1]}" for coords in node.handler_wrappers
        ]
        enum_text = f"    type state_t = enum {{{', '.join(states)}}};"
        lines = [f"module {name} {{"]
        self.header(lines, extra_types=[enum_text.strip()])
        all_children = [(try_name, self.status_var(try_name))] + [
            (h, self.status_var(h)) for h, _ in handler_names
        ]
        for _, child_status in all_children:
            lines.append(f"    var {child_status} : status_t;")
        lines.append(f"    output {own_status} : status_t;")
        lines.append("")
        meta = self.machine.meta[node_id]
        state_var = f"state_{meta.depth}_{meta.index}"
        lines.append(f"    var {state_var} : state_t;")
        lines.append("")
        for child_name, child_status in all_children:
            lines.extend(self.instance_block(child_name, child_status))
        lines.append("")
        lines.extend(self.reset_proc(name, own_status, all_children))
        lines.append("")
        lines.append("    init {")
        lines.append(f"        {own_status} = start;")
        lines.append(f"        {state_var} = {states[0]};")
        lines.append("    }")
        lines.append("    next {")
        lines.append("        case")
        lines.append(f"            ({own_status} != end) : {{")
        lines.append("                case")
        try_status = self.status_var(try_name)
        for (handler_name, cond), state in zip(handler_names, states[1:]):
            handler_status = self.status_var(handler_name)
            lines.append(f"                    ({state_var} == {state}) : {{")
            lines.append(f"                        next({handler_name.lower()});")
            lines.append("                        case")
            lines.append(f"                            ({handler_status}' != end) : {{")
            lines.append(f"                                {state_var}' = {state};")
            lines.append("                            }")
            lines.append("                            default : {")
            lines.append(f"                                {state_var}' = {states[0]};")
            lines.append("                            }")
            lines.append("                        esac")
            lines.append(f"                        {own_status}' = progress;")
            lines.append("                    }")
        lines.append(f"                    ({state_var} == {states[0]}) : {{")
        lines.append(f"                        next({try_name.lower()});")
        lines.append(f"                        if ({try_status}' == end) {{")
        lines.append(f"                            {own_status}' = end;")
        lines.append("                        } else {")
        lines.append(f"                            {own_status}' = progress;")
        lines.append("                            case")
        for (handler_name, cond), state in zip(handler_names, states[1:]):
            lines.append(f"                                ({self.prefix}{cond.id}) : {{")
            lines.append(f"                                    {state_var}' = {state};")
            lines.append("                                }")
        lines.append("                                default : {")
        lines.append(f"                                    {state_var}' = {states[0]};")
        lines.append("                                }")
        lines.append("                            esac")
        lines.append("                        }")
        lines.append("                    }")
        lines.append("                esac")
        lines.append("")
        lines.append("                case")
        lines.append("                    (reset_target == no_reset) : {")
        for (handler_name, cond), state in zip(handler_names, states[1:]):
            suffix = handler_name.split("_", 1)[1]
            lines.append("                        case")
            lines.append(
                f"                            ({state_var} == {state} && {state_var}' == {states[0]}) : {{"
            )
            lines.append(
                f"                                reset_target' = reset_interrupt_{suffix};"
            )
            lines.append("                            }")
            lines.append("                        esac")
        lines.append("                    }")
        for (handler_name, cond), state in zip(handler_names, states[1:]):
            suffix = handler_name.split("_", 1)[1]
            lines.append(f"                    (reset_target == reset_interrupt_{suffix}) : {{")
            lines.append(f"                        call {handler_name.lower()}.reset_{suffix}();")
            lines.append("                        reset_target' = no_reset;")
            lines.append("                    }")
        lines.append("                esac")
        lines.append("            }")
        lines.append("        esac")
        lines.append("    }")
        lines.append("}")
        self.chunks.append("\n".join(lines))

    def behavior_module(self):
        machine = self.machine
        children = self.seq_modules(machine.root)
        lines = [f"module {machine.behavior_name} {{"]
        self.header(lines)
        for _, child_status in children:
            lines.append(f"    var {child_status} : status_t;")
        lines.append("")
        for child_name, child_status in children:
            lines.extend(self.instance_block(child_name, child_status))
        lines.append("    instance terminate: Terminate(")
        lines.append("        hfsm_trace : (hfsm_trace)")
        lines.append("    );")
        lines.append("")
        lines.append("    init {")
        lines.append("        reset_target = no_reset;")
        lines.append("    }")
        last_status = children[-1][1]
        lines.append("    next {")
        lines.append("        case")
        lines.append(f"            ({last_status} != end) : {{")
        for child_name, _ in children:
            lines.append(f"                next({child_name.lower()});")
        lines.append("            }")
        lines.append("            default : {")
        lines.append("                next(terminate);")
        lines.append("            }")
        lines.append("        esac")
        lines.append("    }")
        lines.append("}")
        self.chunks.append("\n".join(lines))

    def render(self) -> str:
        self.behavior_module()
        # children were emitted depth-first before the behavior module,
        # matching the deepest-module-first layout of generated encodings
        return "\n\n".join(self.chunks) + "\n"


def emit_verifier_text(machine: Ihefsm, prefix: str = VERIFIER_PREFIX) -> str:
    """Debug rendering of the machine as hierarchical verifier modules."""
    return _Verifier(machine, prefix).render()
