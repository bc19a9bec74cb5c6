"""Canonical text rendering of a Program; inverse of the parser."""
from __future__ import annotations

from .ast import (
    AgentDecl,
    Assignment,
    Attr,
    BinOp,
    BoolLit,
    Call,
    CanSee,
    Choose,
    Conditional,
    DictLit,
    DistanceFromTo,
    DistLit,
    Do,
    InRegion,
    Name,
    NumberLit,
    Program,
    Shuffle,
    StringLit,
    Take,
    Terminate,
    TryInterrupt,
    UnaryOp,
)

INDENT = "  "

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_UNARY = 7
_PREC_ATOM = 8

_BINOP_PREC = {
    "or": _PREC_OR,
    "and": _PREC_AND,
    "<": _PREC_CMP, "<=": _PREC_CMP, ">": _PREC_CMP, ">=": _PREC_CMP,
    "==": _PREC_CMP, "!=": _PREC_CMP,
    "+": _PREC_ADD, "-": _PREC_ADD,
    "*": _PREC_MUL, "/": _PREC_MUL,
}


def _number(lit: NumberLit) -> str:
    if lit.is_int:
        return str(int(lit.value))
    return repr(lit.value)


def _string(lit: StringLit) -> str:
    body = lit.value.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{body}'"


def format_expr(expr, parent_prec=0) -> str:
    text, prec = _render(expr)
    if prec < parent_prec:
        return f"({text})"
    return text


def _render(expr):
    if isinstance(expr, NumberLit):
        return _number(expr), _PREC_ATOM
    if isinstance(expr, StringLit):
        return _string(expr), _PREC_ATOM
    if isinstance(expr, BoolLit):
        return ("True" if expr.value else "False"), _PREC_ATOM
    if isinstance(expr, Name):
        return expr.id, _PREC_ATOM
    if isinstance(expr, Attr):
        return f"{format_expr(expr.base, _PREC_ATOM)}.{expr.attr}", _PREC_ATOM
    if isinstance(expr, Call):
        args = ", ".join(format_expr(a) for a in expr.args)
        return f"{format_expr(expr.func, _PREC_ATOM)}({args})", _PREC_ATOM
    if isinstance(expr, DistLit):
        args = ", ".join(format_expr(a) for a in expr.args)
        return f"{expr.kind}({args})", _PREC_ATOM
    if isinstance(expr, DictLit):
        items = ", ".join(
            f"{format_expr(k)}: {format_expr(v)}" for k, v in expr.items
        )
        return f"{{{items}}}", _PREC_ATOM
    if isinstance(expr, UnaryOp):
        if expr.op == "not":
            return f"not {format_expr(expr.operand, _PREC_NOT)}", _PREC_NOT
        return f"-{format_expr(expr.operand, _PREC_UNARY)}", _PREC_UNARY
    if isinstance(expr, BinOp):
        prec = _BINOP_PREC[expr.op]
        left = format_expr(expr.left, prec)
        right = format_expr(expr.right, prec + 1)
        return f"{left} {expr.op} {right}", prec
    if isinstance(expr, DistanceFromTo):
        source = format_expr(expr.source, _PREC_ADD)
        target = format_expr(expr.target, _PREC_ADD)
        return f"distance from {source} to {target}", _PREC_CMP
    if isinstance(expr, CanSee):
        lhs = format_expr(expr.observer, _PREC_ADD)
        rhs = format_expr(expr.target, _PREC_ADD)
        return f"{lhs} can see {rhs}", _PREC_CMP
    if isinstance(expr, InRegion):
        lhs = format_expr(expr.item, _PREC_ADD)
        rhs = format_expr(expr.region, _PREC_ADD)
        op = "not in" if expr.negated else "in"
        return f"{lhs} {op} {rhs}", _PREC_CMP
    raise TypeError(f"cannot print expression {expr!r}")


def _emit_body(body, level, out):
    for stmt in body:
        _emit_statement(stmt, level, out)


def _emit_statement(stmt, level, out):
    pad = INDENT * level
    if isinstance(stmt, Do):
        args = ", ".join(format_expr(a) for a in stmt.args)
        line = f"{pad}do {stmt.callee}({args})"
        if stmt.until is not None:
            line += f" until {format_expr(stmt.until)}"
        out.append(line)
    elif isinstance(stmt, Take):
        actions = ", ".join(format_expr(a) for a in stmt.actions)
        out.append(f"{pad}take {actions}")
    elif isinstance(stmt, TryInterrupt):
        out.append(f"{pad}try:")
        _emit_body(stmt.try_body, level + 1, out)
        for condition, body in stmt.handlers:
            out.append(f"{pad}interrupt when {format_expr(condition)}:")
            _emit_body(body, level + 1, out)
    elif isinstance(stmt, Conditional):
        first = True
        for condition, body in stmt.branches:
            kw = "if" if first else "elif"
            out.append(f"{pad}{kw} {format_expr(condition)}:")
            _emit_body(body, level + 1, out)
            first = False
        if stmt.else_body:
            out.append(f"{pad}else:")
            _emit_body(stmt.else_body, level + 1, out)
    elif isinstance(stmt, Terminate):
        out.append(f"{pad}terminate")
    elif isinstance(stmt, Choose):
        out.append(f"{pad}choose {', '.join(stmt.ids)}")
    elif isinstance(stmt, Shuffle):
        out.append(f"{pad}shuffle {', '.join(stmt.ids)}")
    elif isinstance(stmt, Assignment):
        targets = ", ".join(stmt.targets)
        values = ", ".join(format_expr(v) for v in stmt.values)
        out.append(f"{pad}{targets} = {values}")
    else:
        raise TypeError(f"cannot print statement {stmt!r}")


def _specifier_text(spec):
    if spec.kind == "on":
        return f"on {format_expr(spec.args[0])}"
    if spec.kind == "facing":
        return f"facing {format_expr(spec.args[0])}"
    if spec.kind == "at":
        return f"at ({format_expr(spec.args[0])}, {format_expr(spec.args[1])})"
    if spec.kind == "with_behavior":
        name, args = spec.args
        rendered = ", ".join(format_expr(a) for a in args)
        return f"with behavior {name}({rendered})"
    prop, value = spec.args
    return f"with {prop} {format_expr(value)}"


def pretty_print(program: Program) -> str:
    out: list = []
    for param in program.params:
        out.append(f"param {param.name} = {format_expr(param.value)}")
    if program.params:
        out.append("")
    for bdef in program.behaviors:
        params = ", ".join(bdef.params)
        out.append(f"behavior {bdef.name}({params}):")
        _emit_body(bdef.body, 1, out)
        out.append("")
    for agent in program.agents:
        parts = [f"{agent.name} = new {agent.cls}"]
        if agent.specifiers:
            parts.append(" " + ", ".join(_specifier_text(s) for s in agent.specifiers))
        out.append("".join(parts))
    if program.agents and (program.requires or program.terminate_when is not None
                           or program.terminate_after is not None):
        out.append("")
    for req in program.requires:
        out.append(f"require {format_expr(req)}")
    if program.terminate_when is not None:
        out.append(f"terminate when {format_expr(program.terminate_when)}")
    if program.terminate_after is not None:
        out.append(f"terminate after {format_expr(program.terminate_after)} seconds")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"
