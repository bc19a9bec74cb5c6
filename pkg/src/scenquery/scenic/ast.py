"""AST for the supported scenario-language fragment.

Node equality ignores source spans so that parse/print round trips can be
compared structurally.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    col: int

    def __repr__(self):
        return f"<{self.line}:{self.col}>"


NO_SPAN = SourceSpan(0, 0, 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: SourceSpan
    severity: str = "error"  # "error" | "warning"

    def __str__(self):
        return f"{self.span.line}:{self.span.col}: {self.severity}: {self.message}"


def _span_field():
    return field(default=NO_SPAN, compare=False, repr=False)


# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class NumberLit:
    value: float
    is_int: bool = False
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class StringLit:
    value: str
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Name:
    id: str
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Attr:
    base: object
    attr: str
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Call:
    func: object
    args: tuple
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "not" | "-"
    operand: object
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class BinOp:
    op: str  # and or + - * / < <= > >= == !=
    left: object
    right: object
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class DistanceFromTo:
    source: object
    target: object
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class CanSee:
    observer: object
    target: object
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class InRegion:
    item: object
    region: object
    negated: bool = False
    span: SourceSpan = _span_field()


DIST_KINDS = ("Range", "DiscreteRange", "Normal", "TruncatedNormal", "Uniform", "Discrete")


@dataclass(frozen=True)
class DistLit:
    kind: str
    args: tuple
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class DictLit:
    items: tuple  # ((key_expr, value_expr), ...)
    span: SourceSpan = _span_field()


# --------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Do:
    callee: str
    args: tuple = ()
    until: object = None
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Take:
    actions: tuple
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class TryInterrupt:
    try_body: tuple
    handlers: tuple  # ((condition, body), ...) in declaration order
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Conditional:
    branches: tuple  # ((condition, body), ...)
    else_body: tuple | None = None
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Terminate:
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Choose:
    ids: tuple
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Shuffle:
    ids: tuple
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Assignment:
    targets: tuple
    values: tuple
    span: SourceSpan = _span_field()


# --------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class ParamDecl:
    name: str
    value: object
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class BehaviorDef:
    name: str
    params: tuple
    body: tuple
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class Specifier:
    kind: str  # "on" | "facing" | "with_behavior" | "at"
    args: tuple
    span: SourceSpan = _span_field()


@dataclass(frozen=True)
class AgentDecl:
    name: str
    cls: str
    specifiers: tuple = ()
    span: SourceSpan = _span_field()

    @property
    def behavior(self):
        for spec in self.specifiers:
            if spec.kind == "with_behavior":
                return spec.args[0]
        return None

    @property
    def behavior_args(self):
        for spec in self.specifiers:
            if spec.kind == "with_behavior":
                return spec.args[1]
        return ()


@dataclass(frozen=True)
class Program:
    params: tuple = ()
    behaviors: tuple = ()  # BehaviorDef in declaration order
    agents: tuple = ()
    requires: tuple = ()
    terminate_when: object = None
    terminate_after: object = None  # seconds, NumberLit
    span: SourceSpan = _span_field()

    def behavior(self, name: str) -> BehaviorDef | None:
        for b in self.behaviors:
            if b.name == name:
                return b
        return None

    def agent(self, name: str) -> AgentDecl | None:
        for a in self.agents:
            if a.name == name:
                return a
        return None

    def param(self, name: str) -> ParamDecl | None:
        for p in self.params:
            if p.name == name:
                return p
        return None


def walk_expr(expr):
    """Yield expr and every sub-expression."""
    yield expr
    children = ()
    if isinstance(expr, (BinOp,)):
        children = (expr.left, expr.right)
    elif isinstance(expr, UnaryOp):
        children = (expr.operand,)
    elif isinstance(expr, Attr):
        children = (expr.base,)
    elif isinstance(expr, Call):
        children = (expr.func,) + tuple(expr.args)
    elif isinstance(expr, DistanceFromTo):
        children = (expr.source, expr.target)
    elif isinstance(expr, CanSee):
        children = (expr.observer, expr.target)
    elif isinstance(expr, InRegion):
        children = (expr.item, expr.region)
    elif isinstance(expr, DistLit):
        children = tuple(expr.args)
    elif isinstance(expr, DictLit):
        children = tuple(x for pair in expr.items for x in pair)
    for child in children:
        yield from walk_expr(child)


def walk_statements(body):
    """Yield every statement in a body, recursing into nested bodies."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, TryInterrupt):
            yield from walk_statements(stmt.try_body)
            for _, handler_body in stmt.handlers:
                yield from walk_statements(handler_body)
        elif isinstance(stmt, Conditional):
            for _, branch_body in stmt.branches:
                yield from walk_statements(branch_body)
            if stmt.else_body:
                yield from walk_statements(stmt.else_body)
