from .ast import (
    AgentDecl,
    Assignment,
    BehaviorDef,
    BinOp,
    BoolLit,
    Call,
    CanSee,
    Choose,
    Conditional,
    Diagnostic,
    DictLit,
    DistanceFromTo,
    DistLit,
    Do,
    InRegion,
    Name,
    NumberLit,
    ParamDecl,
    Program,
    Shuffle,
    SourceSpan,
    Specifier,
    StringLit,
    Take,
    Terminate,
    TryInterrupt,
    UnaryOp,
)
from .lexer import Token, tokenize
from .parser import parse_program, try_parse_program
from .printer import pretty_print

__all__ = [
    "AgentDecl", "Assignment", "BehaviorDef", "BinOp", "BoolLit", "Call",
    "CanSee", "Choose", "Conditional", "Diagnostic", "DictLit",
    "DistanceFromTo", "DistLit", "Do", "InRegion", "Name", "NumberLit",
    "ParamDecl", "Program", "Shuffle", "SourceSpan", "Specifier",
    "StringLit", "Take", "Terminate", "TryInterrupt", "UnaryOp",
    "Token", "tokenize", "parse_program", "try_parse_program", "pretty_print",
]
