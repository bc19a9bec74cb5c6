"""Recursive-descent parser producing a validated Program."""
from __future__ import annotations

from ..config import BehaviorMap
from ..errors import ParseError
from .ast import (
    AgentDecl,
    Assignment,
    Attr,
    BehaviorDef,
    BinOp,
    BoolLit,
    Call,
    CanSee,
    Choose,
    Conditional,
    DIST_KINDS,
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
    walk_expr,
    walk_statements,
)
from .lexer import tokenize

SPECIFIER_KEYWORDS = ("on", "facing", "at", "with")
LTL_WORDS = ("always", "eventually", "next", "implies")

COMPARISON_OPS = ("<", "<=", ">", ">=", "==", "!=")


class _Syntax(Exception):
    def __init__(self, message, span, unsupported=False):
        super().__init__(message)
        self.message = message
        self.span = span
        self.unsupported = unsupported


class _Parser:
    def __init__(self, tokens, behavior_map):
        self.tokens = tokens
        self.i = 0
        self.behavior_map = behavior_map
        self.diagnostics: list = []

    # -- token plumbing ----------------------------------------------------

    def peek(self, k=0):
        j = min(self.i + k, len(self.tokens) - 1)
        return self.tokens[j]

    def at(self, type_, value=None, k=0):
        tok = self.peek(k)
        return tok.type == type_ and (value is None or tok.value == value)

    def at_kw(self, value, k=0):
        return self.at("KEYWORD", value, k)

    def advance(self):
        tok = self.tokens[self.i]
        if self.i < len(self.tokens) - 1:
            self.i += 1
        return tok

    def accept(self, type_, value=None):
        if self.at(type_, value):
            return self.advance()
        return None

    def expect(self, type_, value=None, what=None):
        if self.at(type_, value):
            return self.advance()
        tok = self.peek()
        wanted = what or (value if value else type_)
        raise _Syntax(f"expected {wanted}, found {tok.value!r}" if tok.value else
                      f"expected {wanted}, found {tok.type}", tok.span)

    def unsupported(self, feature, span):
        raise _Syntax(f"unsupported construct: {feature}", span, unsupported=True)

    # -- program -----------------------------------------------------------

    def parse(self):
        params, behaviors, agents, requires = [], [], [], []
        terminate_when = None
        terminate_after = None
        while not self.at("EOF"):
            if self.accept("NEWLINE") or self.accept("INDENT") or self.accept("DEDENT"):
                continue
            try:
                if self.at("RESERVED"):
                    tok = self.peek()
                    self.unsupported(f"{tok.value!r} statement", tok.span)
                elif self.at_kw("param"):
                    params.append(self.parse_param())
                elif self.at_kw("behavior"):
                    behaviors.append(self.parse_behavior())
                elif self.at_kw("require"):
                    requires.append(self.parse_require())
                elif self.at_kw("terminate"):
                    kind, value = self.parse_terminate_top()
                    if kind == "when":
                        terminate_when = value
                    else:
                        terminate_after = value
                elif self.at("NAME") and self.at("OP", "=", 1) and self.at_kw("new", 2):
                    agents.append(self.parse_agent())
                else:
                    tok = self.peek()
                    raise _Syntax(f"unexpected {tok.value!r} at top level", tok.span)
            except _Syntax as err:
                self.diagnostics.append(
                    Diagnostic(err.message, err.span,
                               severity="error")
                )
                self.synchronize()
        program = Program(
            params=tuple(params),
            behaviors=tuple(behaviors),
            agents=tuple(agents),
            requires=tuple(requires),
            terminate_when=terminate_when,
            terminate_after=terminate_after,
        )
        self.validate(program)
        return program

    def synchronize(self):
        depth = 0
        while not self.at("EOF"):
            tok = self.advance()
            if tok.type == "INDENT":
                depth += 1
            elif tok.type == "DEDENT":
                depth = max(0, depth - 1)
            elif tok.type == "NEWLINE" and depth == 0:
                return

    # -- declarations ------------------------------------------------------

    def parse_param(self):
        start = self.expect("KEYWORD", "param")
        name = self.expect("NAME").value
        self.expect("OP", "=")
        value = self.parse_expr()
        self.expect("NEWLINE")
        return ParamDecl(name=name, value=value, span=start.span)

    def parse_behavior(self):
        start = self.expect("KEYWORD", "behavior")
        name = self.expect("NAME").value
        self.expect("OP", "(")
        params = []
        while not self.at("OP", ")"):
            params.append(self.expect("NAME").value)
            if not self.accept("OP", ","):
                break
        self.expect("OP", ")")
        body = self.parse_block()
        return BehaviorDef(name=name, params=tuple(params), body=tuple(body), span=start.span)

    def parse_require(self):
        start = self.expect("KEYWORD", "require")
        nxt = self.peek()
        if nxt.type == "NAME" and nxt.value in LTL_WORDS:
            self.unsupported("temporal-logic require", nxt.span)
        expr = self.parse_expr()
        if self.at_kw("until"):
            self.unsupported("temporal-logic require", self.peek().span)
        self.expect("NEWLINE")
        return expr

    def parse_terminate_top(self):
        self.expect("KEYWORD", "terminate")
        if self.accept("KEYWORD", "when"):
            expr = self.parse_expr()
            self.expect("NEWLINE")
            return "when", expr
        if self.accept("KEYWORD", "after"):
            value = self.parse_expr()
            if self.at("NAME", "seconds"):
                self.advance()
            self.expect("NEWLINE")
            return "after", value
        tok = self.peek()
        raise _Syntax("expected 'when' or 'after' after top-level terminate", tok.span)

    def parse_agent(self):
        name_tok = self.expect("NAME")
        self.expect("OP", "=")
        self.expect("KEYWORD", "new")
        cls = self.expect("NAME").value
        specifiers = []
        continued = 0
        while True:
            self.accept("OP", ",")
            if self.at("KEYWORD") and self.peek().value in SPECIFIER_KEYWORDS:
                specifiers.append(self.parse_specifier())
                continue
            if self.at("NEWLINE"):
                # specifier list continuing on an indented line
                k = 1
                if self.at("INDENT", k=1):
                    k = 2
                nxt = self.peek(k)
                if (nxt.type == "KEYWORD" and nxt.value in SPECIFIER_KEYWORDS) or (
                    nxt.type == "OP" and nxt.value == ","
                ):
                    self.advance()
                    if self.accept("INDENT"):
                        continued += 1
                    continue
            break
        self.expect("NEWLINE")
        for _ in range(continued):
            self.expect("DEDENT")
        return AgentDecl(name=name_tok.value, cls=cls, specifiers=tuple(specifiers),
                         span=name_tok.span)

    def parse_specifier(self):
        tok = self.advance()
        if tok.value == "on":
            return Specifier("on", (self.parse_additive(),), span=tok.span)
        if tok.value == "facing":
            return Specifier("facing", (self.parse_additive(),), span=tok.span)
        if tok.value == "at":
            self.expect("OP", "(")
            x = self.parse_expr()
            self.expect("OP", ",")
            y = self.parse_expr()
            self.expect("OP", ")")
            return Specifier("at", (x, y), span=tok.span)
        # with
        if self.at("NAME", "behavior"):
            self.advance()
            name = self.expect("NAME").value
            args = ()
            if self.accept("OP", "("):
                args = tuple(self.parse_args())
                self.expect("OP", ")")
            return Specifier("with_behavior", (name, args), span=tok.span)
        if self.at_kw("behavior"):
            self.advance()
            name = self.expect("NAME").value
            args = ()
            if self.accept("OP", "("):
                args = tuple(self.parse_args())
                self.expect("OP", ")")
            return Specifier("with_behavior", (name, args), span=tok.span)
        prop = self.expect("NAME").value
        value = self.parse_additive()
        return Specifier("with_prop", (prop, value), span=tok.span)

    # -- statements ----------------------------------------------------------

    def parse_block(self):
        self.expect("OP", ":")
        self.expect("NEWLINE")
        self.expect("INDENT")
        body = []
        while not self.at("DEDENT") and not self.at("EOF"):
            if self.accept("NEWLINE"):
                continue
            body.append(self.parse_statement())
        self.expect("DEDENT")
        if not body:
            tok = self.peek()
            raise _Syntax("empty statement sequence", tok.span)
        return body

    def parse_statement(self):
        tok = self.peek()
        if tok.type == "RESERVED":
            self.unsupported(f"{tok.value!r} statement", tok.span)
        if self.at_kw("do"):
            return self.parse_do()
        if self.at_kw("take"):
            return self.parse_take()
        if self.at_kw("try"):
            return self.parse_try()
        if self.at_kw("if"):
            return self.parse_conditional()
        if self.at_kw("terminate"):
            self.advance()
            self.expect("NEWLINE")
            return Terminate(span=tok.span)
        if self.at_kw("choose") or self.at_kw("shuffle"):
            kw = self.advance()
            ids = [self.expect("NAME").value]
            while self.accept("OP", ","):
                ids.append(self.expect("NAME").value)
            self.expect("NEWLINE")
            cls = Choose if kw.value == "choose" else Shuffle
            return cls(ids=tuple(ids), span=kw.span)
        if tok.type == "NAME":
            return self.parse_assignment()
        raise _Syntax(f"unexpected {tok.value!r} in behavior body", tok.span)

    def parse_do(self):
        start = self.expect("KEYWORD", "do")
        callee = self.expect("NAME").value
        args = ()
        if self.accept("OP", "("):
            args = tuple(self.parse_args())
            self.expect("OP", ")")
        until = None
        if self.accept("KEYWORD", "until"):
            until = self.parse_expr()
        self.expect("NEWLINE")
        return Do(callee=callee, args=args, until=until, span=start.span)

    def parse_take(self):
        start = self.expect("KEYWORD", "take")
        actions = [self.parse_postfix()]
        while self.accept("OP", ","):
            actions.append(self.parse_postfix())
        self.expect("NEWLINE")
        return Take(actions=tuple(actions), span=start.span)

    def parse_try(self):
        start = self.expect("KEYWORD", "try")
        try_body = self.parse_block()
        handlers = []
        while self.at_kw("interrupt"):
            self.advance()
            self.expect("KEYWORD", "when")
            condition = self.parse_expr()
            body = self.parse_block()
            handlers.append((condition, tuple(body)))
        if not handlers:
            raise _Syntax("try block requires at least one interrupt handler", start.span)
        return TryInterrupt(try_body=tuple(try_body), handlers=tuple(handlers), span=start.span)

    def parse_conditional(self):
        start = self.expect("KEYWORD", "if")
        branches = [(self.parse_expr(), tuple(self.parse_block()))]
        else_body = None
        while self.at_kw("elif"):
            self.advance()
            branches.append((self.parse_expr(), tuple(self.parse_block())))
        if self.at_kw("else"):
            self.advance()
            else_body = tuple(self.parse_block())
        return Conditional(branches=tuple(branches), else_body=else_body, span=start.span)

    def parse_assignment(self):
        start = self.peek()
        targets = [self.expect("NAME").value]
        while self.accept("OP", ","):
            targets.append(self.expect("NAME").value)
        self.expect("OP", "=", what="'=' in assignment")
        values = [self.parse_expr()]
        while self.accept("OP", ","):
            values.append(self.parse_expr())
        self.expect("NEWLINE")
        return Assignment(targets=tuple(targets), values=tuple(values), span=start.span)

    # -- expressions ---------------------------------------------------------

    def parse_args(self):
        args = []
        while not self.at("OP", ")"):
            args.append(self.parse_expr())
            if not self.accept("OP", ","):
                break
        return args

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.at_kw("or"):
            tok = self.advance()
            left = BinOp("or", left, self.parse_and(), span=tok.span)
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at_kw("and"):
            tok = self.advance()
            left = BinOp("and", left, self.parse_not(), span=tok.span)
        return left

    def parse_not(self):
        if self.at_kw("not") and not self.at_kw("in", 1):
            tok = self.advance()
            return UnaryOp("not", self.parse_not(), span=tok.span)
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        while True:
            if self.at("OP") and self.peek().value in COMPARISON_OPS:
                tok = self.advance()
                left = BinOp(tok.value, left, self.parse_additive(), span=tok.span)
            elif self.at_kw("in"):
                tok = self.advance()
                left = InRegion(left, self.parse_additive(), negated=False, span=tok.span)
            elif self.at_kw("not") and self.at_kw("in", 1):
                tok = self.advance()
                self.advance()
                left = InRegion(left, self.parse_additive(), negated=True, span=tok.span)
            elif self.at_kw("can") and self.at_kw("see", 1):
                tok = self.advance()
                self.advance()
                left = CanSee(left, self.parse_additive(), span=tok.span)
            else:
                return left

    def parse_additive(self):
        left = self.parse_term()
        while self.at("OP") and self.peek().value in ("+", "-"):
            tok = self.advance()
            left = BinOp(tok.value, left, self.parse_term(), span=tok.span)
        return left

    def parse_term(self):
        left = self.parse_unary()
        while self.at("OP") and self.peek().value in ("*", "/"):
            tok = self.advance()
            left = BinOp(tok.value, left, self.parse_unary(), span=tok.span)
        return left

    def parse_unary(self):
        if self.at("OP", "-"):
            tok = self.advance()
            return UnaryOp("-", self.parse_unary(), span=tok.span)
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            if self.at("OP", "."):
                self.advance()
                attr = self.expect("NAME").value
                expr = Attr(expr, attr, span=self.peek().span)
            elif self.at("OP", "("):
                self.advance()
                args = tuple(self.parse_args())
                close = self.expect("OP", ")")
                if isinstance(expr, Name) and expr.id in DIST_KINDS:
                    expr = DistLit(kind=expr.id, args=args, span=close.span)
                else:
                    expr = Call(expr, args, span=close.span)
            else:
                return expr

    def parse_primary(self):
        tok = self.peek()
        if tok.type == "NUMBER":
            self.advance()
            is_int = "." not in tok.value and "e" not in tok.value and "E" not in tok.value
            return NumberLit(float(tok.value), is_int=is_int, span=tok.span)
        if tok.type == "STRING":
            self.advance()
            return StringLit(tok.value, span=tok.span)
        if tok.type == "NAME":
            self.advance()
            if tok.value == "True":
                return BoolLit(True, span=tok.span)
            if tok.value == "False":
                return BoolLit(False, span=tok.span)
            return Name(tok.value, span=tok.span)
        if tok.type == "RESERVED":
            self.unsupported(f"{tok.value!r} expression", tok.span)
        if self.at_kw("distance"):
            self.advance()
            if self.accept("KEYWORD", "from"):
                source = self.parse_additive()
                self.expect("KEYWORD", "to")
                target = self.parse_additive()
            else:
                self.expect("KEYWORD", "to")
                source = Name("self", span=tok.span)
                target = self.parse_additive()
            return DistanceFromTo(source, target, span=tok.span)
        if self.at("OP", "("):
            self.advance()
            expr = self.parse_expr()
            self.expect("OP", ")")
            return expr
        if self.at("OP", "{"):
            self.advance()
            items = []
            while not self.at("OP", "}"):
                key = self.parse_expr()
                self.expect("OP", ":")
                value = self.parse_expr()
                items.append((key, value))
                if not self.accept("OP", ","):
                    break
            self.expect("OP", "}")
            return DictLit(items=tuple(items), span=tok.span)
        raise _Syntax(f"expected expression, found {tok.value or tok.type!r}", tok.span)

    # -- validation ----------------------------------------------------------

    def validate(self, program: Program):
        diag = self.diagnostics
        if diag:
            return  # syntax errors already recorded; skip semantic checks
        if not program.agents:
            diag.append(Diagnostic("program declares no agents", SourceSpan(0, 0, 1, 1)))
        egos = [a for a in program.agents if a.name == "ego"]
        if program.agents and len(egos) != 1:
            diag.append(
                Diagnostic(
                    f"expected exactly one agent named 'ego', found {len(egos)}",
                    program.agents[0].span,
                )
            )
        seen = set()
        for agent in program.agents:
            if agent.name in seen:
                diag.append(Diagnostic(f"duplicate agent {agent.name!r}", agent.span))
            seen.add(agent.name)
            n_behavior = sum(1 for s in agent.specifiers if s.kind == "with_behavior")
            if n_behavior > 1:
                diag.append(
                    Diagnostic(f"agent {agent.name!r} has multiple behaviors", agent.span)
                )

        behavior_names = {b.name for b in program.behaviors}
        dupes = len(behavior_names) != len(program.behaviors)
        if dupes:
            diag.append(Diagnostic("duplicate behavior definition", program.behaviors[0].span))

        def known_behavior(name):
            return name in behavior_names or self.behavior_map.is_atomic(name)

        for agent in program.agents:
            name = agent.behavior
            if name is not None and not known_behavior(name):
                diag.append(
                    Diagnostic(f"unknown behavior {name!r} for agent {agent.name!r}", agent.span)
                )

        calls: dict = {}
        for bdef in program.behaviors:
            callees = set()
            for stmt in walk_statements(bdef.body):
                if isinstance(stmt, Do):
                    if not known_behavior(stmt.callee):
                        diag.append(
                            Diagnostic(f"unknown behavior {stmt.callee!r}", stmt.span)
                        )
                    if stmt.callee in behavior_names:
                        callees.add(stmt.callee)
                    for arg in stmt.args:
                        for sub in walk_expr(arg):
                            if isinstance(sub, DistLit):
                                diag.append(
                                    Diagnostic(
                                        "distribution literal not allowed as a behavior argument",
                                        stmt.span,
                                    )
                                )
                if isinstance(stmt, Take):
                    for action in stmt.actions:
                        for sub in walk_expr(action):
                            if isinstance(sub, DistLit):
                                diag.append(
                                    Diagnostic(
                                        "distribution literal not allowed in take", stmt.span
                                    )
                                )
            calls[bdef.name] = callees

        # reject recursive behavior invocation
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {name: WHITE for name in calls}

        def dfs(name):
            color[name] = GRAY
            for callee in calls.get(name, ()):
                if color.get(callee) == GRAY:
                    return True
                if color.get(callee) == WHITE and dfs(callee):
                    return True
            color[name] = BLACK
            return False

        for name in calls:
            if color[name] == WHITE and dfs(name):
                diag.append(
                    Diagnostic(f"recursive behavior cycle through {name!r}",
                               program.behavior(name).span)
                )
                break


def try_parse_program(source: str, behavior_map: BehaviorMap | None = None):
    """Parse, returning (program_or_None, diagnostics)."""
    behavior_map = behavior_map or BehaviorMap()
    tokens = tokenize(source)
    parser = _Parser(tokens, behavior_map)
    program = parser.parse()
    if parser.diagnostics:
        return None, parser.diagnostics
    return program, []


def parse_program(source: str, behavior_map: BehaviorMap | None = None) -> Program:
    """Parse `source` or raise ParseError carrying all diagnostics."""
    program, diagnostics = try_parse_program(source, behavior_map)
    if program is None:
        raise ParseError(diagnostics)
    return program
