"""Mini concurrent imperative language: AST, parser, and concrete semantics.

Shared by the analyzer and the brute-force interleaving oracle. Programs are
immutable after parsing. Every statement node carries a program-point label,
assigned in preorder per thread; desugared else-branches get an unlabeled
synthetic skip that never appears in proof outlines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


class LangError(Exception):
    pass


class ParseError(LangError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


class EvalOverflow(LangError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Lit:
    n: int


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Expr"
    right: "Expr"


Expr = Union[Lit, VarRef, BinOp]


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    inner: "Cond"


@dataclass(frozen=True)
class And:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class Or:
    left: "Cond"
    right: "Cond"


Cond = Union[BoolLit, Cmp, Not, And, Or]


@dataclass(frozen=True)
class Skip:
    label: int | None  # None marks a synthetic (desugared) skip


@dataclass(frozen=True)
class Assign:
    label: int
    targets: tuple[str, ...]
    exprs: tuple[Expr, ...]


@dataclass(frozen=True)
class Ite:
    label: int
    cond: Cond
    then: "Inst"
    els: "Inst"


@dataclass(frozen=True)
class While:
    label: int
    cond: Cond
    body: "Inst"


@dataclass(frozen=True)
class Seq:
    items: tuple["Inst", ...]


Inst = Union[Skip, Assign, Ite, While, Seq]


@dataclass(frozen=True)
class Thread:
    tid: str
    body: Inst
    rely_vars: frozenset[str]


@dataclass(frozen=True)
class Program:
    variables: tuple[str, ...]  # declaration order
    threads: tuple[Thread, ...]
    pre: Cond
    post: Cond
    locals: dict[str, tuple[str, ...]] = field(default_factory=dict, hash=False)

    def thread(self, tid: str) -> Thread:
        for t in self.threads:
            if t.tid == tid:
                return t
        raise KeyError(tid)


def statements(inst: Inst) -> Iterator[Inst]:
    """Yield every labeled statement node in preorder."""
    if isinstance(inst, Seq):
        for item in inst.items:
            yield from statements(item)
    elif isinstance(inst, Skip):
        if inst.label is not None:
            yield inst
    elif isinstance(inst, Assign):
        yield inst
    elif isinstance(inst, Ite):
        yield inst
        yield from statements(inst.then)
        yield from statements(inst.els)
    elif isinstance(inst, While):
        yield inst
        yield from statements(inst.body)
    else:
        raise TypeError(inst)


def negate(c: Cond) -> Cond:
    """One-level negation push (used by condition filtering and verdicts)."""
    if isinstance(c, BoolLit):
        return BoolLit(not c.value)
    if isinstance(c, Not):
        return c.inner
    if isinstance(c, And):
        return Or(Not(c.left), Not(c.right))
    if isinstance(c, Or):
        return And(Not(c.left), Not(c.right))
    if isinstance(c, Cmp):
        flipped = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
        return Cmp(flipped[c.op], c.left, c.right)
    raise TypeError(c)


def cond_vars(c: Cond) -> set[str]:
    if isinstance(c, BoolLit):
        return set()
    if isinstance(c, Cmp):
        return expr_vars(c.left) | expr_vars(c.right)
    if isinstance(c, Not):
        return cond_vars(c.inner)
    if isinstance(c, (And, Or)):
        return cond_vars(c.left) | cond_vars(c.right)
    raise TypeError(c)


def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Lit):
        return set()
    if isinstance(e, VarRef):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    raise TypeError(e)


def program_literals(p: Program) -> set[int]:
    """All integer literals appearing anywhere in the program."""
    out: set[int] = set()

    def from_expr(e: Expr) -> None:
        if isinstance(e, Lit):
            out.add(e.n)
        elif isinstance(e, BinOp):
            from_expr(e.left)
            from_expr(e.right)

    def from_cond(c: Cond) -> None:
        if isinstance(c, Cmp):
            from_expr(c.left)
            from_expr(c.right)
        elif isinstance(c, Not):
            from_cond(c.inner)
        elif isinstance(c, (And, Or)):
            from_cond(c.left)
            from_cond(c.right)

    def from_inst(i: Inst) -> None:
        if isinstance(i, Seq):
            for item in i.items:
                from_inst(item)
        elif isinstance(i, Assign):
            for e in i.exprs:
                from_expr(e)
        elif isinstance(i, Ite):
            from_cond(i.cond)
            from_inst(i.then)
            from_inst(i.els)
        elif isinstance(i, While):
            from_cond(i.cond)
            from_inst(i.body)

    from_cond(p.pre)
    from_cond(p.post)
    for t in p.threads:
        from_inst(t.body)
    return out


# ---------------------------------------------------------------------------
# Concrete semantics

State = dict  # Var -> int, total over the program's variable set


def _check(n: int) -> int:
    if n < INT_MIN or n > INT_MAX:
        raise EvalOverflow(f"integer overflow: {n}")
    return n


def eval_expr(e: Expr, s: State) -> int:
    if isinstance(e, Lit):
        return e.n
    if isinstance(e, VarRef):
        return s[e.name]
    if isinstance(e, BinOp):
        a = eval_expr(e.left, s)
        b = eval_expr(e.right, s)
        if e.op == "+":
            return _check(a + b)
        if e.op == "-":
            return _check(a - b)
        if e.op == "*":
            return _check(a * b)
        raise ValueError(f"unknown operator {e.op}")
    raise TypeError(e)


_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_cond(c: Cond, s: State) -> bool:
    if isinstance(c, BoolLit):
        return c.value
    if isinstance(c, Cmp):
        return _CMP[c.op](eval_expr(c.left, s), eval_expr(c.right, s))
    if isinstance(c, Not):
        return not eval_cond(c.inner, s)
    if isinstance(c, And):
        return eval_cond(c.left, s) and eval_cond(c.right, s)
    if isinstance(c, Or):
        return eval_cond(c.left, s) or eval_cond(c.right, s)
    raise TypeError(c)


def exec_assign(a: Assign, s: State) -> State:
    """Simultaneous multi-assignment: all RHSs evaluated in the pre-state."""
    values = [eval_expr(e, s) for e in a.exprs]
    out = dict(s)
    for v, n in zip(a.targets, values):
        out[v] = n
    return out


# ---------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>:=|==|!=|<=|>=|&&|\|\||[{}();:,<>!+\-*=])
    """,
    re.VERBOSE,
)

_KEYWORDS = {
    "vars", "local", "pre", "post", "relyvars", "thread",
    "skip", "if", "else", "while", "true", "false",
}


@dataclass
class _Tok:
    kind: str  # 'int' | 'id' | 'op' | 'kw' | 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(lexeme)
        else:
            k = kind
            if kind == "id" and lexeme in _KEYWORDS:
                k = "kw"
            toks.append(_Tok(k, lexeme, line, col))
            col += len(lexeme)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.label = 0  # reset at each thread

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise self.error(f"expected {want!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def accept(self, kind: str, text: str | None = None) -> _Tok | None:
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        return None

    # -- top level ----------------------------------------------------------

    def program(self) -> Program:
        variables: list[str] = []
        locals_: dict[str, list[str]] = {}
        pre: Cond = BoolLit(True)
        post: Cond = BoolLit(True)
        relyvars: dict[str, list[str]] = {}
        threads: list[tuple[str, Inst, _Tok]] = []

        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind != "kw":
                raise self.error("expected a declaration or thread")
            if t.text == "vars":
                self.next()
                for name in self.idlist():
                    if name in variables:
                        raise self.error(f"variable {name!r} declared twice")
                    variables.append(name)
                self.expect("op", ";")
            elif t.text == "local":
                self.next()
                tid = self.expect("id").text
                self.expect("op", ":")
                names = self.idlist()
                for name in names:
                    if name in variables:
                        raise self.error(f"variable {name!r} declared twice")
                    variables.append(name)
                locals_.setdefault(tid, []).extend(names)
                self.expect("op", ";")
            elif t.text == "pre":
                self.next()
                pre = self.cond()
                self.expect("op", ";")
            elif t.text == "post":
                self.next()
                post = self.cond()
                self.expect("op", ";")
            elif t.text == "relyvars":
                self.next()
                tid = self.expect("id").text
                self.expect("op", ":")
                relyvars[tid] = self.idlist()
                self.expect("op", ";")
            elif t.text == "thread":
                tok = self.next()
                tid = self.expect("id").text
                self.label = 0
                body = self.block()
                threads.append((tid, body, tok))
            else:
                raise self.error(f"unexpected keyword {t.text!r}")

        if not threads:
            raise self.error("program has no threads")
        seen = set()
        for tid, _, tok in threads:
            if tid in seen:
                raise ParseError(f"duplicate thread id {tid!r}", tok.line, tok.col)
            seen.add(tid)

        allvars = frozenset(variables)
        built = []
        for tid, body, _ in threads:
            rv = frozenset(relyvars.get(tid, variables))
            built.append(Thread(tid, body, rv))
        prog = Program(
            variables=tuple(variables),
            threads=tuple(built),
            pre=pre,
            post=post,
            locals={t: tuple(v) for t, v in locals_.items()},
        )
        self._validate(prog, allvars, relyvars)
        return prog

    def _validate(self, prog: Program, allvars: frozenset[str],
                  relyvars: dict[str, list[str]]) -> None:
        tids = {t.tid for t in prog.threads}
        for tid in relyvars:
            if tid not in tids:
                raise ParseError(f"relyvars for unknown thread {tid!r}", 1, 1)
        for tid, names in relyvars.items():
            for v in names:
                if v not in allvars:
                    raise ParseError(f"relyvars names undeclared variable {v!r}", 1, 1)
        used = cond_vars(prog.pre) | cond_vars(prog.post)
        for t in prog.threads:
            for st in statements(t.body):
                if isinstance(st, Assign):
                    for v in st.targets:
                        used.add(v)
                    for e in st.exprs:
                        used |= expr_vars(e)
                elif isinstance(st, (Ite, While)):
                    used |= cond_vars(st.cond)
        missing = sorted(used - allvars)
        if missing:
            raise ParseError(f"undeclared variable {missing[0]!r}", 1, 1)

    def idlist(self) -> list[str]:
        names = [self.expect("id").text]
        while self.accept("op", ","):
            names.append(self.expect("id").text)
        return names

    # -- statements ----------------------------------------------------------

    def fresh_label(self) -> int:
        self.label += 1
        return self.label

    def block(self) -> Inst:
        self.expect("op", "{")
        items: list[Inst] = []
        while not self.accept("op", "}"):
            items.append(self.stmt())
        if not items:
            return Skip(self.fresh_label())
        if len(items) == 1:
            return items[0]
        return Seq(tuple(items))

    def stmt(self) -> Inst:
        t = self.peek()
        if t.kind == "kw" and t.text == "skip":
            label = self.fresh_label()
            self.next()
            self.expect("op", ";")
            return Skip(label)
        if t.kind == "kw" and t.text == "if":
            label = self.fresh_label()
            self.next()
            self.expect("op", "(")
            c = self.cond()
            self.expect("op", ")")
            then = self.block()
            if self.accept("kw", "else"):
                els = self.block()
            else:
                els = Skip(None)  # synthetic, no program point
            return Ite(label, c, then, els)
        if t.kind == "kw" and t.text == "while":
            label = self.fresh_label()
            self.next()
            self.expect("op", "(")
            c = self.cond()
            self.expect("op", ")")
            body = self.block()
            return While(label, c, body)
        if t.kind == "id":
            label = self.fresh_label()
            targets = self.idlist()
            self.expect("op", ":=")
            exprs = [self.expr()]
            while self.accept("op", ","):
                exprs.append(self.expr())
            self.expect("op", ";")
            if len(targets) != len(exprs):
                raise self.error(
                    f"assignment arity mismatch: {len(targets)} targets, {len(exprs)} expressions")
            if len(set(targets)) != len(targets):
                raise self.error("assignment targets must be pairwise distinct")
            return Assign(label, tuple(targets), tuple(exprs))
        raise self.error(f"expected a statement, found {t.text!r}")

    # -- conditions and expressions -------------------------------------------

    def cond(self) -> Cond:
        c = self.conj()
        while self.accept("op", "||"):
            c = Or(c, self.conj())
        return c

    def conj(self) -> Cond:
        c = self.cond_atom()
        while self.accept("op", "&&"):
            c = And(c, self.cond_atom())
        return c

    def cond_atom(self) -> Cond:
        t = self.peek()
        if t.kind == "kw" and t.text == "true":
            self.next()
            return BoolLit(True)
        if t.kind == "kw" and t.text == "false":
            self.next()
            return BoolLit(False)
        if t.kind == "op" and t.text == "!":
            self.next()
            return Not(self.cond_atom())
        if t.kind == "op" and t.text == "(":
            # '(' may open a nested condition or a parenthesised expression.
            save = self.pos
            self.next()
            try:
                inner = self.cond()
                self.expect("op", ")")
            except ParseError:
                self.pos = save
                return self.comparison()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text in _CMP:
                self.pos = save
                return self.comparison()
            return inner
        return self.comparison()

    def comparison(self) -> Cond:
        left = self.expr()
        t = self.peek()
        if t.kind != "op" or t.text not in _CMP:
            raise self.error("expected a comparison operator")
        op = self.next().text
        right = self.expr()
        return Cmp(op, left, right)

    def expr(self) -> Expr:
        e = self.term()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in ("+", "-"):
                self.next()
                e = BinOp(t.text, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while self.accept("op", "*"):
            e = BinOp("*", e, self.factor())
        return e

    def factor(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Lit(int(t.text))
        if t.kind == "id":
            self.next()
            return VarRef(t.text)
        if t.kind == "op" and t.text == "-":
            self.next()
            inner = self.factor()
            if isinstance(inner, Lit):
                return Lit(-inner.n)
            return BinOp("-", Lit(0), inner)
        if t.kind == "op" and t.text == "(":
            self.next()
            e = self.expr()
            self.expect("op", ")")
            return e
        raise self.error(f"expected an expression, found {t.text!r}")


def parse_program(text: str) -> Program:
    return _Parser(text).program()


# ---------------------------------------------------------------------------
# Pretty-printer (round-trips through parse_program)


def format_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return str(e.n)
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, BinOp):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    raise TypeError(e)


def format_cond(c: Cond) -> str:
    if isinstance(c, BoolLit):
        return "true" if c.value else "false"
    if isinstance(c, Cmp):
        return f"{format_expr(c.left)} {c.op} {format_expr(c.right)}"
    if isinstance(c, Not):
        return f"!({format_cond(c.inner)})"
    if isinstance(c, And):
        return f"({format_cond(c.left)}) && ({format_cond(c.right)})"
    if isinstance(c, Or):
        return f"({format_cond(c.left)}) || ({format_cond(c.right)})"
    raise TypeError(c)


def format_inst(inst: Inst, indent: int = 0) -> str:
    pad = "    " * indent
    if isinstance(inst, Seq):
        return "\n".join(format_inst(i, indent) for i in inst.items)
    if isinstance(inst, Skip):
        return f"{pad}skip;"
    if isinstance(inst, Assign):
        lhs = ", ".join(inst.targets)
        rhs = ", ".join(format_expr(e) for e in inst.exprs)
        return f"{pad}{lhs} := {rhs};"
    if isinstance(inst, Ite):
        out = f"{pad}if ({format_cond(inst.cond)}) {{\n{format_inst(inst.then, indent + 1)}\n{pad}}}"
        if not (isinstance(inst.els, Skip) and inst.els.label is None):
            out += f" else {{\n{format_inst(inst.els, indent + 1)}\n{pad}}}"
        return out
    if isinstance(inst, While):
        return f"{pad}while ({format_cond(inst.cond)}) {{\n{format_inst(inst.body, indent + 1)}\n{pad}}}"
    raise TypeError(inst)


def format_program(p: Program) -> str:
    lines = []
    globals_ = [v for v in p.variables
                if not any(v in vs for vs in p.locals.values())]
    if globals_:
        lines.append(f"vars {', '.join(globals_)};")
    for tid, vs in p.locals.items():
        lines.append(f"local {tid}: {', '.join(vs)};")
    lines.append(f"pre {format_cond(p.pre)};")
    lines.append(f"post {format_cond(p.post)};")
    for t in p.threads:
        lines.append(f"relyvars {t.tid}: {', '.join(sorted(t.rely_vars))};")
    for t in p.threads:
        lines.append(f"thread {t.tid} {{\n{format_inst(t.body, 1)}\n}}")
    return "\n".join(lines) + "\n"
