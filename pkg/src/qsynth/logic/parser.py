"""Tokenizer and recursive-descent parsers for QDDC formulas and spec files.

Operator precedence, tightest first: unary (!, <>, [], postfix *), ^, &&,
||, =>, <=>; binary operators associate to the right. `--` starts a line
comment. The full grammar is documented in docs/grammar.md.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast as A
from . import templates as T
from .ast import Formula, Prop


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


RESERVED = {
    "true", "false", "pt", "ext", "slen", "scount", "sdur",
    "ex", "all", "exists", "forall", "pref", "ppref", "define", "as", "infer",
}

_PUNCT = [
    "<=>", "[[", "]]", "[]", "<>", "&&", "||", "=>", ">=", "<=", ">>",
    "(", ")", "[", "]", "{", "}", "<", ">", "=", "&", "|", "!", "^",
    "*", ".", ",", ";", ":", "+", "-",
]


@dataclass
class Token:
    kind: str       # 'id', 'int', or the punct string itself
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("id", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token(p, p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Stream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def accept(self, kind: str) -> Token | None:
        if self.peek().kind == kind:
            return self.next()
        return None

    def error(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)


@dataclass
class MacroDef:
    name: str
    params: tuple[str, ...]
    body: list[Token]
    line: int


class Env:
    """Name resolution for formula parsing."""

    def __init__(self, declared: set[str], constants: dict[str, int] | None = None,
                 macros: dict[str, MacroDef] | None = None):
        self.declared = set(declared)
        self.constants = dict(constants or {})
        self.macros = dict(macros or {})
        self.bound: list[str] = []

    def lookup_var(self, name: str, tok: Token) -> str:
        if name in self.bound or name in self.declared:
            return name
        raise ParseError(f"undeclared variable {name!r}", tok.line, tok.col)


CMP_TOKENS = {"<": "<", "<=": "<=", "=": "=", ">=": ">=", ">": ">"}


class FormulaParser:
    def __init__(self, stream: _Stream, env: Env):
        self.s = stream
        self.env = env

    # -- integer constant expressions ------------------------------------

    def int_expr(self) -> int:
        val = self.int_term()
        while self.s.peek().kind in ("+", "-"):
            op = self.s.next().kind
            rhs = self.int_term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def int_term(self) -> int:
        val = self.int_atom()
        while self.s.peek().kind == "*":
            self.s.next()
            val *= self.int_atom()
        return val

    def int_atom(self) -> int:
        t = self.s.peek()
        if t.kind == "int":
            self.s.next()
            return int(t.text)
        if t.kind == "id":
            if t.text in self.env.constants:
                self.s.next()
                return self.env.constants[t.text]
            raise ParseError(f"{t.text!r} is not a declared constant", t.line, t.col)
        if t.kind == "(":
            self.s.next()
            v = self.int_expr()
            self.s.expect(")")
            return v
        if t.kind == "-":
            self.s.next()
            return -self.int_atom()
        self.s.error("expected an integer expression")

    def bound(self) -> int:
        t = self.s.peek()
        v = self.int_expr()
        if v < 0:
            raise ParseError(f"counting bounds must be non-negative (got {v})", t.line, t.col)
        return v

    def _looks_like_int_expr(self) -> bool:
        t = self.s.peek()
        if t.kind == "int" or (t.kind == "-" and self.s.peek(1).kind == "int"):
            return True
        return t.kind == "id" and t.text in self.env.constants

    # -- propositions ------------------------------------------------------

    def prop(self) -> Prop:
        return self.prop_iff()

    def prop_iff(self) -> Prop:
        left = self.prop_implies()
        if self.s.accept("<=>"):
            return A.PIff(left, self.prop_iff())
        return left

    def prop_implies(self) -> Prop:
        left = self.prop_or()
        if self.s.accept("=>"):
            return A.PImplies(left, self.prop_implies())
        return left

    def prop_or(self) -> Prop:
        left = self.prop_and()
        while self.s.peek().kind in ("||", "|"):
            self.s.next()
            left = A.POr(left, self.prop_and())
        return left

    def prop_and(self) -> Prop:
        left = self.prop_unary()
        while self.s.peek().kind in ("&&", "&"):
            self.s.next()
            left = A.PAnd(left, self.prop_unary())
        return left

    def prop_unary(self) -> Prop:
        t = self.s.peek()
        if t.kind == "!":
            self.s.next()
            return A.PNot(self.prop_unary())
        if t.kind == "(":
            self.s.next()
            p = self.prop()
            self.s.expect(")")
            return p
        if t.kind == "int" and t.text in ("0", "1"):
            self.s.next()
            return A.PConst(t.text == "1")
        if t.kind == "id":
            if t.text == "true":
                self.s.next()
                return A.TRUE_P
            if t.text == "false":
                self.s.next()
                return A.FALSE_P
            self.s.next()
            return A.PVar(self.env.lookup_var(t.text, t))
        self.s.error("expected a proposition")

    # -- formulas -----------------------------------------------------------

    def formula(self) -> Formula:
        left = self.f_implies()
        if self.s.accept("<=>"):
            return A.FIff(left, self.formula())
        return left

    def f_implies(self) -> Formula:
        left = self.f_or()
        if self.s.accept("=>"):
            return A.FImplies(left, self.f_implies())
        return left

    def f_or(self) -> Formula:
        left = self.f_and()
        if self.s.peek().kind in ("||", "|"):
            self.s.next()
            return A.FOr(left, self.f_or())
        return left

    def f_and(self) -> Formula:
        left = self.f_chop()
        if self.s.peek().kind in ("&&", "&"):
            self.s.next()
            return A.FAnd(left, self.f_and())
        return left

    def f_chop(self) -> Formula:
        left = self.f_unary()
        if self.s.accept("^"):
            return A.Chop(left, self.f_chop())
        return left

    def f_unary(self) -> Formula:
        t = self.s.peek()
        if t.kind == "!":
            self.s.next()
            return A.FNot(self.f_unary())
        if t.kind == "<>":
            self.s.next()
            return A.Diamond(self.f_unary())
        if t.kind == "[]":
            self.s.next()
            return A.Box(self.f_unary())
        return self.f_postfix()

    def f_postfix(self) -> Formula:
        f = self.f_atom()
        while True:
            t = self.s.peek()
            if t.kind == "*":
                self.s.next()
                f = A.Star(f)
            elif t.kind == "=" and isinstance(f, A.Unit):
                # {P} =n=> {Q} : lag sugar
                self.s.next()
                n = self.bound()
                self.s.expect("=>")
                self.s.expect("{")
                q = self.prop()
                self.s.expect("}")
                f = T.lag(f.prop, q, n)
            elif t.kind == "<=" and isinstance(f, A.Unit):
                # {P} <=n= {Q} : tracks sugar
                self.s.next()
                n = self.bound()
                self.s.expect("=")
                self.s.expect("{")
                q = self.prop()
                self.s.expect("}")
                f = T.tracks(f.prop, q, n)
            else:
                return f

    def f_atom(self) -> Formula:
        t = self.s.peek()
        if t.kind == "(":
            self.s.next()
            f = self.formula()
            self.s.expect(")")
            return f
        if t.kind == "<":
            self.s.next()
            p = self.prop()
            self.s.expect(">")
            return A.PointProp(p)
        if t.kind == "[[":
            self.s.next()
            p = self.prop()
            self.s.expect("]]")
            return A.All(p)
        if t.kind == "[":
            self.s.next()
            p = self.prop()
            self.s.expect("]")
            return A.AlmostAll(p)
        if t.kind == "{":
            self.s.next()
            p = self.prop()
            self.s.expect("}")
            return A.Unit(p)
        if t.kind == "id":
            return self.f_ident(self.s.next())
        self.s.error("expected a formula")

    def f_ident(self, t: Token) -> Formula:
        name = t.text
        if name == "true":
            return A.TRUE_F
        if name == "false":
            return A.FALSE_F
        if name == "pt":
            return A.Pt()
        if name == "ext":
            return A.Ext()
        if name == "slen":
            op = self.cmp_op()
            return A.SLen(op, self.bound())
        if name in ("scount", "sdur"):
            p = self.prop_unary()
            op = self.cmp_op()
            b = self.bound()
            return A.SCount(p, op, b) if name == "scount" else A.SDur(p, op, b)
        if name in ("ex", "exists", "all", "forall"):
            vt = self.s.expect("id")
            if vt.text in self.env.declared:
                raise ParseError(f"quantified variable {vt.text!r} shadows a declared variable",
                                 vt.line, vt.col)
            self.s.expect(".")
            self.env.bound.append(vt.text)
            try:
                body = self.formula()
            finally:
                self.env.bound.pop()
            node = A.Exists if name in ("ex", "exists") else A.Forall
            return node(vt.text, body)
        if name in ("pref", "ppref"):
            self.s.expect("(")
            body = self.formula()
            self.s.expect(")")
            return A.Pref(body) if name == "pref" else A.PPref(body)
        if name in self.env.macros:
            return self.macro_call(self.env.macros[name], t)
        if name in T.template_names():
            return self.template_call(name, t)
        if name == "atmost":
            self.s.expect("(")
            i = self.int_expr()
            props = []
            while self.s.accept(","):
                props.append(self.prop())
            self.s.expect(")")
            try:
                return A.at_last(T.atmost(i, props))
            except T.TemplateError as e:
                raise ParseError(str(e), t.line, t.col) from None
        # bare proposition in formula position: "holds at the current point";
        # formula-level connectives commute with the lift, so the tight
        # prop_unary suffices here
        self.s.pos -= 1
        return A.at_last(self.prop_unary())

    def cmp_op(self) -> str:
        t = self.s.peek()
        if t.kind in CMP_TOKENS:
            self.s.next()
            return CMP_TOKENS[t.kind]
        self.s.error("expected a comparison operator")

    def call_args(self) -> list:
        """Parse '(' arg, ... ')' where each arg is an int expression or prop."""
        self.s.expect("(")
        args: list = []
        if self.s.peek().kind != ")":
            while True:
                if self._looks_like_int_expr():
                    args.append(self.int_expr())
                else:
                    args.append(self.prop())
                if not self.s.accept(","):
                    break
        self.s.expect(")")
        return args

    def template_call(self, name: str, t: Token) -> Formula:
        args = self.call_args()
        try:
            out = T.template(name, args)
        except T.TemplateError as e:
            raise ParseError(str(e), t.line, t.col) from None
        if isinstance(out, Prop):
            for v in sorted(out.variables()):
                self.env.lookup_var(v, t)
            return A.at_last(out)
        for v in sorted(out.free_variables()):
            self.env.lookup_var(v, t)
        return out

    def macro_call(self, macro: MacroDef, t: Token) -> Formula:
        args = self.call_args()
        if len(args) != len(macro.params):
            raise ParseError(
                f"macro {macro.name!r} expects {len(macro.params)} arguments, got {len(args)}",
                t.line, t.col)
        sub = Env(self.env.declared, self.env.constants, self.env.macros)
        sub.bound = list(self.env.bound)
        int_params = {}
        prop_params = {}
        for param, arg in zip(macro.params, args):
            if isinstance(arg, int):
                int_params[param] = arg
            else:
                prop_params[param] = arg
        sub.constants.update(int_params)
        sub.declared |= set(prop_params)
        inner = FormulaParser(_Stream(list(macro.body) + [Token("eof", "", t.line, t.col)]), sub)
        body = inner.formula()
        if inner.s.peek().kind != "eof":
            bad = inner.s.peek()
            raise ParseError(f"trailing tokens in macro {macro.name!r} body", bad.line, bad.col)
        for param, prop in prop_params.items():
            body = _substitute_prop(body, param, prop)
        return body


def _substitute_prop(f: Formula, name: str, replacement: Prop) -> Formula:
    """Replace every occurrence of variable `name` by a proposition."""

    def in_prop(p: Prop) -> Prop:
        if isinstance(p, A.PVar):
            return replacement if p.name == name else p
        if isinstance(p, A.PConst):
            return p
        if isinstance(p, A.PNot):
            return A.PNot(in_prop(p.arg))
        return type(p)(in_prop(p.left), in_prop(p.right))

    def rec(g: Formula) -> Formula:
        if isinstance(g, (A.Exists, A.Forall)):
            if g.var == name:
                return g
            return type(g)(g.var, rec(g.body))
        if isinstance(g, (A.FTrue, A.FFalse, A.Pt, A.Ext, A.SLen)):
            return g
        if isinstance(g, (A.PointProp, A.AlmostAll, A.All, A.Unit)):
            return type(g)(in_prop(g.prop))
        if isinstance(g, (A.SCount, A.SDur)):
            return type(g)(in_prop(g.prop), g.op, g.bound)
        if isinstance(g, (A.FNot, A.Star, A.Diamond, A.Box, A.Pref, A.PPref)):
            return type(g)(rec(g.arg))
        return type(g)(rec(g.left), rec(g.right))

    return rec(f)


def parse_formula(text: str, declared: set[str],
                  constants: dict[str, int] | None = None,
                  macros: dict[str, MacroDef] | None = None) -> Formula:
    """Parse a standalone QDDC formula over the declared variables."""
    stream = _Stream(tokenize(text))
    parser = FormulaParser(stream, Env(declared, constants, macros))
    f = parser.formula()
    if stream.peek().kind != "eof":
        stream.error("trailing input after formula")
    return f


def parse_prop(text: str, declared: set[str]) -> Prop:
    stream = _Stream(tokenize(text))
    parser = FormulaParser(stream, Env(declared))
    p = parser.prop()
    if stream.peek().kind != "eof":
        stream.error("trailing input after proposition")
    return p
