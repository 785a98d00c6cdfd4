"""DCSynth-style synthesis specification files.

A spec file declares the controller interface (inputs, outputs, auxiliary
environment variables), named integer constants, formula macros, indicator
definitions (output variables forced to witness a past-time formula),
assumptions, requirements, and a priority-ordered list of soft requirement
groups. parse_spec resolves everything into a SynthSpec with macros inlined
and constants substituted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast as A
from .ast import Formula, Prop
from .parser import (Env, FormulaParser, MacroDef, ParseError, Token,
                     _Stream, tokenize)
from ..automata.dfa import VarOrder

SECTION_KEYWORDS = {
    "INTERFACESPEC", "SOFTREQS", "CONSTANTS", "AUXVARS", "DEFINE",
    "INDICATORS", "ASSUME", "REQUIRES", "SYNTHESIZE",
}


@dataclass(frozen=True)
class SynthSpec:
    """The synthesis problem: interface, hard parts, indicators and softs."""

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]               # as declared; includes indicator outputs
    aux: tuple[str, ...]
    indicators: tuple[tuple[str, Formula], ...]
    assumptions: tuple[Formula, ...]
    requirements: tuple[Formula, ...]
    soft: tuple[tuple[Prop, ...], ...]     # priority groups, highest first
    constants: dict[str, int] = field(default_factory=dict)

    @property
    def witnesses(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.indicators)

    @property
    def game_outputs(self) -> tuple[str, ...]:
        wit = set(self.witnesses)
        return tuple(o for o in self.outputs if o not in wit)

    def var_order(self) -> VarOrder:
        return VarOrder.make(inputs=self.inputs, aux=self.aux,
                             outputs=self.game_outputs, witnesses=self.witnesses)

    def hard_formula(self) -> Formula:
        """pref(/\\ ASSUME) => /\\ REQUIRES when assumptions exist, else /\\ REQUIRES."""
        req = A.f_and_all(list(self.requirements))
        if not self.assumptions:
            return req
        return A.FImplies(A.Pref(A.f_and_all(list(self.assumptions))), req)

    def indicator_formula(self) -> Formula:
        """pref of the conjunction of (w_i at the last point <=> D_i)."""
        if not self.indicators:
            return A.TRUE_F
        parts = [A.FIff(A.at_last(A.PVar(w)), d) for w, d in self.indicators]
        return A.Pref(A.f_and_all(parts))

    def all_declared(self) -> set[str]:
        return set(self.inputs) | set(self.outputs) | set(self.aux)


def _split_sections(tokens: list[Token]) -> tuple[str, dict[str, list[Token]], Token]:
    s = _Stream(tokens)
    t = s.expect("id")
    if t.text != "BEGIN":
        raise ParseError("spec file must start with BEGIN QDDCSYNTH", t.line, t.col)
    t = s.expect("id")
    if t.text != "QDDCSYNTH":
        raise ParseError("expected QDDCSYNTH after BEGIN", t.line, t.col)
    name_tok = s.expect("id")

    sections: dict[str, list[Token]] = {}
    current: str | None = None
    depth = 0
    end_tok = None
    while True:
        tok = s.next()
        if tok.kind == "eof":
            raise ParseError("missing END QDDCSYNTH", tok.line, tok.col)
        if tok.kind == "(":
            depth += 1
        elif tok.kind == ")":
            depth -= 1
        if tok.kind == "id" and depth == 0:
            if tok.text == "END":
                nxt = s.expect("id")
                if nxt.text != "QDDCSYNTH":
                    raise ParseError("expected QDDCSYNTH after END", nxt.line, nxt.col)
                end_tok = tok
                break
            if tok.text in SECTION_KEYWORDS:
                if tok.text in sections:
                    raise ParseError(f"duplicate section {tok.text}", tok.line, tok.col)
                sections[tok.text] = []
                current = tok.text
                continue
        if current is None:
            raise ParseError(f"unexpected token {tok.text!r} before first section",
                             tok.line, tok.col)
        sections[current].append(tok)
    return name_tok.text, sections, end_tok


def _stream_of(tokens: list[Token], at: Token) -> _Stream:
    return _Stream(tokens + [Token("eof", "", at.line, at.col)])


def parse_spec(text: str) -> SynthSpec:
    tokens = tokenize(text)
    name, sections, end_tok = _split_sections(tokens)

    inputs: list[str] = []
    outputs: list[str] = []
    aux: list[str] = []
    declared: set[str] = set()

    def declare(tok: Token, into: list[str]):
        if tok.text in declared:
            raise ParseError(f"duplicate declaration of {tok.text!r}", tok.line, tok.col)
        if tok.text in SECTION_KEYWORDS or tok.text in ("BEGIN", "END", "QDDCSYNTH"):
            raise ParseError(f"{tok.text!r} is reserved", tok.line, tok.col)
        declared.add(tok.text)
        into.append(tok.text)

    # INTERFACESPEC
    iface = sections.get("INTERFACESPEC")
    if iface is None:
        raise ParseError("missing INTERFACESPEC section", end_tok.line, end_tok.col)
    s = _stream_of(iface, end_tok)
    while s.peek().kind != "eof":
        if s.accept(";"):
            continue
        var = s.expect("id")
        s.expect(":")
        kind = s.expect("id")
        if kind.text == "INPUT":
            declare(var, inputs)
        elif kind.text == "OUTPUT":
            declare(var, outputs)
            if s.peek().kind == "id" and s.peek().text == "MONITOR":
                s.next()
                s.expect("id")  # monitor annotation token, accepted and ignored
        else:
            raise ParseError(f"expected INPUT or OUTPUT, found {kind.text!r}",
                             kind.line, kind.col)

    # AUXVARS
    s = _stream_of(sections.get("AUXVARS", []), end_tok)
    while s.peek().kind != "eof":
        if s.accept(";") or s.accept(","):
            continue
        declare(s.expect("id"), aux)

    # CONSTANTS
    constants: dict[str, int] = {}
    s = _stream_of(sections.get("CONSTANTS", []), end_tok)
    while s.peek().kind != "eof":
        if s.accept(";") or s.accept(","):
            continue
        cname = s.expect("id")
        if cname.text in constants:
            raise ParseError(f"duplicate constant {cname.text!r}", cname.line, cname.col)
        s.expect("=")
        neg = s.accept("-") is not None
        val = s.peek()
        if val.kind != "int":
            raise ParseError(f"constant {cname.text!r} must be an integer", val.line, val.col)
        s.next()
        constants[cname.text] = -int(val.text) if neg else int(val.text)

    # DEFINE
    macros: dict[str, MacroDef] = {}
    infer_name: str | None = None
    s = _stream_of(sections.get("DEFINE", []), end_tok)
    while s.peek().kind != "eof":
        if s.accept(";"):
            continue
        kw = s.expect("id")
        if kw.text == "infer":
            infer_name = s.expect("id").text
            as_tok = s.expect("id")
            if as_tok.text != "as":
                raise ParseError("expected 'as' after infer name", as_tok.line, as_tok.col)
            continue
        if kw.text != "define":
            raise ParseError(f"expected 'define', found {kw.text!r}", kw.line, kw.col)
        mname = s.expect("id")
        if mname.text in macros:
            raise ParseError(f"duplicate macro {mname.text!r}", mname.line, mname.col)
        s.expect("(")
        params: list[str] = []
        if s.peek().kind != ")":
            while True:
                params.append(s.expect("id").text)
                if not s.accept(","):
                    break
        s.expect(")")
        as_tok = s.expect("id")
        if as_tok.text != "as":
            raise ParseError("expected 'as' in macro definition", as_tok.line, as_tok.col)
        body: list[Token] = []
        while s.peek().kind != ";":
            if s.peek().kind == "eof":
                raise ParseError(f"macro {mname.text!r} body not terminated by ';'",
                                 mname.line, mname.col)
            body.append(s.next())
        s.next()
        macros[mname.text] = MacroDef(mname.text, tuple(params), body, mname.line)

    def formula_env() -> Env:
        return Env(declared, constants, macros)

    def parse_formula_list(toks: list[Token]) -> list[Formula]:
        out: list[Formula] = []
        s = _stream_of(toks, end_tok)
        while s.peek().kind != "eof":
            if s.accept(";") or s.accept(","):
                continue
            parser = FormulaParser(s, formula_env())
            out.append(parser.formula())
        return out

    # INDICATORS (witness variables must be declared outputs)
    indicators: list[tuple[str, Formula]] = []
    s = _stream_of(sections.get("INDICATORS", []), end_tok)
    witness_names: set[str] = set()
    while s.peek().kind != "eof":
        if s.accept(";") or s.accept(","):
            continue
        wtok = s.expect("id")
        if wtok.text not in outputs:
            raise ParseError(f"indicator {wtok.text!r} must be declared as an OUTPUT",
                             wtok.line, wtok.col)
        if wtok.text in witness_names:
            raise ParseError(f"duplicate indicator {wtok.text!r}", wtok.line, wtok.col)
        s.expect(":")
        env = formula_env()
        parser = FormulaParser(s, env)
        d = parser.formula()
        witness_names.add(wtok.text)
        indicators.append((wtok.text, d))
    for wname, d in indicators:
        bad = d.free_variables() & witness_names
        if bad:
            raise ParseError(f"indicator {wname!r} may not reference indicator "
                             f"variables {sorted(bad)}", end_tok.line, end_tok.col)

    assumptions = parse_formula_list(sections.get("ASSUME", []))
    requirements = parse_formula_list(sections.get("REQUIRES", []))

    # SOFTREQS: priority levels separated by >>, members of a level by ','
    soft: list[tuple[Prop, ...]] = []
    s = _stream_of(sections.get("SOFTREQS", []), end_tok)

    _INFIX = ("=>", "<=>", "||", "|", "&&", "&")

    def parse_group(s: _Stream) -> tuple[Prop, ...]:
        parser = FormulaParser(s, formula_env())
        if s.peek().kind == "(":
            save = s.pos
            s.next()
            try:
                members = [parser.prop()]
                while s.accept(","):
                    members.append(parser.prop())
                if s.peek().kind == ")" and not (
                        len(members) == 1 and s.peek(1).kind in _INFIX):
                    s.next()
                    return tuple(members)
            except ParseError:
                pass
            # plain parenthesized prop that continues with an operator
            s.pos = save
        return (parser.prop(),)

    while s.peek().kind != "eof":
        if s.accept(";"):
            continue
        soft.append(parse_group(s))
        while s.accept(">>"):
            soft.append(parse_group(s))

    # SYNTHESIZE
    s = _stream_of(sections.get("SYNTHESIZE", []), end_tok)
    if s.peek().kind != "eof":
        kw = s.expect("id")
        target = kw.text
        if kw.text == "SynthG":
            target = s.expect("id").text
        s.accept(";")
        if infer_name is not None and target != infer_name:
            raise ParseError(f"SYNTHESIZE target {target!r} does not match infer block "
                             f"{infer_name!r}", kw.line, kw.col)

    return SynthSpec(
        name=name,
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        aux=tuple(aux),
        indicators=tuple(indicators),
        assumptions=tuple(assumptions),
        requirements=tuple(requirements),
        soft=tuple(soft),
        constants=constants,
    )


def format_spec(spec: SynthSpec) -> str:
    """Render a SynthSpec as a spec file (reparses to an equivalent spec)."""
    lines = [f"BEGIN QDDCSYNTH {spec.name}", "INTERFACESPEC"]
    for v in spec.inputs:
        lines.append(f"  {v} : INPUT")
    for v in spec.outputs:
        lines.append(f"  {v} : OUTPUT MONITOR x")
    lines.append("  ;")
    if spec.soft:
        groups = []
        for group in spec.soft:
            groups.append("(" + ", ".join(A.prop_to_str(p) for p in group) + ")")
        lines.append("SOFTREQS")
        lines.append("  " + " >> ".join(groups) + " ;")
    if spec.aux:
        lines.append("AUXVARS")
        lines.append("  " + " ".join(spec.aux) + " ;")
    if spec.constants:
        lines.append("CONSTANTS")
        lines.append("  " + ", ".join(f"{k} = {v}" for k, v in spec.constants.items()) + " ;")
    if spec.indicators:
        lines.append("INDICATORS")
        for w, d in spec.indicators:
            lines.append(f"  {w} : ({A.formula_to_str(d)})")
        lines.append(";")
    if spec.assumptions:
        lines.append("ASSUME")
        for f in spec.assumptions:
            lines.append(f"  ({A.formula_to_str(f)})")
        lines.append(";")
    lines.append("REQUIRES")
    for f in spec.requirements:
        lines.append(f"  ({A.formula_to_str(f)})")
    lines.append(";")
    lines.append(f"SYNTHESIZE SynthG {spec.name}")
    lines.append("END QDDCSYNTH")
    return "\n".join(lines) + "\n"
