"""Abstract syntax for propositions and QDDC interval formulas.

Props are boolean expressions over named variables; QDDC formulas add the
interval constructs (point/invariant brackets, chop, star, quantifiers and
the slen/scount/sdur counting terms) plus the usual derived operators.
All nodes are immutable and hashable so they can key memo tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping


CMP_OPS = ("<", "<=", "=", ">=", ">")


def cmp_holds(op: str, value: int, bound: int) -> bool:
    if op == "<":
        return value < bound
    if op == "<=":
        return value <= bound
    if op == "=":
        return value == bound
    if op == ">=":
        return value >= bound
    if op == ">":
        return value > bound
    raise ValueError(f"unknown comparison operator {op!r}")


# ---------------------------------------------------------------------------
# Propositions


class Prop:
    """Base class for propositional expressions."""

    __slots__ = ()

    def eval(self, valuation: Mapping[str, bool]) -> bool:
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def __and__(self, other: "Prop") -> "Prop":
        return PAnd(self, other)

    def __or__(self, other: "Prop") -> "Prop":
        return POr(self, other)

    def __invert__(self) -> "Prop":
        return PNot(self)


@dataclass(frozen=True, slots=True)
class PConst(Prop):
    value: bool

    def eval(self, valuation):
        return self.value

    def variables(self):
        return frozenset()


@dataclass(frozen=True, slots=True)
class PVar(Prop):
    name: str

    def eval(self, valuation):
        return bool(valuation[self.name])

    def variables(self):
        return frozenset((self.name,))


@dataclass(frozen=True, slots=True)
class PNot(Prop):
    arg: Prop

    def eval(self, valuation):
        return not self.arg.eval(valuation)

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True, slots=True)
class PAnd(Prop):
    left: Prop
    right: Prop

    def eval(self, valuation):
        return self.left.eval(valuation) and self.right.eval(valuation)

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True, slots=True)
class POr(Prop):
    left: Prop
    right: Prop

    def eval(self, valuation):
        return self.left.eval(valuation) or self.right.eval(valuation)

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True, slots=True)
class PImplies(Prop):
    left: Prop
    right: Prop

    def eval(self, valuation):
        return (not self.left.eval(valuation)) or self.right.eval(valuation)

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True, slots=True)
class PIff(Prop):
    left: Prop
    right: Prop

    def eval(self, valuation):
        return self.left.eval(valuation) == self.right.eval(valuation)

    def variables(self):
        return self.left.variables() | self.right.variables()


TRUE_P = PConst(True)
FALSE_P = PConst(False)


def p_and_all(props: list[Prop]) -> Prop:
    if not props:
        return TRUE_P
    out = props[0]
    for p in props[1:]:
        out = PAnd(out, p)
    return out


def p_or_all(props: list[Prop]) -> Prop:
    if not props:
        return FALSE_P
    out = props[0]
    for p in props[1:]:
        out = POr(out, p)
    return out


# ---------------------------------------------------------------------------
# QDDC formulas


class Formula:
    """Base class for QDDC formula AST nodes."""

    __slots__ = ()

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for child in self.children():
            out |= child.variables()
        for prop in self.props():
            out |= prop.variables()
        return frozenset(out)

    def free_variables(self) -> frozenset[str]:
        out: set[str] = set()
        for child in self.children():
            out |= child.free_variables()
        for prop in self.props():
            out |= prop.variables()
        return frozenset(out)

    def children(self) -> Iterator["Formula"]:
        return iter(())

    def props(self) -> Iterator[Prop]:
        return iter(())


@dataclass(frozen=True, slots=True)
class FTrue(Formula):
    pass


@dataclass(frozen=True, slots=True)
class FFalse(Formula):
    pass


@dataclass(frozen=True, slots=True)
class PointProp(Formula):
    """<phi>: a point interval whose (single) position satisfies phi."""

    prop: Prop

    def props(self):
        yield self.prop


@dataclass(frozen=True, slots=True)
class AlmostAll(Formula):
    """[phi]: non-point interval with phi at every position except the last."""

    prop: Prop

    def props(self):
        yield self.prop


@dataclass(frozen=True, slots=True)
class All(Formula):
    """[[phi]]: phi holds at every position of the interval."""

    prop: Prop

    def props(self):
        yield self.prop


@dataclass(frozen=True, slots=True)
class Unit(Formula):
    """{phi}: a unit-length interval whose first position satisfies phi."""

    prop: Prop

    def props(self):
        yield self.prop


@dataclass(frozen=True, slots=True)
class Chop(Formula):
    left: Formula
    right: Formula

    def children(self):
        yield self.left
        yield self.right


@dataclass(frozen=True, slots=True)
class FNot(Formula):
    arg: Formula

    def children(self):
        yield self.arg


@dataclass(frozen=True, slots=True)
class FAnd(Formula):
    left: Formula
    right: Formula

    def children(self):
        yield self.left
        yield self.right


@dataclass(frozen=True, slots=True)
class FOr(Formula):
    left: Formula
    right: Formula

    def children(self):
        yield self.left
        yield self.right


@dataclass(frozen=True, slots=True)
class FImplies(Formula):
    left: Formula
    right: Formula

    def children(self):
        yield self.left
        yield self.right


@dataclass(frozen=True, slots=True)
class FIff(Formula):
    left: Formula
    right: Formula

    def children(self):
        yield self.left
        yield self.right


@dataclass(frozen=True, slots=True)
class Star(Formula):
    arg: Formula

    def children(self):
        yield self.arg


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: str
    body: Formula

    def children(self):
        yield self.body

    def free_variables(self):
        return self.body.free_variables() - {self.var}

    def variables(self):
        return self.body.variables() | {self.var}


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    var: str
    body: Formula

    def children(self):
        yield self.body

    def free_variables(self):
        return self.body.free_variables() - {self.var}

    def variables(self):
        return self.body.variables() | {self.var}


@dataclass(frozen=True, slots=True)
class SLen(Formula):
    op: str
    bound: int


@dataclass(frozen=True, slots=True)
class SCount(Formula):
    prop: Prop
    op: str
    bound: int

    def props(self):
        yield self.prop


@dataclass(frozen=True, slots=True)
class SDur(Formula):
    prop: Prop
    op: str
    bound: int

    def props(self):
        yield self.prop


# Derived constructs kept as explicit nodes so parsing round-trips.


@dataclass(frozen=True, slots=True)
class Pt(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Ext(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Diamond(Formula):
    arg: Formula

    def children(self):
        yield self.arg


@dataclass(frozen=True, slots=True)
class Box(Formula):
    arg: Formula

    def children(self):
        yield self.arg


@dataclass(frozen=True, slots=True)
class Pref(Formula):
    arg: Formula

    def children(self):
        yield self.arg


@dataclass(frozen=True, slots=True)
class PPref(Formula):
    arg: Formula

    def children(self):
        yield self.arg


TRUE_F = FTrue()
FALSE_F = FFalse()


def at_last(prop: Prop) -> Formula:
    """Lift a proposition to the formula "prop holds at the final position"."""
    return Chop(TRUE_F, PointProp(prop))


def f_and_all(formulas: list[Formula]) -> Formula:
    if not formulas:
        return TRUE_F
    out = formulas[0]
    for f in formulas[1:]:
        out = FAnd(out, f)
    return out


def expand_derived(f: Formula) -> Formula:
    """Rewrite one layer of a derived node to core syntax (identity otherwise)."""
    if isinstance(f, Pt):
        return SLen("=", 0)
    if isinstance(f, Ext):
        return SLen(">", 0)
    if isinstance(f, Diamond):
        return Chop(TRUE_F, Chop(f.arg, TRUE_F))
    if isinstance(f, Box):
        return FNot(Chop(TRUE_F, Chop(FNot(f.arg), TRUE_F)))
    if isinstance(f, Pref):
        return FNot(Chop(FNot(f.arg), TRUE_F))
    if isinstance(f, PPref):
        return FNot(Chop(FNot(f.arg), SLen(">", 0)))
    if isinstance(f, FImplies):
        return FOr(FNot(f.left), f.right)
    if isinstance(f, FIff):
        return FAnd(FOr(FNot(f.left), f.right), FOr(FNot(f.right), f.left))
    if isinstance(f, Forall):
        return FNot(Exists(f.var, FNot(f.body)))
    return f


# ---------------------------------------------------------------------------
# Pretty printing (concrete syntax; parse(print(ast)) == ast)


def prop_to_str(p: Prop) -> str:
    if isinstance(p, PConst):
        return "1" if p.value else "0"
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PNot):
        return f"!({prop_to_str(p.arg)})"
    if isinstance(p, PAnd):
        return f"({prop_to_str(p.left)} && {prop_to_str(p.right)})"
    if isinstance(p, POr):
        return f"({prop_to_str(p.left)} || {prop_to_str(p.right)})"
    if isinstance(p, PImplies):
        return f"({prop_to_str(p.left)} => {prop_to_str(p.right)})"
    if isinstance(p, PIff):
        return f"({prop_to_str(p.left)} <=> {prop_to_str(p.right)})"
    raise TypeError(f"not a Prop: {p!r}")


def formula_to_str(f: Formula) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, FFalse):
        return "false"
    if isinstance(f, PointProp):
        return f"<{prop_to_str(f.prop)}>"
    if isinstance(f, AlmostAll):
        return f"[{prop_to_str(f.prop)}]"
    if isinstance(f, All):
        return f"[[{prop_to_str(f.prop)}]]"
    if isinstance(f, Unit):
        return f"{{{prop_to_str(f.prop)}}}"
    if isinstance(f, Chop):
        return f"({formula_to_str(f.left)} ^ {formula_to_str(f.right)})"
    if isinstance(f, FNot):
        return f"!({formula_to_str(f.arg)})"
    if isinstance(f, FAnd):
        return f"({formula_to_str(f.left)} && {formula_to_str(f.right)})"
    if isinstance(f, FOr):
        return f"({formula_to_str(f.left)} || {formula_to_str(f.right)})"
    if isinstance(f, FImplies):
        return f"({formula_to_str(f.left)} => {formula_to_str(f.right)})"
    if isinstance(f, FIff):
        return f"({formula_to_str(f.left)} <=> {formula_to_str(f.right)})"
    if isinstance(f, Star):
        return f"({formula_to_str(f.arg)})*"
    if isinstance(f, Exists):
        return f"(ex {f.var}. {formula_to_str(f.body)})"
    if isinstance(f, Forall):
        return f"(all {f.var}. {formula_to_str(f.body)})"
    if isinstance(f, SLen):
        return f"slen {f.op} {f.bound}"
    if isinstance(f, SCount):
        return f"scount ({prop_to_str(f.prop)}) {f.op} {f.bound}"
    if isinstance(f, SDur):
        return f"sdur ({prop_to_str(f.prop)}) {f.op} {f.bound}"
    if isinstance(f, Pt):
        return "pt"
    if isinstance(f, Ext):
        return "ext"
    if isinstance(f, Diamond):
        return f"<>({formula_to_str(f.arg)})"
    if isinstance(f, Box):
        return f"[]({formula_to_str(f.arg)})"
    if isinstance(f, Pref):
        return f"pref({formula_to_str(f.arg)})"
    if isinstance(f, PPref):
        return f"ppref({formula_to_str(f.arg)})"
    raise TypeError(f"not a Formula: {f!r}")
