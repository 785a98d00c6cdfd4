"""Shared generators and fixtures for the suite."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

import pytest

from qsynth.automata.dfa import VarOrder
from qsynth.compiler import CompileContext
from qsynth.logic import ast as A

SPECS = Path(__file__).resolve().parents[1] / "src" / "qsynth" / "specs"


def all_words(names, max_len):
    """Every non-empty word up to max_len as valuation-dict sequences."""
    letters = [dict(zip(names, bits))
               for bits in itertools.product((False, True), repeat=len(names))]
    out = []
    frontier = [[]]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for letter in letters:
                w2 = w + [letter]
                out.append(w2)
                nxt.append(w2)
        frontier = nxt
    return out


def bits_word(word, names):
    return [tuple(1 if letter[n] else 0 for n in names) for letter in word]


class FormulaGen:
    """Seeded random formulas: depth <= 4, <= 3 variables, bounds <= 3."""

    def __init__(self, seed, names=("p", "q", "r")):
        self.rng = random.Random(seed)
        self.names = names

    def prop(self, depth=2):
        r = self.rng
        k = r.randrange(8 if depth > 0 else 3)
        if k in (0, 2):
            return A.PVar(r.choice(self.names))
        if k == 1:
            return A.TRUE_P if r.random() < 0.5 else A.FALSE_P
        if k == 3:
            return A.PNot(self.prop(depth - 1))
        ctor = {4: A.PAnd, 5: A.POr, 6: A.PImplies, 7: A.PIff}[k]
        return ctor(self.prop(depth - 1), self.prop(depth - 1))

    def formula(self, depth):
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            k = r.choice(["point", "almost", "all", "unit", "slen", "scount",
                          "sdur", "true", "pt", "ext"])
            if k == "point":
                return A.PointProp(self.prop())
            if k == "almost":
                return A.AlmostAll(self.prop())
            if k == "all":
                return A.All(self.prop())
            if k == "unit":
                return A.Unit(self.prop())
            if k == "slen":
                return A.SLen(r.choice(A.CMP_OPS), r.randrange(4))
            if k == "scount":
                return A.SCount(self.prop(), r.choice(A.CMP_OPS), r.randrange(4))
            if k == "sdur":
                return A.SDur(self.prop(), r.choice(A.CMP_OPS), r.randrange(4))
            if k == "true":
                return A.TRUE_F
            if k == "pt":
                return A.Pt()
            return A.Ext()
        k = r.choice(["chop", "not", "and", "or", "implies", "iff", "star",
                      "exists", "forall", "diamond", "box", "pref", "ppref"])
        if k == "chop":
            return A.Chop(self.formula(depth - 1), self.formula(depth - 1))
        if k == "not":
            return A.FNot(self.formula(depth - 1))
        if k == "and":
            return A.FAnd(self.formula(depth - 1), self.formula(depth - 1))
        if k == "or":
            return A.FOr(self.formula(depth - 1), self.formula(depth - 1))
        if k == "implies":
            return A.FImplies(self.formula(depth - 1), self.formula(depth - 1))
        if k == "iff":
            return A.FIff(self.formula(depth - 1), self.formula(depth - 1))
        if k == "star":
            return A.Star(self.formula(depth - 1))
        if k == "exists":
            return A.Exists("z", self.formula(depth - 1))
        if k == "forall":
            return A.Forall("z", self.formula(depth - 1))
        if k == "diamond":
            return A.Diamond(self.formula(depth - 1))
        if k == "box":
            return A.Box(self.formula(depth - 1))
        if k == "pref":
            return A.Pref(self.formula(depth - 1))
        return A.PPref(self.formula(depth - 1))

    def word(self, max_len=6):
        r = self.rng
        letters = [dict(zip(self.names, bits))
                   for bits in itertools.product((False, True), repeat=len(self.names))]
        return [r.choice(letters) for _ in range(r.randrange(1, max_len + 1))]


@pytest.fixture(scope="session")
def pq_ctx():
    order = VarOrder.make(inputs=("p", "q"))
    return CompileContext(order)


@pytest.fixture(scope="session")
def pqr_ctx():
    order = VarOrder.make(inputs=("p", "q", "r"))
    return CompileContext(order)


def spec_text(name: str) -> str:
    return (SPECS / name).read_text()


# ---------------------------------------------------------------------------
# Shared synthesis results (session-scoped; several test modules reuse them)

_SYNTH_CACHE: dict = {}


def synthesize_bundled(name: str):
    from qsynth.game import synthesize
    from qsynth.logic.specfile import parse_spec
    if name not in _SYNTH_CACHE:
        spec = parse_spec(spec_text(name))
        _SYNTH_CACHE[name] = (spec,) + synthesize(spec)
    return _SYNTH_CACHE[name]
