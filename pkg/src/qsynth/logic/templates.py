"""Standard requirement templates: arbiter invariants, bounded response,
the lag/tracks/sep/ubound timing macros, at-most-i assumptions and the
k,b-resilience condition. Each builder returns a plain AST; instantiation
is purely syntactic.
"""

from __future__ import annotations

import itertools

from . import ast as A
from .ast import (All, AlmostAll, Box, Chop, FNot, Formula, PAnd, PNot, POr,
                  Pref, PPref, Prop, PVar, PointProp, SCount, SLen, TRUE_F,
                  Unit, at_last, f_and_all, p_and_all, p_or_all)


class TemplateError(ValueError):
    pass


def _require(cond: bool, msg: str):
    if not cond:
        raise TemplateError(msg)


def resp(req: Prop, ack: Prop, k: int) -> Formula:
    """Bounded response: req held for the last k cycles implies an ack among them."""
    _require(k >= 1, "resp needs k >= 1")
    window = A.FAnd(All(req), SLen("=", k - 1))
    ack_in_window = A.FAnd(SLen("=", k - 1), Chop(TRUE_F, Chop(PointProp(ack), TRUE_F)))
    return A.FImplies(Chop(TRUE_F, window), Chop(TRUE_F, ack_in_window))


def mutex(n: int, ack: str = "ack") -> Formula:
    _require(n >= 1, "mutex needs n >= 1")
    pairs = [PNot(PAnd(PVar(f"{ack}{i}"), PVar(f"{ack}{j}")))
             for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    return All(p_and_all(pairs) if pairs else A.TRUE_P)


def noloss(n: int, req: str = "req", ack: str = "ack") -> Formula:
    _require(n >= 1, "noloss needs n >= 1")
    some_req = p_or_all([PVar(f"{req}{i}") for i in range(1, n + 1)])
    some_ack = p_or_all([PVar(f"{ack}{i}") for i in range(1, n + 1)])
    return All(A.PImplies(some_req, some_ack))


def nospurious(n: int, req: str = "req", ack: str = "ack") -> Formula:
    _require(n >= 1, "nospurious needs n >= 1")
    return All(p_and_all([A.PImplies(PVar(f"{ack}{i}"), PVar(f"{req}{i}"))
                          for i in range(1, n + 1)]))


def arbinv(n: int) -> Formula:
    return A.FAnd(A.FAnd(mutex(n), noloss(n)), nospurious(n))


def arbresp(n: int, k: int) -> Formula:
    _require(n >= 1 and k >= 1, "arbresp needs n, k >= 1")
    return f_and_all([Box(resp(PVar(f"req{i}"), PVar(f"ack{i}"), k))
                      for i in range(1, n + 1)])


def arbhard(n: int, k: int) -> Formula:
    return A.FAnd(arbinv(n), arbresp(n, k))


def atmost(i: int, props: list[Prop]) -> Prop:
    """At most i of the given propositions hold simultaneously."""
    _require(0 <= i <= len(props), "atmost bound out of range")
    clauses = [PNot(p_and_all(list(combo)))
               for combo in itertools.combinations(props, i + 1)]
    return p_and_all(clauses)


def assume(n: int, i: int, req: str = "req") -> Prop:
    _require(n >= 1, "assume needs n >= 1")
    return atmost(i, [PVar(f"{req}{j}") for j in range(1, n + 1)])


def lag(p: Prop, q: Prop, n: int) -> Formula:
    """P continuously for n+1 cycles forces Q from the (n+1)th cycle onward."""
    _require(n >= 0, "lag needs n >= 0")
    return Box(A.FImplies(A.FAnd(All(p), SLen(">=", n)),
                          Chop(SLen("=", n), All(q))))


def tracks(p: Prop, q: Prop, n: int) -> Formula:
    """Q holds while the current run of consecutive P positions is at most n long."""
    _require(n >= 1, "tracks needs n >= 1")
    short_run = FNot(Chop(TRUE_F, A.FAnd(All(p), SLen("=", n))))
    return A.FImplies(A.FAnd(at_last(p), short_run), at_last(q))


def sep(p: Prop, n: int) -> Formula:
    """Falling edge of P to its next rising edge is separated by more than n."""
    _require(n >= 0, "sep needs n >= 0")
    pattern = Chop(AlmostAll(p), Chop(AlmostAll(PNot(p)), PointProp(p)))
    return Box(A.FImplies(pattern, SLen(">", n)))


def ubound(p: Prop, n: int) -> Formula:
    """P can hold continuously for fewer than n cycles."""
    _require(n >= 1, "ubound needs n >= 1")
    return Box(A.FImplies(All(p), SLen("<", n)))


def kbrez(a: Prop, k: int, b: int) -> Formula:
    """Between any two recovery periods (b straight cycles of A) fewer than k violations."""
    _require(k >= 0 and b >= 1, "kbrez needs k >= 0 and b >= 1")
    inner = A.FAnd(SCount(PNot(a), ">=", k),
                   Box(A.FImplies(AlmostAll(a), SLen("<", b))))
    return FNot(Chop(TRUE_F, Chop(inner, TRUE_F)))


_BUILDERS = {
    "Resp": (resp, ("prop", "prop", "int")),
    "ARBINV": (arbinv, ("int",)),
    "ArbResp": (arbresp, ("int", "int")),
    "ARBHARD": (arbhard, ("int", "int")),
    "Assume": (assume, ("int", "int")),
    "lag": (lag, ("prop", "prop", "int")),
    "tracks": (tracks, ("prop", "prop", "int")),
    "sep": (sep, ("prop", "int")),
    "ubound": (ubound, ("prop", "int")),
    "KBREZ": (kbrez, ("prop", "int", "int")),
}


def template(name: str, args: list) -> Formula | Prop:
    """Instantiate a named template; raises TemplateError on bad name/arity."""
    if name not in _BUILDERS:
        raise TemplateError(f"unknown template {name!r}")
    fn, sig = _BUILDERS[name]
    if len(args) != len(sig):
        raise TemplateError(f"{name} expects {len(sig)} arguments, got {len(args)}")
    for arg, kind in zip(args, sig):
        if kind == "int" and not isinstance(arg, int):
            raise TemplateError(f"{name}: expected integer argument, got {arg!r}")
        if kind == "prop" and not isinstance(arg, Prop):
            raise TemplateError(f"{name}: expected proposition argument, got {arg!r}")
    return fn(*args)


def template_names() -> list[str]:
    return sorted(_BUILDERS)
