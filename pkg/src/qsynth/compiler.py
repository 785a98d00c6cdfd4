"""Structural compilation of QDDC formulas to minimal symbolic DFAs.

compile_formula realizes the formula-automaton theorem: the result accepts
exactly the non-empty words (= behaviors P0..Pn, intervals [0, n]) that
satisfy the formula. semantics_oracle is the definitional recursive
evaluator used as the independent test oracle; it is exponential and meant
for words of test length only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .automata import dfa as D
from .automata.dfa import Nfa, SymbolicDfa, VarOrder
from .automata.mtbdd import Manager
from .logic import ast as A


# ---------------------------------------------------------------------------
# Context


@dataclass
class CompileContext:
    order: VarOrder
    manager: Manager = field(default_factory=Manager)
    det_cap: int = 10_000_000
    appendix_point_semantics: bool = False
    _memo: dict = field(default_factory=dict)
    _fresh: int = 0

    def fresh_var(self) -> str:
        self._fresh += 1
        return f"_q{self._fresh}"

    def compile(self, d: A.Formula, order: VarOrder | None = None) -> SymbolicDfa:
        order = order or self.order
        missing = d.free_variables() - set(order.names)
        if missing:
            raise ValueError(f"free variables not in order: {sorted(missing)}")
        return _compile(d, self, order)


def compile_formula(d: A.Formula, ctx: CompileContext) -> SymbolicDfa:
    return ctx.compile(d)


# ---------------------------------------------------------------------------
# Propositional diagrams


def prop_bool_root(m: Manager, order: VarOrder, prop: A.Prop) -> int:
    """Boolean diagram of a proposition (terminals ('b', 0) / ('b', 1))."""

    def rec(p: A.Prop) -> int:
        if isinstance(p, A.PConst):
            return m.terminal(("b", 1 if p.value else 0))
        if isinstance(p, A.PVar):
            return m.node(order.index(p.name), m.terminal(("b", 0)), m.terminal(("b", 1)))
        if isinstance(p, A.PNot):
            return m.map_terminals(rec(p.arg), lambda v: ("b", 1 - v[1]))
        if isinstance(p, A.PAnd):
            return m.meet(rec(p.left), rec(p.right), lambda x, y: ("b", x[1] & y[1]))
        if isinstance(p, A.POr):
            return m.meet(rec(p.left), rec(p.right), lambda x, y: ("b", x[1] | y[1]))
        if isinstance(p, A.PImplies):
            return m.meet(rec(p.left), rec(p.right), lambda x, y: ("b", (1 - x[1]) | y[1]))
        if isinstance(p, A.PIff):
            return m.meet(rec(p.left), rec(p.right), lambda x, y: ("b", 1 - (x[1] ^ y[1])))
        raise TypeError(f"not a Prop: {p!r}")

    return rec(prop)


def _prop_route(m: Manager, order: VarOrder, prop: A.Prop, hi_state: int, lo_state: int) -> int:
    """Transition diagram sending prop-satisfying letters to hi_state, rest to lo_state."""
    root = prop_bool_root(m, order, prop)
    return m.map_terminals(root, lambda v: hi_state if v[1] else lo_state)


# ---------------------------------------------------------------------------
# Atom automata


def _dfa(m, order, delta, initial, accepting):
    return SymbolicDfa(m, order, delta, initial, frozenset(accepting))


def _compile_atom_point(ctx: CompileContext, order: VarOrder, prop: A.Prop,
                        appendix: bool) -> SymbolicDfa:
    m = ctx.manager
    if appendix:
        # <phi> holds iff phi at the first position (no point restriction)
        live, dead, init = 0, 1, 2
        delta = [m.terminal(live), m.terminal(dead), _prop_route(m, order, prop, live, dead)]
        return _dfa(m, order, delta, init, {live})
    acc, dead, init = 0, 1, 2
    delta = [m.terminal(dead), m.terminal(dead), _prop_route(m, order, prop, acc, dead)]
    return _dfa(m, order, delta, init, {acc})


def _compile_atom_almost_all(ctx, order, prop) -> SymbolicDfa:
    # [phi] needs a non-point interval (>= 2 positions), phi at all but the last
    m = ctx.manager
    a1, b1, a2, b2, dead = 0, 1, 2, 3, 4
    route2 = _prop_route(m, order, prop, a2, b2)
    delta = [route2, m.terminal(dead), route2, m.terminal(dead), m.terminal(dead),
             _prop_route(m, order, prop, a1, b1)]
    return _dfa(m, order, delta, 5, {a2, b2})


def _compile_atom_all(ctx, order, prop) -> SymbolicDfa:
    m = ctx.manager
    live, dead = 0, 1
    route = _prop_route(m, order, prop, live, dead)
    delta = [route, m.terminal(dead), route]
    return _dfa(m, order, delta, 2, {live})


def _compile_atom_unit(ctx, order, prop) -> SymbolicDfa:
    m = ctx.manager
    s1, acc, dead = 0, 1, 2
    delta = [m.terminal(acc), m.terminal(dead), m.terminal(dead),
             _prop_route(m, order, prop, s1, dead)]
    return _dfa(m, order, delta, 3, {acc})


def _compile_slen(ctx, order, op, bound) -> SymbolicDfa:
    m = ctx.manager
    cap = bound + 2
    # state i = i letters read, saturating
    delta = [m.terminal(min(i + 1, cap)) for i in range(cap + 1)]
    acc = {i for i in range(1, cap + 1) if A.cmp_holds(op, i - 1, bound)}
    return _dfa(m, order, delta, 0, acc)


def _compile_scount(ctx, order, prop, op, bound) -> SymbolicDfa:
    m = ctx.manager
    cap = bound + 1
    # states 0..cap = saturated count including the last position; state cap+1 = initial
    def nxt(j):
        return _prop_route(m, order, prop, min(j + 1, cap), j)
    delta = [nxt(j) for j in range(cap + 1)]
    delta.append(nxt(0))
    acc = {j for j in range(cap + 1) if A.cmp_holds(op, j, bound)}
    return _dfa(m, order, delta, cap + 1, acc)


def _compile_sdur(ctx, order, prop, op, bound) -> SymbolicDfa:
    m = ctx.manager
    cap = bound + 1
    # state (j, p): j = saturated count excluding last, p = prop at last
    ids = {}
    for j in range(cap + 1):
        for p in (0, 1):
            ids[(j, p)] = len(ids)
    init = len(ids)
    delta = [0] * (len(ids) + 1)
    for (j, p), s in ids.items():
        j2 = min(j + p, cap)
        delta[s] = _prop_route(m, order, prop, ids[(j2, 1)], ids[(j2, 0)])
    delta[init] = _prop_route(m, order, prop, ids[(0, 1)], ids[(0, 0)])
    acc = {s for (j, p), s in ids.items() if A.cmp_holds(op, j, bound)}
    return _dfa(m, order, delta, init, acc)


# ---------------------------------------------------------------------------
# Canonical memo keys (alpha renaming of bound variables)


def _canonical(d: A.Formula) -> object:
    """Memo key with bound variables renamed apart (alpha canonical form)."""
    counter = itertools.count()

    def prop_key(p: A.Prop, env) -> object:
        if isinstance(p, A.PConst):
            return ("c", p.value)
        if isinstance(p, A.PVar):
            return ("v", env.get(p.name, p.name))
        if isinstance(p, A.PNot):
            return ("!", prop_key(p.arg, env))
        return (type(p).__name__, prop_key(p.left, env), prop_key(p.right, env))

    def rec(f: A.Formula, env: dict[str, str]) -> object:
        if isinstance(f, (A.Exists, A.Forall)):
            fresh = f"?{next(counter)}"
            env2 = dict(env)
            env2[f.var] = fresh
            return (type(f).__name__, fresh, rec(f.body, env2))
        parts: list[object] = [type(f).__name__]
        if isinstance(f, (A.SLen, A.SCount, A.SDur)):
            parts.extend((f.op, f.bound))
        for p in f.props():
            parts.append(prop_key(p, env))
        for c in f.children():
            parts.append(rec(c, env))
        return tuple(parts)

    return rec(d, {})


def rename_free(d: A.Formula, old: str, new: str) -> A.Formula:
    """Substitute a free variable name throughout a formula."""

    def in_prop(p: A.Prop) -> A.Prop:
        if isinstance(p, A.PVar):
            return A.PVar(new) if p.name == old else p
        if isinstance(p, A.PConst):
            return p
        if isinstance(p, A.PNot):
            return A.PNot(in_prop(p.arg))
        return type(p)(in_prop(p.left), in_prop(p.right))

    def rec(f: A.Formula) -> A.Formula:
        if isinstance(f, (A.Exists, A.Forall)):
            if f.var == old:
                return f
            return type(f)(f.var, rec(f.body))
        if isinstance(f, (A.FTrue, A.FFalse, A.Pt, A.Ext)):
            return f
        if isinstance(f, (A.PointProp, A.AlmostAll, A.All, A.Unit)):
            return type(f)(in_prop(f.prop))
        if isinstance(f, A.SLen):
            return f
        if isinstance(f, (A.SCount, A.SDur)):
            return type(f)(in_prop(f.prop), f.op, f.bound)
        if isinstance(f, (A.FNot, A.Star, A.Diamond, A.Box, A.Pref, A.PPref)):
            return type(f)(rec(f.arg))
        return type(f)(rec(f.left), rec(f.right))

    return rec(d)


# ---------------------------------------------------------------------------
# Main compilation


def _extend_order(order: VarOrder, var: str) -> VarOrder:
    return VarOrder(order.names + (var,), order.tags + ("witness",))


def _compile(d: A.Formula, ctx: CompileContext, order: VarOrder) -> SymbolicDfa:
    key = (_canonical(d), order.names, ctx.appendix_point_semantics)
    hit = ctx._memo.get(key)
    if hit is not None:
        return hit
    out = _compile_inner(d, ctx, order)
    ctx._memo[key] = out
    return out


def _det_min(ctx: CompileContext, n: Nfa) -> SymbolicDfa:
    return D.minimize(D.determinize(n, ctx.det_cap))


def _compile_inner(d: A.Formula, ctx: CompileContext, order: VarOrder) -> SymbolicDfa:
    if isinstance(d, A.FTrue):
        m = ctx.manager
        return _dfa(m, order, [m.terminal(0)], 0, {0})
    if isinstance(d, A.FFalse):
        m = ctx.manager
        return _dfa(m, order, [m.terminal(0)], 0, set())
    if isinstance(d, A.PointProp):
        return D.minimize(_compile_atom_point(ctx, order, d.prop, ctx.appendix_point_semantics))
    if isinstance(d, A.AlmostAll):
        return D.minimize(_compile_atom_almost_all(ctx, order, d.prop))
    if isinstance(d, A.All):
        return D.minimize(_compile_atom_all(ctx, order, d.prop))
    if isinstance(d, A.Unit):
        return D.minimize(_compile_atom_unit(ctx, order, d.prop))
    if isinstance(d, A.SLen):
        return D.minimize(_compile_slen(ctx, order, d.op, d.bound))
    if isinstance(d, A.SCount):
        return D.minimize(_compile_scount(ctx, order, d.prop, d.op, d.bound))
    if isinstance(d, A.SDur):
        return D.minimize(_compile_sdur(ctx, order, d.prop, d.op, d.bound))
    if isinstance(d, A.FAnd):
        return D.minimize(D.product(_compile(d.left, ctx, order), _compile(d.right, ctx, order),
                                    lambda x, y: x and y))
    if isinstance(d, A.FOr):
        return D.minimize(D.product(_compile(d.left, ctx, order), _compile(d.right, ctx, order),
                                    lambda x, y: x or y))
    if isinstance(d, A.FNot):
        return D.minimize(D.complement(_compile(d.arg, ctx, order)))
    if isinstance(d, A.Chop):
        return _det_min(ctx, D.concat(_compile(d.left, ctx, order), _compile(d.right, ctx, order)))
    if isinstance(d, A.Star):
        return _det_min(ctx, D.star(_compile(d.arg, ctx, order)))
    if isinstance(d, A.Exists):
        var = d.var
        body = d.body
        if var in order:
            fresh = ctx.fresh_var()
            body = rename_free(body, var, fresh)
            var = fresh
        ext = _extend_order(order, var)
        inner = _compile(body, ctx, ext)
        return _det_min(ctx, D.project(inner, var))
    if isinstance(d, (A.Forall, A.Pt, A.Ext, A.Diamond, A.Box, A.Pref, A.PPref,
                      A.FImplies, A.FIff)):
        return _compile(A.expand_derived(d), ctx, order)
    raise TypeError(f"cannot compile {d!r}")


# ---------------------------------------------------------------------------
# Definitional semantics oracle (test infrastructure)


def semantics_oracle(d: A.Formula, word: Sequence[Mapping[str, bool]],
                     interval: tuple[int, int] | None = None,
                     appendix_point_semantics: bool = False) -> bool:
    """Truth of word,[b,e] |= d by the satisfaction-relation recursion.

    word is a sequence of valuations (mappings from variable name to truth).
    Exponential (quantifiers enumerate variants); for tests only.
    """
    n = len(word)
    if n == 0:
        raise ValueError("words are non-empty")
    b, e = interval if interval is not None else (0, n - 1)
    if not (0 <= b <= e < n):
        raise ValueError(f"bad interval [{b},{e}] for word of length {n}")

    memo: dict[tuple[int, int, int], bool] = {}

    def ev(f: A.Formula, b: int, e: int, w) -> bool:
        key = (id(f), b, e)
        if w is word and key in memo:
            return memo[key]
        out = ev_inner(f, b, e, w)
        if w is word:
            memo[key] = out
        return out

    def ev_inner(f: A.Formula, b: int, e: int, w) -> bool:
        if isinstance(f, A.FTrue):
            return True
        if isinstance(f, A.FFalse):
            return False
        if isinstance(f, A.PointProp):
            if appendix_point_semantics:
                return f.prop.eval(w[b])
            return b == e and f.prop.eval(w[b])
        if isinstance(f, A.AlmostAll):
            return b < e and all(f.prop.eval(w[i]) for i in range(b, e))
        if isinstance(f, A.All):
            return all(f.prop.eval(w[i]) for i in range(b, e + 1))
        if isinstance(f, A.Unit):
            return e == b + 1 and f.prop.eval(w[b])
        if isinstance(f, A.FNot):
            return not ev(f.arg, b, e, w)
        if isinstance(f, A.FAnd):
            return ev(f.left, b, e, w) and ev(f.right, b, e, w)
        if isinstance(f, A.FOr):
            return ev(f.left, b, e, w) or ev(f.right, b, e, w)
        if isinstance(f, A.FImplies):
            return (not ev(f.left, b, e, w)) or ev(f.right, b, e, w)
        if isinstance(f, A.FIff):
            return ev(f.left, b, e, w) == ev(f.right, b, e, w)
        if isinstance(f, A.Chop):
            return any(ev(f.left, b, k, w) and ev(f.right, k, e, w)
                       for k in range(b, e + 1))
        if isinstance(f, A.Star):
            if b == e:
                return True
            return any(ev(f.arg, b, k, w) and ev(f, k, e, w)
                       for k in range(b + 1, e + 1))
        if isinstance(f, A.Exists):
            for bits in itertools.product((False, True), repeat=e - b + 1):
                w2 = list(w)
                for i, bit in zip(range(b, e + 1), bits):
                    v2 = dict(w2[i])
                    v2[f.var] = bit
                    w2[i] = v2
                if ev(f.body, b, e, w2):
                    return True
            return False
        if isinstance(f, A.Forall):
            return not ev_inner(A.Exists(f.var, A.FNot(f.body)), b, e, w)
        if isinstance(f, A.SLen):
            return A.cmp_holds(f.op, e - b, f.bound)
        if isinstance(f, A.SCount):
            return A.cmp_holds(f.op, sum(1 for i in range(b, e + 1) if f.prop.eval(w[i])), f.bound)
        if isinstance(f, A.SDur):
            return A.cmp_holds(f.op, sum(1 for i in range(b, e) if f.prop.eval(w[i])), f.bound)
        if isinstance(f, A.Pt):
            return b == e
        if isinstance(f, A.Ext):
            return b < e
        if isinstance(f, A.Diamond):
            return any(ev(f.arg, i, j, w)
                       for i in range(b, e + 1) for j in range(i, e + 1))
        if isinstance(f, A.Box):
            return all(ev(f.arg, i, j, w)
                       for i in range(b, e + 1) for j in range(i, e + 1))
        if isinstance(f, A.Pref):
            return all(ev(f.arg, b, k, w) for k in range(b, e + 1))
        if isinstance(f, A.PPref):
            return all(ev(f.arg, b, k, w) for k in range(b, e))
        raise TypeError(f"cannot evaluate {f!r}")

    return ev(d, b, e, word)
