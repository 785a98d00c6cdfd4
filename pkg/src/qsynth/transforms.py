"""Derived synthesis specifications: robustness wrappers and shields.

robustify wraps an assumption/commitment pair into one of eight robustness
disciplines (hard/soft split per the standard table); shieldify turns a
requirement over a design's interface into a runtime-enforcer synthesis
problem whose outputs are corrected copies of the design outputs.
Both are pure spec-to-spec transformations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .automata import dfa as D
from .automata.dfa import SymbolicDfa, VarOrder
from .compiler import rename_free
from .logic import ast as A
from .logic import templates as T
from .logic.ast import Formula, Prop
from .logic.specfile import SynthSpec


class TransformError(ValueError):
    pass


ROBUSTNESS_KINDS = (
    "BeCorrect", "BeCurrentlyCorrect", "DegradedPerformance", "NeverGiveUp",
    "Greedy", "KBounded", "KBResilient", "KBVariant",
)


def _as_formula(x: Formula | Prop) -> Formula:
    if isinstance(x, Prop):
        return A.at_last(x)
    return x


def _require_prop(a, kind: str) -> Prop:
    if not isinstance(a, Prop):
        raise TransformError(
            f"{kind} counts assumption violations, so the assumption must be propositional")
    return a


def robustify(assumption: Prop | Formula | None,
              commitments: Sequence[Formula],
              kind: str,
              k: int | None = None,
              b: int | None = None,
              degraded: tuple[Prop | Formula, Sequence[Formula]] | None = None,
              soft_commitments: Sequence[Formula] | None = None,
              ) -> tuple[Formula, list[Formula]]:
    """Hard formula and soft-commitment list for a robustness discipline.

    Returns (hard, softs); the softs are appended below any user soft groups,
    in declaration order, via indicator variables. soft_commitments supplies
    per-step witness forms of the commitments (for Never-Give-Up and Greedy);
    it defaults to the commitments themselves.
    """
    if kind not in ROBUSTNESS_KINDS:
        raise TransformError(f"unknown robustness kind {kind!r}")
    commitments = list(commitments)
    softs = list(soft_commitments) if soft_commitments is not None else commitments
    c = A.f_and_all(commitments)
    soft: list[Formula] = []
    if kind == "Greedy":
        return A.TRUE_F, softs
    if assumption is None:
        raise TransformError(f"{kind} needs an assumption")
    a_formula = _as_formula(assumption)
    if kind == "BeCorrect":
        hard = A.FImplies(A.Pref(a_formula), c)
    elif kind == "BeCurrentlyCorrect":
        hard = A.FImplies(a_formula, c)
    elif kind == "DegradedPerformance":
        if degraded is None:
            raise TransformError("DegradedPerformance needs the degraded pair (Ad, Cd)")
        ad, cds = degraded
        hard = A.FAnd(A.FImplies(a_formula, c),
                      A.FImplies(_as_formula(ad), A.f_and_all(list(cds))))
    elif kind == "NeverGiveUp":
        # the Be-Correct hard obligation, plus the commitments pushed as softs
        hard = A.FImplies(A.Pref(a_formula), c)
        soft = softs
    elif kind == "KBounded":
        if k is None or k < 0:
            raise TransformError("KBounded needs k >= 0")
        ap = _require_prop(assumption, kind)
        hard = A.FImplies(A.SCount(A.PNot(ap), "<", k), c)
    elif kind == "KBResilient":
        if k is None or b is None or k < 0 or b < 1:
            raise TransformError("KBResilient needs k >= 0 and b >= 1")
        ap = _require_prop(assumption, kind)
        hard = A.FImplies(T.kbrez(ap, k, b), c)
    elif kind == "KBVariant":
        # fewer than k violations in any length-b window obligates the window
        if k is None or b is None or k < 0 or b < 1:
            raise TransformError("KBVariant needs k >= 0 and b >= 1")
        ap = _require_prop(assumption, kind)
        hard = A.Box(A.FImplies(A.FAnd(A.SLen("=", b), A.SCount(A.PNot(ap), "<", k)), c))
    else:  # pragma: no cover
        raise AssertionError(kind)
    return hard, soft


def robust_spec(name: str,
                inputs: Sequence[str],
                outputs: Sequence[str],
                assumption: Prop | Formula | None,
                commitments: Sequence[Formula],
                kind: str,
                k: int | None = None,
                b: int | None = None,
                degraded=None,
                user_soft: Sequence[Sequence[Prop]] = (),
                soft_commitments: Sequence[Formula] | None = None,
                witness_prefix: str = "sc") -> SynthSpec:
    """Complete SynthSpec for a robustness discipline over a given interface.

    Soft commitments become indicator variables named <witness_prefix>1..n,
    appended below the user's soft groups in declaration order.
    """
    hard, soft_commitments = robustify(assumption, commitments, kind,
                                       k=k, b=b, degraded=degraded,
                                       soft_commitments=soft_commitments)
    taken = set(inputs) | set(outputs)
    indicators: list[tuple[str, Formula]] = []
    groups: list[tuple[Prop, ...]] = [tuple(g) for g in user_soft]
    for i, cf in enumerate(soft_commitments, start=1):
        wname = f"{witness_prefix}{i}"
        if wname in taken:
            raise TransformError(f"witness name {wname!r} clashes with the interface")
        indicators.append((wname, cf))
        groups.append((A.PVar(wname),))
    return SynthSpec(
        name=name,
        inputs=tuple(inputs),
        outputs=tuple(outputs) + tuple(w for w, _ in indicators),
        aux=(),
        indicators=tuple(indicators),
        assumptions=(),
        requirements=(hard,),
        soft=tuple(groups),
        constants={},
    )


# ---------------------------------------------------------------------------
# Shields


@dataclass
class ShieldProblem:
    """Shield synthesis problem: SynthSpec plus an optional precompiled hard part.

    When the requirement came in as an automaton (monitor_import), it is
    renamed to the corrected outputs and carried here; build_monitor conjoins
    it with the spec's formulas.
    """

    spec: SynthSpec
    hard_automaton: SymbolicDfa | None = None


def primed(name: str) -> str:
    return name + "_prime"


def shield_interface(inputs: Sequence[str], outputs: Sequence[str]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Shield reads the design's inputs and outputs; emits corrected outputs."""
    if not outputs:
        raise TransformError("shieldify needs a non-empty design output set")
    new_inputs = tuple(inputs) + tuple(outputs)
    new_outputs = tuple(primed(o) for o in outputs)
    clash = set(new_outputs) & set(new_inputs)
    if clash:
        raise TransformError(f"primed output names clash with the interface: {sorted(clash)}")
    return new_inputs, new_outputs


def shieldify(req: Formula | SymbolicDfa,
              inputs: Sequence[str],
              outputs: Sequence[str],
              kind: str,
              k: int | None = None,
              name: str = "shield") -> ShieldProblem:
    """Conservative shield spec for a requirement over (inputs, outputs).

    kind 'burst': hard = req[O/O'], one equal-priority soft group that
    matches each corrected output with the design output. kind 'k': hard
    additionally bounds every deviation stretch to fewer than k cycles; no
    softs.
    """
    if kind not in ("burst", "k"):
        raise TransformError(f"unknown shield kind {kind!r}")
    if kind == "k" and (k is None or k < 1):
        raise TransformError("conservative k-shield needs k >= 1")
    new_inputs, new_outputs = shield_interface(inputs, outputs)
    rename_map = {o: primed(o) for o in outputs}

    hard_automaton = None
    requirements: list[Formula] = []
    if isinstance(req, SymbolicDfa):
        target_order = VarOrder.make(inputs=new_inputs, outputs=new_outputs)
        missing = set(req.order.names) - (set(inputs) | set(outputs))
        if missing:
            raise TransformError(f"requirement automaton mentions undeclared variables {sorted(missing)}")
        hard_automaton = D.rename(req, rename_map, target_order)
    else:
        bad = req.free_variables() - (set(inputs) | set(outputs))
        if bad:
            raise TransformError(f"requirement mentions undeclared variables {sorted(bad)}")
        renamed = req
        for old, new in rename_map.items():
            renamed = rename_free(renamed, old, new)
        requirements.append(renamed)

    indicators: list[tuple[str, Formula]] = []
    soft: list[tuple[Prop, ...]] = []
    decl_outputs = list(new_outputs)
    if kind == "k":
        deviation = A.p_or_all([A.PNot(A.PIff(A.PVar(o), A.PVar(primed(o)))) for o in outputs])
        requirements.append(A.Box(A.FImplies(A.All(deviation), A.SLen("<", k))))
    else:
        group = []
        for o in outputs:
            wname = f"match_{o}"
            if wname in new_inputs or wname in new_outputs:
                raise TransformError(f"witness name {wname!r} clashes with the interface")
            indicators.append((wname, A.at_last(A.PIff(A.PVar(o), A.PVar(primed(o))))))
            group.append(A.PVar(wname))
            decl_outputs.append(wname)
        soft.append(tuple(group))

    spec = SynthSpec(
        name=name,
        inputs=new_inputs,
        outputs=tuple(decl_outputs),
        aux=(),
        indicators=tuple(indicators),
        assumptions=(),
        requirements=tuple(requirements),
        soft=tuple(soft),
        constants={},
    )
    return ShieldProblem(spec, hard_automaton)


# ---------------------------------------------------------------------------
# Requirement encodings used by the shield case studies


def eventually_within(p: str, k: int) -> Formula:
    """p must have occurred once the behavior is k cycles long."""
    return A.FOr(A.SLen("<", k), A.Diamond(A.PointProp(A.PVar(p))))


def bounded_until(q: str, r: str, p: str, k: int) -> Formula:
    """Every q & !r trigger is answered by p & !r within k cycles, r-free."""
    trigger = A.Chop(A.PointProp(A.PAnd(A.PVar(q), A.PNot(A.PVar(r)))), A.TRUE_F)
    unresolved = A.All(A.PNot(A.PAnd(A.PVar(p), A.PNot(A.PVar(r)))))
    return A.Box(A.FImplies(A.FAnd(trigger, unresolved),
                            A.FAnd(A.SLen("<", k), A.All(A.PNot(A.PVar(r))))))


def traffic_light(g1: str = "g1", g2: str = "g2") -> Formula:
    """Never both green; no direct green-to-green handover between roads."""
    mutex = A.All(A.PNot(A.PAnd(A.PVar(g1), A.PVar(g2))))
    switch = A.FOr(A.Chop(A.Unit(A.PVar(g1)), A.PointProp(A.PVar(g2))),
                   A.Chop(A.Unit(A.PVar(g2)), A.PointProp(A.PVar(g1))))
    return A.FAnd(mutex, A.Box(A.FNot(switch)))
