"""Robustness wrappers and shield generators."""

import itertools

import pytest

from qsynth.automata import dfa as D
from qsynth.automata import io as aio
from qsynth.automata.dfa import VarOrder
from qsynth.automata.mtbdd import Manager
from qsynth.compiler import CompileContext
from qsynth.game import Unrealizable, solve_lodc, solve_mpnc, build_monitor, synthesize
from qsynth.logic import ast as A
from qsynth.logic import templates as T
from qsynth.logic.parser import parse_formula
from qsynth.transforms import (ShieldProblem, TransformError, bounded_until,
                               eventually_within, robust_spec, robustify,
                               shieldify, traffic_light)


def two_cell_setting():
    inputs = ("req1", "req2")
    outputs = ("ack1", "ack2")
    assumption = T.assume(2, 1)
    commitments = [T.arbinv(2), A.Box(T.resp(A.PVar("req1"), A.PVar("ack1"), 2)),
                   A.Box(T.resp(A.PVar("req2"), A.PVar("ack2"), 2))]
    return inputs, outputs, assumption, commitments


def test_hard_shapes_match_verbatim_strings():
    inputs, outputs, assumption, commitments = two_cell_setting()
    order = VarOrder.make(inputs=inputs, outputs=outputs)
    ctx = CompileContext(order)
    declared = set(order.names)
    c_text = ("(" + A.formula_to_str(A.f_and_all(commitments)) + ")")
    a_text = "(" + A.prop_to_str(assumption) + ")"

    hard, _ = robustify(assumption, commitments, "BeCorrect")
    verbatim = parse_formula(f"pref({a_text}) => {c_text}", declared)
    assert D.equivalent(ctx.compile(hard), ctx.compile(verbatim))[0]

    hard, _ = robustify(assumption, commitments, "BeCurrentlyCorrect")
    verbatim = parse_formula(f"{a_text} => {c_text}", declared)
    assert D.equivalent(ctx.compile(hard), ctx.compile(verbatim))[0]

    hard, _ = robustify(assumption, commitments, "KBounded", k=2)
    verbatim = parse_formula(f"(scount !{a_text} < 2) => {c_text}", declared)
    assert D.equivalent(ctx.compile(hard), ctx.compile(verbatim))[0]

    hard, _ = robustify(assumption, commitments, "KBResilient", k=2, b=3)
    verbatim = parse_formula(
        f"!(true^((scount !{a_text} >= 2) && []([{a_text}] => slen < 3))^true) => {c_text}",
        declared)
    assert D.equivalent(ctx.compile(hard), ctx.compile(verbatim))[0]


def test_degraded_performance_shape():
    inputs, outputs, assumption, commitments = two_cell_setting()
    ad = T.assume(2, 0)
    cd = [T.arbinv(2)]
    hard, soft = robustify(assumption, commitments, "DegradedPerformance",
                           degraded=(ad, cd))
    assert soft == []
    assert isinstance(hard, A.FAnd)
    with pytest.raises(TransformError):
        robustify(assumption, commitments, "DegradedPerformance")


def test_becorrect_of_true_assumption_is_plain_hard():
    inputs, outputs, _, commitments = two_cell_setting()
    order = VarOrder.make(inputs=inputs, outputs=outputs)
    ctx = CompileContext(order)
    hard, _ = robustify(A.TRUE_P, commitments, "BeCorrect")
    plain = A.f_and_all(commitments)
    assert D.equivalent(ctx.compile(hard), ctx.compile(plain))[0]


def test_counting_kinds_need_propositional_assumption():
    inputs, outputs, _, commitments = two_cell_setting()
    temporal = A.All(A.PVar("req1"))
    for kind, kw in (("KBounded", dict(k=2)), ("KBResilient", dict(k=2, b=3)),
                     ("KBVariant", dict(k=2, b=3))):
        with pytest.raises(TransformError):
            robustify(temporal, commitments, kind, **kw)


def test_implication_lattice():
    # the resilient hard requirement is at most as permissive as Be-Correct's
    inputs, outputs, assumption, commitments = two_cell_setting()
    order = VarOrder.make(inputs=inputs, outputs=outputs)
    ctx = CompileContext(order)
    bc, _ = robustify(assumption, commitments, "BeCorrect")
    res, _ = robustify(assumption, commitments, "KBResilient", k=1, b=2)
    a_bc = ctx.compile(bc)
    a_res = ctx.compile(res)
    # L(res) subset of L(bc): res && !bc is empty
    diff = D.product(a_res, D.complement(a_bc), lambda x, y: x and y)
    assert not any(s in diff.accepting for s in diff.reachable())
    # and strictly so
    diff2 = D.product(a_bc, D.complement(a_res), lambda x, y: x and y)
    assert any(s in diff2.accepting for s in diff2.reachable())


def test_never_give_up_keeps_invariants_after_violation():
    inputs = tuple(f"req{i}" for i in range(1, 5))
    outputs = tuple(f"ack{i}" for i in range(1, 5))
    assumption = T.assume(4, 2)
    commitments = [T.arbinv(4)] + [A.Box(T.resp(A.PVar(f"req{i}"), A.PVar(f"ack{i}"), 2))
                                   for i in range(1, 5)]
    softs = [T.arbinv(4)] + [T.resp(A.PVar(f"req{i}"), A.PVar(f"ack{i}"), 2)
                             for i in range(1, 5)]
    spec = robust_spec("ngu", inputs, outputs, assumption, commitments,
                       "NeverGiveUp", soft_commitments=softs)
    arena, mpnc, lodc, ctx = synthesize(spec)
    # drive with the assumption violated from step 3 on (three requests high)
    pattern = [(1, 0, 0, 0)] * 3 + [(1, 1, 1, 0)] * 8 + [(1, 1, 1, 1)] * 6
    from qsynth.analysis import simulate
    trace = simulate(lodc, pattern)
    order = lodc.order
    acks = [order.index(f"ack{i}") for i in range(1, 5)]
    reqs = [order.index(f"req{i}") for i in range(1, 5)]
    for row in trace.rows:
        assert sum(row[i] for i in acks) <= 1                   # mutex
        for r, a in zip(reqs, acks):
            assert not row[a] or row[r]                         # no spurious ack
    # acknowledgments keep flowing after the violation
    assert any(row[a] for row in trace.rows[4:] for a in acks)


# ---------------------------------------------------------------------------
# Shields


def test_shield_interface_and_errors():
    with pytest.raises(TransformError):
        shieldify(A.TRUE_F, ("i",), (), "burst")
    with pytest.raises(TransformError):
        shieldify(A.TRUE_F, ("o_prime",), ("o",), "burst")
    with pytest.raises(TransformError):
        shieldify(A.TRUE_F, ("i",), ("o",), "k")  # missing k
    with pytest.raises(TransformError):
        shieldify(A.TRUE_F, ("i",), ("o",), "wrong")


def test_burst_shield_non_deviation():
    # wherever echoing the design is a winning move, the shield echoes
    req = bounded_until("q", "r", "p", 4)
    prob = shieldify(req, ["q"], ["p", "r"], "burst")
    arena, mpnc, lodc, ctx = synthesize(prob.spec, extra_hard=prob.hard_automaton)
    order = lodc.order
    env = order.env_indices()
    ctrl = order.ctrl_indices()
    p_i, r_i = order.index("p"), order.index("r")
    pp_i, rp_i = ctrl.index(order.index("p_prime")), ctrl.index(order.index("r_prime"))
    # walk all reachable (controller state, mpnc state) pairs
    seen = {(lodc.initial, mpnc.dfa.initial)}
    stack = [(lodc.initial, mpnc.dfa.initial)]
    while stack:
        cs, ms = stack.pop()
        for ebits in itertools.product((0, 1), repeat=len(env)):
            move, cn = lodc.step(cs, ebits)
            # the echo move copies the design outputs p, r
            echo = list(move)
            echo[pp_i] = ebits[env.index(p_i)]
            echo[rp_i] = ebits[env.index(r_i)]
            # build full valuations to query the mpnc
            full_echo = [0] * len(order)
            for i, b in zip(env, ebits):
                full_echo[i] = b
            for i, b in zip(ctrl, echo):
                full_echo[i] = b
            echo_ok = mpnc.dfa.manager.eval(mpnc.dfa.delta[ms], full_echo) != mpnc.sink
            if echo_ok:
                assert move[pp_i] == full_echo[order.index("p_prime")]
                assert move[rp_i] == full_echo[order.index("r_prime")]
            full = lodc.full_valuation(ebits, move)
            mn = mpnc.dfa.manager.eval(mpnc.dfa.delta[ms], full)
            assert mn != mpnc.sink
            if (cn, mn) not in seen:
                seen.add((cn, mn))
                stack.append((cn, mn))


def test_k_shield_bounds_deviation():
    req = eventually_within("p", 4)
    prob = shieldify(req, [], ["p"], "k", k=2)
    assert prob.spec.soft == ()
    # the deviation-bounding requirement is part of the hard part
    assert len(prob.spec.requirements) == 2


def test_monitor_import_trivia(tmp_path):
    text = "states 1 init 0 acc 0 vars p\n0 - 0\n"
    aut = aio.parse_monitor(text)
    ctx = CompileContext(VarOrder.make(inputs=("p",)), manager=aut.manager)
    assert D.equivalent(aut, ctx.compile(A.TRUE_F))[0]
    # round trip
    again = aio.parse_monitor(aio.format_monitor(aut), aut.manager)
    assert D.equivalent(aut, again)[0]


def test_monitor_import_errors():
    with pytest.raises(aio.FormatError):
        aio.parse_monitor("states 1 init 0 acc 0 vars p\n0 1 0\n")  # partial
    with pytest.raises(aio.FormatError):
        aio.parse_monitor("states 2 init 0 acc 0 vars p\n0 - 0\n0 - 1\n"
                          "1 - 1\n")  # nondeterministic on state 0
    with pytest.raises(aio.FormatError):
        aio.parse_monitor("nonsense\n")


def test_monitor_round_trip_bundled():
    from conftest import spec_text
    aut = aio.parse_monitor(spec_text("traffic_light.aut"))
    again = aio.parse_monitor(aio.format_monitor(aut), aut.manager)
    assert D.equivalent(aut, again)[0]


def test_shield_from_imported_monitor_matches_formula_path():
    # requirement given as a compiled automaton behaves like the formula route
    req = traffic_light("g1", "g2")
    ctx = CompileContext(VarOrder.make(inputs=("g1", "g2")))
    aut = D.safety_interior(ctx.compile(req))
    prob_formula = shieldify(req, [], ["g1", "g2"], "burst")
    prob_monitor = shieldify(aut, [], ["g1", "g2"], "burst")
    _, _, lodc_f, _ = synthesize(prob_formula.spec, extra_hard=prob_formula.hard_automaton)
    _, _, lodc_m, _ = synthesize(prob_monitor.spec, extra_hard=prob_monitor.hard_automaton)
    from qsynth.game import mealy_equivalent
    assert mealy_equivalent(lodc_f, lodc_m)
