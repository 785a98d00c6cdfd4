"""Template instantiations against their stated meanings and paper strings."""

import itertools

import pytest

from qsynth.automata import dfa as D
from qsynth.automata.dfa import VarOrder
from qsynth.compiler import CompileContext, semantics_oracle
from qsynth.logic import ast as A
from qsynth.logic import templates as T
from qsynth.logic.parser import parse_formula

from conftest import all_words, bits_word


def test_arbinv_semantics():
    names = ("req1", "req2", "ack1", "ack2")
    f = T.arbinv(2)
    for w in all_words(names, 2):
        mutex = all(not (L["ack1"] and L["ack2"]) for L in w)
        noloss = all((not (L["req1"] or L["req2"])) or (L["ack1"] or L["ack2"]) for L in w)
        nospur = all((not L["ack1"] or L["req1"]) and (not L["ack2"] or L["req2"]) for L in w)
        assert semantics_oracle(f, w) == (mutex and noloss and nospur)


def test_resp_k1_pointwise():
    # boxed 1-cycle response is the pointwise implication invariant
    order = VarOrder.make(inputs=("req",), outputs=("ack",))
    ctx = CompileContext(order)
    a = ctx.compile(A.Box(T.resp(A.PVar("req"), A.PVar("ack"), 1)))
    b = ctx.compile(parse_formula("[[req => ack]]", {"req", "ack"}))
    assert D.equivalent(a, b)[0]


def test_resp_window_semantics():
    # brute force: every k-window of requests must contain an ack
    f = T.resp(A.PVar("req"), A.PVar("ack"), 2)
    names = ("req", "ack")
    for w in all_words(names, 5):
        e = len(w) - 1
        window_all_req = e >= 1 and all(L["req"] for L in w[e - 1:])
        ack_in_window = e >= 1 and any(L["ack"] for L in w[e - 1:])
        want = (not window_all_req) or ack_in_window
        assert semantics_oracle(f, w) == want


def test_assume_truth_table():
    f = T.assume(4, 2)
    names = tuple(f"req{i}" for i in range(1, 5))
    for bits in itertools.product((False, True), repeat=4):
        v = dict(zip(names, bits))
        assert f.eval(v) == (sum(bits) <= 2)


def test_atmost_range_errors():
    with pytest.raises(T.TemplateError):
        T.atmost(5, [A.PVar("a")])
    with pytest.raises(T.TemplateError):
        T.template("ARBINV", [0])
    with pytest.raises(T.TemplateError):
        T.template("Resp", [A.PVar("a"), A.PVar("b")])
    with pytest.raises(T.TemplateError):
        T.template("nosuch", [])


def test_lag_meaning():
    # lag(P,Q,n): P held for n+1 cycles forces Q from the (n+1)th cycle on
    f = T.lag(A.PVar("P"), A.PVar("Q"), 2)
    names = ("P", "Q")
    for w in all_words(names, 5):
        want = True
        for i in range(len(w)):
            for j in range(i, len(w)):
                if j - i >= 2 and all(L["P"] for L in w[i:j + 1]):
                    if not all(L["Q"] for L in w[i + 2:j + 1]):
                        want = False
        assert semantics_oracle(f, w) == want, w


def test_tracks_meaning():
    # per-prefix: Q at every point whose P-run is at most n positions long
    f = T.tracks(A.PVar("P"), A.PVar("Q"), 2)
    names = ("P", "Q")
    for w in all_words(names, 5):
        e = len(w) - 1
        run = 0
        for L in w:
            run = run + 1 if L["P"] else 0
        want = (not w[e]["P"]) or run > 2 or w[e]["Q"]
        assert semantics_oracle(f, w) == want, w


def test_sep_meaning():
    # the first rise is free; a rise too soon after a fall violates
    f = T.sep(A.PVar("P"), 3)
    mk = lambda ps: [{"P": bool(b)} for b in ps]
    assert semantics_oracle(f, mk([0, 0, 1, 0, 0, 0]))          # single pulse
    assert semantics_oracle(f, mk([1, 0, 0, 0, 1]))             # gap of 4 > 3
    assert not semantics_oracle(f, mk([1, 0, 0, 1]))            # gap of 3, too soon
    assert semantics_oracle(f, mk([1, 1, 0, 0, 0, 0]))          # no second rise


def test_ubound_meaning():
    # runs of slen >= 2 violate; a 2-position run has slen 1 and is allowed
    f = T.ubound(A.PVar("P"), 2)
    mk = lambda ps: [{"P": bool(b)} for b in ps]
    assert semantics_oracle(f, mk([1, 0, 1, 0]))
    assert semantics_oracle(f, mk([1, 1, 0]))
    assert semantics_oracle(f, mk([0, 1, 1]))
    assert not semantics_oracle(f, mk([1, 1, 1]))


def test_kbrez_string_equivalence():
    order = VarOrder.make(inputs=("A",))
    ctx = CompileContext(order)
    a = ctx.compile(T.kbrez(A.PVar("A"), 2, 3))
    b = ctx.compile(parse_formula(
        "!(true^((scount !A >= 2) && []([A] => slen < 3))^true)", {"A"}))
    assert D.equivalent(a, b)[0]


def test_template_closed_forms_equal_paper_strings():
    # for templates with a printed closed form, the instantiation compiles to
    # the same language as the verbatim string
    order = VarOrder.make(inputs=("req", "ack"))
    ctx = CompileContext(order)
    resp = ctx.compile(T.resp(A.PVar("req"), A.PVar("ack"), 3))
    verbatim = ctx.compile(parse_formula(
        "(true^([[req]]&&(slen=2)))=>(true^(slen=2&&(true^<ack>^true)))", {"req", "ack"}))
    assert D.equivalent(resp, verbatim)[0]
