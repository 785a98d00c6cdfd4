"""Safety-game solving over symbolic monitor automata.

The monitor (hard requirement conjoined with indicator definitions, made
prefix-closed, minimized) is the arena. The maximally permissive controller
is the greatest fixed point of the one-step survivability test C_step,
evaluated by labeling the shared transition diagrams: terminals get 1 iff
they stay in the good set, internal nodes take min over environment
variables and max over controller variables. The locally optimal
deterministic controller then fixes, per state and input, the permitted
move with the lexicographically maximal soft-requirement value, computed
once per frontier node of the diagrams.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .automata import dfa as D
from .automata.dfa import SymbolicDfa, VarOrder
from .automata.mtbdd import Manager
from .compiler import CompileContext, prop_bool_root
from .logic import ast as A
from .logic.ast import Prop
from .logic.specfile import SynthSpec


class Unrealizable(Exception):
    def __init__(self, tree: "CounterStrategyTree"):
        super().__init__("specification is unrealizable")
        self.tree = tree


@dataclass
class Arena:
    monitor: SymbolicDfa
    good: frozenset[int]          # accepting states of the prefix-closed monitor
    sink: int | None

    @property
    def order(self) -> VarOrder:
        return self.monitor.order


@dataclass
class Mpnc:
    dfa: SymbolicDfa              # transitions escaping the winning set redirected to sink
    winning: frozenset[int]
    sink: int | None
    iterations: int
    rank: dict[int, int]          # state -> fixed-point round at which it was pruned


@dataclass
class Controller:
    """Deterministic Mealy machine: per state, input valuation -> (move, next).

    The move is the full controller-variable valuation (outputs then
    witnesses) in order position. delta holds one diagram per state over the
    environment variables with ((move bits), next state) terminals.
    """

    manager: Manager
    order: VarOrder
    delta: list[int]
    initial: int

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def env_bits(self, letter) -> tuple[int, ...]:
        return tuple(letter[i] for i in self.order.env_indices())

    def step(self, state: int, input_bits) -> tuple[tuple[int, ...], int]:
        full = [0] * len(self.order)
        env = self.order.env_indices()
        for i, b in zip(env, input_bits):
            full[i] = b
        move, nxt = self.manager.eval(self.delta[state], full)
        return move, nxt

    def full_valuation(self, input_bits, move) -> tuple[int, ...]:
        full = [0] * len(self.order)
        for i, b in zip(self.order.env_indices(), input_bits):
            full[i] = b
        for i, b in zip(self.order.ctrl_indices(), move):
            full[i] = b
        return tuple(full)


@dataclass
class CounterStrategyTree:
    """Environment strategy tree forcing a hard-requirement violation."""

    state: int
    rank: int
    input_bits: tuple[int, ...] | None
    children: list[tuple[tuple[int, ...], "CounterStrategyTree"]] = field(default_factory=list)

    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(child.depth() for _, child in self.children)

    def render(self, order: VarOrder, indent: str = "") -> str:
        lines = []
        if self.input_bits is None:
            lines.append(f"{indent}violation (state {self.state})")
        else:
            env = order.env_indices()
            label = " ".join(
                (order.names[i] if b else "!" + order.names[i])
                for i, b in zip(env, self.input_bits))
            lines.append(f"{indent}state {self.state}: environment plays [{label}]")
            ctrl = order.ctrl_indices()
            for move, child in self.children:
                mlabel = " ".join(
                    (order.names[i] if b else "!" + order.names[i])
                    for i, b in zip(ctrl, move))
                lines.append(f"{indent}  controller replies [{mlabel}] ->")
                lines.append(child.render(order, indent + "    "))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Monitor construction


def build_monitor(spec: SynthSpec, ctx: CompileContext | None = None,
                  extra_hard: SymbolicDfa | None = None) -> tuple[Arena, CompileContext]:
    order = spec.var_order()
    if ctx is None:
        ctx = CompileContext(order)
    elif ctx.order != order:
        raise ValueError("compile context order does not match the spec")
    hard = A.FAnd(spec.hard_formula(), spec.indicator_formula())
    aut = ctx.compile(hard)
    if extra_hard is not None:
        extra = extra_hard
        if extra.manager is not ctx.manager or extra.order != order:
            extra = _import_into(extra, ctx.manager, order)
        aut = D.minimize(D.product(aut, extra, lambda x, y: x and y))
    monitor = D.safety_interior(aut)
    sink = monitor.reject_sink()
    return Arena(monitor, frozenset(monitor.accepting), sink), ctx


def _import_into(a: SymbolicDfa, manager, order) -> SymbolicDfa:
    """Re-home an automaton into another manager/order by name (per-state rebuild)."""
    idx_map = {i: order.index(n) for i, n in enumerate(a.order.names)}
    delta = []
    for s in range(a.n_states):
        paths = [({idx_map[v]: b for v, b in cube.items()}, t)
                 for cube, t in a.manager.paths(a.delta[s])]
        delta.append(manager.from_paths(paths))
    return SymbolicDfa(manager, order, delta, a.initial, a.accepting)


# ---------------------------------------------------------------------------
# MPNC: greatest fixed point of C_step


def cstep_labels(m: Manager, order: VarOrder, root: int, good: frozenset[int],
                 memo: dict[int, int]) -> int:
    """Appendix-style diagram labeling: min over env vars, max over ctrl vars."""

    def rec(node: int) -> int:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if m.is_terminal(node):
            out = 1 if m.value(node) in good else 0
        else:
            l0 = rec(m.lo(node))
            l1 = rec(m.hi(node))
            if order.is_env(m.var(node)):
                out = min(l0, l1)
            else:
                out = max(l0, l1)
        memo[node] = out
        return out

    return rec(root)


def cstep_naive(dfa: SymbolicDfa, state: int, good: frozenset[int]) -> int:
    """Per-valuation fallback used to cross-check the diagram labeling."""
    order = dfa.order
    env = order.env_indices()
    ctrl = order.ctrl_indices()
    for ebits in itertools.product((0, 1), repeat=len(env)):
        ok = False
        for cbits in itertools.product((0, 1), repeat=len(ctrl)):
            full = [0] * len(order)
            for i, b in zip(env, ebits):
                full[i] = b
            for i, b in zip(ctrl, cbits):
                full[i] = b
            if dfa.manager.eval(dfa.delta[state], full) in good:
                ok = True
                break
        if not ok:
            return 0
    return 1


def solve_mpnc(arena: Arena) -> Mpnc:
    """Greatest fixed point; raises Unrealizable with a counter-strategy tree."""
    dfa = arena.monitor
    m = dfa.manager
    order = dfa.order
    good = set(arena.good)
    rank: dict[int, int] = {}
    for s in range(dfa.n_states):
        if s not in good:
            rank[s] = 0
    iterations = 0
    while True:
        memo: dict[int, int] = {}
        dead = [s for s in sorted(good)
                if cstep_labels(m, order, dfa.delta[s], frozenset(good), memo) == 0]
        if not dead:
            break
        iterations += 1
        for s in dead:
            good.discard(s)
            rank[s] = iterations
    winning = frozenset(good)

    if dfa.initial not in winning:
        raise Unrealizable(counter_strategy(arena, rank))

    sink = arena.sink
    if sink is None or sink not in range(dfa.n_states):
        sink = dfa.n_states
        delta = list(dfa.delta) + [m.terminal(sink)]
    else:
        delta = list(dfa.delta)
    cache: dict[int, int] = {}
    redirected = [m.map_terminals(delta[s], lambda t: t if t in winning else sink, cache)
                  if s in winning else m.terminal(sink)
                  for s in range(len(delta))]
    out = SymbolicDfa(m, order, redirected, dfa.initial, winning)
    return Mpnc(out, winning, sink, iterations, rank)


def counter_strategy(arena: Arena, rank: dict[int, int]) -> CounterStrategyTree:
    """Rank-decreasing environment strategy from the initial state.

    Among inputs for which every controller reply drops the rank, the
    lexicographically largest valuation is chosen; controller replies are
    grouped by surviving successor.
    """
    dfa = arena.monitor
    order = dfa.order
    env = order.env_indices()
    ctrl = order.ctrl_indices()

    def best_rank_move(state: int, ebits) -> list[tuple[tuple[int, ...], int]]:
        moves = []
        for cbits in itertools.product((0, 1), repeat=len(ctrl)):
            full = [0] * len(order)
            for i, b in zip(env, ebits):
                full[i] = b
            for i, b in zip(ctrl, cbits):
                full[i] = b
            moves.append((cbits, dfa.manager.eval(dfa.delta[state], full)))
        return moves

    def build(state: int) -> CounterStrategyTree:
        r = rank.get(state)
        assert r is not None, "counter-strategy requested for a winning state"
        if r == 0:
            return CounterStrategyTree(state, 0, None)
        chosen = None
        for ebits in sorted(itertools.product((0, 1), repeat=len(env)), reverse=True):
            moves = best_rank_move(state, ebits)
            if all(rank.get(t, 10**9) < r for _, t in moves):
                chosen = (ebits, moves)
                break
        assert chosen is not None, "C_step bookkeeping out of sync"
        ebits, moves = chosen
        node = CounterStrategyTree(state, r, tuple(ebits))
        seen: dict[int, tuple[int, ...]] = {}
        for cbits, t in moves:
            if t not in seen:
                seen[t] = cbits
        for t in sorted(seen):
            node.children.append((seen[t], build(t)))
        return node

    return build(dfa.initial)


# ---------------------------------------------------------------------------
# LODC: soft-requirement guided determinization


def _soft_diagram_values(m: Manager, order: VarOrder, groups) -> list[list]:
    """Per group, list of boolean diagrams of its member propositions."""
    return [[prop_bool_root(m, order, p) for p in group] for group in groups]


class _SoftEvaluator:
    """Scores controller moves against the prioritized soft groups."""

    def __init__(self, order: VarOrder, groups: tuple[tuple[Prop, ...], ...]):
        self.order = order
        self.groups = groups
        self.ctrl = order.ctrl_indices()
        support: set[str] = set()
        for group in groups:
            for p in group:
                support |= p.variables()
        self.support = support
        missing = [v for v in support if v not in order]
        if missing:
            raise ValueError(f"soft propositions reference undeclared variables {sorted(missing)}")
        self.env_free = all(order.index(v) in self.ctrl for v in support)

    def value(self, valuation: dict[str, bool]) -> tuple[int, ...]:
        return tuple(sum(1 for p in group if p.eval(valuation)) for group in self.groups)


def _resolve_path(cube: dict[int, int], ctrl: list[int], order: VarOrder,
                  ev: _SoftEvaluator) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Expand a controller-variable cube into candidate concrete moves.

    Unconstrained variables inside the soft support are enumerated; the rest
    default to 0 (the tie-break prefers 0). Returns (value vector, move bits)
    pairs for each candidate.
    """
    support_idx = [i for i in ctrl if order.names[i] in ev.support and i not in cube]
    out = []
    for bits in itertools.product((0, 1), repeat=len(support_idx)):
        assign = dict(cube)
        for i, b in zip(support_idx, bits):
            assign[i] = b
        move = tuple(assign.get(i, 0) for i in ctrl)
        valuation = {order.names[i]: bool(b) for i, b in zip(ctrl, move)}
        out.append((ev.value(valuation), move))
    return out


def solve_lodc(mpnc: Mpnc, soft: tuple[tuple[Prop, ...], ...]) -> Controller:
    """Frontier-node determinization (falls back to naive for input-referencing softs)."""
    dfa = mpnc.dfa
    order = dfa.order
    ev = _SoftEvaluator(order, soft)
    if not ev.env_free:
        return _lodc_naive(mpnc, soft)
    m = dfa.manager
    ctrl = order.ctrl_indices()
    first_ctrl = min(ctrl) if ctrl else len(order)
    sink = mpnc.sink

    # per frontier node: optimal (value, move, target), shared across states
    front_opt: dict[int, tuple[tuple[int, ...], tuple[int, ...], int] | None] = {}

    def frontier_optimum(node: int):
        hit = front_opt.get(node)
        if node in front_opt:
            return hit
        best = None
        for cube, target in m.paths(node):
            if target == sink:
                continue
            for value, move in _resolve_path(cube, ctrl, order, ev):
                if best is None or (value, tuple(-b for b in move)) > \
                        (best[0], tuple(-b for b in best[1])):
                    best = (value, move, target)
        front_opt[node] = best
        return best

    def input_paths(node: int):
        """(env cube, frontier node) pairs; diagrams test env vars first."""
        if m.is_terminal(node) or m.var(node) >= first_ctrl:
            yield {}, node
            return
        v = m.var(node)
        for bit, child in ((0, m.lo(node)), (1, m.hi(node))):
            for cube, f in input_paths(child):
                out = dict(cube)
                out[v] = bit
                yield out, f

    ids: dict[int, int] = {dfa.initial: 0}
    alloc_order = [dfa.initial]
    delta: list[int] = []
    i = 0
    while i < len(alloc_order):
        s = alloc_order[i]
        paths = []
        for cube, fnode in input_paths(dfa.delta[s]):
            opt = frontier_optimum(fnode)
            if opt is None:
                raise AssertionError(
                    f"state {s} has an input with no surviving move; MPNC invariant broken")
            value, move, target = opt
            if target not in ids:
                ids[target] = len(alloc_order)
                alloc_order.append(target)
            paths.append((cube, (move, ids[target])))
        delta.append(m.from_paths(paths))
        i += 1
    ctl = Controller(m, order, delta, 0)
    return mealy_minimize(ctl)


def _lodc_naive(mpnc: Mpnc, soft) -> Controller:
    """Per-(state, input) enumeration; the behavioural reference."""
    dfa = mpnc.dfa
    order = dfa.order
    m = dfa.manager
    env = order.env_indices()
    ctrl = order.ctrl_indices()
    ev = _SoftEvaluator(order, soft)
    sink = mpnc.sink

    ids: dict[int, int] = {dfa.initial: 0}
    alloc_order = [dfa.initial]
    delta: list[int] = []
    i = 0
    while i < len(alloc_order):
        s = alloc_order[i]
        paths = []
        for ebits in itertools.product((0, 1), repeat=len(env)):
            best = None
            for cbits in itertools.product((0, 1), repeat=len(ctrl)):
                full = [0] * len(order)
                for k, b in zip(env, ebits):
                    full[k] = b
                for k, b in zip(ctrl, cbits):
                    full[k] = b
                target = m.eval(dfa.delta[s], full)
                if target == sink:
                    continue
                valuation = {order.names[k]: bool(full[k]) for k in range(len(order))}
                value = ev.value(valuation)
                key = (value, tuple(-b for b in cbits))
                if best is None or key > best[0]:
                    best = (key, cbits, target)
            assert best is not None, "MPNC invariant broken"
            _, cbits, target = best
            if target not in ids:
                ids[target] = len(alloc_order)
                alloc_order.append(target)
            paths.append((dict(zip(env, ebits)), (cbits, ids[target])))
        delta.append(m.from_paths(paths))
        i += 1
    return mealy_minimize(Controller(m, order, delta, 0))


def mealy_minimize(c: Controller) -> Controller:
    """Merge states with identical (move, successor-class) behavior."""
    m = c.manager
    n = c.n_states
    blocks = [0] * n
    nblocks = 1
    while True:
        cache: dict[int, int] = {}
        sig_ids: dict[int, int] = {}
        new_blocks = [0] * n
        for s in range(n):
            root = m.map_terminals(c.delta[s], lambda t: (t[0], blocks[t[1]]), cache)
            bid = sig_ids.get(root)
            if bid is None:
                bid = len(sig_ids)
                sig_ids[root] = bid
            new_blocks[s] = bid
        if len(sig_ids) == nblocks:
            blocks = new_blocks
            break
        blocks, nblocks = new_blocks, len(sig_ids)

    rep: dict[int, int] = {}
    for s in range(n):
        rep.setdefault(blocks[s], s)
    new_id: dict[int, int] = {blocks[c.initial]: 0}
    queue = [blocks[c.initial]]
    while queue:
        b = queue.pop(0)
        for _, t in m.terminals_in_order(c.delta[rep[b]]):
            tb = blocks[t]
            if tb not in new_id:
                new_id[tb] = len(new_id)
                queue.append(tb)
    cache2: dict[int, int] = {}
    delta = [0] * len(new_id)
    for b, i in new_id.items():
        delta[i] = m.map_terminals(c.delta[rep[b]],
                                   lambda t: (t[0], new_id[blocks[t[1]]]), cache2)
    return Controller(m, c.order, delta, 0)


def mealy_equivalent(a: Controller, b: Controller) -> bool:
    """Identical input/output behavior from the initial states."""
    if a.order != b.order:
        return False
    env = a.order.env_indices()
    seen = {(a.initial, b.initial)}
    queue = [(a.initial, b.initial)]
    while queue:
        sa, sb = queue.pop()
        for ebits in itertools.product((0, 1), repeat=len(env)):
            ma, ta = a.step(sa, ebits)
            mb, tb = b.step(sb, ebits)
            if ma != mb:
                return False
            if (ta, tb) not in seen:
                seen.add((ta, tb))
                queue.append((ta, tb))
    return True


def synthesize(spec: SynthSpec, ctx: CompileContext | None = None,
               extra_hard: SymbolicDfa | None = None):
    """Full pipeline: monitor, MPNC, LODC. Returns (arena, mpnc, controller, ctx)."""
    arena, ctx = build_monitor(spec, ctx, extra_hard)
    mpnc = solve_mpnc(arena)
    lodc = solve_lodc(mpnc, spec.soft)
    return arena, mpnc, lodc, ctx
