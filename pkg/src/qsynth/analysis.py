"""Worst/best-case latency over controller executions, plus trace simulation.

maxlen builds the fragment automaton (every reachable state of the measured
system made initial), products it with the formula automaton, and computes
the longest accepting path: infinite when an accepting node is reachable
from a reachable cycle, otherwise by dynamic programming over the SCC
condensation. Lengths are interval lengths (positions minus one), matching
the slen convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .automata import dfa as D
from .automata.dfa import SymbolicDfa, VarOrder
from .compiler import CompileContext
from .game import Controller
from .logic import ast as A


@dataclass(frozen=True)
class LatencyResult:
    kind: str                 # 'finite' | 'infinite' | 'nofragment'
    value: int | None = None

    @staticmethod
    def finite(n: int) -> "LatencyResult":
        return LatencyResult("finite", n)

    @staticmethod
    def infinite() -> "LatencyResult":
        return LatencyResult("infinite")

    @staticmethod
    def nofragment() -> "LatencyResult":
        return LatencyResult("nofragment")

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"finite {self.value}"
        return self.kind

    # ordering for the monotonicity property: nofragment < finite(n) < infinite
    def _key(self):
        if self.kind == "nofragment":
            return (0, 0)
        if self.kind == "finite":
            return (1, self.value)
        return (2, 0)

    def __le__(self, other: "LatencyResult") -> bool:
        return self._key() <= other._key()


@dataclass
class RunGraph:
    """Explicit step graph of the measured system: per node, labeled edges."""

    order: VarOrder
    edges: list[list[tuple[tuple[int, ...], int]]]   # node -> [(full valuation, next)]
    initial: int

    def reachable(self) -> list[int]:
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            s = stack.pop()
            for _, t in self.edges[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return sorted(seen)


def controller_graph(c: Controller) -> RunGraph:
    env = c.order.env_indices()
    edges: list[list[tuple[tuple[int, ...], int]]] = []
    for s in range(c.n_states):
        row = []
        for ebits in itertools.product((0, 1), repeat=len(env)):
            move, nxt = c.step(s, ebits)
            row.append((c.full_valuation(ebits, move), nxt))
        edges.append(row)
    return RunGraph(c.order, edges, c.initial)


def arena_graph(monitor: SymbolicDfa, good: frozenset[int]) -> RunGraph:
    """All safety-respecting moves of a (prefix-closed) monitor automaton."""
    n = len(monitor.order)
    edges: list[list[tuple[tuple[int, ...], int]]] = [[] for _ in range(monitor.n_states)]
    for s in sorted(good):
        for cube, t in monitor.transition_paths(s):
            if t not in good:
                continue
            free = [i for i in range(n) if i not in cube]
            for bits in itertools.product((0, 1), repeat=len(free)):
                full = [0] * n
                for i, b in cube.items():
                    full[i] = b
                for i, b in zip(free, bits):
                    full[i] = b
                edges[s].append((tuple(full), t))
    return RunGraph(monitor.order, edges, monitor.initial)


def extend_with_indicator(g: RunGraph, name: str, formula: A.Formula,
                          ctx: CompileContext | None = None) -> RunGraph:
    """Append a derived variable tracking a past-time formula along every run.

    Used by latency queries that mention measurement-only indicators (for
    example an assumptions-held flag); the synthesized system is untouched.
    """
    order = g.order
    if name in order:
        raise ValueError(f"indicator {name!r} clashes with an existing variable")
    new_order = VarOrder(order.names + (name,), order.tags + ("witness",))
    ctx = ctx or CompileContext(new_order)
    if ctx.order != new_order:
        ctx = CompileContext(new_order, manager=ctx.manager, det_cap=ctx.det_cap,
                             appendix_point_semantics=ctx.appendix_point_semantics)
    ind = A.Pref(A.FIff(A.at_last(A.PVar(name)), formula))
    mon = D.safety_interior(ctx.compile(ind))
    good = mon.accepting

    ids: dict[tuple[int, int], int] = {}
    order_alloc: list[tuple[int, int]] = []

    def alloc(pair):
        if pair not in ids:
            ids[pair] = len(order_alloc)
            order_alloc.append(pair)
        return ids[pair]

    alloc((g.initial, mon.initial))
    edges: list[list[tuple[tuple[int, ...], int]]] = []
    i = 0
    while i < len(order_alloc):
        s, ms = order_alloc[i]
        row = []
        for valuation, t in g.edges[s]:
            for bit in (0, 1):
                full = valuation + (bit,)
                mt = mon.manager.eval(mon.delta[ms], full)
                if mt in good:
                    row.append((full, alloc((t, mt))))
        edges.append(row)
        i += 1
    return RunGraph(new_order, edges, 0)


# ---------------------------------------------------------------------------
# maxlen / minlen


def _fragment_product(dp: A.Formula, g: RunGraph,
                      ctx: CompileContext | None = None):
    """Product nodes (system state, formula state); initial = every reachable state."""
    if ctx is None or ctx.order != g.order:
        ctx = CompileContext(g.order, det_cap=ctx.det_cap if ctx else 10_000_000)
    aut = ctx.compile(dp)
    reach = g.reachable()
    ids: dict[tuple[int, int], int] = {}
    nodes: list[tuple[int, int]] = []

    def alloc(pair):
        if pair not in ids:
            ids[pair] = len(nodes)
            nodes.append(pair)
        return ids[pair]

    initials = [alloc((s, aut.initial)) for s in reach]
    edges: list[list[int]] = []
    accepting: set[int] = set()
    i = 0
    while i < len(nodes):
        s, a = nodes[i]
        row = []
        for valuation, t in g.edges[s]:
            a2 = aut.manager.eval(aut.delta[a], valuation)
            j = alloc((t, a2))
            row.append(j)
        edges.append(row)
        if a in aut.accepting:
            accepting.add(i)
        i += 1
    return initials, edges, accepting


def _sccs(n: int, edges: list[list[int]]) -> list[int]:
    """Tarjan (iterative); returns component id per node, in reverse topological order."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp = [-1] * n
    counter = itertools.count()
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = next(counter)
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for k in range(pi, len(edges[v])):
                w = edges[v][k]
                if index[w] == -1:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    low_of = comp[w]
                    if w == v:
                        break
                ncomp += 1
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comp


def maxlen(dp: A.Formula, g: RunGraph, ctx: CompileContext | None = None) -> LatencyResult:
    """sup of fragment lengths (interval length e - b) of executions satisfying dp."""
    initials, edges, accepting = _fragment_product(dp, g, ctx)
    n = len(edges)
    # reachable part
    reach = set(initials)
    stack = list(initials)
    while stack:
        v = stack.pop()
        for w in edges[v]:
            if w not in reach:
                reach.add(w)
                stack.append(w)
    acc_reach = accepting & reach
    if not acc_reach:
        return LatencyResult.nofragment()
    # co-reachable of accepting
    preds: list[list[int]] = [[] for _ in range(n)]
    for v in reach:
        for w in edges[v]:
            if w in reach:
                preds[w].append(v)
    co = set(acc_reach)
    stack = list(acc_reach)
    while stack:
        v = stack.pop()
        for p in preds[v]:
            if p not in co:
                co.add(p)
                stack.append(p)
    useful = reach & co
    comp = _sccs(n, edges)
    # a node inside a nontrivial SCC (or with a self loop) that is useful => infinite
    comp_size: dict[int, int] = {}
    for v in useful:
        comp_size[comp[v]] = comp_size.get(comp[v], 0) + 1
    for v in useful:
        if comp_size[comp[v]] > 1 or v in edges[v]:
            return LatencyResult.infinite()
    # iterative topological order (DAG on useful nodes), children first
    topo: list[int] = []
    state = {v: 0 for v in useful}
    for start in useful:
        if state[start]:
            continue
        stack2 = [(start, iter(edges[start]))]
        state[start] = 1
        while stack2:
            v, it = stack2[-1]
            advanced = False
            for w in it:
                if w in useful and state[w] == 0:
                    state[w] = 1
                    stack2.append((w, iter(edges[w])))
                    advanced = True
                    break
            if not advanced:
                topo.append(v)
                stack2.pop()

    # longest initial->accepting path (in edges), DP over reverse topological order
    best_to_acc: dict[int, int] = {}
    for v in topo:  # topo is reverse-topological (children first)
        base = 0 if v in acc_reach else None
        best = base
        for w in edges[v]:
            if w in useful and w in best_to_acc:
                cand = 1 + best_to_acc[w]
                if best is None or cand > best:
                    best = cand
        if best is not None:
            best_to_acc[v] = best
    best_edges = max((best_to_acc[v] for v in initials if v in best_to_acc), default=None)
    if best_edges is None or best_edges == 0:
        # an accepting INITIAL node is not a fragment (fragments have >= 1 position)
        positive = [best_to_acc[v] for v in initials if v in best_to_acc and best_to_acc[v] >= 1]
        if not positive:
            return LatencyResult.nofragment()
        best_edges = max(positive)
    return LatencyResult.finite(best_edges - 1)


def minlen(dp: A.Formula, g: RunGraph, ctx: CompileContext | None = None) -> LatencyResult:
    """inf of fragment lengths; BFS on the same product."""
    initials, edges, accepting = _fragment_product(dp, g, ctx)
    dist = {v: 0 for v in initials}
    frontier = list(initials)
    steps = 0
    while frontier:
        steps += 1
        nxt = []
        for v in frontier:
            for w in edges[v]:
                if w not in dist:
                    dist[w] = steps
                    nxt.append(w)
                    if w in accepting:
                        return LatencyResult.finite(steps - 1)
        # accepting found exactly at this level?
        frontier = nxt
    # check any accepting already seen at level >= 1 handled above; none found:
    return LatencyResult.nofragment()


# ---------------------------------------------------------------------------
# Simulation


@dataclass
class Trace:
    order: VarOrder
    rows: list[tuple[int, ...]]    # full valuations per step

    def column(self, name: str) -> list[int]:
        i = self.order.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.order.names)]
        for row in self.rows:
            lines.append(",".join(str(b) for b in row))
        return "\n".join(lines) + "\n"


def simulate(c: Controller, inputs: Iterable[Sequence[int]]) -> Trace:
    rows = []
    s = c.initial
    for ebits in inputs:
        move, s = c.step(s, tuple(ebits))
        rows.append(c.full_valuation(tuple(ebits), move))
    return Trace(c.order, rows)


def trace_from_csv(text: str, order: VarOrder) -> list[tuple[int, ...]]:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    header = tuple(h.strip() for h in lines[0].split(","))
    rows = []
    for ln in lines[1:]:
        vals = dict(zip(header, (int(x) for x in ln.split(","))))
        rows.append(tuple(vals.get(nm, 0) for nm in order.names))
    return rows
