"""Symbolic deterministic automata with shared-diagram transition functions.

A SymbolicDfa stores, per state, a decision diagram over the variable order
whose terminals name destination states; diagrams are hash-consed within a
Manager so common transition structure is shared. Languages are sets of
non-empty words over full valuations of the order; the empty word is
treated as don't-care (see minimize).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .explicit import ExplicitDfa
from .mtbdd import Manager, ResourceLimit

TAGS = ("input", "aux", "output", "witness")
ENV_TAGS = ("input", "aux")
CTRL_TAGS = ("output", "witness")


@dataclass(frozen=True)
class VarOrder:
    """Ordered, partition-tagged variable set.

    Environment-controlled variables (inputs then auxiliaries) precede
    controller-owned ones (outputs then witnesses); the game algorithms
    rely on this layout.
    """

    names: tuple[str, ...]
    tags: tuple[str, ...]
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(self.names) != len(set(self.names)):
            raise ValueError("duplicate variable names in order")
        if len(self.names) != len(self.tags):
            raise ValueError("names/tags length mismatch")
        rank = {tag: i for i, tag in enumerate(TAGS)}
        for tag in self.tags:
            if tag not in rank:
                raise ValueError(f"unknown variable tag {tag!r}")
        if list(self.tags) != sorted(self.tags, key=rank.__getitem__):
            raise ValueError("variable order must list input, aux, output, witness groups in that order")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @staticmethod
    def make(inputs: Sequence[str] = (), aux: Sequence[str] = (),
             outputs: Sequence[str] = (), witnesses: Sequence[str] = ()) -> "VarOrder":
        names = tuple(inputs) + tuple(aux) + tuple(outputs) + tuple(witnesses)
        tags = (("input",) * len(inputs) + ("aux",) * len(aux)
                + ("output",) * len(outputs) + ("witness",) * len(witnesses))
        return VarOrder(names, tags)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"variable {name!r} not in order {self.names}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def is_env(self, idx: int) -> bool:
        return self.tags[idx] in ENV_TAGS

    def env_indices(self) -> list[int]:
        return [i for i in range(len(self.names)) if self.is_env(i)]

    def ctrl_indices(self) -> list[int]:
        return [i for i in range(len(self.names)) if not self.is_env(i)]


class OrderMismatch(ValueError):
    pass


def _check_same(a: "SymbolicDfa", b: "SymbolicDfa"):
    if a.order != b.order or a.manager is not b.manager:
        raise OrderMismatch("operands must share a variable order and manager")


@dataclass
class SymbolicDfa:
    manager: Manager
    order: VarOrder
    delta: list[int]
    initial: int
    accepting: frozenset[int]

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def step(self, state: int, letter: Sequence[int]) -> int:
        return self.manager.eval(self.delta[state], letter)

    def accepts(self, word: Iterable[Sequence[int]]) -> bool:
        s = self.initial
        seen_letter = False
        for letter in word:
            seen_letter = True
            s = self.manager.eval(self.delta[s], letter)
        if not seen_letter:
            return self.initial in self.accepting
        return s in self.accepting

    def successors(self, state: int) -> list[int]:
        return sorted(self.manager.terminal_values(self.delta[state]))

    def reachable(self) -> list[int]:
        seen = {self.initial}
        queue = [self.initial]
        while queue:
            s = queue.pop()
            for t in self.manager.terminal_values(self.delta[s]):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return sorted(seen)

    def reject_sink(self) -> int | None:
        """The unique dead rejecting state, if one exists."""
        for s in range(self.n_states):
            if s not in self.accepting and self.manager.terminal_values(self.delta[s]) == {s}:
                return s
        return None

    def n_reported_states(self, include_sink: bool = False) -> int:
        n = len(self.reachable())
        if not include_sink and self.reject_sink() is not None:
            n -= 1
        return n

    def diagram_nodes(self) -> int:
        return len(self.manager.reachable_nodes(self.delta))

    def transition_paths(self, state: int) -> Iterator[tuple[dict[int, int], int]]:
        yield from self.manager.paths(self.delta[state])

    def to_explicit(self) -> ExplicitDfa:
        import itertools
        n = len(self.order)
        letters = [tuple(bits) for bits in itertools.product((0, 1), repeat=n)]
        trans = [{L: self.manager.eval(self.delta[s], L) for L in letters}
                 for s in range(self.n_states)]
        return ExplicitDfa(n, trans, self.initial, self.accepting)


def from_explicit(exp: ExplicitDfa, manager: Manager, order: VarOrder) -> SymbolicDfa:
    if len(order) != exp.nvars:
        raise OrderMismatch("order size does not match explicit automaton")
    delta = []
    for s in range(exp.n_states):
        paths = [(dict(enumerate(letter)), dest) for letter, dest in sorted(exp.transitions[s].items())]
        delta.append(manager.from_paths(paths))
    return SymbolicDfa(manager, order, delta, exp.initial, frozenset(exp.accepting))


# ---------------------------------------------------------------------------
# Boolean operations


def product(a: SymbolicDfa, b: SymbolicDfa,
            combine: Callable[[bool, bool], bool]) -> SymbolicDfa:
    """Synchronous product; accepting per the pair predicate; reachable-trimmed."""
    _check_same(a, b)
    m = a.manager
    pair_cache: dict[tuple[int, int], int] = {}
    ids: dict[tuple[int, int], int] = {}
    order_of_alloc: list[tuple[int, int]] = []

    def alloc(pair):
        got = ids.get(pair)
        if got is None:
            got = len(order_of_alloc)
            ids[pair] = got
            order_of_alloc.append(pair)
        return got

    map_cache: dict[int, int] = {}
    alloc((a.initial, b.initial))
    delta: list[int] = []
    i = 0
    while i < len(order_of_alloc):
        sa, sb = order_of_alloc[i]
        merged = m.meet(a.delta[sa], b.delta[sb], lambda x, y: (x, y), pair_cache)
        delta.append(m.map_terminals(merged, alloc, map_cache))
        i += 1
    accepting = frozenset(
        ids[p] for p in order_of_alloc
        if combine(p[0] in a.accepting, p[1] in b.accepting))
    return SymbolicDfa(m, a.order, delta, 0, accepting)


def complement(a: SymbolicDfa) -> SymbolicDfa:
    return SymbolicDfa(a.manager, a.order, list(a.delta), a.initial,
                       frozenset(range(a.n_states)) - a.accepting)


def reachable_trim(a: SymbolicDfa) -> SymbolicDfa:
    reach = a.reachable()
    if len(reach) == a.n_states:
        return a
    remap = {s: i for i, s in enumerate(reach)}
    cache: dict[int, int] = {}
    delta = [a.manager.map_terminals(a.delta[s], remap.__getitem__, cache) for s in reach]
    acc = frozenset(remap[s] for s in reach if s in a.accepting)
    return SymbolicDfa(a.manager, a.order, delta, remap[a.initial], acc)


def minimize(a: SymbolicDfa) -> SymbolicDfa:
    """Canonical minimal DFA for the language over non-empty words.

    Moore refinement on shared diagrams; the initial state's own acceptance
    bit is don't-care when nothing transitions into it (the empty word is
    outside the language domain). States are renumbered by BFS from the
    initial state, exploring each diagram 0-branch first, so equal languages
    yield identical automata.
    """
    a = reachable_trim(a)
    m = a.manager
    n = a.n_states
    blocks = [1 if s in a.accepting else 0 for s in range(n)]
    nblocks = len(set(blocks))
    while True:
        cache: dict[int, int] = {}
        sigs = {}
        new_blocks = [0] * n
        sig_ids: dict[tuple[int, int], int] = {}
        for s in range(n):
            root = m.map_terminals(a.delta[s], lambda t: blocks[t], cache)
            sig = (blocks[s], root)
            bid = sig_ids.get(sig)
            if bid is None:
                bid = len(sig_ids)
                sig_ids[sig] = bid
            new_blocks[s] = bid
            sigs[s] = root
        if len(sig_ids) == nblocks:
            blocks = new_blocks
            break
        blocks, nblocks = new_blocks, len(sig_ids)

    # empty-word don't-care adjustment
    has_in = False
    for s in range(n):
        if a.initial in m.terminal_values(a.delta[s]):
            has_in = True
            break
    init_block_members = [s for s in range(n) if blocks[s] == blocks[a.initial]]
    if not has_in and len(init_block_members) == 1:
        cache2: dict[int, int] = {}
        init_root = m.map_terminals(a.delta[a.initial], lambda t: blocks[t], cache2)
        for s in range(n):
            if blocks[s] != blocks[a.initial]:
                if m.map_terminals(a.delta[s], lambda t: blocks[t], cache2) == init_root:
                    blocks[a.initial] = blocks[s]
                    break

    # canonical representative per block (not the initial state if avoidable,
    # so the merged block keeps the bit of its non-initial members)
    block_size: dict[int, int] = {}
    for s in range(n):
        block_size[blocks[s]] = block_size.get(blocks[s], 0) + 1
    rep: dict[int, int] = {}
    bit: dict[int, int] = {}
    for s in range(n):
        b = blocks[s]
        if b not in rep or (rep[b] == a.initial and s != a.initial):
            rep[b] = s
        if s != a.initial or block_size[b] == 1:
            bit[b] = 1 if s in a.accepting else 0

    # BFS renumbering, 0-branch first
    new_id: dict[int, int] = {blocks[a.initial]: 0}
    queue = [blocks[a.initial]]
    while queue:
        b = queue.pop(0)
        for t in m.terminals_in_order(a.delta[rep[b]]):
            tb = blocks[t]
            if tb not in new_id:
                new_id[tb] = len(new_id)
                queue.append(tb)

    cache3: dict[int, int] = {}
    delta = [0] * len(new_id)
    acc = set()
    for b, i in new_id.items():
        delta[i] = m.map_terminals(a.delta[rep[b]], lambda t: new_id[blocks[t]], cache3)
        if bit.get(b, 1 if rep[b] in a.accepting else 0):
            acc.add(i)
    return SymbolicDfa(m, a.order, delta, 0, frozenset(acc))


def prefix_close(a: SymbolicDfa) -> SymbolicDfa:
    """Accepting set becomes co-reachability of the accepting set (Pref(L))."""
    preds: dict[int, set[int]] = {s: set() for s in range(a.n_states)}
    for s in range(a.n_states):
        for t in a.manager.terminal_values(a.delta[s]):
            preds[t].add(s)
    acc = set(a.accepting)
    queue = list(acc)
    while queue:
        s = queue.pop()
        for p in preds[s]:
            if p not in acc:
                acc.add(p)
                queue.append(p)
    return minimize(SymbolicDfa(a.manager, a.order, list(a.delta), a.initial, frozenset(acc)))


def safety_interior(a: SymbolicDfa) -> SymbolicDfa:
    """Largest prefix-closed sublanguage: words whose run stays accepting.

    This is the monitor construction: a fresh start node adopts the initial
    state's transitions (the empty prefix is vacuously good), every escape
    from the accepting region is redirected to a reject sink, and the result
    is minimized. All non-sink states of the result are accepting.
    """
    m = a.manager
    n = a.n_states
    sink = n
    start = n + 1
    cache: dict[int, int] = {}

    def redirect(t):
        return t if t in a.accepting else sink

    delta = [m.map_terminals(a.delta[s], redirect, cache) for s in range(n)]
    delta.append(m.terminal(sink))
    delta.append(m.map_terminals(a.delta[a.initial], redirect, cache))
    acc = frozenset(a.accepting) | {start}
    closed = SymbolicDfa(m, a.order, delta, start, acc)
    return minimize(closed)


def rename(a: SymbolicDfa, mapping: dict[str, str],
           new_order: VarOrder | None = None) -> SymbolicDfa:
    """Per-position variable relabeling (the D[O/O'] construction).

    mapping must be injective; unmapped variables keep their names. When the
    induced index map is monotone the diagrams are relabeled in place,
    otherwise each state's transition function is rebuilt from its cubes.
    """
    if len(set(mapping.values())) != len(mapping):
        raise ValueError("rename mapping must be injective")
    order = new_order if new_order is not None else a.order
    new_names = []
    for name in a.order.names:
        target = mapping.get(name, name)
        if target not in order:
            raise ValueError(f"rename target {target!r} not in result order")
        new_names.append(target)
    if len(set(new_names)) != len(new_names):
        raise ValueError("rename collides two source variables")
    idx_map = {i: order.index(t) for i, t in enumerate(new_names)}
    m = a.manager
    monotone = all(idx_map[i] < idx_map[j]
                   for i in range(len(new_names)) for j in range(i + 1, len(new_names)))
    delta = []
    if monotone:
        cache: dict[int, int] = {}
        for s in range(a.n_states):
            delta.append(m.relabel(a.delta[s], idx_map, cache))
    else:
        for s in range(a.n_states):
            paths = [({idx_map[v]: b for v, b in cube.items()}, t)
                     for cube, t in m.paths(a.delta[s])]
            delta.append(m.from_paths(paths))
    return SymbolicDfa(m, order, delta, a.initial, a.accepting)


def embed(a: SymbolicDfa, order: VarOrder) -> SymbolicDfa:
    """Reinterpret over a superset order (new variables unconstrained)."""
    return rename(a, {}, order)


# ---------------------------------------------------------------------------
# Nondeterministic layer: determinize, chop, star, projection


@dataclass
class Nfa:
    """As SymbolicDfa but with initial-state sets and set-valued terminals."""

    manager: Manager
    order: VarOrder
    delta: list[int]          # terminals are frozensets of states
    initials: frozenset[int]
    accepting: frozenset[int]

    @property
    def n_states(self) -> int:
        return len(self.delta)


def _union(x: frozenset, y: frozenset) -> frozenset:
    return x | y


def dfa_to_nfa(a: SymbolicDfa) -> Nfa:
    cache: dict[int, int] = {}
    delta = [a.manager.map_terminals(a.delta[s], lambda t: frozenset((t,)), cache)
             for s in range(a.n_states)]
    return Nfa(a.manager, a.order, delta, frozenset((a.initial,)), a.accepting)


def determinize(n: Nfa, state_cap: int = 10_000_000) -> SymbolicDfa:
    """Subset construction carried out on the shared diagrams."""
    m = n.manager
    union_cache: dict[tuple[int, int], int] = {}
    empty = m.terminal(frozenset())

    def subset_root(states: frozenset[int]) -> int:
        if not states:
            return empty
        roots = [n.delta[s] for s in sorted(states)]
        out = roots[0]
        for r in roots[1:]:
            out = m.meet(out, r, _union, union_cache)
        return out

    ids: dict[frozenset[int], int] = {}
    alloc_order: list[frozenset[int]] = []

    def alloc(sub: frozenset[int]) -> int:
        got = ids.get(sub)
        if got is None:
            if len(alloc_order) >= state_cap:
                raise ResourceLimit(f"determinization exceeded {state_cap} subset states")
            got = len(alloc_order)
            ids[sub] = got
            alloc_order.append(sub)
        return got

    map_cache: dict[int, int] = {}
    alloc(n.initials)
    delta: list[int] = []
    i = 0
    while i < len(alloc_order):
        delta.append(m.map_terminals(subset_root(alloc_order[i]), alloc, map_cache))
        i += 1
    accepting = frozenset(ids[sub] for sub in alloc_order if sub & n.accepting)
    return SymbolicDfa(m, n.order, delta, 0, accepting)


def project(a: SymbolicDfa, var: str) -> Nfa:
    """Existential projection of one variable; result order drops it."""
    idx = a.order.index(var)
    m = a.manager
    names = tuple(x for x in a.order.names if x != var)
    tags = tuple(t for x, t in zip(a.order.names, a.order.tags) if x != var)
    new_order = VarOrder(names, tags)
    # drop the variable, then shift higher indices down one
    shift = {i: (i if i < idx else i - 1) for i in range(len(a.order)) if i != idx}
    proj_cache: dict[int, int] = {}
    rel_cache: dict[int, int] = {}
    set_cache: dict[int, int] = {}
    delta = []
    for s in range(a.n_states):
        root = m.map_terminals(a.delta[s], lambda t: frozenset((t,)), set_cache)
        root = m.project_var(root, idx, _union, proj_cache)
        delta.append(m.relabel(root, shift, rel_cache))
    return Nfa(m, new_order, delta, frozenset((a.initial,)), a.accepting)


def concat(a: SymbolicDfa, b: SymbolicDfa) -> Nfa:
    """Overlapping concatenation: the chop position belongs to both factors.

    States are the disjoint union; whenever an a-step lands in an accepting
    a-state, the same letter is also consumed by b from its initial state
    (the shared position), bridging into b's run.
    """
    _check_same(a, b)
    m = a.manager
    off = a.n_states

    b_init_moves = m.map_terminals(b.delta[b.initial], lambda t: frozenset((t + off,)), {})

    def bridge(ta: int, tb: frozenset) -> frozenset:
        if ta in a.accepting:
            return frozenset((ta,)) | tb
        return frozenset((ta,))

    delta = []
    cache: dict[tuple[int, int], int] = {}
    for s in range(a.n_states):
        delta.append(m.meet(a.delta[s], b_init_moves, bridge, cache))
    shift_cache: dict[int, int] = {}
    for s in range(b.n_states):
        delta.append(m.map_terminals(b.delta[s], lambda t: frozenset((t + off,)), shift_cache))
    accepting = frozenset(t + off for t in b.accepting)
    return Nfa(m, a.order, delta, frozenset((a.initial,)), accepting)


def star(a: SymbolicDfa) -> Nfa:
    """Overlapping finite iteration; every single-letter word is included."""
    m = a.manager
    n = a.n_states
    start = n
    pt_acc = n + 1

    init_moves = m.map_terminals(a.delta[a.initial], lambda t: frozenset((t,)), {})

    # restart: when a segment can end at this letter, the next segment also
    # consumes it from the initial state
    cache: dict[tuple[int, int], int] = {}

    def bridge(t: int, init_targets: frozenset) -> frozenset:
        if t in a.accepting:
            return frozenset((t,)) | init_targets
        return frozenset((t,))

    delta = []
    for s in range(n):
        delta.append(m.meet(a.delta[s], init_moves, bridge, cache))
    # start: behave like the initial state, plus accept any first letter as a point
    start_root = m.map_terminals(init_moves, lambda ts: ts | {pt_acc}, {})
    delta.append(start_root)
    delta.append(m.terminal(frozenset()))  # pt_acc is dead
    accepting = frozenset(a.accepting) | {pt_acc}
    return Nfa(m, a.order, delta, frozenset((start,)), accepting)


# ---------------------------------------------------------------------------
# Language queries (test-scale helpers)


def equivalent(a: SymbolicDfa, b: SymbolicDfa) -> tuple[bool, list[tuple[int, ...]] | None]:
    """Language equality over non-empty words, with a shortest counterexample."""
    _check_same(a, b)
    m = a.manager
    pair_cache: dict[tuple[int, int], int] = {}
    seen = {(a.initial, b.initial)}
    frontier: list[tuple[tuple[int, int], list[tuple[int, ...]]]] = [((a.initial, b.initial), [])]
    nvars = len(a.order)
    while frontier:
        nxt = []
        for (sa, sb), word in frontier:
            merged = m.meet(a.delta[sa], b.delta[sb], lambda x, y: (x, y), pair_cache)
            for cube, (ta, tb) in m.paths(merged):
                letter = tuple(cube.get(i, 0) for i in range(nvars))
                if (ta in a.accepting) != (tb in b.accepting):
                    return False, word + [letter]
                if (ta, tb) not in seen:
                    seen.add((ta, tb))
                    nxt.append(((ta, tb), word + [letter]))
        frontier = nxt
    return True, None


def accepts_nfa(n: Nfa, word: Iterable[Sequence[int]]) -> bool:
    current = set(n.initials)
    seen_letter = False
    for letter in word:
        seen_letter = True
        nxt: set[int] = set()
        for s in current:
            nxt |= n.manager.eval(n.delta[s], letter)
        current = nxt
    if not seen_letter:
        return bool(set(n.initials) & n.accepting)
    return bool(current & n.accepting)


def language(a: SymbolicDfa, max_len: int) -> set[tuple[tuple[int, ...], ...]]:
    return a.to_explicit().language(max_len)
