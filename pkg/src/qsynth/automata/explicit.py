"""Naive explicit-state automata over valuation alphabets.

Reference implementations (transition matrices indexed by letter) used to
cross-check every symbolic operation, plus a Hopcroft-style minimizer that
the symbolic minimizer is validated against. Only suitable for small
variable counts; the symbolic kernel is the production path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


def all_letters(nvars: int) -> list[tuple[int, ...]]:
    return [tuple(bits) for bits in itertools.product((0, 1), repeat=nvars)]


@dataclass
class ExplicitDfa:
    nvars: int
    transitions: list[dict[tuple[int, ...], int]]
    initial: int
    accepting: frozenset[int]

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    def step(self, state: int, letter: tuple[int, ...]) -> int:
        return self.transitions[state][letter]

    def accepts(self, word) -> bool:
        if not word:
            return self.initial in self.accepting
        s = self.initial
        for letter in word:
            s = self.transitions[s][tuple(letter)]
        return s in self.accepting

    def language(self, max_len: int) -> set[tuple[tuple[int, ...], ...]]:
        """All accepted non-empty words of length <= max_len."""
        letters = all_letters(self.nvars)
        out = set()
        frontier = {(): self.initial}
        for _ in range(max_len):
            nxt = {}
            for word, s in frontier.items():
                for letter in letters:
                    t = self.transitions[s][letter]
                    w2 = word + (letter,)
                    nxt[w2] = t
                    if t in self.accepting:
                        out.add(w2)
            frontier = nxt
        return out

    def reachable(self) -> list[int]:
        seen = {self.initial}
        queue = [self.initial]
        while queue:
            s = queue.pop()
            for t in self.transitions[s].values():
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return sorted(seen)


def product(a: ExplicitDfa, b: ExplicitDfa, combine) -> ExplicitDfa:
    assert a.nvars == b.nvars
    letters = all_letters(a.nvars)
    ids: dict[tuple[int, int], int] = {}
    trans: list[dict[tuple[int, ...], int]] = []
    queue: list[tuple[int, int]] = []

    def get(pair):
        if pair not in ids:
            ids[pair] = len(trans)
            trans.append({})
            queue.append(pair)
        return ids[pair]

    init = get((a.initial, b.initial))
    while queue:
        pair = queue.pop(0)
        sa, sb = pair
        row = trans[ids[pair]]
        for letter in letters:
            row[letter] = get((a.transitions[sa][letter], b.transitions[sb][letter]))
    accepting = frozenset(
        i for pair, i in ids.items()
        if combine(pair[0] in a.accepting, pair[1] in b.accepting))
    return ExplicitDfa(a.nvars, trans, init, accepting)


def complement(a: ExplicitDfa) -> ExplicitDfa:
    return ExplicitDfa(a.nvars, a.transitions, a.initial,
                       frozenset(range(a.n_states)) - a.accepting)


def minimize_hopcroft(a: ExplicitDfa) -> ExplicitDfa:
    """Reference minimizer.

    Treats the empty word as don't-care when the initial state has no
    incoming transitions, matching the symbolic minimizer's convention for
    languages over non-empty words.
    """
    reach = a.reachable()
    remap = {s: i for i, s in enumerate(reach)}
    letters = all_letters(a.nvars)
    trans = [{L: remap[a.transitions[s][L]] for L in letters} for s in reach]
    accepting = {remap[s] for s in reach if s in a.accepting}
    init = remap[a.initial]
    n = len(reach)

    # Hopcroft partition refinement
    parts: list[set[int]] = [set(accepting), set(range(n)) - set(accepting)]
    parts = [p for p in parts if p]
    work = [p.copy() for p in parts]
    while work:
        splitter = work.pop()
        for letter in letters:
            pre = {s for s in range(n) if trans[s][letter] in splitter}
            new_parts = []
            for p in parts:
                inter = p & pre
                diff = p - pre
                if inter and diff:
                    new_parts.extend((inter, diff))
                    if p in work:
                        work.remove(p)
                        work.extend((inter, diff))
                    else:
                        work.append(inter if len(inter) <= len(diff) else diff)
                else:
                    new_parts.append(p)
            parts = new_parts

    block_of = {}
    for i, p in enumerate(parts):
        for s in p:
            block_of[s] = i

    # empty-word don't-care: relocate an unentered initial state when some
    # block matches its one-step behavior
    indeg = any(trans[s][L] == init for s in range(n) for L in letters)
    init_block = block_of[init]
    if not indeg and len(parts[init_block]) == 1:
        sig = tuple(block_of[trans[init][L]] for L in letters)
        for i, p in enumerate(parts):
            if i == init_block:
                continue
            rep = next(iter(p))
            if tuple(block_of[trans[rep][L]] for L in letters) == sig:
                parts[init_block] = set()
                parts[i].add(init)
                block_of[init] = i
                break
        parts = [p for p in parts if p]
        block_of = {}
        for i, p in enumerate(parts):
            for s in p:
                block_of[s] = i

    # canonical BFS numbering from the initial block, letters in index order
    order: dict[int, int] = {}
    queue = [block_of[init]]
    order[block_of[init]] = 0
    reps = {block_of[init]: init}
    while queue:
        b = queue.pop(0)
        rep = reps.get(b, next(iter(parts[b])))
        for letter in letters:
            nb = block_of[trans[rep][letter]]
            if nb not in order:
                order[nb] = len(order)
                reps[nb] = trans[rep][letter]
                queue.append(nb)

    new_trans: list[dict[tuple[int, ...], int]] = [dict() for _ in order]
    new_acc = set()
    for b, i in order.items():
        rep = next(iter(parts[b] - {init})) if (parts[b] - {init}) else init
        for letter in letters:
            new_trans[i][letter] = order[block_of[trans[rep][letter]]]
        if rep in accepting:
            new_acc.add(i)
    return ExplicitDfa(a.nvars, new_trans, 0, frozenset(new_acc))


@dataclass
class ExplicitGame:
    """Brute-force safety game oracle over an explicit arena.

    Variables split as env (inputs + aux) and ctrl (outputs + witnesses);
    letters are (env_bits + ctrl_bits) tuples in that order.
    """

    n_env: int
    n_ctrl: int
    transitions: list[dict[tuple[int, ...], int]]
    initial: int
    accepting: frozenset[int]
    iterations: int = field(default=0)

    def letters(self):
        return all_letters(self.n_env + self.n_ctrl)

    def winning(self) -> set[int]:
        env = all_letters(self.n_env)
        ctrl = all_letters(self.n_ctrl)
        good = set(self.accepting)
        self.iterations = 0
        while True:
            drop = set()
            for s in good:
                ok = all(
                    any(self.transitions[s][e + c] in good for c in ctrl)
                    for e in env)
                if not ok:
                    drop.add(s)
            if not drop:
                break
            self.iterations += 1
            good -= drop
        return good

    def mpnc_moves(self, good: set[int]) -> dict[int, dict[tuple, set[tuple]]]:
        """state -> env valuation -> set of permitted ctrl valuations."""
        env = all_letters(self.n_env)
        ctrl = all_letters(self.n_ctrl)
        out: dict[int, dict[tuple, set[tuple]]] = {}
        for s in sorted(good):
            per = {}
            for e in env:
                per[e] = {c for c in ctrl if self.transitions[s][e + c] in good}
            out[s] = per
        return out

    def lodc(self, good: set[int], objective) -> dict[int, dict[tuple, tuple[tuple, int]]]:
        """Greedy determinization oracle.

        objective(env, ctrl) returns the soft-value vector; ties are broken
        by the lexicographically smallest ctrl valuation. Returns
        state -> env -> (ctrl, successor).
        """
        moves = self.mpnc_moves(good)
        out: dict[int, dict[tuple, tuple[tuple, int]]] = {}
        for s, per in moves.items():
            row = {}
            for e, cands in per.items():
                best = None
                for c in sorted(cands):
                    val = objective(e, c)
                    if best is None or val > best[0]:
                        best = (val, c)
                row[e] = (best[1], self.transitions[s][e + best[1]])
            out[s] = row
        return out
