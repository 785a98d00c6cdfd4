"""Hash-consed multi-terminal decision diagrams.

A manager owns a table of nodes shared by every diagram built through it.
Internal nodes test a variable index (strictly increasing along any path);
terminals carry an arbitrary hashable value (destination states, state
sets during determinization, or (output, successor) pairs for controllers).
Reduction is the usual one: a node whose two children coincide is elided,
and structurally equal nodes are represented by the same integer handle,
so two handles are equal iff the functions they denote are equal.
"""

from __future__ import annotations

from typing import Any, Callable, Hashable, Iterator, Sequence


class ResourceLimit(Exception):
    """Raised when a configured node or state budget is exceeded."""


class Manager:
    """Owner of a shared node table. Single-writer, see package docs."""

    __slots__ = ("_var", "_lo", "_hi", "_unique", "_terms", "_term_value", "node_cap")

    TERMINAL = -1

    def __init__(self, node_cap: int = 50_000_000):
        self._var: list[int] = []
        self._lo: list[int] = []
        self._hi: list[int] = []
        self._unique: dict[tuple[int, int, int], int] = {}
        self._terms: dict[Hashable, int] = {}
        self._term_value: dict[int, Hashable] = {}
        self.node_cap = node_cap

    def __len__(self) -> int:
        return len(self._var)

    def _alloc(self, var: int, lo: int, hi: int) -> int:
        idx = len(self._var)
        if idx >= self.node_cap:
            raise ResourceLimit(f"decision-diagram node budget exceeded ({self.node_cap})")
        self._var.append(var)
        self._lo.append(lo)
        self._hi.append(hi)
        return idx

    def terminal(self, value: Hashable) -> int:
        node = self._terms.get(value)
        if node is None:
            node = self._alloc(self.TERMINAL, -1, -1)
            self._terms[value] = node
            self._term_value[node] = value
        return node

    def node(self, var: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (var, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = self._alloc(var, lo, hi)
            self._unique[key] = node
        return node

    def is_terminal(self, node: int) -> bool:
        return self._var[node] == self.TERMINAL

    def value(self, node: int) -> Hashable:
        return self._term_value[node]

    def var(self, node: int) -> int:
        return self._var[node]

    def lo(self, node: int) -> int:
        return self._lo[node]

    def hi(self, node: int) -> int:
        return self._hi[node]

    # -- evaluation and traversal ------------------------------------------

    def eval(self, node: int, bits: Sequence[int]) -> Hashable:
        """Follow a full valuation (bits indexed by variable) to its terminal."""
        while self._var[node] != self.TERMINAL:
            node = self._hi[node] if bits[self._var[node]] else self._lo[node]
        return self._term_value[node]

    def paths(self, node: int) -> Iterator[tuple[dict[int, int], Hashable]]:
        """Yield (partial valuation, terminal value) for every diagram path.

        Variables absent from the dict are unconstrained on that path.
        Deterministic order: 0-child before 1-child.
        """
        cube: dict[int, int] = {}

        def rec(n: int) -> Iterator[tuple[dict[int, int], Hashable]]:
            if self._var[n] == self.TERMINAL:
                yield dict(cube), self._term_value[n]
                return
            v = self._var[n]
            cube[v] = 0
            yield from rec(self._lo[n])
            cube[v] = 1
            yield from rec(self._hi[n])
            del cube[v]

        yield from rec(node)

    def support(self, node: int) -> set[int]:
        seen: set[int] = set()
        out: set[int] = set()
        stack = [node]
        while stack:
            n = stack.pop()
            if n in seen or self._var[n] == self.TERMINAL:
                continue
            seen.add(n)
            out.add(self._var[n])
            stack.append(self._lo[n])
            stack.append(self._hi[n])
        return out

    def terminals_in_order(self, node: int) -> list[Hashable]:
        """Terminal values in first-visit order of a 0-branch-first DFS."""
        out: list[Hashable] = []
        seen_nodes: set[int] = set()
        seen_vals: set[Hashable] = set()

        def rec(n: int):
            if n in seen_nodes:
                return
            seen_nodes.add(n)
            if self._var[n] == self.TERMINAL:
                v = self._term_value[n]
                if v not in seen_vals:
                    seen_vals.add(v)
                    out.append(v)
            else:
                rec(self._lo[n])
                rec(self._hi[n])

        rec(node)
        return out

    def terminal_values(self, node: int) -> set[Hashable]:
        out: set[Hashable] = set()
        seen: set[int] = set()
        stack = [node]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            if self._var[n] == self.TERMINAL:
                out.add(self._term_value[n])
            else:
                stack.append(self._lo[n])
                stack.append(self._hi[n])
        return out

    def reachable_nodes(self, roots: Sequence[int]) -> set[int]:
        seen: set[int] = set()
        stack = list(roots)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            if self._var[n] != self.TERMINAL:
                stack.append(self._lo[n])
                stack.append(self._hi[n])
        return seen

    # -- operations ---------------------------------------------------------

    def map_terminals(self, node: int, fn: Callable[[Hashable], Hashable],
                      cache: dict[int, int] | None = None) -> int:
        if cache is None:
            cache = {}

        def rec(n: int) -> int:
            hit = cache.get(n)
            if hit is not None:
                return hit
            if self._var[n] == self.TERMINAL:
                out = self.terminal(fn(self._term_value[n]))
            else:
                out = self.node(self._var[n], rec(self._lo[n]), rec(self._hi[n]))
            cache[n] = out
            return out

        return rec(node)

    def meet(self, a: int, b: int, fn: Callable[[Hashable, Hashable], Hashable],
             cache: dict[tuple[int, int], int] | None = None) -> int:
        """Pointwise combination of two diagrams via a terminal combiner."""
        if cache is None:
            cache = {}

        def rec(x: int, y: int) -> int:
            key = (x, y)
            hit = cache.get(key)
            if hit is not None:
                return hit
            vx, vy = self._var[x], self._var[y]
            if vx == self.TERMINAL and vy == self.TERMINAL:
                out = self.terminal(fn(self._term_value[x], self._term_value[y]))
            else:
                if vx == self.TERMINAL:
                    top = vy
                elif vy == self.TERMINAL:
                    top = vx
                else:
                    top = min(vx, vy)
                x0, x1 = (self._lo[x], self._hi[x]) if vx == top else (x, x)
                y0, y1 = (self._lo[y], self._hi[y]) if vy == top else (y, y)
                out = self.node(top, rec(x0, y0), rec(x1, y1))
            cache[key] = out
            return out

        return rec(a, b)

    def meet_all(self, roots: Sequence[int],
                 fn: Callable[[Hashable, Hashable], Hashable]) -> int:
        """Left fold of meet over a non-empty list of diagrams."""
        out = roots[0]
        for r in roots[1:]:
            out = self.meet(out, r, fn)
        return out

    def project_var(self, node: int, var: int,
                    union: Callable[[Hashable, Hashable], Hashable],
                    cache: dict[int, int] | None = None) -> int:
        """Remove one variable, merging its branches with a union combiner."""
        if cache is None:
            cache = {}
        meet_cache: dict[tuple[int, int], int] = {}

        def rec(n: int) -> int:
            hit = cache.get(n)
            if hit is not None:
                return hit
            v = self._var[n]
            if v == self.TERMINAL or v > var:
                out = n
            elif v == var:
                out = self.meet(self._lo[n], self._hi[n], union, meet_cache)
            else:
                out = self.node(v, rec(self._lo[n]), rec(self._hi[n]))
            cache[n] = out
            return out

        return rec(node)

    def relabel(self, node: int, mapping: dict[int, int],
                cache: dict[int, int] | None = None) -> int:
        """Rename variables through a strictly increasing index mapping."""
        items = sorted(mapping.items())
        for (a1, b1), (a2, b2) in zip(items, items[1:]):
            if not (a1 < a2 and b1 < b2):
                raise ValueError("relabel mapping must be strictly increasing")
        if cache is None:
            cache = {}

        def rec(n: int) -> int:
            hit = cache.get(n)
            if hit is not None:
                return hit
            if self._var[n] == self.TERMINAL:
                out = n
            else:
                v = mapping.get(self._var[n], self._var[n])
                out = self.node(v, rec(self._lo[n]), rec(self._hi[n]))
            cache[n] = out
            return out

        return rec(node)

    def from_paths(self, paths: list[tuple[dict[int, int], Hashable]]) -> int:
        """Build a diagram from a disjoint, exhaustive list of cubes.

        Every full valuation must be covered by exactly one cube; used to
        rebuild diagrams after non-monotone variable permutations and to
        assemble controller transition functions from chosen moves.
        """
        if not paths:
            raise ValueError("from_paths needs at least one cube")

        def rec(items: list[tuple[dict[int, int], Hashable]]) -> int:
            first = items[0]
            if all(not cube for cube, _ in items):
                # all cubes exhausted; values must agree
                for _, value in items:
                    if value != first[1]:
                        raise ValueError("overlapping cubes with conflicting values")
                return self.terminal(first[1])
            top = min(min(cube) for cube, _ in items if cube)
            lo_items = []
            hi_items = []
            for cube, value in items:
                bit = cube.get(top)
                if bit is None:
                    lo_items.append((cube, value))
                    hi_items.append((cube, value))
                else:
                    rest = {k: v for k, v in cube.items() if k != top}
                    (lo_items if bit == 0 else hi_items).append((rest, value))
            if not lo_items or not hi_items:
                raise ValueError("cube list does not cover all valuations")
            return self.node(top, rec(lo_items), rec(hi_items))

        return rec([(dict(c), v) for c, v in paths])


def cube_str(cube: dict[int, int], names: Sequence[str]) -> str:
    """Render a partial valuation as a cube label, e.g. 'req1 !req2 -'."""
    parts = []
    for i, name in enumerate(names):
        bit = cube.get(i)
        if bit is None:
            parts.append("-")
        elif bit:
            parts.append(name)
        else:
            parts.append("!" + name)
    return " ".join(parts)
