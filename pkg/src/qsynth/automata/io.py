"""Serialization: DOT rendering, the versioned automaton dump format, and
the external monitor text format (explicit cube table) accepted as a hard
requirement by the shield generator. Formats are documented in
docs/formats.md.
"""

from __future__ import annotations

from .dfa import SymbolicDfa, VarOrder
from .mtbdd import Manager, cube_str

DUMP_MAGIC = "qsdfa 1"


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# DOT


def dfa_to_dot(a: SymbolicDfa, name: str = "dfa") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  hidden [shape=none label=""];']
    for s in range(a.n_states):
        shape = "doublecircle" if s in a.accepting else "circle"
        lines.append(f"  s{s} [shape={shape} label=\"{s}\"];")
    lines.append(f"  hidden -> s{a.initial};")
    for s in range(a.n_states):
        for cube, t in a.transition_paths(s):
            label = cube_str(cube, a.order.names)
            lines.append(f'  s{s} -> s{t} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Versioned dump (shared-node table)


def dump_dfa(a: SymbolicDfa) -> str:
    m = a.manager
    lines = [DUMP_MAGIC]
    lines.append("vars " + " ".join(f"{n}:{t}" for n, t in zip(a.order.names, a.order.tags)))
    lines.append(f"states {a.n_states} initial {a.initial} accepting "
                 + ",".join(str(s) for s in sorted(a.accepting)))
    ids: dict[int, int] = {}
    out_nodes: list[str] = []

    def visit(node: int) -> int:
        got = ids.get(node)
        if got is not None:
            return got
        if m.is_terminal(node):
            val = m.value(node)
            if not isinstance(val, int):
                raise FormatError("dump supports state-valued terminals only")
            ids[node] = len(out_nodes)
            out_nodes.append(f"{len(out_nodes)} term {val}")
        else:
            lo = visit(m.lo(node))
            hi = visit(m.hi(node))
            ids[node] = len(out_nodes)
            out_nodes.append(f"{len(out_nodes)} var {m.var(node)} {lo} {hi}")
        return ids[node]

    roots = [visit(r) for r in a.delta]
    lines.append(f"nodes {len(out_nodes)}")
    lines.extend(out_nodes)
    lines.append("delta " + " ".join(str(r) for r in roots))
    return "\n".join(lines) + "\n"


def load_dfa(text: str, manager: Manager | None = None) -> SymbolicDfa:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != DUMP_MAGIC:
        raise FormatError(f"bad dump header (expected {DUMP_MAGIC!r})")
    m = manager or Manager()
    it = iter(lines[1:])

    def take(prefix: str) -> list[str]:
        ln = next(it, None)
        if ln is None or not ln.startswith(prefix):
            raise FormatError(f"expected {prefix!r} line")
        return ln.split()[1:]

    var_fields = take("vars")
    names, tags = [], []
    for f in var_fields:
        n, _, t = f.partition(":")
        names.append(n)
        tags.append(t or "input")
    order = VarOrder(tuple(names), tuple(tags))

    st = take("states")
    if len(st) < 3 or st[1] != "initial":
        raise FormatError("malformed states line")
    n_states = int(st[0])
    initial = int(st[2])
    accepting = frozenset(int(x) for x in st[4].split(",")) if len(st) > 4 and st[4] else frozenset()
    if st[3] != "accepting":
        raise FormatError("malformed states line")

    n_nodes = int(take("nodes")[0])
    local: dict[int, int] = {}
    for _ in range(n_nodes):
        ln = next(it, None)
        if ln is None:
            raise FormatError("truncated node table")
        parts = ln.split()
        idx = int(parts[0])
        if parts[1] == "term":
            local[idx] = m.terminal(int(parts[2]))
        elif parts[1] == "var":
            v, lo, hi = int(parts[2]), int(parts[3]), int(parts[4])
            if lo not in local or hi not in local:
                raise FormatError("node table refers to undefined nodes")
            local[idx] = m.node(v, local[lo], local[hi])
        else:
            raise FormatError(f"bad node line {ln!r}")
    roots = [local[int(x)] for x in take("delta")]
    if len(roots) != n_states:
        raise FormatError("delta arity does not match state count")
    if not (0 <= initial < n_states):
        raise FormatError("initial state out of range")
    return SymbolicDfa(m, order, roots, initial, accepting)


# ---------------------------------------------------------------------------
# External monitor format (explicit cube table)


def parse_monitor(text: str, manager: Manager | None = None) -> SymbolicDfa:
    """`states N init S acc S1,S2,.. vars v1 v2 ..` header, then `from cube to` lines.

    Cubes are strings over {0,1,-}; the table must be deterministic and
    total. All variables are input-tagged; retag by embedding when used.
    """
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise FormatError("empty monitor file")
    head = lines[0].split()
    try:
        if head[0] != "states" or head[2] != "init" or head[4] != "acc":
            raise FormatError("malformed monitor header")
        n_states = int(head[1])
        init = int(head[3])
        acc = frozenset(int(x) for x in head[5].split(",")) if head[5] != "-" else frozenset()
        if head[6] != "vars":
            raise FormatError("malformed monitor header")
        names = tuple(head[7:])
    except (IndexError, ValueError) as e:
        raise FormatError(f"malformed monitor header: {e}") from None
    if not names:
        raise FormatError("monitor needs at least one variable")
    order = VarOrder.make(inputs=names)
    nvars = len(names)
    m = manager or Manager()

    rows: dict[int, list[tuple[dict[int, int], int]]] = {s: [] for s in range(n_states)}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise FormatError(f"bad transition line {ln!r}")
        src, cube, dst = int(parts[0]), parts[1], int(parts[2])
        if len(cube) != nvars or any(ch not in "01-" for ch in cube):
            raise FormatError(f"bad cube {cube!r}")
        if not (0 <= src < n_states and 0 <= dst < n_states):
            raise FormatError(f"state out of range in {ln!r}")
        rows[src].append(({i: int(ch) for i, ch in enumerate(cube) if ch != "-"}, dst))

    # determinism and totality: every full valuation covered exactly once
    import itertools
    delta = []
    for s in range(n_states):
        for bits in itertools.product((0, 1), repeat=nvars):
            hits = [dst for cube, dst in rows[s]
                    if all(bits[i] == v for i, v in cube.items())]
            if len(hits) == 0:
                raise FormatError(f"state {s}: no transition for valuation {bits}")
            if len(hits) > 1 and len(set(hits)) > 1:
                raise FormatError(f"state {s}: nondeterministic on valuation {bits}")
        try:
            delta.append(m.from_paths(rows[s]))
        except ValueError:
            # overlapping but consistent cubes: expand explicitly
            paths = []
            for bits in itertools.product((0, 1), repeat=nvars):
                dst = next(d for cube, d in rows[s]
                           if all(bits[i] == v for i, v in cube.items()))
                paths.append((dict(enumerate(bits)), dst))
            delta.append(m.from_paths(paths))
    if not (0 <= init < n_states):
        raise FormatError("initial state out of range")
    return SymbolicDfa(m, order, delta, init, acc)


def format_monitor(a: SymbolicDfa) -> str:
    acc = ",".join(str(s) for s in sorted(a.accepting)) or "-"
    lines = [f"states {a.n_states} init {a.initial} acc {acc} vars "
             + " ".join(a.order.names)]
    for s in range(a.n_states):
        for cube, t in a.transition_paths(s):
            cs = "".join(str(cube[i]) if i in cube else "-" for i in range(len(a.order)))
            lines.append(f"{s} {cs} {t}")
    return "\n".join(lines) + "\n"
