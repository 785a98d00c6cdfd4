"""Controller exporters: transition table, DOT, and a replay harness.

The table format is line-oriented: one line per (state, input cube) with the
chosen output valuation and successor. Cubes use '-' where the move and
successor are uniform over the unconstrained inputs, which falls out of the
shared-diagram representation directly. Exports are byte-deterministic.
"""

from __future__ import annotations

from .automata.dfa import VarOrder
from .automata.mtbdd import Manager
from .game import Controller

TABLE_MAGIC = "qsctl 1"


class FormatError(ValueError):
    pass


def _group(order: VarOrder, tag: str) -> list[str]:
    return [n for n, t in zip(order.names, order.tags) if t == tag]


def controller_to_table(c: Controller) -> str:
    env = c.order.env_indices()
    ctrl = c.order.ctrl_indices()
    lines = [TABLE_MAGIC]
    for tag in ("input", "aux", "output", "witness"):
        lines.append(f"{tag}s " + " ".join(_group(c.order, tag)))
    lines.append(f"initial {c.initial}")
    lines.append(f"states {c.n_states}")
    for s in range(c.n_states):
        for cube, (move, nxt) in c.manager.paths(c.delta[s]):
            in_cube = "".join(str(cube[i]) if i in cube else "-" for i in env)
            out_bits = "".join(str(b) for b in move)
            lines.append(f"{s} {in_cube or '.'} -> {out_bits or '.'} {nxt}")
    return "\n".join(lines) + "\n"


def controller_from_table(text: str, manager: Manager | None = None) -> Controller:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TABLE_MAGIC:
        raise FormatError(f"bad controller table header (expected {TABLE_MAGIC!r})")
    groups: dict[str, list[str]] = {}
    idx = 1
    for tag in ("inputs", "auxs", "outputs", "witnesss"):
        parts = lines[idx].split()
        if parts[0] != tag:
            raise FormatError(f"expected {tag!r} line")
        groups[tag] = parts[1:]
        idx += 1
    if not lines[idx].startswith("initial "):
        raise FormatError("expected initial line")
    initial = int(lines[idx].split()[1])
    idx += 1
    if not lines[idx].startswith("states "):
        raise FormatError("expected states line")
    n_states = int(lines[idx].split()[1])
    idx += 1
    order = VarOrder.make(inputs=groups["inputs"], aux=groups["auxs"],
                          outputs=groups["outputs"], witnesses=groups["witnesss"])
    env = order.env_indices()
    m = manager or Manager()
    rows: dict[int, list[tuple[dict[int, int], tuple]]] = {s: [] for s in range(n_states)}
    for ln in lines[idx:]:
        parts = ln.split()
        if len(parts) != 5 or parts[2] != "->":
            raise FormatError(f"bad table line {ln!r}")
        s = int(parts[0])
        in_cube = parts[1] if parts[1] != "." else ""
        out_bits = parts[3] if parts[3] != "." else ""
        nxt = int(parts[4])
        if len(in_cube) != len(env):
            raise FormatError(f"input cube arity mismatch in {ln!r}")
        cube = {env[i]: int(ch) for i, ch in enumerate(in_cube) if ch != "-"}
        move = tuple(int(ch) for ch in out_bits)
        rows[s].append((cube, (move, nxt)))
    delta = []
    for s in range(n_states):
        if not rows[s]:
            raise FormatError(f"state {s} has no transitions")
        delta.append(m.from_paths(rows[s]))
    if not (0 <= initial < n_states):
        raise FormatError("initial state out of range")
    return Controller(m, order, delta, initial)


def controller_to_dot(c: Controller, name: str = "controller") -> str:
    env = c.order.env_indices()
    ctrl = c.order.ctrl_indices()
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  hidden [shape=none label=""];',
             f"  hidden -> s{c.initial};"]
    for s in range(c.n_states):
        lines.append(f'  s{s} [shape=circle label="{s}"];')
    for s in range(c.n_states):
        for cube, (move, nxt) in c.manager.paths(c.delta[s]):
            ins = " ".join(
                (c.order.names[i] if cube[i] else "!" + c.order.names[i])
                for i in env if i in cube) or "-"
            outs = " ".join(
                (c.order.names[i] if b else "!" + c.order.names[i])
                for i, b in zip(ctrl, move))
            lines.append(f'  s{s} -> s{nxt} [label="{ins} / {outs}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def controller_to_harness(c: Controller) -> str:
    """Self-contained replay checker for trace CSVs against the table."""
    table = controller_to_table(c)
    return f'''#!/usr/bin/env python3
"""Replay a trace CSV against the embedded controller table.

Usage: python harness.py trace.csv
Exits 0 when every row matches the controller's response, 1 otherwise.
"""
import csv
import sys

TABLE = {table!r}


def parse_table(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    groups = {{}}
    for ln in lines[1:5]:
        parts = ln.split()
        groups[parts[0]] = parts[1:]
    initial = int(lines[5].split()[1])
    env = groups["inputs"] + groups["auxs"]
    ctrl = groups["outputs"] + groups["witnesss"]
    rows = {{}}
    for ln in lines[7:]:
        s, cube, _, out, nxt = ln.split()
        rows.setdefault(int(s), []).append((cube, out, int(nxt)))
    return env, ctrl, initial, rows


def main(path):
    env, ctrl, initial, rows = parse_table(TABLE)
    state = initial
    with open(path) as fh:
        reader = csv.DictReader(fh)
        for step, row in enumerate(reader):
            ibits = "".join(row[v] for v in env)
            for cube, out, nxt in rows[state]:
                if cube == "." or all(c == "-" or c == b for c, b in zip(cube, ibits)):
                    want = out if out != "." else ""
                    got = "".join(row[v] for v in ctrl if v in row)
                    if want[:len(got)] != got:
                        print(f"step {{step}}: expected outputs {{want}}, trace has {{got}}")
                        return 1
                    state = nxt
                    break
            else:
                print(f"step {{step}}: no transition for inputs {{ibits}}")
                return 1
    print("trace consistent with controller")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
'''
