"""Decision-diagram manager invariants: reduction, canonicity, operations."""

import itertools
import random

import pytest

from qsynth.automata.mtbdd import Manager, ResourceLimit


def random_root(m, rng, nvars, values):
    paths = []
    for bits in itertools.product((0, 1), repeat=nvars):
        paths.append((dict(enumerate(bits)), rng.choice(values)))
    return m.from_paths(paths)


def test_reduction_no_redundant_nodes():
    m = Manager()
    t0, t1 = m.terminal(0), m.terminal(1)
    assert m.node(3, t0, t0) == t0
    n = m.node(2, t0, t1)
    assert m.node(2, t0, t1) == n  # hash-consed


def test_canonicity_pointer_equal_iff_function_equal():
    # exhaustive valuation check on a 12-variable manager
    rng = random.Random(5)
    m = Manager()
    nvars = 12
    roots = []
    for _ in range(40):
        # random function built from a handful of cubes
        default = rng.randrange(3)
        cubes = []
        for _ in range(rng.randrange(1, 4)):
            cube = {v: rng.randint(0, 1) for v in rng.sample(range(nvars), rng.randrange(1, 5))}
            cubes.append((cube, rng.randrange(3)))

        def fn(bits, cubes=tuple(cubes), default=default):
            for cube, val in cubes:
                if all(bits[v] == x for v, x in cube.items()):
                    return val
            return default

        paths = [(dict(enumerate(bits)), fn(bits))
                 for bits in itertools.product((0, 1), repeat=nvars)]
        roots.append((m.from_paths(paths), fn))
    for (r1, f1), (r2, f2) in itertools.combinations(roots, 2):
        same_fn = all(
            f1(bits) == f2(bits)
            for bits in itertools.product((0, 1), repeat=nvars))
        assert (r1 == r2) == same_fn


def test_strictly_increasing_vars_on_paths():
    rng = random.Random(7)
    m = Manager()
    root = random_root(m, rng, 5, [0, 1, 2])
    stack = [(root, -1)]
    while stack:
        n, lastvar = stack.pop()
        if m.is_terminal(n):
            continue
        assert m.var(n) > lastvar
        stack.append((m.lo(n), m.var(n)))
        stack.append((m.hi(n), m.var(n)))


def test_eval_matches_paths():
    rng = random.Random(11)
    m = Manager()
    root = random_root(m, rng, 4, ["a", "b"])
    for cube, value in m.paths(root):
        bits = [cube.get(i, 0) for i in range(4)]
        assert m.eval(root, bits) == value


def test_meet_and_map_terminals():
    m = Manager()
    rng = random.Random(13)
    a = random_root(m, rng, 4, [0, 1])
    b = random_root(m, rng, 4, [0, 1])
    both = m.meet(a, b, lambda x, y: x & y)
    for bits in itertools.product((0, 1), repeat=4):
        assert m.eval(both, bits) == (m.eval(a, bits) & m.eval(b, bits))
    flipped = m.map_terminals(a, lambda v: 1 - v)
    for bits in itertools.product((0, 1), repeat=4):
        assert m.eval(flipped, bits) == 1 - m.eval(a, bits)


def test_project_var_union():
    m = Manager()
    rng = random.Random(17)
    base = random_root(m, rng, 3, [frozenset({1}), frozenset({2}), frozenset()])
    proj = m.project_var(base, 1, lambda x, y: x | y)
    for b0, b2 in itertools.product((0, 1), repeat=2):
        want = m.eval(base, [b0, 0, b2]) | m.eval(base, [b0, 1, b2])
        assert m.eval(proj, [b0, 0, b2]) == want


def test_relabel_monotone_only():
    m = Manager()
    root = m.node(1, m.terminal(0), m.terminal(1))
    shifted = m.relabel(root, {1: 4})
    assert m.var(shifted) == 4
    with pytest.raises(ValueError):
        m.relabel(m.node(0, m.terminal(0), m.node(2, m.terminal(0), m.terminal(1))),
                  {0: 3, 2: 1})


def test_from_paths_rejects_conflicts():
    m = Manager()
    with pytest.raises(ValueError):
        m.from_paths([({0: 0}, 1), ({}, 2)])


def test_node_budget():
    m = Manager(node_cap=4)
    with pytest.raises(ResourceLimit):
        for v in range(10):
            m.node(v, m.terminal(v), m.terminal(v + 1))
