"""Command-line surface: compile, synthesize, robustify, shield, maxlen,
minlen, simulate, equiv, export.

Exit codes: 0 success, 10 unrealizable, 20 resource budget exceeded,
30 input error. Every run emits machine-readable key=value stats
(stats_version=1) on stdout and, with --out, into <out>/stats.txt.
Artifact formats are documented in docs/formats.md.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import analysis, export
from .automata import dfa as D
from .automata import io as aio
from .automata.mtbdd import ResourceLimit
from .compiler import CompileContext
from .game import Unrealizable, build_monitor, solve_lodc, solve_mpnc
from .logic import ast as A
from .logic import templates as T
from .logic.parser import ParseError, parse_formula, parse_prop
from .logic.specfile import SynthSpec, format_spec, parse_spec
from .transforms import (TransformError, bounded_until, eventually_within,
                         robust_spec, shieldify, traffic_light)

EXIT_OK = 0
EXIT_UNREALIZABLE = 10
EXIT_RESOURCE = 20
EXIT_INPUT = 30

STATS_VERSION = 1


@dataclass
class RunConfig:
    """Resolved options: defaults < config file < environment < flags."""

    out_dir: Path | None = None
    det_cap: int = 10_000_000
    arena_cap: int = 1_000_000
    node_cap: int = 50_000_000
    include_sink: bool = False
    appendix_point_semantics: bool = False
    verbose: bool = False
    extra: dict = field(default_factory=dict)

    @staticmethod
    def load(args) -> "RunConfig":
        cfg = RunConfig()
        path = getattr(args, "config", None)
        if path:
            for line in Path(path).read_text().splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition("=")
                cfg._set(key.strip(), value.strip())
        for key, env in (("det_cap", "QSYNTH_DET_CAP"),
                         ("arena_cap", "QSYNTH_ARENA_CAP"),
                         ("node_cap", "QSYNTH_NODE_CAP")):
            if env in os.environ:
                setattr(cfg, key, int(os.environ[env]))
        if getattr(args, "out", None):
            cfg.out_dir = Path(args.out)
        if getattr(args, "include_sink", False):
            cfg.include_sink = True
        if getattr(args, "appendix_point_semantics", False):
            cfg.appendix_point_semantics = True
        if getattr(args, "verbose", False):
            cfg.verbose = True
        for cap in ("det_cap", "arena_cap", "node_cap"):
            value = getattr(args, cap, None)
            if value is not None:
                setattr(cfg, cap, value)
            if getattr(cfg, cap) <= 0:
                raise ValueError(f"{cap} must be positive")
        return cfg

    def _set(self, key: str, value: str):
        if key in ("det_cap", "arena_cap", "node_cap"):
            setattr(self, key, int(value))
        elif key in ("include_sink", "appendix_point_semantics", "verbose"):
            setattr(self, key, value.lower() in ("1", "true", "yes"))
        else:
            self.extra[key] = value

    def context(self, order) -> CompileContext:
        from .automata.mtbdd import Manager
        return CompileContext(order, manager=Manager(self.node_cap),
                              det_cap=self.det_cap,
                              appendix_point_semantics=self.appendix_point_semantics)


class Stats:
    def __init__(self):
        self.items: list[tuple[str, object]] = [("stats_version", STATS_VERSION)]

    def add(self, key: str, value):
        self.items.append((key, value))

    def emit(self, cfg: RunConfig):
        text = "\n".join(f"{k}={v}" for k, v in self.items) + "\n"
        sys.stdout.write(text)
        if cfg.out_dir is not None:
            cfg.out_dir.mkdir(parents=True, exist_ok=True)
            (cfg.out_dir / "stats.txt").write_text(text)


def _write(cfg: RunConfig, name: str, text: str):
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / name).write_text(text)


def _load_spec(path: str) -> SynthSpec:
    return parse_spec(Path(path).read_text())


# ---------------------------------------------------------------------------
# Subcommands


def cmd_compile(args, cfg: RunConfig) -> int:
    declared = [v for v in (args.vars or "").replace(",", " ").split() if v]
    text = Path(args.formula_file).read_text() if args.formula_file else args.formula
    if text is None:
        raise ParseError("no formula given (use --formula or a file)", 0, 0)
    f = parse_formula(text, set(declared))
    order = D.VarOrder.make(inputs=declared)
    ctx = cfg.context(order)
    t0 = time.perf_counter()
    aut = ctx.compile(f)
    wall = time.perf_counter() - t0
    stats = Stats()
    stats.add("states", aut.n_reported_states(cfg.include_sink))
    stats.add("states_total", aut.n_states)
    stats.add("diagram_nodes", aut.diagram_nodes())
    stats.add("wall_time_s", f"{wall:.4f}")
    _write(cfg, "automaton.dfa", aio.dump_dfa(aut))
    _write(cfg, "automaton.dot", aio.dfa_to_dot(aut))
    stats.emit(cfg)
    return EXIT_OK


def _synthesize(spec: SynthSpec, cfg: RunConfig, stats: Stats, extra_hard=None):
    order = spec.var_order()
    ctx = cfg.context(order)
    t0 = time.perf_counter()
    arena, ctx = build_monitor(spec, ctx, extra_hard)
    if arena.monitor.n_states > cfg.arena_cap:
        raise ResourceLimit(f"arena exceeds {cfg.arena_cap} states")
    stats.add("monitor_states", arena.monitor.n_reported_states(cfg.include_sink))
    mpnc = solve_mpnc(arena)
    stats.add("mpnc_states", len(mpnc.winning))
    stats.add("iterations", mpnc.iterations)
    lodc = solve_lodc(mpnc, spec.soft)
    stats.add("lodc_states", lodc.n_states)
    stats.add("wall_time_s", f"{time.perf_counter() - t0:.4f}")
    stats.add("peak_diagram_nodes", len(ctx.manager))
    return arena, mpnc, lodc


def cmd_synthesize(args, cfg: RunConfig) -> int:
    spec = _load_spec(args.spec)
    extra = None
    if args.extra_hard:
        mon = aio.parse_monitor(Path(args.extra_hard).read_text())
        extra = mon
    stats = Stats()
    stats.add("spec", spec.name)
    try:
        arena, mpnc, lodc = _synthesize(spec, cfg, stats, extra)
    except Unrealizable as e:
        stats.add("realizable", "false")
        stats.emit(cfg)
        text = e.tree.render(_load_spec(args.spec).var_order())
        sys.stdout.write(text + "\n")
        _write(cfg, "counter_strategy.txt", text + "\n")
        _write(cfg, "counter_strategy.dot", _cs_tree_dot(e.tree))
        return EXIT_UNREALIZABLE
    stats.add("realizable", "true")
    _write(cfg, "controller.table", export.controller_to_table(lodc))
    _write(cfg, "controller.dot", export.controller_to_dot(lodc))
    _write(cfg, "monitor.dfa", aio.dump_dfa(arena.monitor))
    _write(cfg, "monitor.dot", aio.dfa_to_dot(arena.monitor))
    stats.emit(cfg)
    return EXIT_OK


def _cs_tree_dot(tree) -> str:
    lines = ["digraph counterstrategy {", "  node [shape=box];"]
    counter = [0]

    def rec(node) -> str:
        nid = f"n{counter[0]}"
        counter[0] += 1
        if node.input_bits is None:
            lines.append(f'  {nid} [label="violation\\nstate {node.state}" color=red];')
            return nid
        label = f"state {node.state}\\nenv {''.join(map(str, node.input_bits))}"
        lines.append(f'  {nid} [label="{label}"];')
        for move, child in node.children:
            cid = rec(child)
            lines.append(f'  {nid} -> {cid} [label="{"".join(map(str, move))}"];')
        return nid

    rec(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_robustify(args, cfg: RunConfig) -> int:
    inputs = args.inputs.replace(",", " ").split()
    outputs = args.outputs.replace(",", " ").split()
    declared = set(inputs) | set(outputs)
    assumption = parse_prop(args.assume, declared) if args.assume else None
    commitments = [parse_formula(c, declared) for c in args.commit]
    soft_commitments = ([parse_formula(c, declared) for c in args.soft_commit]
                        if args.soft_commit else None)
    degraded = None
    if args.degraded_assume or args.degraded_commit:
        degraded = (parse_prop(args.degraded_assume, declared),
                    [parse_formula(c, declared) for c in args.degraded_commit])
    spec = robust_spec(args.name, inputs, outputs, assumption, commitments,
                       args.kind, k=args.k, b=args.b, degraded=degraded,
                       soft_commitments=soft_commitments)
    text = format_spec(spec)
    sys.stdout.write(text)
    _write(cfg, f"{args.name}.spec", text)
    return EXIT_OK


def cmd_shield(args, cfg: RunConfig) -> int:
    inputs = args.inputs.replace(",", " ").split() if args.inputs else []
    outputs = args.outputs.replace(",", " ").split()
    if args.monitor:
        req = aio.parse_monitor(Path(args.monitor).read_text())
    else:
        req = parse_formula(args.req, set(inputs) | set(outputs))
    prob = shieldify(req, inputs, outputs, args.kind, k=args.k, name=args.name)
    text = format_spec(prob.spec)
    sys.stdout.write(text)
    _write(cfg, f"{args.name}.spec", text)
    if prob.hard_automaton is not None:
        _write(cfg, f"{args.name}_hard.aut", aio.format_monitor(prob.hard_automaton))
    if args.synthesize:
        stats = Stats()
        try:
            arena, mpnc, lodc = _synthesize(prob.spec, cfg, stats, prob.hard_automaton)
        except Unrealizable:
            stats.add("realizable", "false")
            stats.emit(cfg)
            return EXIT_UNREALIZABLE
        stats.add("realizable", "true")
        _write(cfg, "controller.table", export.controller_to_table(lodc))
        _write(cfg, "controller.dot", export.controller_to_dot(lodc))
        stats.emit(cfg)
    return EXIT_OK


def _load_controller(path: str):
    return export.controller_from_table(Path(path).read_text())


def _measurement_graph(args, ctl):
    g = analysis.controller_graph(ctl)
    for item in args.indicator or []:
        name, _, fx = item.partition("=")
        if not fx:
            raise ParseError(f"--indicator needs NAME=FORMULA, got {item!r}", 0, 0)
        declared = set(g.order.names)
        formula = parse_formula(fx, declared)
        g = analysis.extend_with_indicator(g, name.strip(), formula)
    return g


def _latency(args, cfg: RunConfig, which: str) -> int:
    ctl = _load_controller(args.controller)
    g = _measurement_graph(args, ctl)
    dp = parse_formula(args.formula, set(g.order.names))
    fn = analysis.maxlen if which == "maxlen" else analysis.minlen
    t0 = time.perf_counter()
    result = fn(dp, g)
    stats = Stats()
    stats.add("query", which)
    if result.kind == "finite":
        stats.add("result", "finite")
        stats.add("value", result.value)
        stats.add("fragment_positions", result.value + 1)
        stats.add("response_cycles", result.value + 2)
    else:
        stats.add("result", result.kind)
    stats.add("wall_time_s", f"{time.perf_counter() - t0:.4f}")
    stats.emit(cfg)
    return EXIT_OK


def cmd_maxlen(args, cfg):
    return _latency(args, cfg, "maxlen")


def cmd_minlen(args, cfg):
    return _latency(args, cfg, "minlen")


def cmd_simulate(args, cfg: RunConfig) -> int:
    ctl = _load_controller(args.controller)
    env = ctl.order.env_indices()
    if args.inputs:
        rows = analysis.trace_from_csv(Path(args.inputs).read_text(), ctl.order)
        input_rows = [tuple(r[i] for i in env) for r in rows]
    else:
        rng = random.Random(args.seed)
        input_rows = [tuple(rng.randint(0, 1) for _ in env) for _ in range(args.steps)]
    trace = analysis.simulate(ctl, input_rows)
    csv_text = trace.to_csv()
    sys.stdout.write(csv_text)
    _write(cfg, "trace.csv", csv_text)
    if args.plot:
        from .plotting import plot_trace
        path = args.plot if args.plot != "-" else None
        if path is None and cfg.out_dir is not None:
            path = str(cfg.out_dir / "trace.png")
        if path:
            plot_trace(trace, path)
    return EXIT_OK


def cmd_equiv(args, cfg: RunConfig) -> int:
    from .automata.mtbdd import Manager
    m = Manager()
    a = aio.load_dfa(Path(args.left).read_text(), m)
    b = aio.load_dfa(Path(args.right).read_text(), m)
    eq, cex = D.equivalent(a, b)
    stats = Stats()
    stats.add("equivalent", "true" if eq else "false")
    if cex is not None:
        stats.add("counterexample_length", len(cex))
        stats.add("counterexample", ";".join("".join(map(str, letter)) for letter in cex))
    stats.emit(cfg)
    return EXIT_OK


def cmd_export(args, cfg: RunConfig) -> int:
    ctl = _load_controller(args.controller)
    if args.format == "dot":
        text = export.controller_to_dot(ctl)
    elif args.format == "table":
        text = export.controller_to_table(ctl)
    elif args.format == "trace-test-harness":
        text = export.controller_to_harness(ctl)
    else:
        raise ValueError(f"unsupported export format {args.format!r}")
    sys.stdout.write(text)
    if args.output:
        Path(args.output).write_text(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value options file")
    common.add_argument("--out", help="output directory for artifacts")
    common.add_argument("--det-cap", dest="det_cap", type=int,
                        help="subset-construction state budget")
    common.add_argument("--arena-cap", dest="arena_cap", type=int, help="arena state budget")
    common.add_argument("--node-cap", dest="node_cap", type=int, help="diagram node budget")
    common.add_argument("--include-sink-in-counts", dest="include_sink", action="store_true")
    common.add_argument("--appendix-point-semantics", dest="appendix_point_semantics",
                        action="store_true",
                        help="<phi> holds whenever phi holds at the first position")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qsynth",
                                description="QDDC requirement compiler and guided safety-game synthesizer")
    sub = p.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)
    c = add_parser("compile", help="compile a formula to a symbolic automaton")
    c.add_argument("formula_file", nargs="?")
    c.add_argument("--formula")
    c.add_argument("--vars", default="", help="comma or space separated variable names")
    c.set_defaults(fn=cmd_compile)

    s = add_parser("synthesize", help="synthesize a controller from a spec file")
    s.add_argument("spec")
    s.add_argument("--extra-hard", help="external monitor file conjoined with the hard part")
    s.set_defaults(fn=cmd_synthesize)

    r = add_parser("robustify", help="emit a robustness-wrapped spec file")
    r.add_argument("--name", default="robust")
    r.add_argument("--kind", required=True,
                   choices=["BeCorrect", "BeCurrentlyCorrect", "DegradedPerformance",
                            "NeverGiveUp", "Greedy", "KBounded", "KBResilient", "KBVariant"])
    r.add_argument("--inputs", required=True)
    r.add_argument("--outputs", required=True)
    r.add_argument("--assume", help="assumption proposition")
    r.add_argument("--commit", action="append", default=[], help="commitment formula (repeatable)")
    r.add_argument("--soft-commit", action="append", default=[],
                   help="per-step witness form of a commitment (repeatable)")
    r.add_argument("-k", type=int)
    r.add_argument("-b", type=int)
    r.add_argument("--degraded-assume")
    r.add_argument("--degraded-commit", action="append", default=[])
    r.set_defaults(fn=cmd_robustify)

    sh = add_parser("shield", help="emit (and optionally synthesize) a shield spec")
    sh.add_argument("--name", default="shield")
    sh.add_argument("--kind", choices=["burst", "k"], default="burst")
    sh.add_argument("--inputs", default="")
    sh.add_argument("--outputs", required=True)
    sh.add_argument("--req", help="requirement formula over inputs+outputs")
    sh.add_argument("--monitor", help="external monitor file used as the requirement")
    sh.add_argument("-k", type=int)
    sh.add_argument("--synthesize", action="store_true")
    sh.set_defaults(fn=cmd_shield)

    for which in ("maxlen", "minlen"):
        m = add_parser(which, help=f"{which} latency query over a controller")
        m.add_argument("--controller", required=True, help="controller table file")
        m.add_argument("--formula", required=True)
        m.add_argument("--indicator", action="append",
                       help="NAME=FORMULA measurement-only indicator (repeatable)")
        m.set_defaults(fn=cmd_maxlen if which == "maxlen" else cmd_minlen)

    si = add_parser("simulate", help="run a controller on an input trace")
    si.add_argument("--controller", required=True)
    si.add_argument("--inputs", help="input CSV (header = variable names)")
    si.add_argument("--steps", type=int, default=20)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--plot", help="write a waveform figure to this path")
    si.set_defaults(fn=cmd_simulate)

    e = add_parser("equiv", help="language equivalence of two automaton dumps")
    e.add_argument("left")
    e.add_argument("right")
    e.set_defaults(fn=cmd_equiv)

    x = add_parser("export", help="export a controller")
    x.add_argument("--controller", required=True)
    x.add_argument("--format", required=True, choices=["dot", "table", "trace-test-harness"])
    x.add_argument("--output")
    x.set_defaults(fn=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args)
        return args.fn(args, cfg)
    except Unrealizable:
        return EXIT_UNREALIZABLE
    except ResourceLimit as e:
        sys.stderr.write(f"resource limit: {e}\n")
        return EXIT_RESOURCE
    except (ParseError, TransformError, aio.FormatError, export.FormatError,
            FileNotFoundError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
