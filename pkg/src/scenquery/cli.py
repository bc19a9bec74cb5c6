"""Command-line front end: query, bench, export, validate, demo."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import __version__
from .bench import BenchSpec, compare_backends, render_table, run_bench
from .config import EngineConfig, load_config
from .engine import backend_info
from .errors import ParseError, ScenQueryError
from .exports import emit_verifier_text, export_statechart
from .ihefsm import compile_program
from .predicates import precompute_streams
from .scenic.parser import try_parse_program
from .search import match_dataset
from .smtlib import emit_smtlib
from .traces import load_dataset, load_trace


def _load_engine_config(args) -> EngineConfig:
    config = load_config(getattr(args, "config", None))
    if getattr(args, "timeout", None):
        config = replace(config, budgets=replace(config.budgets, timeout_s=args.timeout))
    if getattr(args, "config_cap", None):
        config = replace(config, budgets=replace(config.budgets, config_cap=args.config_cap))
    if getattr(args, "mode", None):
        config = replace(config, predicate_mode=args.mode)
    return config


def _parse_file(path, config):
    with open(path, "r", encoding="utf-8") as fh:
        source = fh.read()
    program, diagnostics = try_parse_program(source, config.behavior_map)
    if program is None:
        for diag in diagnostics:
            print(f"{path}:{diag}", file=sys.stderr)
        raise SystemExit(2)
    return program


def cmd_query(args) -> int:
    config = _load_engine_config(args)
    program = _parse_file(args.program, config)
    try:
        ds = load_dataset(args.dataset, config.behavior_map)
    except (OSError, ScenQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    reports = match_dataset(program, ds, args.m, config, jobs=args.jobs)
    n_matched = sum(1 for r in reports if r.matched)
    if args.format == "md":
        print("| trace | matched | correspondence | windows | ms |")
        print("|---|---|---|---|---|")
        for r in reports:
            corr = ", ".join(f"{a}->{t}" for a, t in (r.correspondence or {}).items())
            windows = ", ".join(f"[{w['j']},{w['k']})" for w in r.windows)
            note = " (error)" if r.error else ""
            print(
                f"| {r.trace_id} | {r.matched}{note} | {corr} | {windows} "
                f"| {r.stats.get('wall_ms', 0):.1f} |"
            )
    else:
        for r in reports:
            print(json.dumps(r.to_json()))
    for r in reports:
        if r.error:
            print(f"warning: {r.trace_id}: {r.error}", file=sys.stderr)
    return 0 if n_matched > 0 else 1


def cmd_validate(args) -> int:
    config = _load_engine_config(args)
    names = sorted(
        n for n in os.listdir(args.dataset) if n.endswith(".trace.json")
    )
    ok = True
    for name in names:
        path = os.path.join(args.dataset, name)
        try:
            trace = load_trace(path, config.behavior_map)
        except ScenQueryError as exc:
            ok = False
            print(f"{name}: ERROR {type(exc).__name__}: {exc}")
            continue
        status = "ok"
        print(f"{name}: {status} (T={trace.T}, tracks={len(trace.tracks)})")
        for warning in trace.warnings:
            print(f"{name}: warning: {warning}")
    if not names:
        print("no trace files found")
    return 0 if ok else 1


def cmd_export(args) -> int:
    config = _load_engine_config(args)
    program = _parse_file(args.program, config)
    machines = compile_program(program, config.behavior_map)
    if args.behavior:
        if args.behavior not in machines:
            print(f"error: unknown behavior {args.behavior!r}", file=sys.stderr)
            return 2
        selected = {args.behavior: machines[args.behavior]}
    else:
        selected = machines

    def out_path(name):
        if len(selected) == 1:
            return args.out
        root, ext = os.path.splitext(args.out)
        return f"{root}_{name}{ext}"

    if args.kind == "statechart":
        for name, machine in selected.items():
            with open(out_path(name), "w", encoding="utf-8") as fh:
                fh.write(export_statechart(machine))
    elif args.kind == "verifier":
        for name, machine in selected.items():
            with open(out_path(name), "w", encoding="utf-8") as fh:
                fh.write(emit_verifier_text(machine))
    else:  # smt
        if not args.trace or args.timestep is None:
            print("error: --kind smt requires --trace and --timestep", file=sys.stderr)
            return 2
        trace = load_trace(args.trace, config.behavior_map)
        emitted = 0
        for name, machine in selected.items():
            conds = [c for c in machine.conditions if not c.nondet]
            if args.cond:
                conds = [c for c in conds if c.id == args.cond]
            for cond in conds:
                corr = {}
                for agent_name in cond.referenced_agents:
                    resolved = agent_name
                    if agent_name == "self":
                        owner = next(
                            (a for a in program.agents if a.behavior == name), None
                        )
                        resolved = owner.name if owner else "ego"
                    agent = program.agent(resolved)
                    candidates = [
                        tr for tr in trace.tracks
                        if agent is None
                        or config.behavior_map.class_compatible(agent.cls, tr.cls)
                    ]
                    if resolved == "ego":
                        corr[agent_name] = trace.ego_id
                    elif candidates:
                        corr[agent_name] = candidates[0].id
                bindings = {}
                for agent_name, track_id in corr.items():
                    sample = trace.track(track_id).sample_at(args.timestep)
                    if sample is None:
                        print(
                            f"error: no sample for {agent_name} at t={args.timestep}",
                            file=sys.stderr,
                        )
                        return 2
                    bindings[agent_name] = sample
                suffix = f"_{cond.id}" if len(conds) > 1 else ""
                root, ext = os.path.splitext(out_path(name))
                path = f"{root}{suffix}{ext or '.smt2'}"
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(emit_smtlib(cond, bindings))
                emitted += 1
        if emitted == 0:
            print("error: no abstractable condition found", file=sys.stderr)
            return 2
    return 0


def _parse_range(text, with_step=False):
    if ":" in text and with_step:
        base, step = text.rsplit(":", 1)
        step = int(step)
    else:
        base, step = text, 1
    if ".." in base:
        lo, hi = base.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(base)
    return (lo, hi, step) if with_step else (lo, hi)


def cmd_bench(args) -> int:
    config = _load_engine_config(args)
    families = [args.family] if args.family != "all" else list(
        ("dountil_n", "do_n", "try_n", "nested_n")
    )
    payload = {}
    for family in families:
        spec = BenchSpec(
            family=family,
            n_range=_parse_range(args.n),
            t_range=_parse_range(args.t, with_step=True),
            k=args.k,
            e_max=args.emax,
            seed=args.seed,
            m=args.bench_m,
            adversarial=args.adversarial,
        )
        if args.compare_backends:
            result = compare_backends(spec, config)
            print(f"# {family}: active backend (compiled={result['active_compiled']})")
            print(render_table(family, result["active"]))
            print(f"# {family}: interpreted fallback")
            print(render_table(family, result["pure"]))
            act = {(c.n, c.t): c.mean for c in result["active"] if not c.timed_out}
            pure = {(c.n, c.t): c.mean for c in result["pure"] if not c.timed_out}
            common = sorted(set(act) & set(pure))
            if common:
                ratios = [pure[k] / act[k] for k in common if act[k] > 0]
                if ratios:
                    print(f"# speedup (interpreted/active): "
                          f"min {min(ratios):.2f}x, max {max(ratios):.2f}x")
            continue
        cells = run_bench(spec, config)
        if args.format == "json":
            payload[family] = [
                {"n": c.n, "t": c.t, "mean": c.mean, "std": c.std,
                 "timed_out": c.timed_out}
                for c in cells
            ]
        else:
            print(render_table(family, cells))
    if args.format == "json" and payload:
        print(json.dumps(payload))
    return 0


def cmd_demo(args) -> int:
    from .demo import write_demo_dataset

    program_path = write_demo_dataset(args.out)
    print(f"wrote demo dataset to {args.out}")
    print(f"try: scenquery query -p {program_path} -d {args.out} -m 10 --format md")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenquery",
        description="Query labeled time-series traces with scenario programs.",
    )
    parser.add_argument("--version", action="version", version=f"scenquery {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", help="match a scenario program against a dataset")
    q.add_argument("-p", "--program", required=True)
    q.add_argument("-d", "--dataset", required=True)
    q.add_argument("-m", type=int, required=True, help="minimum match duration (steps)")
    q.add_argument("--format", choices=("json", "md"), default="json")
    q.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    q.add_argument("--timeout", type=float, default=None, help="per-trace seconds")
    q.add_argument("--config-cap", type=int, default=None)
    q.add_argument("--mode", choices=("existential", "three_valued"), default=None)
    q.add_argument("--config", default=None, help="config file (default $SQ_CONFIG)")
    q.set_defaults(func=cmd_query)

    b = sub.add_parser("bench", help="scalability benchmark over generated programs")
    b.add_argument("--family", default="all",
                   choices=("all", "do_n", "dountil_n", "try_n", "nested_n"))
    b.add_argument("--n", default="1..4", help="N range, e.g. 1..4")
    b.add_argument("--t", default="10..40:10", help="T range, e.g. 10..40:10")
    b.add_argument("-k", type=int, default=10, help="instances per cell")
    b.add_argument("--emax", type=float, default=60.0, help="per-evaluation cap (s)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--bench-m", type=int, default=None,
                   help="match threshold (default: full window m = T)")
    b.add_argument("--adversarial", action="store_true",
                   help="perturb one action to time the no-match path")
    b.add_argument("--compare-backends", action="store_true",
                   help="time the compiled stepper against the interpreter")
    b.add_argument("--format", choices=("md", "json"), default="md")
    b.add_argument("--config", default=None)
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("export", help="emit statechart, verifier, or SMT artifacts")
    e.add_argument("-p", "--program", required=True)
    e.add_argument("--kind", required=True, choices=("statechart", "smt", "verifier"))
    e.add_argument("-o", "--out", required=True)
    e.add_argument("--behavior", default=None)
    e.add_argument("--trace", default=None, help="trace file for --kind smt")
    e.add_argument("--timestep", type=int, default=None)
    e.add_argument("--cond", default=None, help="emit only this condition id")
    e.add_argument("--config", default=None)
    e.set_defaults(func=cmd_export)

    v = sub.add_parser("validate", help="check every trace file in a dataset dir")
    v.add_argument("-d", "--dataset", required=True)
    v.add_argument("--config", default=None)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("demo", help="write the bundled demo dataset")
    d.add_argument("--out", default="demo")
    d.set_defaults(func=cmd_demo)

    i = sub.add_parser("backend", help="print which stepper kernel is active")
    i.set_defaults(func=lambda args: (print(json.dumps(backend_info())), 0)[1])

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ParseError as exc:
        for diag in exc.diagnostics:
            print(f"error: {diag}", file=sys.stderr)
        return 2
    except ScenQueryError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
