"""Experiment runner: ``rdtlab <subcommand> [flags]``.

Every subcommand writes one report, JSON by default or the ``steps`` table as
CSV. Exit status is 0 on success, 1 when a checked invariant fails and 2 on
bad usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import amplify, automaton, hybrid, pipeline, search
from .state import InvariantViolation, format_word, index_to_word, make_rng, observe, word_to_index

DIST_TOL = 1e-10


def _words(w) -> str:
    return format_word(w)


def _rule_from_args(args) -> automaton.RuleTable:
    name = args.rule or "identity"
    if name in automaton.BUILTIN_RULES:
        return automaton.builtin_rule(name, seed=args.rule_seed, radius=args.rule_radius)
    path = Path(name)
    if not path.is_file():
        raise ValueError(f"--rule must be one of {automaton.BUILTIN_RULES} or a rule file path")
    return automaton.load_rule(path)


def _random_word(n: int, rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(a) for a in rng.integers(0, 4, size=n))


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ValueError(f"missing required option(s): {', '.join(missing)}")


def cmd_grover(args) -> dict:
    _need(args, "n", "t")
    N, t = args.n, args.t
    if N < 1 or not 1 <= t <= N:
        raise ValueError(f"need 1 <= t <= N, got N={N}, t={t}")
    m = args.iterations if args.iterations is not None else search.grover_iterations(N, t)
    if m < 0:
        raise ValueError("iterations must be non-negative")
    marked = search.MarkedSet.from_indices(N, range(N - t, N))
    start = search.grover_start(N)
    steps = []
    for i in range(m + 1):
        _, p = search.grover(start, marked, i)
        steps.append({"m": i, "success_prob": p, "closed_form": search.grover_closed_form(N, t, i)})
    final, prob = search.grover(start, marked, m)
    return {
        "experiment": "grover",
        "params": {"N": N, "t": t, "iterations": m, "seed": args.seed},
        "steps": steps,
        "result": {"success_prob": prob, "observed": observe(final, args.seed)},
    }


def cmd_amplify(args) -> dict:
    _need(args, "n")
    n, k = args.n, args.k
    if n < 1 or k < 2:
        raise ValueError("need n >= 1 and k >= 2")
    search.check_guard(n)
    rng = make_rng(args.seed)
    target = tuple(int(a) for a in args.target) if args.target else tuple(int(a) for a in rng.integers(0, k, n))
    chain = amplify.build_prefix_chain(target, k)
    final, trace = amplify.nested_amplify(amplify.uniform_on(chain), chain)
    predicted = [amplify.predicted_amplitude(j, k, n) for j in range(n + 1)]
    worst = max(abs(s.target_amp - p) for s, p in zip(trace.steps, predicted))
    if worst > 1e-10:
        raise InvariantViolation(f"trace departs from the predicted amplitudes by {worst!r}")
    ti = word_to_index(target, k)
    return {
        "experiment": "amplify",
        "params": {"n": n, "k": k, "seed": args.seed, "target": _words(target)},
        "steps": [s.as_dict() for s in trace.steps],
        "result": {
            "final_amplitude": float(final[ti]),
            "predicted_final": predicted[-1],
            "pairs_applied": trace.pairs_applied,
            "observed": _words(index_to_word(observe(final, rng), n, k)),
        },
    }


def _pipeline_config(args) -> pipeline.PipelineConfig:
    _need(args, "n", "T")
    rule = _rule_from_args(args)
    rng = make_rng(args.seed)
    x0 = args.x0 if args.x0 is not None else _random_word(args.n, rng)
    T1 = args.T1 if args.T1 is not None else pipeline.optimal_t1(args.T, args.n, args.cost_a, args.cost_b)
    if args.T1 is None:
        # fall back to the nearest divisor so the split is exact
        T1 = min((d for d in range(1, args.T + 1) if args.T % d == 0), key=lambda d: (abs(d - T1), d))
    return pipeline.PipelineConfig(args.n, rule, x0, args.T, T1)


def cmd_pipeline(args) -> dict:
    config = _pipeline_config(args)
    report = pipeline.run_pipeline(config)
    classical = pipeline.classical_output(config)
    if report.output != classical:
        raise InvariantViolation(f"pipeline gave {_words(report.output)}, classical run gave {_words(classical)}")
    steps = []
    for i, r in enumerate(report.rounds, start=1):
        steps.append({
            "round": i,
            "injected": _words(r.injected),
            "returned": _words(r.returned),
            "amplitude": r.amplitude,
            "max_residual": r.max_residual,
            "logical_cost": config.T2 + i * config.n**2,
        })
    return {
        "experiment": "pipeline",
        "params": {
            "n": config.n, "T": config.T, "T1": config.T1, "T2": config.T2,
            "rule": config.rule.name, "x0": _words(config.x0), "seed": args.seed,
        },
        "steps": steps,
        "result": {
            "output": _words(report.output),
            "classical": _words(classical),
            "certain": report.certain,
            "logical_cost": report.cost,
            "model_cost": pipeline.cost_model(config.T, config.T1, config.n, args.cost_a, args.cost_b),
            "optimal_t1": pipeline.optimal_t1(config.T, config.n, args.cost_a, args.cost_b),
        },
    }


def cmd_theorem1(args) -> dict:
    _need(args, "n", "T", "T1")
    rule = _rule_from_args(args)
    rng = make_rng(args.seed)
    x0 = tuple(int(a) for a in args.x0) if args.x0 is not None else _random_word(args.n, rng)
    if len(x0) != args.n:
        raise ValueError(f"--x0 must have length {args.n}")
    res = search.theorem1_compute(rule, x0, args.T, args.T1, seed=rng)
    classical = automaton.iterate(rule, x0, args.T)
    if res.output != classical:
        raise InvariantViolation("verifier-chained result differs from the classical iterate")
    return {
        "experiment": "theorem1",
        "params": {"n": args.n, "T": args.T, "T1": args.T1, "rule": rule.name, "x0": _words(x0), "seed": args.seed},
        "steps": [
            {
                "segment": i,
                "anchor": _words(s.anchor),
                "result": _words(s.result),
                "iterations": s.iterations,
                "success_prob": s.success_prob,
                "attempts": s.attempts,
                "queries": s.queries,
            }
            for i, s in enumerate(res.segments, start=1)
        ],
        "result": {
            "output": _words(res.output),
            "classical": _words(classical),
            "query_count": res.query_count,
            "theorem1_cost": search.theorem1_cost(args.n, args.T, args.T1),
        },
    }


def _bijection(args) -> search.Bijection:
    if args.bijection:
        return search.load_bijection(args.bijection)
    _need(args, "n")
    return search.random_bijection(args.n, args.seed)


def cmd_invert(args) -> dict:
    f = _bijection(args)
    targets = [tuple(int(c) for c in args.a)] if args.a else [index_to_word(i, f.n) for i in range(4**f.n)]
    steps = []
    for a in targets:
        inv = search.invert(f, a)
        if inv.value != f(a):
            raise InvariantViolation(f"inversion returned {_words(inv.value)} for f({_words(a)}) = {_words(f(a))}")
        steps.append({"a": _words(a), "f_a": _words(f(a)), "recovered": _words(inv.value), "amplitude": inv.amplitude})
    return {
        "experiment": "invert",
        "params": {"n": f.n, "seed": args.seed, "bijection": args.bijection},
        "steps": steps,
        "result": {"exact": True, "arguments": len(steps)},
    }


def cmd_solve_unique(args) -> dict:
    f = _bijection(args)
    res = search.solve_unique(f, f.n, seed=args.seed)
    return {
        "experiment": "solve-unique",
        "params": {"n": f.n, "seed": args.seed, "bijection": args.bijection},
        "steps": [{"m": m, "size": s} for m, s in enumerate(res.chain_sizes)],
        "result": {
            "solution": _words(res.solution),
            "observed": _words(res.observed),
            "success_prob": res.success_prob,
        },
    }


def cmd_hybrid(args) -> dict:
    _need(args, "n")
    search.check_guard(args.n)
    pair = hybrid.random_pair(args.n, args.seed)
    trace = hybrid.divergence_trace(pair, pair.a)
    final = trace[-1].distance
    if abs(final - math.sqrt(2.0)) > DIST_TOL:
        raise InvariantViolation(f"final distance {final!r} is not sqrt(2)")
    return {
        "experiment": "hybrid",
        "params": {"n": args.n, "seed": args.seed, "a": _words(pair.a), "b": _words(pair.b)},
        "steps": [s.as_dict() for s in trace],
        "result": {
            "initial_distance": trace[0].distance,
            "expected_initial": 2.0 / math.sqrt(4**args.n),
            "final_distance": final,
            "mean_growth": hybrid.mean_growth(trace),
            "growth_floor": hybrid.growth_floor(args.n, len(trace) - 1),
        },
    }


COMMANDS = {
    "grover": cmd_grover,
    "amplify": cmd_amplify,
    "pipeline": cmd_pipeline,
    "theorem1": cmd_theorem1,
    "invert": cmd_invert,
    "solve-unique": cmd_solve_unique,
    "hybrid": cmd_hybrid,
}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows = report["steps"]
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--config", help="JSON file of option values; explicit flags take precedence")

    rules = argparse.ArgumentParser(add_help=False)
    rules.add_argument("--rule", help=f"builtin ({', '.join(automaton.BUILTIN_RULES)}) or rule file path")
    rules.add_argument("--rule-seed", type=int, default=0)
    rules.add_argument("--rule-radius", type=int, default=1)
    rules.add_argument("--x0", help="input word as base-4 digits (random from --seed if omitted)")

    parser = argparse.ArgumentParser(prog="rdtlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("grover", parents=[common], help="Grover search with exact success probability")
    p.add_argument("--n", type=int, help="search space size N")
    p.add_argument("--t", type=int, help="number of marked items")
    p.add_argument("--iterations", type=int)

    p = sub.add_parser("amplify", parents=[common], help="nested amplification trace on a random target")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--target", help="target word (random from --seed if omitted)")

    for name, helptext in (("pipeline", "multiprocessor evaluation of f^(T)"),
                           ("theorem1", "verifier-chained Grover evaluation of f^(T)")):
        p = sub.add_parser(name, parents=[common, rules], help=helptext)
        p.add_argument("--n", type=int)
        p.add_argument("--T", type=int)
        p.add_argument("--T1", type=int)
        if name == "pipeline":
            p.add_argument("--cost-a", type=float, default=1.0)
            p.add_argument("--cost-b", type=float, default=1.0)

    for name, helptext in (("invert", "recover f(a) for a bijection f"),
                           ("solve-unique", "find the unique solution of f(x) = 0..01"),
                           ("hybrid", "distance trace between oracles differing on two arguments")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--n", type=int)
        if name != "hybrid":
            p.add_argument("--bijection", help="file of 'input -> output' lines")
        if name == "invert":
            p.add_argument("--a", help="single argument to invert (all arguments if omitted)")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a JSON object")
        cfg = {key.lstrip("-").replace("-", "_"): value for key, value in cfg.items()}
        sub = parser.subcommands[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    args.parser = parser
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"rdtlab {args.command}: invariant violated: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        args.parser.subcommands[args.command].print_usage(sys.stderr)
        print(f"rdtlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = render(report, args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
