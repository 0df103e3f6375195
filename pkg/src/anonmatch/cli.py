"""Command line entry point: ``anonmatch run|sweep|verify|modelcheck``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields

from .daemon import ReplayError
from .harness import ALGORITHMS, SweepConfig, TrialError, TrialSpec, parse_gen, run_trial, sweep
from .registers import RegisterFile
from .topology import GraphError, load_graph
from .trace import ExecutionTrace, TraceFormatError
from .verifier.modelcheck import StateSpaceTooLarge, model_check
from .verifier.monitors import monitor_trace
from .verifier.specs import check_LN, check_M, translate_names

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_VIOLATION = 3
EXIT_NOT_CONVERGED = 4
EXIT_REPLAY = 5

DAEMONS = ("sync", "subset", "seq", "adversarial", "replay",
           "synchronous", "random_subset", "random_sequential", "adversarial_greedy")


class BadInput(Exception):
    pass


def _graph_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph", metavar="PATH", help="graph file ('n m' then 'u v [pu pv]' lines)")
    src.add_argument("--gen", metavar="FAMILY,PARAMS", help="generator, e.g. random_connected,n=10,p=0.3")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anonmatch", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one trial")
    run.add_argument("--config", metavar="PATH", help="JSON file with TrialSpec fields; flags override it")
    _graph_args(run)
    run.add_argument("--algo", choices=ALGORITHMS)
    run.add_argument("--daemon", choices=DAEMONS)
    run.add_argument("--daemon-a2", choices=DAEMONS, help="link-naming daemon for composed runs")
    run.add_argument("--samples", type=int, help="candidate subsets per adversarial step")
    run.add_argument("--seed", type=int)
    run.add_argument("--faults", help="all-null | random | preset:chain | preset:all-point | preset:dup-links")
    run.add_argument("--domain", type=int, help="largest value drawn by random faults")
    run.add_argument("--max-moves", type=int)
    run.add_argument("--mode", choices=("phased", "interleaved"))
    run.add_argument("--replay", metavar="TRACE", help="trace whose selections the replay daemon re-issues")
    run.add_argument("--trace-out", metavar="PATH")
    run.add_argument("--csv-out", metavar="PATH")

    sw = sub.add_parser("sweep", help="many seeded a1 trials per n and policy")
    sw.add_argument("--n", dest="ns", required=True, help="comma-separated node counts")
    sw.add_argument("--trials", type=int, default=100)
    sw.add_argument("--daemon", default="adversarial", help="comma-separated policies")
    sw.add_argument("--eps", type=float, help="failure probability for k_bound (default 1/n)")
    sw.add_argument("--gen", default="random_connected,p=0.3", help="FAMILY[,p=...] used for every n")
    sw.add_argument("--faults", default="random")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--csv-out", metavar="PATH")

    ve = sub.add_parser("verify", help="check a state or trace file")
    _graph_args(ve)
    ve.add_argument("--state", metavar="PATH", help="JSON with 'beta' and/or 'link'/'img'")
    ve.add_argument("--names", action="store_true", help="beta holds link names (composed state)")
    ve.add_argument("--trace", metavar="PATH")

    mc = sub.add_parser("modelcheck", help="exhaustive check of a small instance")
    _graph_args(mc)
    mc.add_argument("--algo", choices=("a1", "a2"), default="a1")
    mc.add_argument("--max-states", type=int)
    mc.add_argument("--serialization", choices=("ascending", "both"),
                    help="a2 only: order of a racing read and write in one transition")
    mc.add_argument("--trace-out", metavar="PATH", help="where to write a counterexample")
    return ap


def _load_graph(args, seed: int = 0):
    if args.graph:
        return load_graph(args.graph)
    if args.gen:
        return parse_gen(args.gen, seed)
    raise BadInput("need --graph or --gen")


def cmd_run(args) -> int:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
        known = {f.name for f in fields(TrialSpec)}
        unknown = set(base) - known
        if unknown:
            raise BadInput(f"unknown config keys: {', '.join(sorted(unknown))}")
    overrides = {
        "graph": args.graph, "gen": args.gen, "algorithm": args.algo, "daemon": args.daemon,
        "daemon_a2": args.daemon_a2, "samples": args.samples, "seed": args.seed, "faults": args.faults,
        "domain": args.domain, "max_moves": args.max_moves, "mode": args.mode, "replay": args.replay,
        "trace_out": args.trace_out, "csv_out": args.csv_out,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.graph:
        base.pop("gen", None)
    elif args.gen:
        base.pop("graph", None)
    spec = TrialSpec(**base)
    if "replay" in (spec.daemon, spec.daemon_a2) and not spec.replay:
        raise BadInput("--daemon replay needs --replay TRACE")
    _, stats = run_trial(spec)
    print(json.dumps(stats.row(), sort_keys=True))
    return EXIT_OK if stats.converged else EXIT_NOT_CONVERGED


def cmd_sweep(args) -> int:
    family, _, rest = args.gen.partition(",")
    p = 0.3
    for item in filter(None, rest.split(",")):
        key, _, val = item.partition("=")
        if key != "p":
            raise BadInput(f"sweep generator only takes p=, got {item!r}")
        p = float(val)
    cfg = SweepConfig(
        ns=[int(x) for x in args.ns.split(",")], trials=args.trials,
        policies=args.daemon.split(","), eps=args.eps, family=family, p=p,
        faults=args.faults, seed=args.seed, workers=args.workers,
    )
    rows = sweep(cfg, args.csv_out)
    ok = True
    for row in rows:
        print(json.dumps(row, sort_keys=True))
        ok &= row["converged"] == row["trials"] and row["mean_ok"] and row["bound_4n3_ok"] is not False
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_verify(args) -> int:
    if args.trace:
        trace = ExecutionTrace.load(args.trace)
        violations = monitor_trace(trace)
        for v in violations:
            print(v)
        print(f"{len(trace.events)} transitions checked, {len(violations)} violations")
        return EXIT_VIOLATION if violations else EXIT_OK
    if not args.state:
        raise BadInput("verify needs --trace or --state")
    g = _load_graph(args)
    with open(args.state) as fh:
        state = json.load(fh)
    ok = True
    regs = RegisterFile.from_dict(state) if "link" in state else None
    if regs is not None:
        rep = check_LN(g, regs)
        print(f"LN: {rep}")
        ok &= rep.ok
    if "beta" in state:
        beta = state["beta"]
        if args.names:
            if regs is None:
                raise BadInput("--names needs link registers in the state file")
            beta = translate_names(g, regs, beta)
        rep = check_M(g, beta)
        print(f"M: {rep}")
        ok &= rep.ok
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_modelcheck(args) -> int:
    g = _load_graph(args)
    opts = {"max_states": args.max_states} if args.max_states else {}
    if args.serialization:
        if args.algo != "a2":
            raise BadInput("--serialization applies to a2 only")
        opts["serialization"] = args.serialization
    res = model_check(g, args.algo, **opts)
    print(res.summary())
    for note in res.notes[:10]:
        print("  " + note)
    if res.counterexample is not None and args.trace_out:
        res.counterexample.save(args.trace_out)
    return EXIT_OK if res.ok else EXIT_VIOLATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify, "modelcheck": cmd_modelcheck}
    try:
        return handler[args.command](args)
    except TrialError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.trace is not None:
            path = getattr(args, "trace_out", None) or "failure-trace.jsonl"
            exc.trace.save(path)
            print(f"replayable trace written to {path}", file=sys.stderr)
        return EXIT_VIOLATION
    except ReplayError as exc:
        print(f"replay error: {exc}", file=sys.stderr)
        return EXIT_REPLAY
    except (BadInput, GraphError, TraceFormatError, StateSpaceTooLarge, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
