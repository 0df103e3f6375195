"""Trial orchestration: seeded streams, fault injection, monitored runs,
sweeps and CSV output."""

from __future__ import annotations

import csv
import hashlib
import logging
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .composed import ComposedState, run_composed
from .daemon import DaemonPolicy, make_policy
from .execution import drive
from .linkname import LinkNameEngine
from .matching import Draws, MatchingEngine
from .registers import RegisterFile
from .topology import AnonymousGraph, GraphError, generate, load_graph
from .trace import ExecutionTrace
from .verifier.monitors import Violation, monitor_trace
from .verifier.specs import check_LN, check_M, k_bound, potential, translate_names

log = logging.getLogger(__name__)

ALGORITHMS = ("a1", "a2", "composed")
FAULT_MODES = ("all-null", "random", "preset:chain", "preset:all-point", "preset:dup-links")


class TrialError(RuntimeError):
    """A trial broke a checked property; ``trace`` reproduces it."""

    def __init__(self, kind: str, message: str, trace: ExecutionTrace | None = None,
                 violations: Sequence[Violation] = ()):
        super().__init__(message)
        self.kind = kind
        self.trace = trace
        self.violations = list(violations)


def stream(seed: int, name: str) -> random.Random:
    """Independent named RNG stream derived from one master seed."""
    digest = hashlib.sha256(f"{seed}/{name}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# --- faults -------------------------------------------------------------------

def _bfs_parents(g: AnonymousGraph) -> list[int | None]:
    parent: list[int | None] = [None] * g.n
    seen = [False] * g.n
    for root in range(g.n):
        if seen[root]:
            continue
        seen[root] = True
        queue = [root]
        for u in queue:
            for lk in g.links[u]:
                if not seen[lk.neighbor]:
                    seen[lk.neighbor] = True
                    parent[lk.neighbor] = u
                    queue.append(lk.neighbor)
    return parent


def inject_faults(g: AnonymousGraph, mode: str, rng: random.Random, *,
                  domain: int | None = None, names: bool = False) -> tuple[list, RegisterFile]:
    """Initial ``(beta, registers)`` for a trial.

    ``random`` draws every pointer from {null, 0..domain} and every register
    from 0..domain; the default domain, 2*maxdeg+2, includes values no port
    or link name can take.  With ``names`` set, preset pointers store the
    link name the port will carry once names are canonical.
    """
    maxdeg = max((g.degree(u) for u in range(g.n)), default=0)
    if domain is None:
        domain = 2 * maxdeg + 2
    beta: list = [None] * g.n
    regs = RegisterFile.zeros(g)

    def aim(u: int, port: int):
        return g.position(u, port) + 1 if names else port

    if mode == "all-null":
        pass
    elif mode == "random":
        values = [None, *range(domain + 1)]
        beta = [rng.choice(values) for _ in range(g.n)]
        for u in range(g.n):
            for i in range(g.degree(u)):
                regs.link[u][i] = rng.randrange(domain + 1)
                regs.img[u][i] = rng.randrange(domain + 1)
    elif mode == "preset:chain":
        # each node points at its BFS parent, roots at their first child:
        # a long chain of pointers that unwinds by abandonments
        parent = _bfs_parents(g)
        for u in range(g.n):
            if parent[u] is not None:
                beta[u] = aim(u, g.port_label(u, (u, parent[u])))
            elif g.degree(u):
                beta[u] = aim(u, g.ports(u)[0])
    elif mode == "preset:all-point":
        beta = [aim(u, g.ports(u)[0]) if g.degree(u) else None for u in range(g.n)]
    elif mode == "preset:dup-links":
        for u in range(g.n):
            regs.link[u] = [1] * g.degree(u)
            regs.img[u] = [rng.randrange(domain + 1) for _ in range(g.degree(u))]
    else:
        raise ValueError(f"unknown fault mode {mode!r}; expected one of {', '.join(FAULT_MODES)}")
    return beta, regs


# --- trial specs ----------------------------------------------------------------

def parse_gen(text: str, seed: int) -> AnonymousGraph:
    """``family,n=10,p=0.3[,seed=7]``; the seed defaults to the trial's graph stream."""
    family, *params = [t.strip() for t in text.split(",") if t.strip()]
    kw: dict = {}
    for item in params:
        key, sep, val = item.partition("=")
        if not sep:
            raise GraphError(f"generator parameter {item!r} is not key=value")
        kw[key] = float(val) if key == "p" else int(val)
    if "n" not in kw:
        raise GraphError("generator spec needs n=")
    kw.setdefault("seed", stream(seed, "graph").getrandbits(32))
    return generate(family, **kw)


@dataclass
class TrialSpec:
    algorithm: str = "a1"
    graph: str | None = None
    gen: str | None = None
    daemon: str = "synchronous"
    daemon_a2: str | None = None
    samples: int = 32
    seed: int = 0
    faults: str = "random"
    domain: int | None = None
    max_moves: int | None = None
    mode: str = "phased"
    replay: str | None = None
    trace_out: str | None = None
    csv_out: str | None = None
    monitor: bool = True

    def load_graph(self) -> AnonymousGraph:
        if self.graph:
            return load_graph(self.graph)
        if self.gen:
            return parse_gen(self.gen, self.seed)
        raise GraphError("trial needs a graph file or a generator spec")


@dataclass
class TrialStats:
    n: int
    m: int
    seed: int
    policy: str
    algorithm: str
    faults: str
    total_moves: int
    transitions: int
    converged: bool
    final_g: int | None
    final_a: int | None
    k_bound: int
    within_bound: bool
    a2_moves: int = 0
    marriage: int = 0
    abandonment: int = 0
    seduction: int = 0

    def row(self) -> dict:
        return asdict(self)


STATS_FIELDS = list(TrialStats.__dataclass_fields__)


def default_cap(g: AnonymousGraph) -> int:
    return 64 * (g.n + 1) ** 3


def _policy(kind: str, rng: random.Random, samples: int, selections) -> DaemonPolicy:
    return make_policy(kind, rng, samples=samples, selections=selections)


def run_trial(spec: TrialSpec, graph: AnonymousGraph | None = None) -> tuple[ExecutionTrace, TrialStats]:
    if spec.algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {spec.algorithm!r}")
    g = graph if graph is not None else spec.load_graph()
    beta, regs = inject_faults(g, spec.faults, stream(spec.seed, "faults"), domain=spec.domain,
                               names=spec.algorithm == "composed")
    recorded = ExecutionTrace.load(spec.replay) if spec.replay else None
    a1_layer = "RA1" if spec.algorithm == "composed" else "A1"

    def selections(layer):
        return recorded.selections(layer) if recorded else None

    main = _policy(spec.daemon, stream(spec.seed, "daemon"), spec.samples,
                   selections(a1_layer if spec.algorithm != "a2" else "A2"))
    draws = Draws(stream(spec.seed, "rules"))
    cap = spec.max_moves or default_cap(g)
    a2_cap = spec.max_moves or 40 * g.m + 8

    initial: dict = {}
    if spec.algorithm in ("a1", "composed"):
        initial["beta"] = list(beta)
    if spec.algorithm in ("a2", "composed"):
        initial.update(regs.to_dict())
    header = {
        "algorithm": spec.algorithm,
        "graph": g.to_dict(),
        "seed": spec.seed,
        "policy": main.describe(),
        "faults": spec.faults,
        "initial": initial,
        "max_moves": cap,
    }
    trace = ExecutionTrace(header)
    a2_moves = 0
    final_pot = None
    if spec.algorithm == "a1":
        eng = MatchingEngine(g, beta, draws)
        result = drive(eng, main, cap, trace.events, lambda: tuple(potential(g, eng.beta)))
        moves, converged = result.moves, result.converged
        final_pot = potential(g, eng.beta)
        spec_ok = check_M(g, eng.beta) if converged else None
    elif spec.algorithm == "a2":
        eng = LinkNameEngine(g, regs)
        result = drive(eng, main, a2_cap, trace.events)
        moves, converged, a2_moves = result.moves, result.converged, result.moves
        spec_ok = check_LN(g, regs) if converged else None
    else:
        header["mode"] = spec.mode
        pol_a2 = _policy(spec.daemon_a2 or spec.daemon, stream(spec.seed, "daemon-a2"), spec.samples,
                         selections("A2"))
        header["policy_a2"] = pol_a2.describe()
        run = run_composed(
            g, ComposedState(regs, beta), pol_a2, main, draws, a2_cap=a2_cap, ra1_cap=cap,
            mode=spec.mode, potential=lambda e: tuple(potential(g, e.port_config())),
        )
        trace.events = run.events
        a2_moves = run.a2.moves
        moves = run.a2.moves + run.ra1.moves
        converged = run.a2.converged and run.ra1.converged
        ports = translate_names(g, regs, run.state.beta)
        final_pot = potential(g, ports)
        spec_ok = None
        if converged:
            m_rep, ln_rep = check_M(g, ports), check_LN(g, regs)
            spec_ok = m_rep if not m_rep.ok else ln_rep

    counts = {"Marriage": 0, "Abandonment": 0, "Seduction": 0}
    for ev in trace.events:
        for _, a in ev.selection:
            key = a.split(":")[-1]
            if key in counts:
                counts[key] += 1
    kb = k_bound(g.n, 1 / g.n)
    if not converged:
        within = False
    elif spec.algorithm == "a1":
        within = moves <= kb
    elif spec.algorithm == "a2":
        within = moves <= 20 * g.m
    else:
        within = a2_moves <= 20 * g.m and moves - a2_moves <= kb
    stats = TrialStats(
        n=g.n, m=g.m, seed=spec.seed, policy=main.describe(), algorithm=spec.algorithm,
        faults=spec.faults, total_moves=moves, transitions=len(trace.events), converged=converged,
        final_g=None if final_pot is None else final_pot.good,
        final_a=None if final_pot is None else final_pot.almost,
        k_bound=kb, within_bound=within, a2_moves=a2_moves,
        marriage=counts["Marriage"], abandonment=counts["Abandonment"], seduction=counts["Seduction"],
    )
    trace.outcome = stats.row()

    if spec.monitor:
        violations = monitor_trace(trace)
        if violations:
            raise TrialError("monitor", f"{len(violations)} monitor violations, first: {violations[0]}",
                             trace, violations)
    if spec_ok is not None and not spec_ok.ok:
        raise TrialError("spec", f"converged to a configuration failing {spec_ok}", trace)
    if spec.trace_out:
        trace.save(spec.trace_out)
    if spec.csv_out:
        append_csv(spec.csv_out, [stats.row()], STATS_FIELDS)
    return trace, stats


def append_csv(path: str | Path, rows: Iterable[dict], fields: Sequence[str]) -> None:
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields))
        if fresh:
            w.writeheader()
        w.writerows(rows)


# --- sweeps -----------------------------------------------------------------------

SWEEP_FIELDS = [
    "n", "policy", "trials", "converged", "mean_moves", "median_moves", "max_moves",
    "eps", "k_bound", "frac_within_k_bound", "bound_4n3", "frac_within_4n3",
    "bound_4n3_applies", "bound_4n3_ok", "mean_bound", "mean_ok",
]


@dataclass
class SweepConfig:
    ns: Sequence[int]
    trials: int = 100
    policies: Sequence[str] = ("adversarial_greedy",)
    eps: float | None = None
    family: str = "random_connected"
    p: float = 0.3
    faults: str = "random"
    seed: int = 0
    samples: int = 32
    workers: int = 1
    monitor: bool = True
    extra: dict = field(default_factory=dict)


def _sweep_trial(args) -> int | None:
    n, policy, seed, cfg = args
    rng = stream(seed, "graph")
    fam = cfg.family
    if fam == "ring" and n < 3:
        fam = "path"
    g = generate(fam, n, seed=rng.getrandbits(32), p=cfg.p)
    spec = TrialSpec(algorithm="a1", daemon=policy, seed=seed, faults=cfg.faults,
                     samples=cfg.samples, monitor=cfg.monitor)
    _, stats = run_trial(spec, g)
    return stats.total_moves if stats.converged else None


def sweep_seed(base: int, n: int, policy: str, i: int) -> int:
    digest = hashlib.sha256(f"{base}/{n}/{policy}/{i}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def sweep(cfg: SweepConfig, csv_out: str | Path | None = None) -> list[dict]:
    """One row per (n, policy) with move statistics against the analytic bounds."""
    jobs = [(n, pol, sweep_seed(cfg.seed, n, pol, i), cfg)
            for n in cfg.ns for pol in cfg.policies for i in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_sweep_trial, jobs, chunksize=8))
    else:
        results = [_sweep_trial(j) for j in jobs]
    rows = []
    k = 0
    for n in cfg.ns:
        for pol in cfg.policies:
            chunk = results[k:k + cfg.trials]
            k += cfg.trials
            done = [x for x in chunk if x is not None]
            eps = cfg.eps if cfg.eps is not None else 1 / n
            kb = k_bound(n, eps)
            b3 = 4 * (n + 1) ** 3
            mean_bound = 8 * n * (n * n / 2 + n)
            mean = statistics.fmean(done) if done else float("nan")
            frac_b3 = sum(x <= b3 for x in done) / len(chunk)
            row = {
                "n": n, "policy": pol, "trials": len(chunk), "converged": len(done),
                "mean_moves": round(mean, 3), "median_moves": statistics.median(done) if done else None,
                "max_moves": max(done) if done else None, "eps": eps, "k_bound": kb,
                "frac_within_k_bound": sum(x <= kb for x in done) / len(chunk),
                "bound_4n3": b3, "frac_within_4n3": frac_b3,
                "bound_4n3_applies": n >= 6,
                "bound_4n3_ok": (frac_b3 >= 1 - 1 / n) if n >= 6 else None,
                "mean_bound": mean_bound, "mean_ok": bool(done) and mean <= mean_bound,
            }
            rows.append(row)
            log.info("sweep n=%d policy=%s mean=%.1f max=%s", n, pol, mean, row["max_moves"])
    if csv_out:
        append_csv(csv_out, rows, SWEEP_FIELDS)
    return rows
