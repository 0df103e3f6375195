"""Trace monitors.

They rebuild every configuration from the trace header and the recorded
writes, then check, per transition:

* potential never decreases (lexicographic), and matches the recorded value;
* nodes in a good edge are never scheduled and good edges survive;
* between two activations of Single or Indecisive nodes there are at most
  n moves (hence any n+1 consecutive transitions contain one);
* every scheduled rule is legal for the scheduling node's class and its
  write is one the rule may produce; unscheduled nodes keep their pointer;
* link-name actions write only their own registers, matching rules write
  no register, and the link-name layer takes at most 20m moves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from ..registers import RegisterFile
from ..topology import AnonymousGraph
from ..trace import ExecutionTrace, TraceFormatError
from .specs import NodeClass, classes_of, lex_le, lex_lt, potential_of, translate_names

MATCHING_LAYERS = ("A1", "RA1")


@dataclass(frozen=True)
class Violation:
    step: int
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"step {self.step}: [{self.kind}] {self.detail}"


class _Replayer:
    """Rebuilds configurations from a trace."""

    def __init__(self, trace: ExecutionTrace):
        h = trace.header
        try:
            self.g = AnonymousGraph.from_dict(h["graph"])
            init = h["initial"]
        except (KeyError, TypeError) as exc:
            raise TraceFormatError(f"trace header lacks graph or initial state: {exc}") from None
        self.beta = list(init.get("beta") or [None] * self.g.n)
        self.regs = RegisterFile.from_dict(init) if "link" in init else RegisterFile.zeros(self.g)
        self.names = h.get("algorithm") in ("composed",)

    def pointers(self) -> list:
        g = self.g
        ports = translate_names(g, self.regs, self.beta) if self.names else self.beta
        out = []
        for u, raw in enumerate(ports):
            lk = g.link(u, raw) if type(raw) is int else None
            out.append(None if lk is None else lk.neighbor)
        return out

    def pointee_of_value(self, u: int, raw):
        """Node designated by a freshly written value of ``beta[u]``."""
        if type(raw) is not int:
            return None
        if self.names:
            hits = [i for i, name in enumerate(self.regs.link[u]) if name == raw]
            return self.g.links[u][hits[0]].neighbor if len(hits) == 1 else None
        lk = self.g.link(u, raw)
        return None if lk is None else lk.neighbor

    def apply(self, changes: list[dict]) -> None:
        for c in changes:
            var = c["var"]
            if var == "beta":
                self.beta[c["node"]] = c["new"]
            elif var in ("link", "img"):
                u = c["node"]
                pos = self.g.position(u, c["port"])
                if pos is None:
                    raise TraceFormatError(f"write to unknown port {c['port']} of node {u}")
                getattr(self.regs, var)[u][pos] = c["new"]
            else:
                raise TraceFormatError(f"unknown variable {var!r}")


def configurations(trace: ExecutionTrace) -> Iterator[tuple[list, tuple]]:
    """Every configuration of the run as ``(beta, frozen registers)``, initial first."""
    rp = _Replayer(trace)
    yield list(rp.beta), rp.regs.freeze()
    for ev in trace.events:
        rp.apply(ev.changes)
        yield list(rp.beta), rp.regs.freeze()


def replay_final(trace: ExecutionTrace) -> tuple[AnonymousGraph, list, RegisterFile]:
    """``(graph, beta, registers)`` after the last event of ``trace``."""
    rp = _Replayer(trace)
    for ev in trace.events:
        rp.apply(ev.changes)
    return rp.g, rp.beta, rp.regs


def monitor_trace(trace: ExecutionTrace) -> list[Violation]:
    rp = _Replayer(trace)
    g = rp.g
    n = g.n
    out: list[Violation] = []
    a2_moves = 0
    quiet_moves = 0  # moves since the last Single/Indecisive activation
    prev_layer = None
    for ev in trace.events:
        step = ev.step
        nodes = [u for u, _ in ev.selection]
        if not ev.selection or len(set(nodes)) != len(nodes):
            out.append(Violation(step, "daemon", f"selection empty or repeats a node: {ev.selection}"))
        if any(not 0 <= u < n for u in nodes):
            raise TraceFormatError(f"step {step}: selection names a node outside 0..{n - 1}")
        writers = set(nodes)
        for c in ev.changes:
            if c.get("node") not in writers:
                out.append(Violation(step, "frame", f"unscheduled node {c.get('node')} changed {c['var']}"))
            if ev.layer in MATCHING_LAYERS and c["var"] != "beta":
                out.append(Violation(step, "layering", f"matching rule wrote register {c}"))
            if ev.layer == "A2" and c["var"] == "beta":
                out.append(Violation(step, "layering", f"link-name action wrote beta of node {c['node']}"))

        if ev.layer == "A2":
            a2_moves += ev.moves
            if a2_moves > 20 * g.m and a2_moves - ev.moves <= 20 * g.m:
                out.append(Violation(step, "a2-bound", f"link naming exceeded 20m = {20 * g.m} moves"))
            rp.apply(ev.changes)
            prev_layer = ev.layer
            continue
        if ev.layer not in MATCHING_LAYERS:
            # interleaved exploration traces: only frame/layering checks apply
            rp.apply(ev.changes)
            prev_layer = ev.layer
            continue
        if prev_layer != ev.layer:
            quiet_moves = 0
        prev_layer = ev.layer

        before = rp.pointers()
        cls = classes_of(g, before)
        f_before = potential_of(g, before)
        written = {c["node"]: c["new"] for c in ev.changes if c["var"] == "beta"}
        progress = False
        for u, action in ev.selection:
            c = cls[u]
            if c is NodeClass.IN_GOOD_EDGE:
                out.append(Violation(step, "persistence", f"node {u} in a good edge was scheduled ({action})"))
                continue
            if c in (NodeClass.SINGLE, NodeClass.INDECISIVE):
                progress = True
            new_target = rp.pointee_of_value(u, written.get(u)) if u in written else "missing"
            if new_target == "missing":
                out.append(Violation(step, "frame", f"scheduled node {u} recorded no write"))
                continue
            nbrs = g.neighbors(u)
            if action == "Marriage":
                ok = c is NodeClass.INDECISIVE and new_target is not None and before[new_target] == u
            elif action == "Seduction":
                free = [v for v in nbrs if before[v] is None]
                ok = c is NodeClass.SINGLE and bool(free) and (new_target is None or new_target in free)
            elif action == "Abandonment":
                t = before[u]
                ok = c is NodeClass.POINTING_OUT and before[t] is not None and new_target is None
            else:
                ok = False
            if not ok:
                out.append(Violation(step, "legality", f"node {u} ({c.value}) cannot perform {action} writing {written[u]!r}"))

        if progress:
            quiet_moves = 0
        else:
            quiet_moves += ev.moves
            if quiet_moves > n:
                out.append(Violation(step, "quiet-window", f"{quiet_moves} moves without activating a Single or Indecisive node (n={n})"))
                quiet_moves = 0

        rp.apply(ev.changes)
        after = rp.pointers()
        f_after = potential_of(g, after)
        if not lex_le(f_before, f_after):
            out.append(Violation(step, "potential-drop", f"potential decreased {tuple(f_before)} -> {tuple(f_after)}"))
        if ev.potential is not None and tuple(ev.potential) != tuple(f_after):
            out.append(Violation(step, "record", f"recorded potential {ev.potential} != recomputed {tuple(f_after)}"))
        for u, v in enumerate(before):
            if v is not None and before[v] == u and (after[u] != v or after[v] != u):
                out.append(Violation(step, "persistence", f"good edge ({u},{v}) destroyed"))
    return out


def single_progress_tally(trace: ExecutionTrace) -> tuple[int, int]:
    """``(transitions with a Single node scheduled, of which f strictly increased)``."""
    rp = _Replayer(trace)
    g = rp.g
    total = hits = 0
    for ev in trace.events:
        if ev.layer not in MATCHING_LAYERS:
            rp.apply(ev.changes)
            continue
        before = rp.pointers()
        cls = classes_of(g, before)
        single = any(cls[u] is NodeClass.SINGLE for u, _ in ev.selection)
        rp.apply(ev.changes)
        if single:
            total += 1
            if lex_lt(potential_of(g, before), potential_of(g, rp.pointers())):
                hits += 1
    return total, hits
