"""Checkers for the matching and link-name specifications, the potential
function, node classes and the high-probability move bound.

These work on node indices (simulator side) and share no guard code with the
engines, so they serve as an independent judge of engine output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

from ..registers import RegisterFile
from ..topology import AnonymousGraph


def pointee(g: AnonymousGraph, beta: Sequence, u: int) -> int | None:
    """Node that ``u`` points at, reading invalid stored values as null."""
    raw = beta[u]
    if type(raw) is not int:
        return None
    lk = g.link(u, raw)
    return None if lk is None else lk.neighbor


def pointees(g: AnonymousGraph, beta: Sequence) -> list[int | None]:
    return [pointee(g, beta, u) for u in range(g.n)]


def translate_names(g: AnonymousGraph, regs: RegisterFile, beta: Sequence) -> list:
    """Link-name pointers rewritten as ports; ambiguous or unknown names are null."""
    out = []
    for u, raw in enumerate(beta):
        hits = [i for i, name in enumerate(regs.link[u]) if type(raw) is int and name == raw]
        out.append(g.links[u][hits[0]].port if len(hits) == 1 else None)
    return out


def matched_pairs(g: AnonymousGraph, beta: Sequence) -> set[tuple[int, int]]:
    p = pointees(g, beta)
    return {(u, v) for u, v in enumerate(p) if v is not None and u < v and p[v] == u}


@dataclass
class SpecReport:
    clauses: dict[str, bool] = field(default_factory=dict)
    witnesses: dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.clauses.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.clauses.items() if not v]

    def __str__(self) -> str:
        parts = []
        for k, v in self.clauses.items():
            s = f"{k}={'pass' if v else 'FAIL'}"
            if not v and k in self.witnesses:
                s += f" (witness {self.witnesses[k]})"
            parts.append(s)
        return ", ".join(parts)


def check_M(g: AnonymousGraph, beta: Sequence) -> SpecReport:
    rep = SpecReport()
    pairs = matched_pairs(g, beta)
    edge_set = {frozenset(e) for e in g.edges}
    bad = [pr for pr in sorted(pairs) if frozenset(pr) not in edge_set]
    rep.clauses["M1"] = not bad
    if bad:
        rep.witnesses["M1"] = bad[0]
    seen: dict[int, tuple[int, int]] = {}
    clash = None
    for pr in sorted(pairs):
        for x in pr:
            if x in seen and clash is None:
                clash = (x, seen[x], pr)
            seen[x] = pr
    rep.clauses["M2"] = clash is None
    if clash:
        rep.witnesses["M2"] = clash
    uncovered = [(u, v) for u, v in g.edges if u not in seen and v not in seen]
    rep.clauses["M3"] = not uncovered
    if uncovered:
        rep.witnesses["M3"] = uncovered[0]
    return rep


def check_LN(g: AnonymousGraph, regs: RegisterFile) -> SpecReport:
    rep = SpecReport()
    bad_node = next(
        (u for u in range(g.n) if sorted(regs.link[u]) != list(range(1, g.degree(u) + 1))), None
    )
    rep.clauses["LN1"] = bad_node is None
    if bad_node is not None:
        rep.witnesses["LN1"] = bad_node
    bad_edge = None
    for u, v, pu, pv in g.edge_ports():
        a, b = g.position(u, pu), g.position(v, pv)
        if regs.img[u][a] != regs.link[v][b] or regs.img[v][b] != regs.link[u][a]:
            bad_edge = (u, v)
            break
    rep.clauses["LN2"] = bad_edge is None
    if bad_edge is not None:
        rep.witnesses["LN2"] = bad_edge
    return rep


class Potential(NamedTuple):
    good: int
    almost: int


def lex_le(p: Sequence[int], q: Sequence[int]) -> bool:
    return p[0] < q[0] or (p[0] == q[0] and p[1] <= q[1])


def lex_lt(p: Sequence[int], q: Sequence[int]) -> bool:
    return lex_le(p, q) and tuple(p) != tuple(q)


def potential_of(g: AnonymousGraph, p: Sequence[int | None]) -> Potential:
    good = almost = 0
    for u, v in enumerate(p):
        if v is None:
            continue
        if p[v] == u:
            good += 1
        elif p[v] is None:
            almost += 1
    return Potential(good // 2, almost)


def potential(g: AnonymousGraph, beta: Sequence) -> Potential:
    return potential_of(g, pointees(g, beta))


class NodeClass(str, Enum):
    SINGLE = "Single"
    INDECISIVE = "Indecisive"
    IN_GOOD_EDGE = "InGoodEdge"
    POINTING_OUT = "PointingOut"


def classes_of(g: AnonymousGraph, p: Sequence[int | None]) -> list[NodeClass]:
    pointed = [False] * g.n
    for u, v in enumerate(p):
        if v is not None:
            pointed[v] = True
    out = []
    for u, v in enumerate(p):
        if v is None:
            out.append(NodeClass.INDECISIVE if pointed[u] else NodeClass.SINGLE)
        else:
            out.append(NodeClass.IN_GOOD_EDGE if p[v] == u else NodeClass.POINTING_OUT)
    return out


def classify(g: AnonymousGraph, beta: Sequence, u: int) -> NodeClass:
    return classes_of(g, pointees(g, beta))[u]


def k_bound(n: int, eps: float) -> int:
    """Moves after which convergence holds with probability above 1 - eps:
    ceil(max(4 (n+1)^3, -32 (n+1) ln eps))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    value = max(4 * (n + 1) ** 3, -32 * (n + 1) * math.log(eps))
    nearest = round(value)
    # ln of an exact power of e carries float noise in the last place
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return math.ceil(value)


BRUTE_FORCE_MAX_N = 16


def brute_force_maximal_matchings(g: AnonymousGraph) -> set[frozenset]:
    """All inclusion-maximal matchings, edges as sorted pairs."""
    if g.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {g.n}")
    edges = [tuple(sorted(e)) for e in g.edges]
    found: set[frozenset] = set()

    def extend(i: int, used: int, chosen: list):
        if i == len(edges):
            if all(used >> u & 1 or used >> v & 1 for u, v in edges):
                found.add(frozenset(chosen))
            return
        u, v = edges[i]
        if not (used >> u & 1 or used >> v & 1):
            chosen.append(edges[i])
            extend(i + 1, used | 1 << u | 1 << v, chosen)
            chosen.pop()
        extend(i + 1, used, chosen)

    extend(0, 0, [])
    return found
