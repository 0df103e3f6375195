"""Anonymous graphs with port numbering.

Node indices are simulator bookkeeping. Algorithm code navigates with
ports only: ``proc`` hands back an opaque :class:`NodeHandle` that can be
used to look up state but cannot be compared with another handle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

NDEF = None


class GraphError(ValueError):
    pass


class NodeHandle:
    """Opaque reference to a node, usable only as a state subscript."""

    __slots__ = ("_index",)

    def __init__(self, index: int) -> None:
        self._index = index

    def __eq__(self, other):
        raise TypeError("node handles are entities, not values; they cannot be compared")

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return "NodeHandle(<opaque>)"


def _index(u) -> int:
    return u._index if isinstance(u, NodeHandle) else u


@dataclass(frozen=True)
class Link:
    port: int
    neighbor: int
    mirror: int


@dataclass(frozen=True, eq=False)
class AnonymousGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    # per node: links sorted by port
    links: tuple[tuple[Link, ...], ...] = field(repr=False)

    def __post_init__(self) -> None:
        by_port = tuple({lk.port: lk for lk in ls} for ls in self.links)
        object.__setattr__(self, "_by_port", by_port)
        object.__setattr__(self, "_pos", tuple({lk.port: i for i, lk in enumerate(ls)} for ls in self.links))
        # position of the mirror port inside the neighbor's link list
        mirror_pos = tuple(
            tuple({lk.port: i for i, lk in enumerate(self.links[x.neighbor])}[x.mirror] for x in ls)
            for ls in self.links
        )
        object.__setattr__(self, "mirror_pos", mirror_pos)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, u) -> int:
        return len(self.links[_index(u)])

    def ports(self, u) -> tuple[int, ...]:
        """The port set of ``u`` in ascending order."""
        return tuple(lk.port for lk in self.links[_index(u)])

    def port_label(self, u: int, edge: tuple[int, int]):
        x, y = edge
        if u not in (x, y):
            return NDEF
        other = y if u == x else x
        for lk in self.links[u]:
            if lk.neighbor == other:
                return lk.port
        return NDEF

    def proc(self, u, a):
        lk = self._by_port[_index(u)].get(a)
        return NDEF if lk is None else NodeHandle(lk.neighbor)

    def port_mirror(self, u, a):
        lk = self._by_port[_index(u)].get(a)
        return NDEF if lk is None else lk.mirror

    def position(self, u: int, a: int) -> int | None:
        """Index of port ``a`` in ``ports(u)``, or None."""
        return self._pos[u].get(a)

    def link(self, u: int, a: int) -> Link | None:
        return self._by_port[u].get(a)

    def bookkeeping_index(self, h) -> int:
        """Simulator-side unwrapping of a handle. Not for algorithm code."""
        return _index(h)

    def neighbors(self, u: int) -> list[int]:
        return [lk.neighbor for lk in self.links[u]]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for lk in self.links[u]:
                if lk.neighbor not in seen:
                    seen.add(lk.neighbor)
                    stack.append(lk.neighbor)
        return len(seen) == self.n

    def edge_ports(self) -> list[tuple[int, int, int, int]]:
        """Edges as ``(u, v, pu, pv)`` in construction order."""
        out = []
        for u, v in self.edges:
            out.append((u, v, self.port_label(u, (u, v)), self.port_label(v, (u, v))))
        return out

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edge_ports()]}

    @classmethod
    def from_dict(cls, d: dict) -> "AnonymousGraph":
        return build_graph(d["n"], [tuple(e) for e in d["edges"]])


def build_graph(n: int, spec: Iterable[Sequence[int]]) -> AnonymousGraph:
    """Build a graph from ``(u, v)`` or ``(u, v, pu, pv)`` entries.

    Missing labels are filled per node with the smallest unused positive
    integers, in edge-input order.
    """
    if n < 1:
        raise GraphError("node count must be positive")
    edges: list[tuple[int, int]] = []
    seen: set[frozenset] = set()
    explicit: list[tuple[int | None, int | None]] = []
    for entry in spec:
        if len(entry) == 2:
            u, v = entry
            pu = pv = None
        elif len(entry) == 4:
            u, v, pu, pv = entry
        else:
            raise GraphError(f"edge entry must have 2 or 4 fields, got {tuple(entry)}")
        for x in (u, v):
            if not 0 <= x < n:
                raise GraphError(f"endpoint {x} of edge ({u},{v}) out of range 0..{n - 1}")
        if u == v:
            raise GraphError(f"self-loop at node {u}")
        key = frozenset((u, v))
        if key in seen:
            raise GraphError(f"parallel edge ({u},{v})")
        seen.add(key)
        for p in (pu, pv):
            if p is not None and (not isinstance(p, int) or p < 1):
                raise GraphError(f"port labels must be positive integers, got {p!r} on edge ({u},{v})")
        edges.append((u, v))
        explicit.append((pu, pv))

    used: list[set[int]] = [set() for _ in range(n)]
    labels: list[list[int | None]] = [[None, None] for _ in edges]
    for i, ((u, v), (pu, pv)) in enumerate(zip(edges, explicit)):
        for side, (x, p) in enumerate(((u, pu), (v, pv))):
            if p is None:
                continue
            if p in used[x]:
                raise GraphError(f"port clash at node {x}: port {p} used twice (edge ({u},{v}))")
            used[x].add(p)
            labels[i][side] = p
    nxt = [1] * n
    for i, (u, v) in enumerate(edges):
        for side, x in enumerate((u, v)):
            if labels[i][side] is None:
                while nxt[x] in used[x]:
                    nxt[x] += 1
                labels[i][side] = nxt[x]
                used[x].add(nxt[x])

    per_node: list[list[Link]] = [[] for _ in range(n)]
    for (u, v), (pu, pv) in zip(edges, labels):
        per_node[u].append(Link(pu, v, pv))
        per_node[v].append(Link(pv, u, pu))
    links = tuple(tuple(sorted(ls, key=lambda lk: lk.port)) for ls in per_node)
    return AnonymousGraph(n, tuple(edges), links)


# --- generators -----------------------------------------------------------

FAMILIES = ("path", "ring", "star", "complete", "random_connected")


def generate(family: str, n: int, seed: int = 0, p: float = 0.3) -> AnonymousGraph:
    """Generate a connected graph on ``n`` nodes.

    ``star`` uses node 0 as the center. ``random_connected`` draws a random
    spanning tree and then adds every other pair with probability ``p``.
    """
    if n < 1:
        raise GraphError("n must be >= 1")
    if family == "path":
        return build_graph(n, [(i, i + 1) for i in range(n - 1)])
    if family == "ring":
        if n < 3:
            raise GraphError("a ring needs n >= 3")
        return build_graph(n, [(i, (i + 1) % n) for i in range(n)])
    if family == "star":
        return build_graph(n, [(0, i) for i in range(1, n)])
    if family == "complete":
        return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    if family == "random_connected":
        if not 0 <= p <= 1:
            raise GraphError("edge probability must be in [0, 1]")
        rng = random.Random(seed)
        order = list(range(n))
        rng.shuffle(order)
        edges = set()
        for i in range(1, n):
            j = rng.randrange(i)
            edges.add((min(order[i], order[j]), max(order[i], order[j])))
        for u in range(n):
            for v in range(u + 1, n):
                if (u, v) not in edges and rng.random() < p:
                    edges.add((u, v))
        edge_list = sorted(edges)
        rng.shuffle(edge_list)
        return build_graph(n, edge_list)
    raise GraphError(f"unknown graph family {family!r}; expected one of {', '.join(FAMILIES)}")


def relabel_ports(g: AnonymousGraph, rng: random.Random, max_label: int = 99) -> AnonymousGraph:
    """Same topology with arbitrary distinct port labels drawn per node."""
    pools = [rng.sample(range(1, max_label + 1), g.degree(u)) for u in range(g.n)]
    taken = [0] * g.n
    spec = []
    for u, v in g.edges:
        pu = pools[u][taken[u]]
        pv = pools[v][taken[v]]
        taken[u] += 1
        taken[v] += 1
        spec.append((u, v, pu, pv))
    return build_graph(g.n, spec)


# --- graph files ------------------------------------------------------------

def parse_graph(text: str) -> AnonymousGraph:
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(tok) for tok in line.split()])
        except ValueError:
            raise GraphError(f"non-integer token in line {raw!r}") from None
    if not rows or len(rows[0]) != 2:
        raise GraphError("first line must be 'n m'")
    n, m = rows[0]
    if len(rows) - 1 != m:
        raise GraphError(f"header announces {m} edges, found {len(rows) - 1}")
    return build_graph(n, [tuple(r) for r in rows[1:]])


def format_graph(g: AnonymousGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v} {pu} {pv}" for u, v, pu, pv in g.edge_ports()]
    return "\n".join(lines) + "\n"


def load_graph(path: str | Path) -> AnonymousGraph:
    return parse_graph(Path(path).read_text())


def save_graph(g: AnonymousGraph, path: str | Path) -> None:
    Path(path).write_text(format_graph(g))
