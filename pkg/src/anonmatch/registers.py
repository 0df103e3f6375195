from __future__ import annotations

import copy
from dataclasses import dataclass

from .topology import AnonymousGraph


class OwnershipError(AssertionError):
    """A node tried to write a register it does not own."""


@dataclass
class RegisterFile:
    """``link`` and ``img`` registers, indexed ``[node][port position]``.

    Port positions follow ``graph.ports(u)`` (ascending port order).
    """

    link: list[list[int]]
    img: list[list[int]]

    @classmethod
    def zeros(cls, g: AnonymousGraph) -> "RegisterFile":
        return cls([[0] * g.degree(u) for u in range(g.n)], [[0] * g.degree(u) for u in range(g.n)])

    @classmethod
    def from_ports(cls, g: AnonymousGraph, link: dict, img: dict) -> "RegisterFile":
        """Build from ``{(u, port): value}`` dicts; missing entries are 0."""
        rf = cls.zeros(g)
        for u in range(g.n):
            for i, a in enumerate(g.ports(u)):
                rf.link[u][i] = link.get((u, a), 0)
                rf.img[u][i] = img.get((u, a), 0)
        return rf

    def get(self, g: AnonymousGraph, reg: str, u: int, port: int) -> int:
        return getattr(self, reg)[u][g.ports(u).index(port)]

    def write(self, actor: int, reg: str, u: int, pos: int, value: int) -> int:
        if actor != u:
            raise OwnershipError(f"node {actor} attempted to write {reg} register of node {u}")
        regs = self.link if reg == "link" else self.img
        old = regs[u][pos]
        regs[u][pos] = value
        return old

    def copy(self) -> "RegisterFile":
        return copy.deepcopy(self)

    def freeze(self) -> tuple:
        return (tuple(map(tuple, self.link)), tuple(map(tuple, self.img)))

    @classmethod
    def thaw(cls, frozen: tuple) -> "RegisterFile":
        link, img = frozen
        return cls([list(r) for r in link], [list(r) for r in img])

    def to_dict(self) -> dict:
        return {"link": [list(r) for r in self.link], "img": [list(r) for r in self.img]}

    @classmethod
    def from_dict(cls, d: dict) -> "RegisterFile":
        return cls([list(map(int, r)) for r in d["link"]], [list(map(int, r)) for r in d["img"]])
