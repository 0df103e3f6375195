"""Link naming under read/write atomicity.

Every node owns two registers per port, ``link`` (the name it gives the
link) and ``img`` (its copy of the name the neighbor gives the same link).
Rule R0 renames a node's links to 1..degree when they are not already a
permutation of that range; rule Ra copies the neighbor's link name into
``img``.  A rule runs as a sequence of atomic actions, each ending in one
register access:

    R0:  read link(u,a) for every port, then (if still needed) write
         link(u,a) := rank of a, one port at a time
    Ra:  read img(u,a); read the neighbor's link; if they differ, re-read
         the neighbor's link and write it into img(u,a)

An idle node starts a rule only if its guard holds in the current
configuration; R0 has priority, then Ra in round-robin port order.
"""

from __future__ import annotations

from typing import NamedTuple

from .registers import RegisterFile
from .topology import AnonymousGraph

IDLE, R0_READ, R0_WRITE, RA_IMG, RA_LINK, RA_REREAD, RA_WRITE = range(7)
_LABEL = {
    R0_READ: "R0.read",
    R0_WRITE: "R0.write",
    RA_IMG: "Ra.read_img",
    RA_LINK: "Ra.read_link",
    RA_REREAD: "Ra.reread_link",
    RA_WRITE: "Ra.write_img",
}


class StepMachine(NamedTuple):
    phase: int = IDLE
    pos: int = 0  # port position the current action works on
    scratch: tuple = ()
    cursor: int = 0  # where the Ra round-robin resumes


IDLE_MACHINE = StepMachine()


def guard_R0_holds(links: list[int]) -> bool:
    """True iff the link names are not exactly 1..len(links)."""
    return sorted(links) != list(range(1, len(links) + 1))


def is_stable_A2(g: AnonymousGraph, regs: RegisterFile) -> bool:
    """No R0 or Ra guard holds anywhere (register view only)."""
    for u in range(g.n):
        if guard_R0_holds(regs.link[u]):
            return False
        for i, lk in enumerate(g.links[u]):
            if regs.img[u][i] != regs.link[lk.neighbor][g.mirror_pos[u][i]]:
                return False
    return True


def plan_for(g: AnonymousGraph, regs: RegisterFile, m: StepMachine, u: int):
    """Next atomic action of ``u`` as ``(phase, port position)``, or None.

    A busy machine continues its rule. An idle one starts R0 if its guard
    holds, else the first Ra (round-robin from ``m.cursor``) whose guard holds.
    """
    if m.phase != IDLE:
        return (m.phase, m.pos)
    links = regs.link[u]
    deg = len(links)
    if deg == 0:
        return None
    if guard_R0_holds(links):
        return (R0_READ, 0)
    img = regs.img[u]
    glinks = g.links[u]
    mpos = g.mirror_pos[u]
    for k in range(deg):
        i = (m.cursor + k) % deg
        if img[i] != regs.link[glinks[i].neighbor][mpos[i]]:
            return (RA_IMG, i)
    return None


def act(g: AnonymousGraph, regs: RegisterFile, m: StepMachine, u: int, plan) -> tuple[StepMachine, list[dict]]:
    """Perform one atomic action of ``u``: internal bookkeeping ending in a
    single register access.  Returns the new machine and the writes made."""
    phase, pos = plan
    deg = len(regs.link[u])
    writes = []
    if phase == R0_READ:
        scratch = (() if m.phase == IDLE else m.scratch) + (regs.link[u][pos],)
        if pos + 1 < deg:
            m = StepMachine(R0_READ, pos + 1, scratch, m.cursor)
        elif guard_R0_holds(list(scratch)):
            m = StepMachine(R0_WRITE, 0, scratch, m.cursor)
        else:
            m = StepMachine(IDLE, 0, (), m.cursor)
    elif phase == R0_WRITE:
        old = regs.write(u, "link", u, pos, pos + 1)
        writes.append({"var": "link", "node": u, "port": g.links[u][pos].port, "old": old, "new": pos + 1})
        m = StepMachine(R0_WRITE, pos + 1, m.scratch, m.cursor) if pos + 1 < deg else StepMachine(IDLE, 0, (), m.cursor)
    elif phase == RA_IMG:
        m = StepMachine(RA_LINK, pos, (regs.img[u][pos],), m.cursor)
    elif phase == RA_LINK:
        seen = regs.link[g.links[u][pos].neighbor][g.mirror_pos[u][pos]]
        if seen == m.scratch[0]:
            m = StepMachine(IDLE, 0, (), (pos + 1) % deg)
        else:
            m = StepMachine(RA_REREAD, pos, m.scratch, m.cursor)
    elif phase == RA_REREAD:
        seen = regs.link[g.links[u][pos].neighbor][g.mirror_pos[u][pos]]
        m = StepMachine(RA_WRITE, pos, (seen,), m.cursor)
    elif phase == RA_WRITE:
        new = m.scratch[0]
        old = regs.write(u, "img", u, pos, new)
        writes.append({"var": "img", "node": u, "port": g.links[u][pos].port, "old": old, "new": new})
        m = StepMachine(IDLE, 0, (), (pos + 1) % deg)
    else:  # pragma: no cover
        raise AssertionError(f"bad phase {phase}")
    return m, writes


class LinkNameEngine:
    layer = "A2"

    def __init__(self, g: AnonymousGraph, regs: RegisterFile, machines: list[StepMachine] | None = None):
        self.g = g
        self.regs = regs
        self.machines = list(machines) if machines else [IDLE_MACHINE] * g.n
        self._plan: dict[int, tuple[int, int] | None] = {}
        self._dirty = set(range(g.n))

    def _refresh(self) -> None:
        for u in self._dirty:
            self._plan[u] = plan_for(self.g, self.regs, self.machines[u], u)
        self._dirty.clear()

    def plans(self) -> dict[int, tuple[int, int]]:
        self._refresh()
        return {u: p for u, p in self._plan.items() if p is not None}

    def label(self, u: int, plan) -> str:
        phase, pos = plan
        return f"{_LABEL[phase]}@{self.g.links[u][pos].port}"

    def enabled_map(self) -> dict[int, tuple[str]]:
        self._refresh()
        return {u: (self.label(u, p),) for u, p in sorted(self._plan.items()) if p is not None}

    def is_stable(self) -> bool:
        return not self.enabled_map()

    @staticmethod
    def weigh(u: int, action: str) -> int:
        return 1 if ".write" in action else 0

    def step(self, selection) -> tuple[list[dict], list[dict]]:
        """One transition. Selected nodes act in ascending node order, which
        serializes simultaneous accesses to the same register."""
        self._refresh()
        nodes = [u for u, _ in selection]
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"selection schedules a node twice: {selection}")
        plans = []
        for u, action in sorted(selection):
            plan = self._plan.get(u)
            if plan is None or self.label(u, plan) != action:
                raise ValueError(f"action {action!r} is not enabled at node {u}")
            plans.append((u, plan))
        changes = []
        for u, plan in plans:
            self.machines[u], writes = act(self.g, self.regs, self.machines[u], u, plan)
            self._dirty.add(u)
            for w in writes:
                if w["var"] == "link":
                    # only the neighbor across this port reads the register
                    self._dirty.add(self.g.link(u, w["port"]).neighbor)
            changes.extend(writes)
        return [], changes

    def freeze(self) -> tuple:
        return (self.regs.freeze(), tuple(self.machines))

    def restore(self, frozen: tuple) -> None:
        regs, machines = frozen
        self.regs = RegisterFile.thaw(regs)
        self.machines = list(machines)
        self._plan = {}
        self._dirty = set(range(self.g.n))
