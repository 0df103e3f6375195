"""Distributed daemons: each transition picks a nonempty set of enabled
actions, at most one per node.

An enabled map is ``{node: (action, ...)}`` with actions listed in the
engine's fixed priority order; nodes with nothing enabled are absent.
"""

from __future__ import annotations

import random
from typing import Callable, Mapping, Sequence

Action = str
Selection = list[tuple[int, Action]]
EnabledMap = Mapping[int, Sequence[Action]]
# per-node penalty used by the adversary: 0 = scheduling this node makes no
# progress, higher = more progress
Weigher = Callable[[int, Action], int]

POLICY_KINDS = ("synchronous", "random_subset", "random_sequential", "adversarial_greedy", "replay")
ALIASES = {
    "sync": "synchronous",
    "subset": "random_subset",
    "seq": "random_sequential",
    "adversarial": "adversarial_greedy",
}


class ReplayError(RuntimeError):
    pass


class DaemonPolicy:
    kind = "abstract"

    def __init__(self, rng: random.Random | None = None) -> None:
        self.rng = rng or random.Random(0)

    def select(self, enabled: EnabledMap, weigh: Weigher | None = None) -> Selection:
        """Return the scheduled ``(node, action)`` pairs, sorted by node.

        An empty ``enabled`` map yields an empty list: the configuration is
        stable.
        """
        if not enabled:
            return []
        chosen = self._choose(sorted(enabled), enabled, weigh)
        assert chosen, "daemon must guarantee global progress"
        return [(u, enabled[u][0]) for u in sorted(chosen)]

    def _choose(self, nodes: list[int], enabled: EnabledMap, weigh: Weigher | None) -> list[int]:
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


class Synchronous(DaemonPolicy):
    kind = "synchronous"

    def _choose(self, nodes, enabled, weigh):
        return nodes


class RandomSequential(DaemonPolicy):
    kind = "random_sequential"

    def _choose(self, nodes, enabled, weigh):
        return [nodes[self.rng.randrange(len(nodes))]]


class RandomSubset(DaemonPolicy):
    kind = "random_subset"

    def _choose(self, nodes, enabled, weigh):
        rng = self.rng
        while True:
            picked = [u for u in nodes if rng.random() < 0.5]
            if picked:
                return picked


class AdversarialGreedy(DaemonPolicy):
    """Samples candidate subsets and schedules the one that makes the least
    progress.

    Score, lower is worse for the algorithm: number of selected nodes with
    positive weight, then their summed weight, then more moves preferred.
    """

    kind = "adversarial_greedy"

    def __init__(self, rng: random.Random | None = None, samples: int = 32) -> None:
        super().__init__(rng)
        self.samples = samples

    def _choose(self, nodes, enabled, weigh):
        if weigh is None:
            weights = {u: 0 for u in nodes}
        else:
            weights = {u: weigh(u, enabled[u][0]) for u in nodes}
        rng = self.rng
        idle = [u for u in nodes if weights[u] == 0]
        lightest = min(nodes, key=lambda u: (weights[u], u))
        candidates = []
        if idle:
            candidates.append(idle)
        candidates.append([lightest])
        while len(candidates) < self.samples:
            q = rng.random()
            pick = [u for u in nodes if rng.random() < q]
            if pick:
                candidates.append(pick)

        def score(c):
            busy = [weights[u] for u in c if weights[u] > 0]
            return (len(busy), sum(busy), -len(c))

        return min(candidates, key=score)

    def describe(self) -> str:
        return f"{self.kind}(samples={self.samples})"


class Replay(DaemonPolicy):
    """Re-issues a recorded selection sequence, checking it is still legal."""

    kind = "replay"

    def __init__(self, selections: Sequence[Sequence[tuple[int, Action]]]) -> None:
        super().__init__(None)
        self.selections = [[(int(u), a) for u, a in s] for s in selections]
        self.cursor = 0

    def select(self, enabled, weigh=None):
        if not enabled:
            return []
        if self.cursor >= len(self.selections):
            raise ReplayError(f"replay exhausted after {self.cursor} transitions")
        sel = self.selections[self.cursor]
        nodes = [u for u, _ in sel]
        if not sel or len(set(nodes)) != len(nodes):
            raise ReplayError(f"recorded selection {self.cursor} is empty or repeats a node")
        for u, a in sel:
            if a not in enabled.get(u, ()):
                raise ReplayError(
                    f"recorded selection {self.cursor}: action {a!r} not enabled at node {u}"
                )
        self.cursor += 1
        return sorted(sel)


def make_policy(kind: str, rng: random.Random | None = None, *, samples: int = 32,
                selections=None) -> DaemonPolicy:
    kind = ALIASES.get(kind, kind)
    if kind == "synchronous":
        return Synchronous(rng)
    if kind == "random_subset":
        return RandomSubset(rng)
    if kind == "random_sequential":
        return RandomSequential(rng)
    if kind == "adversarial_greedy":
        return AdversarialGreedy(rng, samples)
    if kind == "replay":
        if selections is None:
            raise ValueError("replay policy needs a recorded selection sequence")
        return Replay(selections)
    raise ValueError(f"unknown daemon policy {kind!r}")
