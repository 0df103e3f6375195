from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .daemon import DaemonPolicy
from .trace import TraceEvent


@dataclass
class RunResult:
    converged: bool
    moves: int
    transitions: int


def drive(engine, policy: DaemonPolicy, max_moves: int, events: list[TraceEvent],
          potential: Callable[[], tuple[int, int]] | None = None, layer: str | None = None) -> RunResult:
    """Run ``engine`` under ``policy`` until silent or ``max_moves`` is reached.

    Events are appended to ``events`` with globally increasing step indices.
    The cap is tested between transitions, so a wide final transition may
    carry the count past it.
    """
    layer = layer or engine.layer
    moves = transitions = 0
    while True:
        enabled = engine.enabled_map()
        if not enabled:
            return RunResult(True, moves, transitions)
        if moves >= max_moves:
            return RunResult(False, moves, transitions)
        selection = policy.select(enabled, engine.weigh)
        draws, changes = engine.step(selection)
        events.append(TraceEvent(
            step=len(events),
            layer=layer,
            selection=selection,
            draws=draws,
            changes=changes,
            potential=potential() if potential else None,
        ))
        moves += len(selection)
        transitions += 1
