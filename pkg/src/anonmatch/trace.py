"""Execution traces: one JSON record per line.

Line 1 is a header (graph, algorithm, seed, policy, initial state), then
one record per transition, then an outcome record.  Records are written
with sorted keys and no whitespace so equal runs give equal bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator


class TraceFormatError(ValueError):
    pass


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class TraceEvent:
    step: int
    layer: str
    selection: list[tuple[int, str]]
    draws: list[dict] = field(default_factory=list)
    changes: list[dict] = field(default_factory=list)
    potential: tuple[int, int] | None = None

    @property
    def moves(self) -> int:
        return len(self.selection)

    def to_record(self) -> dict:
        return {
            "step": self.step,
            "layer": self.layer,
            "selection": [[u, a] for u, a in self.selection],
            "draws": self.draws,
            "changes": self.changes,
            "potential": None if self.potential is None else list(self.potential),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TraceEvent":
        try:
            pot = rec.get("potential")
            return cls(
                step=int(rec["step"]),
                layer=str(rec["layer"]),
                selection=[(int(u), str(a)) for u, a in rec["selection"]],
                draws=list(rec.get("draws", [])),
                changes=list(rec.get("changes", [])),
                potential=None if pot is None else (int(pot[0]), int(pot[1])),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise TraceFormatError(f"malformed trace event {rec!r}: {exc}") from None


@dataclass
class ExecutionTrace:
    header: dict
    events: list[TraceEvent] = field(default_factory=list)
    outcome: dict = field(default_factory=dict)

    def layer(self, name: str) -> list[TraceEvent]:
        return [e for e in self.events if e.layer == name]

    def selections(self, layer: str | None = None) -> list[list[tuple[int, str]]]:
        return [list(e.selection) for e in self.events if layer is None or e.layer == layer]

    def total_moves(self, layer: str | None = None) -> int:
        return sum(e.moves for e in self.events if layer is None or e.layer == layer)

    def lines(self) -> Iterator[str]:
        yield _dump({"kind": "header", **self.header})
        for e in self.events:
            yield _dump({"kind": "event", **e.to_record()})
        yield _dump({"kind": "outcome", **self.outcome})

    def dumps(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "ExecutionTrace":
        header: dict | None = None
        events: list[TraceEvent] = []
        outcome: dict = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"line {lineno}: {exc}") from None
            kind = rec.pop("kind", None)
            if kind == "header":
                header = rec
            elif kind == "event":
                events.append(TraceEvent.from_record(rec))
            elif kind == "outcome":
                outcome = rec
            else:
                raise TraceFormatError(f"line {lineno}: unknown record kind {kind!r}")
        if header is None:
            raise TraceFormatError("trace has no header record")
        return cls(header, events, outcome)

    @classmethod
    def load(cls, path: str | Path) -> "ExecutionTrace":
        return cls.loads(Path(path).read_text())
