"""Scene sequencing: tableaux, parcours, and narrative moments.

The scene graph advances by authored defaults unless the spectator picks
a decor element (which always wins) or bifurcates to another tableau.
Transitions between two tableaux may insert a parcours scene by a seeded
coin flip, preferring the least-visited one.  Session memory counts every
visit and persists across runs, so defaults drift toward what has been
seen least.
"""

from __future__ import annotations

import json
import os
import random
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

MEMORY_SCHEMA_VERSION = 1


class SceneKind(Enum):
    TABLEAU = "tableau"
    PARCOURS = "parcours"
    RECIT_MOMENT = "recit_moment"


@dataclass(frozen=True)
class DecorEdge:
    decor_id: str
    target: str


@dataclass(frozen=True)
class SceneNode:
    """One scene. ``default_next`` lists equally ranked successors in
    authored order; empty means the node is terminal."""

    id: str
    kind: SceneKind
    payload: str | None = None
    decor_edges: tuple[DecorEdge, ...] = ()
    default_next: tuple[str, ...] = ()
    duration_ticks: int = 600

    def __post_init__(self) -> None:
        if self.duration_ticks < 1:
            raise ValueError("duration_ticks must be at least 1")


@dataclass
class SceneGraph:
    nodes: dict[str, SceneNode]
    start: str
    parcours_insert_p: float = 0.5

    def __post_init__(self) -> None:
        if self.start not in self.nodes:
            raise ValueError(f"start node {self.start!r} not in graph")
        if not 0.0 <= self.parcours_insert_p <= 1.0:
            raise ValueError("parcours_insert_p must lie in [0, 1]")
        for node in self.nodes.values():
            for nxt in node.default_next:
                if nxt not in self.nodes:
                    raise ValueError(
                        f"node {node.id!r}: default_next {nxt!r} not in graph"
                    )
            seen_decors = set()
            for edge in node.decor_edges:
                if edge.target not in self.nodes:
                    raise ValueError(
                        f"node {node.id!r}: decor target {edge.target!r} not in graph"
                    )
                if self.nodes[edge.target].kind is not SceneKind.RECIT_MOMENT:
                    raise ValueError(
                        f"node {node.id!r}: decor edge {edge.decor_id!r} must "
                        f"lead to a récit moment"
                    )
                if edge.decor_id in seen_decors:
                    raise ValueError(
                        f"node {node.id!r}: duplicate decor id {edge.decor_id!r}"
                    )
                seen_decors.add(edge.decor_id)

    def parcours_nodes(self) -> list[SceneNode]:
        return sorted(
            (n for n in self.nodes.values() if n.kind is SceneKind.PARCOURS),
            key=lambda n: n.id,
        )


class UnknownDecorError(KeyError):
    """Raised when a decor choice names no edge on the current node."""


@dataclass
class SessionMemory:
    """Visit counters, history, and the sequencing RNG.

    The RNG is reconstructed from (seed, draw_count) on load, so a
    restored memory continues the exact random sequence it left off.
    """

    seed: int
    visit_counts: dict[str, int] = field(default_factory=dict)
    history: list[str] = field(default_factory=list)
    draw_count: int = 0

    def __post_init__(self) -> None:
        self._rng = random.Random(self.seed)
        for _ in range(self.draw_count):
            self._rng.random()

    def record_visit(self, node_id: str) -> None:
        self.visit_counts[node_id] = self.visit_counts.get(node_id, 0) + 1
        self.history.append(node_id)

    def visits(self, node_id: str) -> int:
        return self.visit_counts.get(node_id, 0)

    def draw(self) -> float:
        self.draw_count += 1
        return self._rng.random()

    def to_obj(self) -> dict:
        return {
            "schema_version": MEMORY_SCHEMA_VERSION,
            "seed": self.seed,
            "draw_count": self.draw_count,
            "visit_counts": dict(sorted(self.visit_counts.items())),
            "history": list(self.history),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "SessionMemory":
        if obj.get("schema_version") != MEMORY_SCHEMA_VERSION:
            raise ValueError(
                f"unsupported memory schema version {obj.get('schema_version')!r}"
            )
        mem = cls(seed=int(obj["seed"]), draw_count=int(obj["draw_count"]))
        mem.visit_counts = {str(k): int(v) for k, v in obj["visit_counts"].items()}
        mem.history = [str(x) for x in obj["history"]]
        counted: dict[str, int] = {}
        for node_id in mem.history:
            counted[node_id] = counted.get(node_id, 0) + 1
        if counted != mem.visit_counts:
            raise ValueError("memory visit counts inconsistent with history")
        return mem

    def save(self, path: str | Path) -> None:
        """Atomic write: temp file in the same directory, then rename."""
        path = Path(path)
        payload = json.dumps(self.to_obj(), sort_keys=True, indent=2) + "\n"
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str | Path) -> "SessionMemory":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_obj(json.load(fh))


def apply_memory_bias(candidates: Sequence[str], mem: SessionMemory) -> str:
    """Least-visited candidate; ties keep authored order."""
    if not candidates:
        raise ValueError("no candidates to choose from")
    best = candidates[0]
    for cand in candidates[1:]:
        if mem.visits(cand) < mem.visits(best):
            best = cand
    return best


def advance(
    graph: SceneGraph,
    current: SceneNode,
    choice: str | None,
    mem: SessionMemory,
) -> SceneNode:
    """Next scene: a decor choice wins outright, otherwise the (memory
    biased) authored default.  A terminal node without a choice stays put.

    Raises :class:`UnknownDecorError` for a choice with no matching edge;
    the caller records it as a rejected event and state is unchanged.
    """
    if choice is not None:
        for edge in current.decor_edges:
            if edge.decor_id == choice:
                nxt = graph.nodes[edge.target]
                mem.record_visit(nxt.id)
                return nxt
        raise UnknownDecorError(choice)
    if not current.default_next:
        return current
    nxt = graph.nodes[apply_memory_bias(current.default_next, mem)]
    mem.record_visit(nxt.id)
    return nxt


def maybe_insert_parcours(
    graph: SceneGraph,
    from_node: SceneNode,
    to_node: SceneNode,
    mem: SessionMemory,
    p: float | None = None,
) -> SceneNode | None:
    """Seeded coin flip for a parcours between two tableaux.

    Draws exactly one random number per call whatever the outcome.  On
    insertion the least-visited parcours wins, ties broken by id order,
    and its visit is recorded.
    """
    if from_node.kind is not SceneKind.TABLEAU or to_node.kind is not SceneKind.TABLEAU:
        raise ValueError("parcours insertion applies to tableau-to-tableau transitions")
    if p is None:
        p = graph.parcours_insert_p
    u = mem.draw()
    candidates = graph.parcours_nodes()
    if u >= p or not candidates:
        return None
    chosen = candidates[0]
    for cand in candidates[1:]:
        if mem.visits(cand.id) < mem.visits(chosen.id):
            chosen = cand
    mem.record_visit(chosen.id)
    return chosen
