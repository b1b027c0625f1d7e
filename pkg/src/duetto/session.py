"""Fixed-timestep session loop, event application, traces and replay.

Tick order is fixed: due user events in list order, then character
physics, then the listener ride, then lattice drift and phrase emission,
then scene direction, then (at the snapshot rate) a snapshot.  Ticks are
the only time base; wall clock never enters the engine, so identical
inputs give byte-identical traces.

A trace file is one canonical-JSON header line (schema version, scenario
hash and full scenario, seed, snapshot rate, tick horizon, event script)
followed by one canonical-JSON snapshot per line.  Replay re-runs the
embedded scenario and script and byte-compares every line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

from .affect import (
    CharacterId,
    CharacterState,
    World,
    drag_character,
    net_external_force,
    relaunch,
    step,
)
from .director import SceneKind, SceneNode, SessionMemory, UnknownDecorError, advance
from .lattice import PhraseEvent, emit_phrase, select_variant, update_lattice
from .scenario import Scenario, canonical_json
from .spatial import ListenerMode, ListenerState, mix_frame, ride_step

TRACE_SCHEMA_VERSION = 1


class EventError(ValueError):
    """A message that does not parse as a well-formed user event."""


class TraceError(ValueError):
    pass


class SchemaMismatchError(TraceError):
    pass


class EventKind(Enum):
    RELAUNCH_CHARACTER = "relaunch_character"
    DRAG_CHARACTER = "drag_character"
    SET_LAMBDA = "set_lambda"
    CHOOSE_DECOR = "choose_decor"
    MOVE_LISTENER = "move_listener"
    ENTER_RIDE = "enter_ride"
    BIFURCATE_TABLEAU = "bifurcate_tableau"


@dataclass(frozen=True)
class UserEvent:
    tick: int
    kind: EventKind
    payload: Mapping[str, Any]


def _finite_seq(value: Any, n: int, what: str) -> tuple[float, ...]:
    try:
        coords = tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise EventError(f"{what} must be a sequence of {n} numbers") from exc
    if len(coords) != n or not all(math.isfinite(v) for v in coords):
        raise EventError(f"{what} must be {n} finite numbers")
    return coords


def event_from_obj(obj: Any, default_tick: int | None = None) -> UserEvent:
    """Parse and shape-validate a wire/script event object.

    ``default_tick`` stamps events that arrive without a tick (live mode);
    script events must carry their own.
    """
    if not isinstance(obj, dict):
        raise EventError("event must be a JSON object")
    try:
        kind = EventKind(obj.get("kind"))
    except ValueError:
        raise EventError(f"unknown event kind {obj.get('kind')!r}") from None
    tick = obj.get("tick", default_tick)
    if tick is None:
        raise EventError("event is missing its tick")
    if not isinstance(tick, int) or isinstance(tick, bool) or tick < 0:
        raise EventError(f"tick must be a non-negative integer, got {tick!r}")

    payload: dict[str, Any]
    if kind is EventKind.RELAUNCH_CHARACTER:
        character = obj.get("character")
        if character not in (c.value for c in CharacterId):
            raise EventError(f"unknown character {character!r}")
        payload = {"character": character}
    elif kind is EventKind.DRAG_CHARACTER:
        character = obj.get("character")
        if character not in (c.value for c in CharacterId):
            raise EventError(f"unknown character {character!r}")
        pos = _finite_seq(obj.get("position"), 2, "position")
        payload = {"character": character, "position": list(pos)}
    elif kind is EventKind.SET_LAMBDA:
        value = obj.get("value")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise EventError("lambda value must be a number")
        value = float(value)
        if not (math.isfinite(value) and 0.0 <= value <= 1.0):
            raise EventError("lambda value must lie in [0, 1]")
        payload = {"value": value}
    elif kind is EventKind.CHOOSE_DECOR:
        decor = obj.get("decor")
        if not isinstance(decor, str) or not decor:
            raise EventError("decor must be a non-empty string")
        payload = {"decor": decor}
    elif kind is EventKind.MOVE_LISTENER:
        pos = _finite_seq(obj.get("position"), 3, "position")
        payload = {"position": list(pos)}
    elif kind is EventKind.ENTER_RIDE:
        object_id = obj.get("object")
        if not isinstance(object_id, str) or not object_id:
            raise EventError("object must be a non-empty string")
        payload = {"object": object_id}
    else:  # BIFURCATE_TABLEAU
        target = obj.get("target")
        if not isinstance(target, str) or not target:
            raise EventError("target must be a non-empty string")
        payload = {"target": target}
    return UserEvent(tick=tick, kind=kind, payload=payload)


def event_to_obj(ev: UserEvent) -> dict:
    return {"tick": ev.tick, "kind": ev.kind.value, **ev.payload}


@dataclass(frozen=True)
class RejectedRaw:
    """A script/wire entry that failed shape validation."""

    tick: int
    obj: Any
    reason: str


TickEntry = UserEvent | RejectedRaw


class SessionEngine:
    """Owns all mutable session state; driven one tick at a time.

    Exactly one thread may drive the engine; everything it hands out
    (snapshot dicts, world states) is a fresh object.
    """

    def __init__(self, scenario: Scenario, snapshot_every: int | None = None):
        self.scenario = scenario
        self.snapshot_every = (
            scenario.snapshot_every if snapshot_every is None else snapshot_every
        )
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be at least 1")
        self.tick = 0
        self.lam = scenario.lam
        self.world = scenario.world
        self.memory = SessionMemory(seed=scenario.seed)
        self.node = scenario.graph.nodes[scenario.graph.start]
        self.ticks_in_scene = 0
        self.pending_after_parcours: str | None = None
        self.listener = ListenerState(position=scenario.cage.start_position)
        self._last_emit: dict[CharacterId, tuple[int, int] | None] = {
            cid: None for cid in CharacterId
        }
        self._phrases: list[PhraseEvent] = []
        self._event_records: list[dict] = []
        self.memory.record_visit(self.node.id)
        self._enter_scene(self.node)

    @property
    def next_tick(self) -> int:
        return self.tick + 1

    # -- scene transitions -------------------------------------------------

    def _enter_scene(self, node: SceneNode) -> None:
        self.node = node
        self.ticks_in_scene = 0
        if node.kind is SceneKind.RECIT_MOMENT:
            charges = self.scenario.moment_charges.get(node.id, {})
            for cid in CharacterId:
                c = self.world.character(cid)
                net = self.scenario.lattice_for(node.payload, cid)
                if cid in charges:
                    c = replace(c, affect=charges[cid])
                c = replace(
                    c, lattice_pos=net.start, lattice_index=net.start_index()
                )
                self.world = self.world.with_character(c)
                self._last_emit[cid] = None
        elif node.kind is SceneKind.PARCOURS:
            self.listener = ListenerState(position=self.scenario.cage.start_position)

    # -- event application -------------------------------------------------

    def _apply_event(self, ev: UserEvent) -> tuple[bool, str | None, set[CharacterId]]:
        relaunched: set[CharacterId] = set()
        in_recit = self.node.kind is SceneKind.RECIT_MOMENT
        in_parcours = self.node.kind is SceneKind.PARCOURS
        cage = self.scenario.cage

        if ev.kind is EventKind.RELAUNCH_CHARACTER:
            if not in_recit:
                return False, "character controls only apply in a récit scene", relaunched
            cid = CharacterId(ev.payload["character"])
            self.world = self.world.with_character(relaunch(self.world.character(cid)))
            relaunched.add(cid)
            return True, None, relaunched

        if ev.kind is EventKind.DRAG_CHARACTER:
            if not in_recit:
                return False, "character controls only apply in a récit scene", relaunched
            cid = CharacterId(ev.payload["character"])
            pos = tuple(ev.payload["position"])
            self.world = self.world.with_character(
                drag_character(
                    self.world.character(cid), pos, self.scenario.sim.stage_rect
                )
            )
            return True, None, relaunched

        if ev.kind is EventKind.SET_LAMBDA:
            self.lam = ev.payload["value"]
            return True, None, relaunched

        if ev.kind is EventKind.CHOOSE_DECOR:
            if not in_recit:
                return False, "decor choices only apply in a récit scene", relaunched
            try:
                nxt = advance(
                    self.scenario.graph, self.node, ev.payload["decor"], self.memory
                )
            except UnknownDecorError:
                return False, f"unknown decor element {ev.payload['decor']!r}", relaunched
            self._enter_scene(nxt)
            return True, None, relaunched

        if ev.kind is EventKind.MOVE_LISTENER:
            if not in_parcours:
                return False, "listener controls only apply in a parcours scene", relaunched
            if self.listener.mode is ListenerMode.RIDING:
                return False, "listener is riding and not free to move", relaunched
            pos = tuple(ev.payload["position"])
            self.listener = ListenerState(position=cage.box.clamp(pos))
            return True, None, relaunched

        if ev.kind is EventKind.ENTER_RIDE:
            if not in_parcours:
                return False, "listener controls only apply in a parcours scene", relaunched
            if self.listener.mode is ListenerMode.RIDING:
                return False, "listener is already riding", relaunched
            obj = cage.object(ev.payload["object"])
            if obj is None:
                return False, f"unknown music object {ev.payload['object']!r}", relaunched
            if not obj.box.contains(self.listener.position):
                return False, "listener is outside the object volume", relaunched
            self.listener = ListenerState(
                position=obj.path[0],
                mode=ListenerMode.RIDING,
                ride_object=obj.id,
                path_param=0.0,
            )
            return True, None, relaunched

        # BIFURCATE_TABLEAU
        if in_parcours:
            return False, "cannot bifurcate during a parcours", relaunched
        target = self.scenario.graph.nodes.get(ev.payload["target"])
        if target is None:
            return False, f"unknown tableau {ev.payload['target']!r}", relaunched
        if target.kind is not SceneKind.TABLEAU:
            return False, f"{ev.payload['target']!r} is not a tableau", relaunched
        self.memory.record_visit(target.id)
        self._enter_scene(target)
        return True, None, relaunched

    def record_rejected(self, obj: Any, reason: str) -> None:
        self._event_records.append(
            {"event": obj, "accepted": False, "reason": reason}
        )

    # -- per-tick updates ----------------------------------------------------

    def _update_listener(self) -> None:
        if self.node.kind is not SceneKind.PARCOURS:
            return
        if self.listener.mode is not ListenerMode.RIDING:
            return
        obj = self.scenario.cage.object(self.listener.ride_object)
        melody = self.scenario.melodies[obj.melody_ref]
        self.listener = ride_step(self.listener, obj, melody, self.scenario.sim.dt)

    def _update_lattices(self, relaunched: set[CharacterId]) -> None:
        if self.node.kind is not SceneKind.RECIT_MOMENT:
            return
        sim = self.scenario.sim
        cadence = self.tick % self.scenario.phrase_every == 0
        for cid in CharacterId:
            c = self.world.character(cid)
            other = self.world.character(
                CharacterId.HOMME if cid is CharacterId.FEMME else CharacterId.FEMME
            )
            net = self.scenario.lattice_for(self.node.payload, cid)
            f_ext = net_external_force(c, other, self.world.fields, sim)
            c = update_lattice(c, f_ext, self.lam, sim.dt, self.scenario.lattice_gain, net)
            new_index = select_variant(c, net)
            changed = new_index != c.lattice_index
            c = replace(c, lattice_index=new_index)
            self.world = self.world.with_character(c)
            if changed or cid in relaunched or cadence:
                phrase = emit_phrase(c, net, self._last_emit[cid])
                self._phrases.append(phrase)
                if not phrase.silent:
                    self._last_emit[cid] = phrase.index

    def _director_check(self) -> None:
        self.ticks_in_scene += 1
        node = self.node
        if self.ticks_in_scene < node.duration_ticks:
            return
        graph = self.scenario.graph
        if node.kind is SceneKind.PARCOURS and self.pending_after_parcours is not None:
            nxt = graph.nodes[self.pending_after_parcours]
            self.pending_after_parcours = None
            self.memory.record_visit(nxt.id)
            self._enter_scene(nxt)
            return
        if not node.default_next:
            return  # authored terminal: hold the scene
        from .director import apply_memory_bias, maybe_insert_parcours

        target = graph.nodes[apply_memory_bias(node.default_next, self.memory)]
        if node.kind is SceneKind.TABLEAU and target.kind is SceneKind.TABLEAU:
            inserted = maybe_insert_parcours(graph, node, target, self.memory)
            if inserted is not None:
                self.pending_after_parcours = target.id
                self._enter_scene(inserted)
                return
        self.memory.record_visit(target.id)
        self._enter_scene(target)

    # -- the tick ------------------------------------------------------------

    def process_tick(self, entries: Sequence[TickEntry] = ()) -> dict | None:
        """Advance one tick; returns a snapshot at the snapshot rate."""
        self.tick += 1
        relaunched: set[CharacterId] = set()
        for entry in entries:
            if isinstance(entry, RejectedRaw):
                self.record_rejected(entry.obj, entry.reason)
                continue
            accepted, reason, hits = self._apply_event(entry)
            relaunched |= hits
            self._event_records.append(
                {"event": event_to_obj(entry), "accepted": accepted, "reason": reason}
            )
        self.world = step(self.world, self.scenario.sim)
        self._update_listener()
        self._update_lattices(relaunched)
        self._director_check()
        if self.tick % self.snapshot_every == 0:
            return self.snapshot_obj()
        return None

    # -- snapshots -------------------------------------------------------------

    def _character_obj(self, c: CharacterState) -> dict:
        return {
            "position": list(c.position),
            "velocity": list(c.velocity),
            "intensity": c.vocal_intensity,
            "lattice_pos": list(c.lattice_pos),
            "lattice_index": list(c.lattice_index),
        }

    def snapshot_obj(self) -> dict:
        """State snapshot; drains phrases and event records accumulated
        since the previous snapshot."""
        mix = None
        if self.node.kind is SceneKind.PARCOURS:
            entries = mix_frame(
                self.listener,
                self.scenario.cage,
                self.scenario.melodies,
                self.tick * self.scenario.sim.dt,
            )
            mix = {
                "listener": {
                    "position": list(self.listener.position),
                    "mode": self.listener.mode.value,
                    "ride_object": self.listener.ride_object,
                    "path_param": self.listener.path_param,
                },
                "entries": [
                    {"object": e.object_id, "gain": e.gain, "beat_offset": e.beat_offset}
                    for e in entries
                ],
            }
        obj = {
            "tick": self.tick,
            "lambda": self.lam,
            "scene": {
                "node": self.node.id,
                "kind": self.node.kind.value,
                "ticks_in_scene": self.ticks_in_scene,
            },
            "characters": {
                cid.value: self._character_obj(self.world.character(cid))
                for cid in CharacterId
            },
            "mix": mix,
            "phrases": [
                {
                    "character": p.character.value,
                    "index": list(p.index),
                    "text": p.text,
                    "melody_ref": p.melody_ref,
                    "gain": p.gain,
                    "crossfade": p.crossfade,
                    "silent": p.silent,
                }
                for p in self._phrases
            ],
            "events": self._event_records,
        }
        self._phrases = []
        self._event_records = []
        return obj


@dataclass
class Trace:
    header: dict
    snapshots: list[dict]

    def to_lines(self) -> list[str]:
        return [canonical_json(self.header)] + [
            canonical_json(s) for s in self.snapshots
        ]

    def to_bytes(self) -> bytes:
        return ("\n".join(self.to_lines()) + "\n").encode("utf-8")

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())


def make_trace_header(
    scenario: Scenario, script: Sequence[Any], until_tick: int, snapshot_every: int
) -> dict:
    return {
        "schema_version": TRACE_SCHEMA_VERSION,
        "scenario_hash": scenario.hash(),
        "seed": scenario.seed,
        "snapshot_every": snapshot_every,
        "until_tick": until_tick,
        "scenario": scenario.raw,
        "script": list(script),
    }


def parse_script(script: Sequence[Any]) -> list[TickEntry]:
    """Shape-validate raw script objects; failures become rejected entries
    due at their own tick (or tick 1 when the tick itself is unreadable)."""
    entries: list[TickEntry] = []
    last_tick: int | None = None
    for obj in script:
        try:
            ev = event_from_obj(obj)
            entries.append(ev)
            tick = ev.tick
        except EventError as exc:
            raw_tick = obj.get("tick") if isinstance(obj, dict) else None
            if isinstance(raw_tick, int) and not isinstance(raw_tick, bool) and raw_tick >= 0:
                tick = raw_tick
            else:
                tick = 1
                entries.append(RejectedRaw(tick, obj, str(exc)))
                continue
            entries.append(RejectedRaw(tick, obj, str(exc)))
        if last_tick is not None and tick < last_tick:
            raise ValueError("script must be sorted by tick")
        last_tick = tick
    return entries


def _entry_tick(entry: TickEntry) -> int:
    return entry.tick


def run_session(
    scenario: Scenario,
    script: Sequence[Any],
    until_tick: int,
    snapshot_every: int | None = None,
) -> Trace:
    """Headless run: returns the full deterministic trace.

    ``script`` is a list of raw event objects (as in a script file); the
    trace always starts with the untouched initial state at tick 0 and
    always ends with a snapshot at ``until_tick``.
    """
    if until_tick < 0:
        raise ValueError("until_tick must be non-negative")
    entries = parse_script(script)
    engine = SessionEngine(scenario, snapshot_every)
    snapshots = [engine.snapshot_obj()]
    cursor = 0
    for t in range(1, until_tick + 1):
        due: list[TickEntry] = []
        while cursor < len(entries) and _entry_tick(entries[cursor]) <= t:
            due.append(entries[cursor])
            cursor += 1
        snap = engine.process_tick(due)
        if snap is not None:
            snapshots.append(snap)
        elif t == until_tick:
            snapshots.append(engine.snapshot_obj())
    header = make_trace_header(scenario, script, until_tick, engine.snapshot_every)
    return Trace(header, snapshots)


@dataclass
class ReplayReport:
    identical: bool
    first_divergence_tick: int | None
    detail: str

    @property
    def status(self) -> str:
        return "identical" if self.identical else "divergent"


def _line_tick(line: str) -> int | None:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return None
    tick = obj.get("tick") if isinstance(obj, dict) else None
    return tick if isinstance(tick, int) else None


def replay(trace_path: str | Path, snapshot_every: int | None = None) -> ReplayReport:
    """Re-run a trace's embedded scenario and script; byte-compare.

    ``snapshot_every`` other than the trace's own rate is a schema
    mismatch: the rate is part of the trace contract.
    """
    text = Path(trace_path).read_text(encoding="utf-8")
    stored = text.split("\n")
    if stored and stored[-1] == "":
        stored.pop()
    if not stored:
        raise TraceError("trace file is empty")
    try:
        header = json.loads(stored[0])
    except json.JSONDecodeError as exc:
        raise TraceError(f"trace header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict) or header.get("schema_version") != TRACE_SCHEMA_VERSION:
        raise SchemaMismatchError(
            f"trace schema version {header.get('schema_version')!r} is not "
            f"{TRACE_SCHEMA_VERSION}"
        )
    if snapshot_every is not None and snapshot_every != header.get("snapshot_every"):
        raise SchemaMismatchError(
            f"snapshot rate {snapshot_every} does not match the trace's "
            f"{header.get('snapshot_every')} (rates are part of the contract)"
        )
    from .scenario import parse_scenario, scenario_hash

    scenario = parse_scenario(header["scenario"])
    if scenario_hash(header["scenario"]) != header.get("scenario_hash"):
        return ReplayReport(False, None, "scenario hash mismatch in header")
    fresh = run_session(
        scenario, header["script"], header["until_tick"], header["snapshot_every"]
    )
    new_lines = fresh.to_lines()
    for i in range(max(len(stored), len(new_lines))):
        a = stored[i] if i < len(stored) else None
        b = new_lines[i] if i < len(new_lines) else None
        if a != b:
            tick = _line_tick(a) if a is not None else None
            if tick is None and b is not None:
                tick = _line_tick(b)
            where = f"tick {tick}" if tick is not None else f"line {i}"
            return ReplayReport(False, tick, f"divergence at {where}")
    return ReplayReport(True, None, "identical")
