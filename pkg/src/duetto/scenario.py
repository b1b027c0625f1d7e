"""Scenario files: loading, validation, canonical hashing.

A scenario JSON bundles everything one performance needs: axis kinds and
coupling constants, the two characters' initial states, external fields,
per-moment affect charges, melodies, variant lattices, the cage, and the
scene graph.  Parsing validates every load-time invariant (axis
orthogonality, graph closure, monody, containment) and raises
:class:`ScenarioError` naming the offending path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .affect import (
    AffectVector,
    Axis,
    AxisKind,
    CharacterId,
    CharacterState,
    Field,
    SimParams,
    StageRect,
    World,
)
from .director import DecorEdge, SceneGraph, SceneKind, SceneNode
from .lattice import (
    Cell,
    LatticeNetwork,
    MusicalAxis,
    SemanticAxis,
    cross_product_grid,
)
from .melody import Melody, melody_from_obj, melody_to_obj
from .spatial import Box, Cage, MusicObject

SCENARIO_SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    pass


def canonical_json(obj: Any) -> str:
    """Stable serialization: sorted keys, no whitespace, repr floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def scenario_hash(raw: dict) -> str:
    return hashlib.sha256(canonical_json(raw).encode("utf-8")).hexdigest()


@dataclass
class Scenario:
    """Parsed scenario; ``raw`` keeps the source dict for hashing/replay."""

    raw: dict
    seed: int
    lam: float
    sim: SimParams
    lattice_gain: float
    snapshot_every: int
    phrase_every: int
    world: World
    melodies: dict[str, Melody]
    lattices: dict[str, dict[CharacterId, LatticeNetwork]]
    cage: Cage
    graph: SceneGraph
    moment_charges: dict[str, dict[CharacterId, AffectVector]] = field(
        default_factory=dict
    )

    def hash(self) -> str:
        return scenario_hash(self.raw)

    def lattice_for(self, payload: str, cid: CharacterId) -> LatticeNetwork:
        return self.lattices[payload][cid]


def _ctx(path: str, exc: Exception) -> ScenarioError:
    return ScenarioError(f"{path}: {exc}")


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise ScenarioError(f"{path}: missing required key {key!r}")
    return obj[key]


def _vec2(value: Any, path: str) -> tuple[float, float]:
    try:
        x, y = value
        return (float(x), float(y))
    except (TypeError, ValueError) as exc:
        raise _ctx(path, exc) from exc


def _vec3(value: Any, path: str) -> tuple[float, float, float]:
    try:
        x, y, z = value
        return (float(x), float(y), float(z))
    except (TypeError, ValueError) as exc:
        raise _ctx(path, exc) from exc


def _vec4(value: Any, path: str) -> tuple[float, float, float, float]:
    try:
        a, b, c, d = value
        return (float(a), float(b), float(c), float(d))
    except (TypeError, ValueError) as exc:
        raise _ctx(path, exc) from exc


def _parse_axis_kinds(value: Any, path: str) -> tuple[AxisKind, ...]:
    try:
        kinds = tuple(AxisKind(k) for k in value)
    except ValueError as exc:
        raise _ctx(path, exc) from exc
    if len(kinds) != len(Axis):
        raise ScenarioError(f"{path}: need {len(Axis)} axis kinds")
    return kinds


def _parse_sim(obj: dict, path: str) -> tuple[SimParams, float]:
    rect = _require(obj, "stage_rect", path)
    try:
        stage = StageRect(*(float(v) for v in rect))
        params = SimParams(
            dt=float(obj.get("dt", 1.0 / 60.0)),
            k=_vec4(_require(obj, "k", path), f"{path}.k"),
            softening_eps=float(_require(obj, "softening_eps", path)),
            decay_rate=float(_require(obj, "decay_rate", path)),
            damping=float(obj.get("damping", 0.5)),
            stage_rect=stage,
            axis_kinds=_parse_axis_kinds(
                obj.get("axis_kinds", [k.value for k in SimParams().axis_kinds]),
                f"{path}.axis_kinds",
            ),
        )
    except ValueError as exc:
        raise _ctx(path, exc) from exc
    gain = float(obj.get("lattice_gain", 1.0))
    if gain < 0.0:
        raise ScenarioError(f"{path}.lattice_gain: must be non-negative")
    return params, gain


def _parse_character(
    cid: CharacterId, obj: dict, sim: SimParams, path: str
) -> CharacterState:
    try:
        affect = AffectVector(_vec4(_require(obj, "affect", path), f"{path}.affect"))
        affect.validate_kinds(sim.axis_kinds)
        state = CharacterState(
            id=cid,
            position=_vec2(_require(obj, "position", path), f"{path}.position"),
            velocity=_vec2(obj.get("velocity", (0.0, 0.0)), f"{path}.velocity"),
            inertial_mass=float(obj.get("inertial_mass", 1.0)),
            affect=affect,
            vocal_intensity=float(obj.get("vocal_intensity", 1.0)),
        )
    except ValueError as exc:
        raise _ctx(path, exc) from exc
    if not sim.stage_rect.contains(state.position):
        raise ScenarioError(f"{path}.position: outside the stage rectangle")
    return state


def _parse_lattice(obj: dict, melodies: dict[str, Melody], path: str) -> LatticeNetwork:
    def parse_semantic(axis_obj: dict, axis_path: str) -> SemanticAxis:
        try:
            return SemanticAxis(
                label=str(axis_obj.get("label", "")),
                direction=_vec2(_require(axis_obj, "direction", axis_path), f"{axis_path}.direction"),
                grip=float(_require(axis_obj, "grip", axis_path)),
                variants=tuple(str(v) for v in _require(axis_obj, "variants", axis_path)),
            )
        except ValueError as exc:
            raise _ctx(axis_path, exc) from exc

    def parse_musical(axis_obj: dict, axis_path: str) -> MusicalAxis:
        try:
            return MusicalAxis(
                label=str(axis_obj.get("label", "")),
                direction=_vec2(_require(axis_obj, "direction", axis_path), f"{axis_path}.direction"),
                grip=float(_require(axis_obj, "grip", axis_path)),
                variants=tuple(str(v) for v in _require(axis_obj, "variants", axis_path)),
            )
        except ValueError as exc:
            raise _ctx(axis_path, exc) from exc

    semantic = parse_semantic(_require(obj, "semantic", path), f"{path}.semantic")
    musical = parse_musical(_require(obj, "musical", path), f"{path}.musical")
    for ref in musical.variants:
        if ref not in melodies:
            raise ScenarioError(f"{path}.musical.variants: unknown melody {ref!r}")
    if "cells" in obj:
        cells = tuple(
            tuple(
                Cell(
                    text=str(_require(c, "text", f"{path}.cells[{i}][{j}]")),
                    melody_ref=str(_require(c, "melody_ref", f"{path}.cells[{i}][{j}]")),
                    passion_rank=int(_require(c, "passion_rank", f"{path}.cells[{i}][{j}]")),
                )
                for j, c in enumerate(row)
            )
            for i, row in enumerate(obj["cells"])
        )
        for row in cells:
            for c in row:
                if c.melody_ref not in melodies:
                    raise ScenarioError(f"{path}.cells: unknown melody {c.melody_ref!r}")
    else:
        cells = cross_product_grid(semantic, musical)
    try:
        return LatticeNetwork(
            semantic=semantic,
            musical=musical,
            cells=cells,
            hysteresis_margin=float(obj.get("hysteresis_margin", 0.1)),
            start=_vec2(obj.get("start", (0.0, 0.0)), f"{path}.start"),
        )
    except ValueError as exc:
        raise _ctx(path, exc) from exc


def _parse_cage(obj: dict, melodies: dict[str, Melody], path: str) -> Cage:
    def parse_box(value: Any, box_path: str) -> Box:
        try:
            lo, hi = value
            return Box(_vec3(lo, box_path), _vec3(hi, box_path))
        except ValueError as exc:
            raise _ctx(box_path, exc) from exc

    objects = []
    for n, o in enumerate(_require(obj, "objects", path)):
        obj_path = f"{path}.objects[{n}]"
        melody_ref = str(_require(o, "melody_ref", obj_path))
        if melody_ref not in melodies:
            raise ScenarioError(f"{obj_path}.melody_ref: unknown melody {melody_ref!r}")
        try:
            objects.append(
                MusicObject(
                    id=str(_require(o, "id", obj_path)),
                    box=parse_box(_require(o, "box", obj_path), f"{obj_path}.box"),
                    melody_ref=melody_ref,
                    path=tuple(_vec3(p, f"{obj_path}.path") for p in _require(o, "path", obj_path)),
                    base_gain=float(o.get("base_gain", 1.0)),
                    tempo_bpm=float(o.get("tempo_bpm", 60.0)),
                )
            )
        except ValueError as exc:
            raise _ctx(obj_path, exc) from exc
    try:
        return Cage(
            box=parse_box(_require(obj, "box", path), f"{path}.box"),
            objects=tuple(objects),
            start_position=_vec3(_require(obj, "start_position", path), f"{path}.start_position"),
            r_ref=float(obj.get("r_ref", 2.0)),
        )
    except ValueError as exc:
        raise _ctx(path, exc) from exc


def _parse_scenes(
    obj: dict,
    lattices: dict[str, dict[CharacterId, LatticeNetwork]],
    sim: SimParams,
    path: str,
) -> tuple[SceneGraph, dict[str, dict[CharacterId, AffectVector]]]:
    nodes: dict[str, SceneNode] = {}
    charges: dict[str, dict[CharacterId, AffectVector]] = {}
    for n, node_obj in enumerate(_require(obj, "nodes", path)):
        node_path = f"{path}.nodes[{n}]"
        node_id = str(_require(node_obj, "id", node_path))
        try:
            kind = SceneKind(_require(node_obj, "kind", node_path))
        except ValueError as exc:
            raise _ctx(f"{node_path}.kind", exc) from exc
        default_next = node_obj.get("default_next", [])
        if isinstance(default_next, str):
            default_next = [default_next]
        try:
            node = SceneNode(
                id=node_id,
                kind=kind,
                payload=node_obj.get("payload"),
                decor_edges=tuple(
                    DecorEdge(str(e["decor"]), str(e["target"]))
                    for e in node_obj.get("decor_edges", [])
                ),
                default_next=tuple(str(t) for t in default_next),
                duration_ticks=int(node_obj.get("duration_ticks", 600)),
            )
        except (KeyError, ValueError) as exc:
            raise _ctx(node_path, exc) from exc
        if node.id in nodes:
            raise ScenarioError(f"{node_path}: duplicate node id {node.id!r}")
        if kind is SceneKind.RECIT_MOMENT:
            if node.payload is None or node.payload not in lattices:
                raise ScenarioError(
                    f"{node_path}.payload: récit moment needs a known lattice id"
                )
            if "charges" in node_obj:
                per_char: dict[CharacterId, AffectVector] = {}
                for cid in CharacterId:
                    if cid.value in node_obj["charges"]:
                        vec = AffectVector(
                            _vec4(
                                node_obj["charges"][cid.value],
                                f"{node_path}.charges.{cid.value}",
                            )
                        )
                        try:
                            vec.validate_kinds(sim.axis_kinds)
                        except ValueError as exc:
                            raise _ctx(f"{node_path}.charges.{cid.value}", exc) from exc
                        per_char[cid] = vec
                charges[node.id] = per_char
        nodes[node.id] = node
    try:
        graph = SceneGraph(
            nodes=nodes,
            start=str(_require(obj, "start", path)),
            parcours_insert_p=float(obj.get("parcours_insert_p", 0.5)),
        )
    except ValueError as exc:
        raise _ctx(path, exc) from exc
    return graph, charges


def parse_scenario(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = raw.get("schema_version")
    if version != SCENARIO_SCHEMA_VERSION:
        raise ScenarioError(
            f"schema_version: expected {SCENARIO_SCHEMA_VERSION}, got {version!r}"
        )
    sim, lattice_gain = _parse_sim(_require(raw, "sim", "scenario"), "sim")

    melodies: dict[str, Melody] = {}
    for mid, mobj in _require(raw, "melodies", "scenario").items():
        try:
            melodies[str(mid)] = melody_from_obj(mobj)
        except ValueError as exc:
            raise _ctx(f"melodies.{mid}", exc) from exc

    chars_obj = _require(raw, "characters", "scenario")
    femme = _parse_character(
        CharacterId.FEMME, _require(chars_obj, "femme", "characters"), sim, "characters.femme"
    )
    homme = _parse_character(
        CharacterId.HOMME, _require(chars_obj, "homme", "characters"), sim, "characters.homme"
    )

    fields = []
    for n, fobj in enumerate(raw.get("fields", [])):
        fpath = f"fields[{n}]"
        try:
            fields.append(
                Field(
                    g=_vec4(_require(fobj, "g", fpath), f"{fpath}.g"),
                    direction=_vec2(_require(fobj, "direction", fpath), f"{fpath}.direction"),
                )
            )
        except ValueError as exc:
            raise _ctx(fpath, exc) from exc

    lattices: dict[str, dict[CharacterId, LatticeNetwork]] = {}
    for lid, lobj in _require(raw, "lattices", "scenario").items():
        per_char = {}
        for cid in CharacterId:
            if cid.value not in lobj:
                raise ScenarioError(f"lattices.{lid}: missing lattice for {cid.value!r}")
            per_char[cid] = _parse_lattice(
                lobj[cid.value], melodies, f"lattices.{lid}.{cid.value}"
            )
        lattices[str(lid)] = per_char

    cage = _parse_cage(_require(raw, "cage", "scenario"), melodies, "cage")
    graph, moment_charges = _parse_scenes(
        _require(raw, "scenes", "scenario"), lattices, sim, "scenes"
    )

    lam = float(raw.get("lambda", 0.5))
    if not 0.0 <= lam <= 1.0:
        raise ScenarioError("lambda: must lie in [0, 1]")
    session_obj = raw.get("session", {})
    snapshot_every = int(session_obj.get("snapshot_every", 1))
    phrase_every = int(session_obj.get("phrase_every", 60))
    if snapshot_every < 1:
        raise ScenarioError("session.snapshot_every: must be at least 1")
    if phrase_every < 1:
        raise ScenarioError("session.phrase_every: must be at least 1")

    return Scenario(
        raw=raw,
        seed=int(raw.get("seed", 0)),
        lam=lam,
        sim=sim,
        lattice_gain=lattice_gain,
        snapshot_every=snapshot_every,
        phrase_every=phrase_every,
        world=World(femme=femme, homme=homme, fields=tuple(fields)),
        melodies=melodies,
        lattices=lattices,
        cage=cage,
        graph=graph,
        moment_charges=moment_charges,
    )


def load_scenario(path: str | Path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(json.load(fh))


def validate_scenario(raw: dict) -> list[str]:
    """Named violations, empty when the scenario is valid."""
    try:
        parse_scenario(raw)
    except ScenarioError as exc:
        return [str(exc)]
    return []


def scenario_with_seed(raw: dict, seed: int) -> Scenario:
    """Copy of the scenario with the sequencing seed replaced."""
    patched = json.loads(canonical_json(raw))
    patched["seed"] = seed
    return parse_scenario(patched)


def fixture_path(name: str = "countryside") -> Path:
    """Path of a scenario shipped with the package."""
    return Path(str(resources.files("duetto") / "fixtures" / f"{name}.json"))


def load_fixture(name: str = "countryside") -> Scenario:
    return load_scenario(fixture_path(name))


def save_melody_file(melody: Melody, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(melody_to_obj(melody), fh, indent=2)
        fh.write("\n")


def load_melody_file(path: str | Path) -> Melody:
    """Load a melody from a JSON note list or a type-0 SMF (by extension)."""
    p = Path(path)
    if p.suffix.lower() in (".mid", ".midi", ".smf"):
        from .midi import read_smf_type0

        return read_smf_type0(p)
    with open(p, "r", encoding="utf-8") as fh:
        return melody_from_obj(json.load(fh))
