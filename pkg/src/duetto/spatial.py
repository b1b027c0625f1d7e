"""The cubic cage: looping music objects in 3-D, mixed by listener position.

Monodic fragments live inside axis-aligned volumes; each loops with its
own length so the loops drift in phase permanently.  The listener flies
freely, hears each object at a gain that is flat inside its volume and
falls off smoothly with distance to the surface outside it, and can ride
an object's path at the music's own tempo instead of flying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .melody import Melody

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box."""

    min_corner: Vec3
    max_corner: Vec3

    def __post_init__(self) -> None:
        for lo, hi in zip(self.min_corner, self.max_corner):
            if lo > hi:
                raise ValueError("box min corner must not exceed max corner")

    def contains(self, p: Vec3) -> bool:
        return all(lo <= x <= hi for lo, x, hi in zip(self.min_corner, p, self.max_corner))

    def contains_box(self, other: "Box") -> bool:
        return self.contains(other.min_corner) and self.contains(other.max_corner)

    def clamp(self, p: Vec3) -> Vec3:
        return tuple(
            min(max(x, lo), hi) for lo, x, hi in zip(self.min_corner, p, self.max_corner)
        )  # type: ignore[return-value]

    def surface_distance(self, p: Vec3) -> float:
        """Euclidean distance to the box; 0 inside or on the surface."""
        d2 = 0.0
        for lo, x, hi in zip(self.min_corner, p, self.max_corner):
            d = max(lo - x, 0.0, x - hi)
            d2 += d * d
        return math.sqrt(d2)


@dataclass(frozen=True)
class MusicObject:
    """A looping monodic fragment with its volume and traversal path."""

    id: str
    box: Box
    melody_ref: str
    path: tuple[Vec3, ...]
    base_gain: float = 1.0
    tempo_bpm: float = 60.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.base_gain <= 1.0:
            raise ValueError("base_gain must lie in [0, 1]")
        if self.tempo_bpm <= 0.0:
            raise ValueError("tempo_bpm must be positive")
        if not self.path:
            raise ValueError("object path needs at least one point")
        for p in self.path:
            if not self.box.contains(p):
                raise ValueError(f"path point {p} outside object volume")


class ListenerMode(Enum):
    FREE_FLIGHT = "free_flight"
    RIDING = "riding"


@dataclass(frozen=True)
class ListenerState:
    position: Vec3
    mode: ListenerMode = ListenerMode.FREE_FLIGHT
    ride_object: str | None = None
    path_param: float = 0.0

    def __post_init__(self) -> None:
        if self.mode is ListenerMode.RIDING:
            if self.ride_object is None:
                raise ValueError("riding listener needs an object id")
            if not 0.0 <= self.path_param <= 1.0:
                raise ValueError("path_param must lie in [0, 1]")


@dataclass(frozen=True)
class Cage:
    box: Box
    objects: tuple[MusicObject, ...]
    start_position: Vec3
    r_ref: float = 2.0

    def __post_init__(self) -> None:
        if self.r_ref <= 0.0:
            raise ValueError("r_ref must be positive")
        if not self.box.contains(self.start_position):
            raise ValueError("start_position outside the cage")
        seen = set()
        for obj in self.objects:
            if obj.id in seen:
                raise ValueError(f"duplicate object id {obj.id!r}")
            seen.add(obj.id)
            if not self.box.contains_box(obj.box):
                raise ValueError(f"object {obj.id!r} volume outside the cage")

    def object(self, object_id: str) -> MusicObject | None:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        return None


def loop_phase(t: float, melody: Melody, tempo_bpm: float) -> float:
    """Beat offset into the loop at time ``t`` seconds."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    return math.fmod(t * tempo_bpm / 60.0, melody.loop_length)


def compute_gain(listener: ListenerState, obj: MusicObject, r_ref: float) -> float:
    """Gain in [0, 1]: flat at base_gain inside the volume, then
    ``base_gain * (r_ref / (r_ref + d))**2`` with surface distance d."""
    d = obj.box.surface_distance(listener.position)
    if d == 0.0:
        return obj.base_gain
    att = r_ref / (r_ref + d)
    return obj.base_gain * att * att


def polyline_length(path: tuple[Vec3, ...]) -> float:
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += math.dist(a, b)
    return total


def point_on_path(path: tuple[Vec3, ...], param: float) -> Vec3:
    """Point at fraction ``param`` of the path's arclength."""
    if param <= 0.0:
        return path[0]
    if param >= 1.0:
        return path[-1]
    total = polyline_length(path)
    if total == 0.0:
        return path[-1]
    target = param * total
    walked = 0.0
    for a, b in zip(path, path[1:]):
        seg = math.dist(a, b)
        if walked + seg >= target and seg > 0.0:
            f = (target - walked) / seg
            return (
                a[0] + f * (b[0] - a[0]),
                a[1] + f * (b[1] - a[1]),
                a[2] + f * (b[2] - a[2]),
            )
        walked += seg
    return path[-1]


def ride_step(
    listener: ListenerState,
    obj: MusicObject,
    melody: Melody,
    dt: float,
    tempo_bpm: float | None = None,
) -> ListenerState:
    """Carry a riding listener along the object's path.

    One full traversal takes exactly one loop of the object's melody, so
    doubling the tempo halves the ride.  Reaching the path end drops the
    listener back to free flight exactly at the endpoint; a degenerate
    path exits immediately.
    """
    if listener.mode is not ListenerMode.RIDING or listener.ride_object != obj.id:
        raise ValueError("listener is not riding this object")
    tempo = obj.tempo_bpm if tempo_bpm is None else tempo_bpm
    if polyline_length(obj.path) == 0.0:
        return ListenerState(position=obj.path[-1])
    param = listener.path_param + (dt * tempo / 60.0) / melody.loop_length
    if param >= 1.0:
        return ListenerState(position=obj.path[-1])
    return ListenerState(
        position=point_on_path(obj.path, param),
        mode=ListenerMode.RIDING,
        ride_object=obj.id,
        path_param=param,
    )


@dataclass(frozen=True)
class MixEntry:
    object_id: str
    gain: float
    beat_offset: float


def mix_frame(
    listener: ListenerState,
    cage: Cage,
    melodies: dict[str, Melody],
    t: float,
) -> tuple[MixEntry, ...]:
    """Per-object gain and loop phase at time ``t``, in cage object order."""
    return tuple(
        MixEntry(
            object_id=obj.id,
            gain=compute_gain(listener, obj, cage.r_ref),
            beat_offset=loop_phase(t, melodies[obj.melody_ref], obj.tempo_bpm),
        )
        for obj in cage.objects
    )
