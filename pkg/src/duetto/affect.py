"""Force-driven motion of the two sung characters.

Each character carries four signed affective magnitudes (aspiration to
tenderness, audacity/resignation, egoism, jealousy).  Axes are either
mass-like (always attractive, non-negative magnitudes) or charge-like
(like signs repel, unlike attract).  Pair forces follow an inverse-square
law with a softening floor; off-stage attractors add uniform fields.
Motion integrates with semi-implicit Euler at a fixed timestep, and each
character's vocal intensity decays exponentially until relaunched.

All state types are frozen: a stepped world is a fresh snapshot, safe to
hand to other threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

Vec2 = tuple[float, float]


class Axis(Enum):
    """The four affective axes, in canonical component order."""

    TENDRESSE = 0
    AUDACE_RESIGNATION = 1
    EGOISME = 2
    JALOUSIE = 3


class AxisKind(Enum):
    MASS_LIKE = "mass"
    CHARGE_LIKE = "charge"


# Tenderness behaves like gravity; the other three like signed charges.
# Scenario files may override this assignment.
DEFAULT_AXIS_KINDS: tuple[AxisKind, AxisKind, AxisKind, AxisKind] = (
    AxisKind.MASS_LIKE,
    AxisKind.CHARGE_LIKE,
    AxisKind.CHARGE_LIKE,
    AxisKind.CHARGE_LIKE,
)


class CharacterId(Enum):
    FEMME = "femme"
    HOMME = "homme"


@dataclass(frozen=True)
class AffectVector:
    """Per-axis affective magnitudes, indexed by :class:`Axis` value."""

    components: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.components) != len(Axis):
            raise ValueError(f"affect vector needs {len(Axis)} components")
        for q in self.components:
            if not math.isfinite(q):
                raise ValueError("affect components must be finite")

    def validate_kinds(self, kinds: tuple[AxisKind, ...]) -> None:
        """Mass-like components must be non-negative."""
        for axis, kind in zip(Axis, kinds):
            if kind is AxisKind.MASS_LIKE and self.components[axis.value] < 0.0:
                raise ValueError(
                    f"mass-like axis {axis.name} has negative magnitude"
                )

    @classmethod
    def zero(cls) -> "AffectVector":
        return cls((0.0, 0.0, 0.0, 0.0))


@dataclass(frozen=True)
class StageRect:
    """Closed axis-aligned stage bounds."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self) -> None:
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("stage rectangle must have positive extent")

    def contains(self, p: Vec2) -> bool:
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax

    def clamp(self, p: Vec2) -> Vec2:
        return (
            min(max(p[0], self.xmin), self.xmax),
            min(max(p[1], self.ymin), self.ymax),
        )

    @property
    def center(self) -> Vec2:
        return ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)


@dataclass(frozen=True)
class Field:
    """Uniform force field from an off-stage attractor.

    ``g`` is the per-axis field strength (force per unit magnitude);
    ``direction`` is the unit vector the resulting force points along.
    """

    g: tuple[float, float, float, float]
    direction: Vec2

    def __post_init__(self) -> None:
        if len(self.g) != len(Axis):
            raise ValueError(f"field strength needs {len(Axis)} components")
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"field direction must be unit length, got |d|={norm}")


@dataclass(frozen=True)
class SimParams:
    """Fixed parameters of the motion integrator."""

    dt: float = 1.0 / 60.0
    k: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    softening_eps: float = 0.25
    decay_rate: float = 0.05
    damping: float = 0.5
    stage_rect: StageRect = StageRect(-8.0, -5.0, 8.0, 5.0)
    axis_kinds: tuple[AxisKind, AxisKind, AxisKind, AxisKind] = DEFAULT_AXIS_KINDS

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.softening_eps <= 0.0:
            raise ValueError("softening_eps must be positive")
        if self.decay_rate < 0.0:
            raise ValueError("decay_rate must be non-negative")
        if self.damping < 0.0:
            raise ValueError("damping must be non-negative")
        if len(self.k) != len(Axis) or len(self.axis_kinds) != len(Axis):
            raise ValueError(f"k and axis_kinds need {len(Axis)} entries")


@dataclass(frozen=True)
class CharacterState:
    """Full dynamic state of one character.

    ``lattice_pos`` is the continuous (semantic, musical) coordinate on the
    character's variant network; ``lattice_index`` the currently selected
    cell (kept here so hysteresis survives snapshot round-trips).
    """

    id: CharacterId
    position: Vec2
    velocity: Vec2 = (0.0, 0.0)
    inertial_mass: float = 1.0
    affect: AffectVector = AffectVector.zero()
    vocal_intensity: float = 1.0
    lattice_pos: Vec2 = (0.0, 0.0)
    lattice_index: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        if self.inertial_mass <= 0.0:
            raise ValueError("inertial_mass must be positive")
        if not 0.0 <= self.vocal_intensity <= 1.0:
            raise ValueError("vocal_intensity must lie in [0, 1]")
        for v in (*self.position, *self.velocity):
            if not math.isfinite(v):
                raise ValueError("position and velocity must be finite")


@dataclass(frozen=True)
class World:
    """Immutable per-tick snapshot of both characters and the active fields."""

    femme: CharacterState
    homme: CharacterState
    fields: tuple[Field, ...] = ()

    def character(self, cid: CharacterId) -> CharacterState:
        return self.femme if cid is CharacterId.FEMME else self.homme

    def with_character(self, c: CharacterState) -> "World":
        if c.id is CharacterId.FEMME:
            return replace(self, femme=c)
        return replace(self, homme=c)


def pairwise_force(
    a: CharacterState, b: CharacterState, params: SimParams
) -> Vec2:
    """Inverse-square force exerted on ``a`` by ``b``.

    Mass-like axes always attract; charge-like axes repel for like signs
    and attract for unlike signs.  The softening floor caps the force when
    the characters are dragged on top of each other; at exact coincidence
    the direction is undefined and the force is zero.

    Antisymmetry is exact: ``pairwise_force(a, b) == -pairwise_force(b, a)``
    componentwise, bit for bit.
    """
    dx = b.position[0] - a.position[0]
    dy = b.position[1] - a.position[1]
    r = math.hypot(dx, dy)
    if r == 0.0:
        return (0.0, 0.0)
    r_eff = max(r, params.softening_eps)
    coeff = 0.0
    for i, kind in enumerate(params.axis_kinds):
        qq = a.affect.components[i] * b.affect.components[i]
        if kind is AxisKind.CHARGE_LIKE:
            qq = -qq
        coeff += params.k[i] * qq
    scale = coeff / (r_eff * r_eff) / r
    return (scale * dx, scale * dy)


def field_force(c: CharacterState, fields: tuple[Field, ...]) -> Vec2:
    """Position-independent force from every active external field."""
    fx = 0.0
    fy = 0.0
    for field in fields:
        s = 0.0
        for i in range(len(Axis)):
            s += field.g[i] * c.affect.components[i]
        fx += s * field.direction[0]
        fy += s * field.direction[1]
    return (fx, fy)


def net_external_force(
    c: CharacterState,
    other: CharacterState,
    fields: tuple[Field, ...],
    params: SimParams,
) -> Vec2:
    """Everything pushing on ``c`` from outside: the partner plus the fields."""
    pf = pairwise_force(c, other, params)
    ff = field_force(c, fields)
    return (pf[0] + ff[0], pf[1] + ff[1])


def _step_character(
    c: CharacterState, force: Vec2, params: SimParams
) -> CharacterState:
    # Semi-implicit Euler: velocity first, position with the new velocity.
    m = c.inertial_mass
    ax = (force[0] - params.damping * c.velocity[0]) / m
    ay = (force[1] - params.damping * c.velocity[1]) / m
    vx = c.velocity[0] + ax * params.dt
    vy = c.velocity[1] + ay * params.dt
    x = c.position[0] + vx * params.dt
    y = c.position[1] + vy * params.dt
    rect = params.stage_rect
    cx = min(max(x, rect.xmin), rect.xmax)
    cy = min(max(y, rect.ymin), rect.ymax)
    if cx != x:  # wall contact kills the normal velocity component
        vx = 0.0
    if cy != y:
        vy = 0.0
    intensity = c.vocal_intensity * math.exp(-params.decay_rate * params.dt)
    return replace(
        c, position=(cx, cy), velocity=(vx, vy), vocal_intensity=intensity
    )


def step(world: World, params: SimParams) -> World:
    """Advance both characters by one timestep.

    Forces are evaluated on the pre-step snapshot for both characters, so
    stepping order cannot break force antisymmetry.
    """
    f_femme = net_external_force(world.femme, world.homme, world.fields, params)
    f_homme = net_external_force(world.homme, world.femme, world.fields, params)
    return replace(
        world,
        femme=_step_character(world.femme, f_femme, params),
        homme=_step_character(world.homme, f_homme, params),
    )


def relaunch(c: CharacterState) -> CharacterState:
    """Reset vocal intensity to full; the spectator's click on the icon."""
    return replace(c, vocal_intensity=1.0)


def drag_character(
    c: CharacterState, new_pos: Vec2, stage_rect: StageRect
) -> CharacterState:
    """Teleport a character to ``new_pos`` (clamped) with velocity zeroed."""
    return replace(c, position=stage_rect.clamp(new_pos), velocity=(0.0, 0.0))
