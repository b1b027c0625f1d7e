"""Variant selection on the musico-textual network.

Each character sings from a 2-D grid of (text, melody) variants: text
variants drift along a semantic axis (progressive slippage from interior
feelings outward, or the reverse), melody variants along an orthogonal
musical axis ordered from least to most passionate.  External forces are
projected onto each axis, scaled by a per-axis grip coefficient (the
cosine of an angle between 0 and 90 degrees) and weighted by the global
text/music slider: weight ``1 - lambda`` on the semantic axis, ``lambda``
on the musical axis, so 0 is an all-text regime and 1 all-music.

The continuous coordinate is a content dial, not a physical body: it
accumulates force impulses first-order, which keeps the slider extremes
exactly frozen.  Index selection rounds with hysteresis so variants never
flicker at a cell boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .affect import CharacterId, CharacterState, Vec2

ORTHOGONALITY_TOL = 1e-9


def _check_unit(direction: Vec2, what: str) -> None:
    norm = math.hypot(*direction)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"{what} direction must be unit length, got |d|={norm}")


@dataclass(frozen=True)
class SemanticAxis:
    """A text-variant axis: direction in the stage frame, grip in [0, 1]."""

    label: str
    direction: Vec2
    grip: float
    variants: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_unit(self.direction, "semantic axis")
        if not 0.0 <= self.grip <= 1.0:
            raise ValueError("grip must lie in [0, 1]")
        if not self.variants:
            raise ValueError("semantic axis needs at least one text variant")


@dataclass(frozen=True)
class MusicalAxis:
    """A melody-variant axis, orthogonal to its paired semantic axis.

    ``variants`` are melody ids ordered from least to most passionate.
    """

    label: str
    direction: Vec2
    grip: float
    variants: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_unit(self.direction, "musical axis")
        if not 0.0 <= self.grip <= 1.0:
            raise ValueError("grip must lie in [0, 1]")
        if not self.variants:
            raise ValueError("musical axis needs at least one melody variant")


@dataclass(frozen=True)
class Cell:
    text: str
    melody_ref: str
    passion_rank: int


@dataclass(frozen=True)
class LatticeNetwork:
    """Rectangular grid of variant cells indexed [semantic][musical]."""

    semantic: SemanticAxis
    musical: MusicalAxis
    cells: tuple[tuple[Cell, ...], ...]
    hysteresis_margin: float = 0.1
    start: Vec2 = (0.0, 0.0)

    def __post_init__(self) -> None:
        dot = (
            self.semantic.direction[0] * self.musical.direction[0]
            + self.semantic.direction[1] * self.musical.direction[1]
        )
        if abs(dot) >= ORTHOGONALITY_TOL:
            raise ValueError(
                f"musical axis must be orthogonal to its semantic axis "
                f"(|dot|={abs(dot)})"
            )
        if not 0.0 <= self.hysteresis_margin < 0.5:
            raise ValueError("hysteresis_margin must lie in [0, 0.5)")
        s_count = len(self.semantic.variants)
        m_count = len(self.musical.variants)
        if len(self.cells) != s_count:
            raise ValueError(
                f"grid has {len(self.cells)} rows, semantic axis has {s_count} variants"
            )
        for row in self.cells:
            if len(row) != m_count:
                raise ValueError("grid is not rectangular")
            for j in range(1, m_count):
                if row[j].passion_rank <= row[j - 1].passion_rank:
                    raise ValueError(
                        "passion_rank must strictly increase along the musical axis"
                    )
        if not (0.0 <= self.start[0] <= s_count - 1 and 0.0 <= self.start[1] <= m_count - 1):
            raise ValueError("start coordinate outside the grid")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.semantic.variants), len(self.musical.variants))

    def cell(self, index: tuple[int, int]) -> Cell:
        return self.cells[index[0]][index[1]]

    def start_index(self) -> tuple[int, int]:
        return (round(self.start[0]), round(self.start[1]))


def cross_product_grid(
    semantic: SemanticAxis, musical: MusicalAxis
) -> tuple[tuple[Cell, ...], ...]:
    """Default grid: every text variant crossed with every melody variant."""
    return tuple(
        tuple(Cell(text, melody_ref, j) for j, melody_ref in enumerate(musical.variants))
        for text in semantic.variants
    )


def project_force(force: Vec2, axis: SemanticAxis | MusicalAxis) -> float:
    """Grip-scaled scalar projection of a force onto an axis."""
    return axis.grip * (force[0] * axis.direction[0] + force[1] * axis.direction[1])


def update_lattice(
    c: CharacterState,
    f_ext: Vec2,
    lam: float,
    dt: float,
    gain: float,
    net: LatticeNetwork,
) -> CharacterState:
    """Drift the continuous lattice coordinate under the external force.

    ``gain`` is the global sensitivity constant from the scenario.  At
    ``lam == 0`` the musical coordinate is bit-exactly unchanged, and
    symmetrically at ``lam == 1`` for the semantic coordinate.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    s_max = float(len(net.semantic.variants) - 1)
    m_max = float(len(net.musical.variants) - 1)
    s = c.lattice_pos[0] + (1.0 - lam) * gain * project_force(f_ext, net.semantic) * dt
    m = c.lattice_pos[1] + lam * gain * project_force(f_ext, net.musical) * dt
    s = min(max(s, 0.0), s_max)
    m = min(max(m, 0.0), m_max)
    return replace(c, lattice_pos=(s, m))


def _settle_index(coord: float, current: int, margin: float) -> int:
    # Nearest-integer selection with a hysteresis band: the index moves only
    # once the coordinate crosses a midpoint by more than the margin; ties
    # stay with the current index.
    idx = current
    while coord > idx + 0.5 + margin:
        idx += 1
    while coord < idx - 0.5 - margin:
        idx -= 1
    return idx


def select_variant(c: CharacterState, net: LatticeNetwork) -> tuple[int, int]:
    """Cell index for the character's current continuous coordinate."""
    i = _settle_index(c.lattice_pos[0], c.lattice_index[0], net.hysteresis_margin)
    j = _settle_index(c.lattice_pos[1], c.lattice_index[1], net.hysteresis_margin)
    s_count, m_count = net.shape
    return (min(max(i, 0), s_count - 1), min(max(j, 0), m_count - 1))


@dataclass(frozen=True)
class PhraseEvent:
    """One sung phrase (or a silence marker once the voice has faded out)."""

    character: CharacterId
    index: tuple[int, int]
    text: str | None
    melody_ref: str | None
    gain: float
    crossfade: bool
    silent: bool


def emit_phrase(
    c: CharacterState,
    net: LatticeNetwork,
    previous_index: tuple[int, int] | None = None,
) -> PhraseEvent:
    """Phrase for the currently selected cell at the current vocal gain.

    ``previous_index`` is the cell of the last emission; a change raises the
    crossfade flag so playback can blend climates.  A character at exactly
    zero intensity has faded out and yields a silent marker instead.
    """
    if c.vocal_intensity == 0.0:
        return PhraseEvent(
            character=c.id,
            index=c.lattice_index,
            text=None,
            melody_ref=None,
            gain=0.0,
            crossfade=False,
            silent=True,
        )
    cell = net.cell(c.lattice_index)
    crossfade = previous_index is not None and previous_index != c.lattice_index
    return PhraseEvent(
        character=c.id,
        index=c.lattice_index,
        text=cell.text,
        melody_ref=cell.melody_ref,
        gain=c.vocal_intensity,
        crossfade=crossfade,
        silent=False,
    )
