"""Monodic melodies, motif covering and variation.

A melody is an onset-ordered list of non-overlapping note events plus a
loop length in beats.  Variation works by covering the melody with motifs
whose transposition-invariant profile (interval sequence plus
duration-ratio sequence) recurs elsewhere, then re-sequencing the motifs
under a seeded shuffle.  Macroscopic transforms (tempo, volume, stereo
pan) leave the note content structure intact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import isfinite

MONODY_TOL = 1e-9
_RATIO_DIGITS = 9

# (interval sequence, duration-ratio sequence); transposition-invariant.
Profile = tuple[tuple[int, ...], tuple[float, ...]]


@dataclass(frozen=True)
class NoteEvent:
    """One note: MIDI pitch semantics, onset and duration in beats."""

    pitch: int
    onset: float
    duration: float
    velocity: int

    def __post_init__(self) -> None:
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside 0..127")
        if not 0 <= self.velocity <= 127:
            raise ValueError(f"velocity {self.velocity} outside 0..127")
        if not (isfinite(self.onset) and self.onset >= 0.0):
            raise ValueError("onset must be finite and non-negative")
        if not (isfinite(self.duration) and self.duration > 0.0):
            raise ValueError("duration must be positive")

    @property
    def offset(self) -> float:
        return self.onset + self.duration


@dataclass(frozen=True)
class Melody:
    notes: tuple[NoteEvent, ...]
    loop_length: float

    def __post_init__(self) -> None:
        if not (isfinite(self.loop_length) and self.loop_length > 0.0):
            raise ValueError("loop_length must be positive")
        for prev, cur in zip(self.notes, self.notes[1:]):
            if cur.onset < prev.onset:
                raise ValueError("notes must be ordered by onset")
            if cur.onset < prev.offset - MONODY_TOL:
                raise ValueError(
                    f"melody is not monodic: note at {cur.onset} overlaps "
                    f"note ending at {prev.offset}"
                )
        if self.notes and self.loop_length < self.last_offset - MONODY_TOL:
            raise ValueError("loop_length must reach past the last note offset")

    @property
    def last_offset(self) -> float:
        return self.notes[-1].offset if self.notes else 0.0

    @property
    def span(self) -> float:
        """Beats from first onset to last offset."""
        if not self.notes:
            return 0.0
        return self.last_offset - self.notes[0].onset


@dataclass(frozen=True)
class Motif:
    """Inclusive index span into a source melody, with its profile."""

    start: int
    end: int
    profile: Profile

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError("motif span must be non-empty")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def motif_profile(melody: Melody, start: int, end: int) -> Profile:
    """Transposition-invariant identity of the span [start, end].

    Duration ratios are rounded so recurrence comparison is stable.
    """
    notes = melody.notes
    if not (0 <= start <= end < len(notes)):
        raise ValueError("span outside melody")
    intervals = tuple(notes[k + 1].pitch - notes[k].pitch for k in range(start, end))
    ratios = tuple(
        round(notes[k + 1].duration / notes[k].duration, _RATIO_DIGITS)
        for k in range(start, end)
    )
    return (intervals, ratios)


def make_motif(melody: Melody, start: int, end: int) -> Motif:
    return Motif(start, end, motif_profile(melody, start, end))


def _profile_starts(melody: Melody, length: int) -> dict[Profile, list[int]]:
    occ: dict[Profile, list[int]] = {}
    for s in range(len(melody.notes) - length + 1):
        occ.setdefault(motif_profile(melody, s, s + length - 1), []).append(s)
    return occ


def cover_motifs(melody: Melody, min_len: int, max_len: int) -> list[Motif]:
    """Greedy left-to-right motif cover of the whole melody.

    At each uncovered position, take the longest span up to ``max_len``
    whose profile recurs at another start in the melody; failing that, a
    span of ``min_len`` (or whatever shorter tail remains).  Spans are
    consecutive and never overlap, so the cover partitions the notes.
    """
    n = len(melody.notes)
    if n == 0:
        return []
    if not 1 <= min_len <= max_len <= n:
        raise ValueError(f"need 1 <= min_len <= max_len <= {n}")
    occ_by_len: dict[int, dict[Profile, list[int]]] = {}
    motifs: list[Motif] = []
    pos = 0
    while pos < n:
        chosen = 0
        for length in range(min(max_len, n - pos), min_len - 1, -1):
            occs = occ_by_len.setdefault(length, _profile_starts(melody, length))
            starts = occs[motif_profile(melody, pos, pos + length - 1)]
            if any(s != pos for s in starts):
                chosen = length
                break
        if chosen == 0:
            chosen = min(min_len, n - pos)
        motifs.append(make_motif(melody, pos, pos + chosen - 1))
        pos += chosen
    return motifs


def _check_contiguous_cover(melody: Melody, motifs: list[Motif] | tuple[Motif, ...]) -> None:
    if not motifs:
        raise ValueError("empty motif cover")
    if motifs[0].start != 0 or motifs[-1].end != len(melody.notes) - 1:
        raise ValueError("motifs do not cover the melody")
    for prev, cur in zip(motifs, motifs[1:]):
        if cur.start != prev.end + 1:
            raise ValueError("motifs must be consecutive and non-overlapping")


@dataclass(frozen=True)
class Variation:
    """A re-sequenced melody plus its motif spans in the new order."""

    melody: Melody
    motifs: tuple[Motif, ...]


def generate_variation(
    melody: Melody, motifs: list[Motif] | tuple[Motif, ...], rng_seed: int
) -> Variation:
    """Seeded motif re-sequencing of a covered melody.

    The shuffle is constrained so the motif placed first starts on the
    melody's original first pitch.  Each motif keeps its internal timing
    (including rests up to the next motif), so the looped duration, the
    note multiset and the multiset of motif profiles are all preserved;
    a rest at a permuted slice boundary just moves with its slice.  A
    single-motif cover is returned unchanged.
    """
    _check_contiguous_cover(melody, motifs)
    motifs = tuple(motifs)
    if len(motifs) == 1:
        return Variation(melody, motifs)

    notes = melody.notes
    # Time slice of motif k runs from its first onset to the next motif's
    # first onset (the last motif ends at the melody's last offset).
    widths = []
    for k, mo in enumerate(motifs):
        begin = notes[mo.start].onset
        end = notes[motifs[k + 1].start].onset if k + 1 < len(motifs) else melody.last_offset
        widths.append(end - begin)

    order = list(range(len(motifs)))
    random.Random(rng_seed).shuffle(order)
    first_pitch = notes[0].pitch
    for pos, k in enumerate(order):
        if notes[motifs[k].start].pitch == first_pitch:
            order[0], order[pos] = order[pos], order[0]
            break

    new_notes: list[NoteEvent] = []
    spans: list[tuple[int, int]] = []
    t = notes[0].onset
    cursor = 0
    for k in order:
        mo = motifs[k]
        base = notes[mo.start].onset
        for i in range(mo.start, mo.end + 1):
            src = notes[i]
            new_notes.append(
                NoteEvent(src.pitch, t + (src.onset - base), src.duration, src.velocity)
            )
        spans.append((cursor, cursor + mo.length - 1))
        cursor += mo.length
        t += widths[k]

    out = Melody(
        tuple(new_notes),
        max(melody.loop_length, new_notes[-1].offset),
    )
    return Variation(out, tuple(make_motif(out, s, e) for s, e in spans))


@dataclass(frozen=True)
class PlaybackMeta:
    """Non-note playback parameters; pan runs -1 (left) to +1 (right)."""

    tempo_ratio: float
    volume_scale: float
    pan: float


def transform_macro(
    melody: Melody,
    tempo_ratio: float = 1.0,
    volume_scale: float = 1.0,
    pan: float = 0.0,
) -> tuple[Melody, PlaybackMeta]:
    """Macroscopic transform: tempo scales time, volume scales velocities.

    ``tempo_ratio`` 2 plays twice as fast (onsets and durations halved).
    Velocities are rounded and clamped to 0..127; pan is metadata only.
    """
    if not tempo_ratio > 0.0:
        raise ValueError("tempo_ratio must be positive")
    if volume_scale < 0.0:
        raise ValueError("volume_scale must be non-negative")
    if not -1.0 <= pan <= 1.0:
        raise ValueError("pan must lie in [-1, 1]")
    notes = tuple(
        NoteEvent(
            n.pitch,
            n.onset / tempo_ratio,
            n.duration / tempo_ratio,
            min(max(round(n.velocity * volume_scale), 0), 127),
        )
        for n in melody.notes
    )
    out = Melody(notes, melody.loop_length / tempo_ratio)
    return out, PlaybackMeta(tempo_ratio, volume_scale, pan)


def melody_to_obj(melody: Melody) -> dict:
    """JSON-friendly form: notes as [pitch, onset, duration, velocity] rows."""
    return {
        "notes": [[n.pitch, n.onset, n.duration, n.velocity] for n in melody.notes],
        "loop_length": melody.loop_length,
    }


def melody_from_obj(obj: dict) -> Melody:
    if not isinstance(obj, dict) or "notes" not in obj or "loop_length" not in obj:
        raise ValueError("melody object needs 'notes' and 'loop_length'")
    notes = []
    for row in obj["notes"]:
        if len(row) != 4:
            raise ValueError("each note row is [pitch, onset, duration, velocity]")
        pitch, onset, duration, velocity = row
        notes.append(NoteEvent(int(pitch), float(onset), float(duration), int(velocity)))
    return Melody(tuple(notes), float(obj["loop_length"]))
