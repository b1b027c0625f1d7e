"""Standard MIDI File import for monodic fragments.

Reads type-0 files only and extracts note events from track 0, ignoring
every non-note message.  Ticks convert to beats through the header's
pulses-per-quarter division, so note timing is exactly what the file
encodes.  SMPTE-division files and polyphonic tracks are rejected.
"""

from __future__ import annotations

from pathlib import Path

from .melody import Melody, NoteEvent


class MidiError(ValueError):
    pass


def _read_vlq(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if pos >= len(data):
            raise MidiError("truncated variable-length quantity")
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos
    raise MidiError("variable-length quantity longer than 4 bytes")


def read_smf_type0(path: str | Path) -> Melody:
    """Parse a type-0 SMF into a monodic :class:`Melody`.

    The loop length is set to the last note offset; callers that loop with
    trailing silence can extend it afterwards.
    """
    data = Path(path).read_bytes()
    if len(data) < 14 or data[0:4] != b"MThd":
        raise MidiError("not a Standard MIDI File (missing MThd)")
    header_len = int.from_bytes(data[4:8], "big")
    if header_len < 6:
        raise MidiError("malformed MThd chunk")
    fmt = int.from_bytes(data[8:10], "big")
    ntrks = int.from_bytes(data[10:12], "big")
    division = int.from_bytes(data[12:14], "big")
    if fmt != 0:
        raise MidiError(f"only type 0 files are supported, got type {fmt}")
    if ntrks != 1:
        raise MidiError(f"type 0 file must have exactly one track, got {ntrks}")
    if division & 0x8000:
        raise MidiError("SMPTE time division is not supported")
    if division == 0:
        raise MidiError("division must be positive")

    pos = 8 + header_len
    if data[pos : pos + 4] != b"MTrk":
        raise MidiError("track 0 chunk not found")
    track_len = int.from_bytes(data[pos + 4 : pos + 8], "big")
    pos += 8
    end = pos + track_len
    if end > len(data):
        raise MidiError("truncated track chunk")

    notes: list[NoteEvent] = []
    open_notes: dict[int, tuple[int, int]] = {}  # pitch -> (start_tick, velocity)
    tick = 0
    status = 0
    while pos < end:
        delta, pos = _read_vlq(data, pos)
        tick += delta
        byte = data[pos]
        if byte & 0x80:
            status = byte
            pos += 1
        elif status == 0:
            raise MidiError("data byte with no running status")
        kind = status & 0xF0

        if status == 0xFF:  # meta event
            if pos >= end:
                raise MidiError("truncated meta event")
            meta_type = data[pos]
            length, pos = _read_vlq(data, pos + 1)
            pos += length
            if meta_type == 0x2F:  # end of track
                break
            continue
        if status in (0xF0, 0xF7):  # sysex
            length, pos = _read_vlq(data, pos)
            pos += length
            continue
        if kind in (0xC0, 0xD0):  # program change / channel pressure
            pos += 1
            continue
        if kind in (0xA0, 0xB0, 0xE0):  # aftertouch / controller / pitch bend
            pos += 2
            continue
        if kind not in (0x80, 0x90):
            raise MidiError(f"unexpected status byte 0x{status:02x}")

        pitch = data[pos]
        velocity = data[pos + 1]
        pos += 2
        if kind == 0x90 and velocity > 0:
            if open_notes:
                raise MidiError(
                    f"polyphonic track: note {pitch} starts at tick {tick} "
                    f"while another note is sounding"
                )
            open_notes[pitch] = (tick, velocity)
        else:  # note off, or note on with velocity 0
            started = open_notes.pop(pitch, None)
            if started is None:
                continue  # stray note-off; ignore like any non-note noise
            start_tick, vel = started
            if tick <= start_tick:
                raise MidiError(f"zero-length note {pitch} at tick {start_tick}")
            notes.append(
                NoteEvent(pitch, start_tick / division, (tick - start_tick) / division, vel)
            )

    if open_notes:
        raise MidiError(f"unterminated notes: {sorted(open_notes)}")
    if not notes:
        raise MidiError("track 0 contains no notes")
    notes.sort(key=lambda n: n.onset)
    try:
        return Melody(tuple(notes), notes[-1].offset)
    except ValueError as exc:
        raise MidiError(f"track 0 is not monodic: {exc}") from exc
