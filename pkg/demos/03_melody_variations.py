#!/usr/bin/env python3
"""Motif covering and melody variation.

Takes the piano loop from the shipped scenario, covers it with recurring
motifs, and prints three seeded variations as text piano rolls.  The
variation engine only re-orders whole motifs, so every output keeps the
source's notes, loop length and motif vocabulary.
"""

from duetto import cover_motifs, generate_variation, load_fixture

PITCH_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]


def name(pitch):
    return f"{PITCH_NAMES[pitch % 12]}{pitch // 12 - 1}"


def roll(melody, width=48):
    cells = [" "] * width
    scale = width / melody.loop_length
    for n in melody.notes:
        start = int(n.onset * scale)
        end = max(start + 1, int(n.offset * scale))
        for k in range(start, min(end, width)):
            cells[k] = "#"
        label = name(n.pitch)
        for k, ch in enumerate(label):
            if start + k < width:
                cells[start + k] = ch
    return "".join(cells)


scenario = load_fixture("countryside")
melody = scenario.melodies["femme_anime"]
print("source fragment (anime variant of the woman's line):")
print(" ", roll(melody))
print("  notes:", [(name(n.pitch), n.onset, n.duration) for n in melody.notes])

cover = cover_motifs(melody, min_len=2, max_len=3)
print(f"\ncover: {len(cover)} motifs")
for mo in cover:
    intervals, ratios = mo.profile
    print(f"  notes {mo.start}..{mo.end}  intervals={intervals} duration-ratios={ratios}")

print("\nseeded variations (motif order shuffles, first pitch anchored):")
for seed in (1, 2, 3):
    var = generate_variation(melody, cover, rng_seed=seed)
    order = [m.profile[0] for m in var.motifs]
    print(f"  seed {seed}: motif intervals now {order}")
    print("   ", roll(var.melody))

print("\nsame seed, same bytes: the generator is a pure function of (melody, cover, seed).")
