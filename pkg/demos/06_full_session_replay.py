#!/usr/bin/env python3
"""A whole performance, headless, then verified byte for byte.

Runs the shipped countryside scenario with a small spectator script,
prints the sung phrases as they land, saves the trace, and replays it.
"""

import tempfile
from pathlib import Path

from duetto import load_fixture, replay, run_session

scenario = load_fixture("countryside")
script = [
    {"tick": 60, "kind": "set_lambda", "value": 0.2},
    {"tick": 240, "kind": "relaunch_character", "character": "femme"},
    {"tick": 300, "kind": "drag_character", "character": "homme", "position": [-6.0, -4.0]},
    {"tick": 520, "kind": "choose_decor", "decor": "nuage"},
    {"tick": 700, "kind": "relaunch_character", "character": "homme"},
    {"tick": 900, "kind": "set_lambda", "value": 0.9},
]

trace = run_session(scenario, script, until_tick=1500)
print(f"ran 1500 ticks, {len(trace.snapshots)} snapshots")

scene = None
for snap in trace.snapshots:
    if snap["scene"]["node"] != scene:
        scene = snap["scene"]["node"]
        print(f"\n[tick {snap['tick']:4d}] scene: {scene}")
    for rec in snap["events"]:
        flag = "ok " if rec["accepted"] else "REJ"
        print(f"  [tick {snap['tick']:4d}] {flag} {rec['event']['kind']}")
    for phrase in snap["phrases"]:
        if phrase["silent"]:
            print(f"  [tick {snap['tick']:4d}] {phrase['character']} has faded out")
        else:
            fade = " (crossfade)" if phrase["crossfade"] else ""
            print(
                f"  [tick {snap['tick']:4d}] {phrase['character']} sings "
                f"{phrase['text']!r} [{phrase['melody_ref']}] "
                f"gain {phrase['gain']:.2f}{fade}"
            )

path = Path(tempfile.gettempdir()) / "countryside_demo.trace.jsonl"
trace.save(path)
report = replay(path)
print(f"\ntrace saved to {path}")
print(f"replay verdict: {report.status}")
path.unlink()
