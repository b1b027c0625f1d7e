#!/usr/bin/env python3
"""The force duet: two characters pulled and pushed by affective charges.

Walks one minute of stage time, prints the settling behaviour, then shows
what a spectator drag does to the partner.  Writes duet_trajectory.csv
(tick, fx, fy, hx, hy) next to this script; plot it with e.g.

    python3 -c "import pandas as pd, matplotlib.pyplot as plt; \
d = pd.read_csv('demos/duet_trajectory.csv'); \
plt.plot(d.femme_x, d.femme_y); plt.plot(d.homme_x, d.homme_y); \
plt.savefig('duet.png')"
"""

import csv
import math
from pathlib import Path

from duetto import CharacterId, drag_character, load_fixture, pairwise_force, step

scenario = load_fixture("countryside")
params = scenario.sim
world = scenario.world

print("axis kinds:", [k.value for k in params.axis_kinds])
print("femme starts at", world.femme.position, "affect", world.femme.affect.components)
print("homme starts at", world.homme.position, "affect", world.homme.affect.components)
print()

rows = []
for tick in range(1, 3601):  # one minute at 60 Hz
    world = step(world, params)
    rows.append((tick, *world.femme.position, *world.homme.position))
    if tick % 600 == 0:
        d = math.dist(world.femme.position, world.homme.position)
        f = pairwise_force(world.femme, world.homme, params)
        print(
            f"t={tick/60:4.0f}s  separation={d:5.2f}  "
            f"pull on femme=({f[0]:+.3f}, {f[1]:+.3f})  "
            f"|v_femme|={math.hypot(*world.femme.velocity):.3f}"
        )

print("\nthe pair settles where pair attraction, fields and damping balance.")
print("now the spectator drags the woman to the far corner...")
world = world.with_character(
    drag_character(world.character(CharacterId.FEMME), (7.5, 4.5), params.stage_rect)
)
before = world.homme.position
for tick in range(3601, 4801):
    world = step(world, params)
    rows.append((tick, *world.femme.position, *world.homme.position))
after = world.homme.position
print(f"...and within 20 s the man drifts from {before} toward {after}:")
print("moving one singer moves the other, through the force model alone.")

out = Path(__file__).parent / "duet_trajectory.csv"
with out.open("w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["tick", "femme_x", "femme_y", "homme_x", "homme_y"])
    writer.writerows(rows)
print(f"\nwrote {out}")
