#!/usr/bin/env python3
"""Scene direction with session memory.

The story advances through authored defaults; between two tableaux a
parcours may be inserted by a seeded coin flip, preferring whichever one
has been seen least.  Memory persists in a file, so repeated runs keep
evening out the parcours visits.
"""

import tempfile
from collections import Counter
from pathlib import Path

from duetto import SessionMemory, load_fixture, maybe_insert_parcours

scenario = load_fixture("countryside")
graph = scenario.graph

print("scene graph, authored defaults:")
node = graph.nodes[graph.start]
seen = []
while node.id not in seen:
    seen.append(node.id)
    print(f"  {node.id} ({node.kind.value})", "->", list(node.default_next) or "terminal")
    if not node.default_next:
        break
    node = graph.nodes[node.default_next[0]]

memory_file = Path(tempfile.gettempdir()) / "duetto_demo_memory.json"
if memory_file.exists():
    memory_file.unlink()

t1 = graph.nodes["tableau_mots_mer"]
t2 = graph.nodes["tableau_jardin"]
print("\nsimulating 30 sessions, each crossing the tableau->tableau gap once:")
insertions = Counter()
for session in range(30):
    if memory_file.exists():
        mem = SessionMemory.load(memory_file)
    else:
        mem = SessionMemory(seed=1234)
    chosen = maybe_insert_parcours(graph, t1, t2, mem)
    insertions[chosen.id if chosen else "(none)"] += 1
    mem.save(memory_file)

for key in sorted(insertions):
    print(f"  {key:14s} {insertions[key]:2d} times")

mem = SessionMemory.load(memory_file)
print(
    "\npersistent counts:",
    {k: v for k, v in sorted(mem.visit_counts.items())},
)
print(
    "the two parcours stay within one visit of each other: the least-visited"
    "\nrule spends novelty evenly, and the memory file carries it across runs."
)
memory_file.unlink()
