"""Exhaustively check the machine, then break it on purpose.

Run: python3 demos/03_model_check.py
"""

import time

from t34sim.safety import MUTATIONS, model_check, replay_events
from t34sim.sim import encode_event

print("stock machine, unbounded breadth-first search:")
started = time.monotonic()
report = model_check()
elapsed = time.monotonic() - started
print(f"  explored {report.explored} abstract states to depth {report.depth} "
      f"in {elapsed:.2f}s")
print(f"  behaviours reached: {len(report.behaviours)}")
print(f"  violations: {len(report.violations)}")
print()

name = "drop-clamp-guard"
print(f"same search with the {name!r} fault injected")
print(f"  ({MUTATIONS[name].note}):")
mutated = model_check(mutations=[name])
finding = mutated.violations[0]
print(f"  [{finding.requirement_id}] {finding.hazard}: {finding.message}")
print(f"  witness, {len(finding.witness)} events:")
for event in finding.witness:
    print(f"    {encode_event(event)}")
print()

print("replaying the witness through the real dispatcher:")
replayed = replay_events(finding.witness, mutations=[name])
ids = sorted({v.requirement_id for v in replayed.violations})
print(f"  violations reproduced: {ids}")
print(f"  final state: {replayed.state.current.name}")
