"""Timed requirements over whole runs: alerts must arrive on schedule.

Run: python3 demos/04_timer_monitor.py  (from the repository root)
"""

from dataclasses import replace
from pathlib import Path

from t34sim.controller import TimerExpired
from t34sim.sim import load_scenario, run_scenario

SCENARIOS = Path(__file__).parent.parent / "scenarios"

print("a paused pump must keep raising interruption alerts:")
scenario = load_scenario(SCENARIOS / "interruption_alerts.json")
report = run_scenario(scenario)
markers = [t for t, e in scenario.script
           if isinstance(e, TimerExpired) and e.timer_id == "alert.interruption"]
print(f"  alerts scripted at t={markers} -> violations: {len(report.violations)}")
print()

print("the same run with every interruption alert removed:")
stripped = replace(scenario, script=tuple(
    (t, e) for t, e in scenario.script
    if not (isinstance(e, TimerExpired) and e.timer_id == "alert.interruption")))
broken = run_scenario(stripped)
for item in broken.violations:
    print(f"  [{item.requirement_id}] {item.hazard}: {item.message}")
print()

print("confirmation must not linger: stock machine exits at 120 s,")
print("removing the timeout arc leaves it stuck:")
confirm = load_scenario(SCENARIOS / "confirm_timeout.json")
stock = run_scenario(confirm)
stuck = run_scenario(confirm, mutations=("drop-timeout-guard",))
print(f"  stock final:   {stock.final.current.name}, "
      f"violations: {len(stock.violations)}")
print(f"  mutated final: {stuck.final.current.name}")
for item in stuck.violations:
    print(f"  [{item.requirement_id}] {item.hazard}: {item.message}")
