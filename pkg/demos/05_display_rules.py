"""The display contract: 15-character lines, exact digits, honest alerts.

Run: python3 demos/05_display_rules.py
"""

from t34sim.controller import new_hardware
from t34sim.display import (
    LightColor,
    LineOverflowError,
    UIAction,
    UIState,
    apply_action,
    fit_label,
    format_quantity,
    render_info_screen,
)

print("quantities never print trailing zeros and keep the leading zero:")
for value, unit in (("0.64", "ml/h"), ("0.50", "ml"), (5, "ml/h"),
                    (720, "mmHg"), ("999.99", "ml"), (0, "ml")):
    print(f"  {str(value):>7} -> {format_quantity(value, unit)!r}")
print()

print("long labels shrink deterministically, values never do:")
for label, value in (("Max. Rate", "5ml/h"), ("Occlusion", "720mmHg"),
                     ("Battery status", "99%")):
    print(f"  {label!r:>17} + {value!r:>10} -> {fit_label(label, value)!r}")
print()

print("the info screen, rendered from a hardware snapshot:")
for line in render_info_screen(new_hardware(battery_level=99)).lines:
    print(f"  |{line:<15}|")
print()

print("over-budget lines are an error, never a silent cut:")
try:
    UIState(line1="This message is far too wide")
except LineOverflowError as exc:
    print(f"  {exc}")
print()

print("partial updates leave unset fields alone:")
before = UIState(line1="Pump Delivering", light=LightColor.GREEN)
after = apply_action(before, UIAction(line3="Keypad Locked", emphasis=3))
print(f"  before: {before.lines} {before.light.name}")
print(f"  after:  {after.lines} {after.light.name}")
print()

print("an alert cannot be built dark or silent:")
try:
    UIAction(line1="Occlusion", alert=True)  # no red light
except ValueError as exc:
    print(f"  {exc}")
