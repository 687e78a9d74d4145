"""Walk the machine from OFF to a running infusion, one event at a time.

Run: python3 demos/01_state_walkthrough.py
"""

from t34sim.controller import (
    SEAT_SENSORS,
    TIMER_POWER_SETTLE,
    TIMER_PRELOAD,
    ButtonPress,
    InputButton,
    SensorChanged,
    SessionData,
    TimerExpired,
    dispatch,
    new_controller,
    new_hardware,
)
from t34sim.syringe_db import SEED_PATH, load_seed_store


def show(label, result):
    ui = result.ui
    print(f"{label:<28} -> {result.state.current.name}")
    for line in ui.lines:
        print(f"    |{line:<15}|")
    print(f"    light={ui.light.name} emphasis={ui.emphasis}")


store, boot_logs = load_seed_store(SEED_PATH)
print("seed store loaded:", ", ".join(boot_logs))
print()

state = new_controller(new_hardware(battery_level=99))
session = SessionData(store=store)
ui = None

events = [
    ("press ON/OFF", ButtonPress(InputButton.ON_OFF)),
    ("power settles", TimerExpired(TIMER_POWER_SETTLE)),
    ("preload window ends", TimerExpired(TIMER_PRELOAD)),
]
events += [(f"seat sensor {s}", SensorChanged(s, 1)) for s in SEAT_SENSORS]
events += [
    ("press YES (verify)", ButtonPress(InputButton.YES_START)),
    ("press YES (confirm)", ButtonPress(InputButton.YES_START)),
    ("press YES (start)", ButtonPress(InputButton.YES_START)),
]

for label, event in events:
    result = dispatch(state, event, session, ui)
    show(label, result)
    state, session, ui = result.state, result.session, result.ui

print()
print("confirmed flag:", session.confirmed)
print("selected preset:", session.selected.brand)
