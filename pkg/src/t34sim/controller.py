"""Behavioural state machine of the syringe driver.

Eleven behaviour states driven through a table of labeled arcs, each a
(trigger, guards, actions) triple. Dispatch is total: an event that matches
no arc is an identity step, the way a physical keypad ignores a meaningless
press. Every matched step chains the previous-state field from the state it
replaced.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
import json

from . import config
from .display import (
    EMPTY_ACTION,
    LightColor,
    UIAction,
    UIState,
    apply_action,
    format_quantity,
    render_info_screen,
)
from .syringe_db import SyringeStore, match_profiles, rate


# ---------- enumerations ----------

class BehaviourState(Enum):
    OFF = 0
    IDLE = 1
    PRELOADING = 2
    ACTUATOR_ON = 3
    SYRINGE_LOADED = 4
    SYRINGE_VERIFIED = 5
    SYRINGE_CONFIRMED = 6
    INFUSION_STARTED = 7
    PUMP_PAUSED = 8
    INFUSION_STOPPED = 9
    PUMP_INFO = 10


class InputButton(Enum):
    INFO = "INFO"
    UP = "UP"
    DOWN = "DOWN"
    YES_START = "YES_START"
    NO_STOP = "NO_STOP"
    FF = "FF"
    BACK = "BACK"
    ON_OFF = "ON_OFF"
    EMPTY = "EMPTY"  # no user key; autonomous and condition-driven steps only


class PressKind(Enum):
    SINGLE = "SINGLE"
    LONG = "LONG"


def percentage(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 100:
        raise ValueError(f"percentage out of range: {value!r}")
    return value


# ---------- sensor and timer identifiers ----------

SENSOR_CLAMP = "CLAMP"
SENSOR_PLUNGER = "PLUNGER"
SENSOR_FLANGE = "FLANGE"
SENSOR_POSITION = "POSITION"
SENSOR_BATTERY = "BATTERY"
SENSOR_DIAMETER = "DIAMETER"
SENSOR_KEY_HELD = "KEY_HELD"

SEAT_SENSORS = (SENSOR_CLAMP, SENSOR_PLUNGER, SENSOR_FLANGE)

TIMER_POWER_SETTLE = "power-settle"
TIMER_PRELOAD = "preload-window"
TIMER_CONFIRM = "confirm-timeout"
TIMER_DELIVERY_SETTLE = "delivery-settle"
TIMER_LOCK_WINDOW = "lock-window"

KNOWN_TIMERS = (
    TIMER_POWER_SETTLE,
    TIMER_PRELOAD,
    TIMER_CONFIRM,
    TIMER_DELIVERY_SETTLE,
    TIMER_LOCK_WINDOW,
)

# Timers cancelled when their owner behaviour state is left.
TIMER_OWNERS = {
    TIMER_POWER_SETTLE: BehaviourState.IDLE,
    TIMER_PRELOAD: BehaviourState.PRELOADING,
    TIMER_CONFIRM: BehaviourState.SYRINGE_CONFIRMED,
    TIMER_DELIVERY_SETTLE: BehaviourState.INFUSION_STARTED,
}

TIMER_DURATIONS = {
    TIMER_POWER_SETTLE: config.POWER_SETTLE_SECONDS,
    TIMER_PRELOAD: config.PRELOAD_WINDOW_SECONDS,
    TIMER_CONFIRM: config.CONFIRM_TIMEOUT_SECONDS,
    TIMER_DELIVERY_SETTLE: config.DELIVERY_SETTLE_SECONDS,
    TIMER_LOCK_WINDOW: config.LOCK_WINDOW_SECONDS,
}


# ---------- hardware and controller state ----------

@dataclass(frozen=True)
class HardwareState:
    is_battery_low: bool
    battery_level: int
    is_barrel_clamp_ok: bool = False
    is_plunger_ok: bool = False
    is_barrel_flange_ok: bool = False
    actuator_position: int = config.DEFAULT_ACTUATOR_POSITION
    occlusion: int = config.DEFAULT_OCCLUSION_MMHG
    max_rate: int = config.MAX_RATE_ML_H
    is_lcd_ok: bool = True
    is_led_ok: bool = True

    def __post_init__(self):
        percentage(self.battery_level)
        percentage(self.actuator_position)
        if self.is_battery_low != (self.battery_level < config.LOW_BATTERY_THRESHOLD):
            raise ValueError(
                f"is_battery_low must mirror battery_level {self.battery_level} "
                f"against the {config.LOW_BATTERY_THRESHOLD}% threshold"
            )

    @property
    def seated(self) -> bool:
        return self.is_barrel_clamp_ok and self.is_plunger_ok and self.is_barrel_flange_ok


def new_hardware(battery_level: int = config.DEFAULT_BATTERY_LEVEL, **fields) -> HardwareState:
    """Build a hardware snapshot with the low-battery flag derived."""
    return HardwareState(
        is_battery_low=battery_level < config.LOW_BATTERY_THRESHOLD,
        battery_level=battery_level,
        **fields,
    )


def pad_fixed(text: str, width: int, what: str) -> str:
    if len(text) > width:
        raise ValueError(f"{what} longer than {width} characters: {text!r}")
    return text.ljust(width)


@dataclass(frozen=True)
class ControllerState:
    previous: BehaviourState
    current: BehaviourState
    hardware: HardwareState
    keypad_lock: bool = False
    pump_id: str = config.PUMP_ID
    pump_version: str = config.DEFAULT_PUMP_VERSION
    supported_syringe_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pump_id", pad_fixed(self.pump_id, 12, "pump_id"))
        object.__setattr__(self, "pump_version", pad_fixed(self.pump_version, 10, "pump_version"))
        if self.supported_syringe_count < 0:
            raise ValueError("supported_syringe_count must be non-negative")


def new_controller(hardware: HardwareState, pump_version: str = config.DEFAULT_PUMP_VERSION,
                   supported_syringe_count: int = 0) -> ControllerState:
    return ControllerState(
        previous=BehaviourState.OFF,
        current=BehaviourState.OFF,
        hardware=hardware,
        keypad_lock=False,
        pump_version=pump_version,
        supported_syringe_count=supported_syringe_count,
    )


# ---------- events ----------

@dataclass(frozen=True)
class ButtonPress:
    button: InputButton
    kind: PressKind = PressKind.SINGLE


@dataclass(frozen=True)
class TimerExpired:
    timer_id: str


@dataclass(frozen=True)
class SensorChanged:
    sensor_id: str
    value: object  # int for levels and flags, "mm.mm" text for DIAMETER


@dataclass(frozen=True)
class PowerCycle:
    pass


def describe_event(event) -> str:
    if isinstance(event, ButtonPress):
        return "Left Click" if event.kind is PressKind.SINGLE else "Double Click"
    if isinstance(event, TimerExpired):
        return f"Timer {event.timer_id}"
    if isinstance(event, SensorChanged):
        return f"Sensor {event.sensor_id}={event.value}"
    if isinstance(event, PowerCycle):
        return "Power Cycle"
    return f"Unknown {event!r}"


# ---------- session data ----------

@dataclass(frozen=True)
class SessionData:
    """Controller-loop companion state that is not part of the device record:
    the preset store, sensed diameter, candidate matching, and the keypad
    lock gesture."""

    store: SyringeStore = field(default_factory=SyringeStore)
    diameter: object = config.DEFAULT_DIAMETER_MM
    candidates: tuple = ()
    selected: object = None
    confirmed: bool = False  # a syringe was confirmed since its insertion
    lock_armed: bool = False  # a long INFO press opened the lock gesture window


# ---------- power-on self-test ----------

@dataclass(frozen=True)
class PostItem:
    component: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class PostReport:
    items: tuple

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def alert_action(self):
        """Fail-safe alert for a failed self test, None when healthy."""
        if self.passed:
            return None
        failed = next(item for item in self.items if not item.passed)
        return UIAction(
            line1="Self Test Fail",
            line2=failed.component,
            light=LightColor.RED,
            emphasis=1,
            alert=True,
        )


def power_on_self_test(hardware: HardwareState) -> PostReport:
    """Check sensors, battery, LCD and LED before the device may leave OFF."""
    return PostReport(items=(
        PostItem("Sensors", True, "3 seat sensors responding"),
        PostItem("Battery", not hardware.is_battery_low,
                 f"{hardware.battery_level}%"),
        PostItem("LCD", hardware.is_lcd_ok),
        PostItem("LED", hardware.is_led_ok),
    ))


# ---------- triggers ----------

@dataclass(frozen=True)
class BtnTrigger:
    button: InputButton
    kind: PressKind = PressKind.SINGLE

    def describe(self) -> str:
        return f"button {self.button.value} {self.kind.value}"


@dataclass(frozen=True)
class TimerTrigger:
    timer_id: str

    def describe(self) -> str:
        return f"timer {self.timer_id}"


@dataclass(frozen=True)
class SeatTrigger:
    def describe(self) -> str:
        return "seat-sensor edge"


@dataclass(frozen=True)
class PositionTrigger:
    def describe(self) -> str:
        return "actuator-position edge"


@dataclass(frozen=True)
class BatteryTrigger:
    def describe(self) -> str:
        return "battery-level edge"


# ---------- guards ----------

GUARDS = {
    "post-ok": lambda state, session: power_on_self_test(state.hardware).passed,
    "post-fail": lambda state, session: not power_on_self_test(state.hardware).passed,
    "pos-full": lambda state, session: state.hardware.actuator_position == 100,
    "pos-not-full": lambda state, session: state.hardware.actuator_position < 100,
    "pos-zero": lambda state, session: state.hardware.actuator_position == 0,
    "seated": lambda state, session: state.hardware.seated,
    "confirmed": lambda state, session: session.confirmed,
    "has-selection": lambda state, session: session.selected is not None,
    "battery-low": lambda state, session: state.hardware.is_battery_low,
}


def guards_hold(names, state, session) -> bool:
    return all(GUARDS[name](state, session) for name in names)


# ---------- arcs ----------

@dataclass(frozen=True)
class Arc:
    name: str
    source: BehaviourState
    target: BehaviourState
    trigger: object
    guards: tuple = ()
    actions: tuple = ()


_S = BehaviourState
_B = InputButton

LOAD_PROMPT_GRAPHIC = "--([[[[[[[|===|"  # plunger fully retracted, barrel empty

TRANSITION_TABLE = (
    Arc("power-on", _S.OFF, _S.IDLE, BtnTrigger(_B.ON_OFF),
        ("post-ok",), ("show-splash", "arm-power-settle")),
    Arc("power-on-denied", _S.OFF, _S.OFF, BtnTrigger(_B.ON_OFF),
        ("post-fail",), ("show-post-fail",)),
    Arc("settle-to-preload", _S.IDLE, _S.PRELOADING, TimerTrigger(TIMER_POWER_SETTLE),
        (), ("show-preloading", "arm-preload")),
    Arc("key-to-preload", _S.IDLE, _S.PRELOADING, BtnTrigger(_B.ON_OFF),
        (), ("show-preloading", "arm-preload")),
    Arc("preload-cancel", _S.PRELOADING, _S.IDLE, BtnTrigger(_B.NO_STOP),
        (), ("show-info",)),
    Arc("preload-done-prompt", _S.PRELOADING, _S.ACTUATOR_ON, TimerTrigger(TIMER_PRELOAD),
        ("pos-full",), ("show-load-prompt",)),
    Arc("preload-done", _S.PRELOADING, _S.ACTUATOR_ON, TimerTrigger(TIMER_PRELOAD),
        ("pos-not-full",), ()),
    Arc("seat-syringe", _S.ACTUATOR_ON, _S.SYRINGE_LOADED, SeatTrigger(),
        ("seated",), ("compute-candidates", "show-loaded")),
    Arc("cycle-up", _S.SYRINGE_LOADED, _S.SYRINGE_LOADED, BtnTrigger(_B.UP),
        (), ("cycle-next", "show-candidate")),
    Arc("cycle-down", _S.SYRINGE_LOADED, _S.SYRINGE_LOADED, BtnTrigger(_B.DOWN),
        (), ("cycle-prev", "show-candidate")),
    Arc("verify-syringe", _S.SYRINGE_LOADED, _S.SYRINGE_VERIFIED, BtnTrigger(_B.YES_START),
        ("has-selection",), ("show-verify",)),
    Arc("confirm-prompt", _S.SYRINGE_VERIFIED, _S.SYRINGE_CONFIRMED, BtnTrigger(_B.YES_START),
        (), ("show-confirm", "arm-confirm")),
    Arc("start-infusion", _S.SYRINGE_CONFIRMED, _S.INFUSION_STARTED, BtnTrigger(_B.YES_START),
        (), ("set-confirmed", "show-delivering", "arm-delivery-settle")),
    Arc("confirm-timeout", _S.SYRINGE_CONFIRMED, _S.PUMP_PAUSED, TimerTrigger(TIMER_CONFIRM),
        (), ("show-paused",)),
    Arc("restart-paused", _S.PUMP_PAUSED, _S.INFUSION_STARTED, BtnTrigger(_B.YES_START),
        (), ("set-confirmed", "show-delivering", "arm-delivery-settle")),
    Arc("delivery-hub", _S.INFUSION_STARTED, _S.ACTUATOR_ON, TimerTrigger(TIMER_DELIVERY_SETTLE),
        (), ()),
    Arc("delivery-done", _S.ACTUATOR_ON, _S.INFUSION_STOPPED, PositionTrigger(),
        ("pos-zero", "confirmed"), ("show-done",)),
    Arc("reload-prompt", _S.ACTUATOR_ON, _S.ACTUATOR_ON, PositionTrigger(),
        ("pos-full",), ("show-load-prompt",)),
    Arc("resume", _S.INFUSION_STOPPED, _S.INFUSION_STARTED, BtnTrigger(_B.YES_START),
        (), ("show-resumed", "arm-delivery-settle")),
    Arc("power-off", _S.INFUSION_STOPPED, _S.OFF, BtnTrigger(_B.ON_OFF),
        (), ("show-off", "reset-session")),
    Arc("info-open", _S.ACTUATOR_ON, _S.PUMP_INFO, BtnTrigger(_B.INFO, PressKind.LONG),
        (), ("show-info",)),
    Arc("info-close", _S.PUMP_INFO, _S.ACTUATOR_ON, BtnTrigger(_B.INFO, PressKind.LONG),
        (), ("show-cleared",)),
    Arc("battery-warning", _S.PUMP_INFO, _S.PUMP_INFO, BatteryTrigger(),
        ("battery-low",), ("show-charge",)),
    Arc("plunger-back", _S.ACTUATOR_ON, _S.ACTUATOR_ON, BtnTrigger(_B.BACK),
        (), ("nudge-position",)),
)


def export_transition_table(table=TRANSITION_TABLE) -> str:
    """The arc table as line-delimited JSON records with a stable field order."""
    lines = []
    for arc in table:
        lines.append(json.dumps({
            "arc": arc.name,
            "from": arc.source.name,
            "to": arc.target.name,
            "trigger": arc.trigger.describe(),
            "guards": list(arc.guards),
            "actions": list(arc.actions),
        }))
    return "\n".join(lines) + "\n"


# ---------- step results ----------

@dataclass(frozen=True)
class TimerOp:
    op: str  # "arm" | "cancel"
    timer_id: str
    seconds: int = 0


def _arm(timer_id) -> TimerOp:
    return TimerOp("arm", timer_id, TIMER_DURATIONS[timer_id])


def _cancel(timer_id) -> TimerOp:
    return TimerOp("cancel", timer_id)


@dataclass(frozen=True)
class StepResult:
    state: ControllerState
    session: SessionData
    ui: UIState
    action: UIAction
    matched: bool
    arc: str = None
    logs: tuple = ()
    timer_ops: tuple = ()


# ---------- effects ----------

class _Step:
    """Mutable working set while one dispatch assembles its result."""

    def __init__(self, state, session, ui):
        self.state = state
        self.session = session
        self.ui = ui
        self.action = EMPTY_ACTION
        self.logs = []
        self.timer_ops = []

    def set_action(self, **kw):
        self.action = UIAction(**kw)


def _effect_show_splash(step):
    step.set_action(
        line1=step.state.pump_id.rstrip(),
        line2=step.state.pump_version.rstrip(),
        line3="Self Test OK",
        light=LightColor.GREEN,
        emphasis=1,
    )


def _effect_show_post_fail(step):
    report = power_on_self_test(step.state.hardware)
    step.action = report.alert_action() or EMPTY_ACTION
    step.logs.append("Self test failed")


def _effect_show_preloading(step):
    step.set_action(line1="Preloading", line2="", line3="",
                    light=LightColor.GREEN, emphasis=1)


def _effect_show_info(step):
    info = render_info_screen(step.state)
    step.set_action(line1=info.line1, line2=info.line2, line3=info.line3,
                    light=info.light, emphasis=info.emphasis)


def _effect_show_load_prompt(step):
    step.set_action(line1=LOAD_PROMPT_GRAPHIC, line2="Load Syringe", line3="",
                    light=LightColor.RED, emphasis=2, alert=True)


def _effect_compute_candidates(step):
    hw = step.state.hardware
    sensors = (hw.is_barrel_clamp_ok, hw.is_plunger_ok, hw.is_barrel_flange_ok)
    candidates = match_profiles(step.session.store, step.session.diameter, sensors)
    selected = candidates[0] if len(candidates) == 1 else None
    step.session = replace(step.session, candidates=candidates,
                           selected=selected, confirmed=False)
    for profile in candidates:
        step.logs.append(f"Syringe match: {profile.brand} "
                         f"{format_quantity(profile.fill_volume, 'ml')}")
    if selected is None:
        step.logs.append(f"Awaiting syringe selection ({len(candidates)} matches)")


def _effect_show_loaded(step):
    step.set_action(line1="Syringe Loaded", line2="Correctly", line3="Press YES",
                    light=LightColor.GREEN, emphasis=1)


def _cycle(step, offset):
    candidates = step.session.candidates
    if not candidates:
        step.logs.append("No syringe candidates to select")
        return
    if step.session.selected in candidates:
        index = (candidates.index(step.session.selected) + offset) % len(candidates)
    else:
        index = 0 if offset > 0 else len(candidates) - 1
    selected = candidates[index]
    step.session = replace(step.session, selected=selected)
    step.logs.append(f"Selected {selected.brand}")


def _effect_cycle_next(step):
    _cycle(step, +1)


def _effect_cycle_prev(step):
    _cycle(step, -1)


def _effect_show_candidate(step):
    selected = step.session.selected
    if selected is None:
        return
    step.set_action(line2=selected.brand, line3="Press YES", emphasis=2)


def _effect_show_verify(step):
    profile = step.session.selected
    step.set_action(
        line1=f"Vol. {format_quantity(profile.fill_volume, 'ml')}",
        line2=f"Rate {format_quantity(rate(profile), 'ml/h')}",
        line3="Press YES",
        light=LightColor.GREEN,
        emphasis=1,
    )


def _effect_show_confirm(step):
    step.set_action(line1="", line2="", line3="Start Infusion?", emphasis=3)


def _effect_set_confirmed(step):
    step.session = replace(step.session, confirmed=True)


def _effect_show_delivering(step):
    step.set_action(line1="Pump Delivering", line2="", line3="",
                    light=LightColor.GREEN, emphasis=1)


def _effect_show_paused(step):
    step.set_action(line1="Pump Paused", line2="too Long", line3="",
                    light=LightColor.RED, emphasis=1, alert=True)


def _effect_show_done(step):
    step.set_action(line1="Delivery Done", line2="", line3="",
                    light=LightColor.RED, emphasis=1, alert=True)


def _effect_show_resumed(step):
    step.set_action(line1="Resumed", line2="Successfully", line3="",
                    light=LightColor.GREEN, emphasis=1)


def _effect_show_off(step):
    step.set_action(line1="", line2="", line3="", light=LightColor.OFF, emphasis=0)


def _effect_show_cleared(step):
    step.set_action(line1="", line2="", line3="", light=LightColor.GREEN, emphasis=0)


def _effect_show_charge(step):
    step.set_action(line1="Charge Battery", light=LightColor.RED, emphasis=1, alert=True)


def _effect_reset_session(step):
    step.session = replace(step.session, candidates=(), selected=None, confirmed=False)


def _effect_nudge_position(step):
    pos = min(100, step.state.hardware.actuator_position + 1)
    step.state = replace(step.state, hardware=replace(step.state.hardware,
                                                      actuator_position=pos))
    step.logs.append(f"Plunger position {pos}")
    if pos == 100:
        _effect_show_load_prompt(step)


def _effect_arm(timer_id):
    def run(step):
        step.timer_ops.append(_arm(timer_id))
    return run


EFFECTS = {
    "show-splash": _effect_show_splash,
    "show-post-fail": _effect_show_post_fail,
    "show-preloading": _effect_show_preloading,
    "show-info": _effect_show_info,
    "show-load-prompt": _effect_show_load_prompt,
    "compute-candidates": _effect_compute_candidates,
    "show-loaded": _effect_show_loaded,
    "cycle-next": _effect_cycle_next,
    "cycle-prev": _effect_cycle_prev,
    "show-candidate": _effect_show_candidate,
    "show-verify": _effect_show_verify,
    "show-confirm": _effect_show_confirm,
    "set-confirmed": _effect_set_confirmed,
    "show-delivering": _effect_show_delivering,
    "show-paused": _effect_show_paused,
    "show-done": _effect_show_done,
    "show-resumed": _effect_show_resumed,
    "show-off": _effect_show_off,
    "show-cleared": _effect_show_cleared,
    "show-charge": _effect_show_charge,
    "reset-session": _effect_reset_session,
    "nudge-position": _effect_nudge_position,
    "arm-power-settle": _effect_arm(TIMER_POWER_SETTLE),
    "arm-preload": _effect_arm(TIMER_PRELOAD),
    "arm-confirm": _effect_arm(TIMER_CONFIRM),
    "arm-delivery-settle": _effect_arm(TIMER_DELIVERY_SETTLE),
}


# ---------- arc matching and firing ----------

def _trigger_matches(trigger, event) -> bool:
    if isinstance(event, ButtonPress):
        return isinstance(trigger, BtnTrigger) and trigger.button is event.button \
            and trigger.kind is event.kind
    if isinstance(event, TimerExpired):
        return isinstance(trigger, TimerTrigger) and trigger.timer_id == event.timer_id
    if isinstance(event, SensorChanged):
        if event.sensor_id in SEAT_SENSORS:
            return isinstance(trigger, SeatTrigger)
        if event.sensor_id == SENSOR_POSITION:
            return isinstance(trigger, PositionTrigger)
        if event.sensor_id == SENSOR_BATTERY:
            return isinstance(trigger, BatteryTrigger)
    return False


# table tuples are hashable; index arcs by source once per distinct table
_SOURCE_INDEX = {}


def _arcs_from(table, source):
    index = _SOURCE_INDEX.get(table)
    if index is None:
        index = {}
        for arc in table:
            index.setdefault(arc.source, []).append(arc)
        _SOURCE_INDEX[table] = index
    return index.get(source, ())


def _find_arc(table, state, session, event):
    for arc in _arcs_from(table, state.current):
        if not _trigger_matches(arc.trigger, event):
            continue
        if guards_hold(arc.guards, state, session):
            return arc
    return None


def _fire(arc, state, session, ui) -> StepResult:
    step = _Step(state, session, ui)
    for name in arc.actions:
        EFFECTS[name](step)
    chained = replace(step.state, previous=state.current, current=arc.target)
    if arc.target is not state.current:
        for timer_id, owner in TIMER_OWNERS.items():
            if owner is state.current:
                step.timer_ops.append(_cancel(timer_id))
    ui_after = _apply_checked(step, chained)
    step.logs.append(f"PREVIOUS STATE is:{chained.previous.name}")
    return StepResult(
        state=chained,
        session=step.session,
        ui=ui_after,
        action=step.action,
        matched=True,
        arc=arc.name,
        logs=tuple(step.logs),
        timer_ops=tuple(step.timer_ops),
    )


def _apply_checked(step, state):
    """Apply the accumulated action; display contract breaches must surface
    as logged alerts, never as crashes out of dispatch."""
    try:
        return apply_action(step.ui, step.action)
    except ValueError as exc:
        step.logs.append(f"Display contract breach: {exc}")
        step.action = UIAction(line1="Display Fault", light=LightColor.RED,
                               emphasis=1, alert=True)
        return apply_action(step.ui, step.action)


# ---------- dispatch ----------

def _identity(state, session, ui, logs) -> StepResult:
    return StepResult(state=state, session=session, ui=ui, action=EMPTY_ACTION,
                      matched=False, logs=tuple(logs))


def _bookkeep(state, session, ui, action, logs, timer_ops=()) -> StepResult:
    """A dispatch-level transition outside the arc table (lock toggle,
    power cycle). Chains previous like any matched step."""
    chained = replace(state, previous=state.current)
    return StepResult(state=chained, session=session, ui=apply_action(ui, action),
                      action=action, matched=True, logs=tuple(logs),
                      timer_ops=tuple(timer_ops))


def _mirror_sensor(state, session, event):
    """Fold a sensor report into the hardware snapshot (hardware is reality).

    Returns (state, session, changed). DIAMETER updates the session instead;
    KEY_HELD is a marker with no hardware field.
    """
    hw = state.hardware
    sid, value = event.sensor_id, event.value
    if sid == SENSOR_CLAMP:
        hw = replace(hw, is_barrel_clamp_ok=bool(value))
    elif sid == SENSOR_PLUNGER:
        hw = replace(hw, is_plunger_ok=bool(value))
    elif sid == SENSOR_FLANGE:
        hw = replace(hw, is_barrel_flange_ok=bool(value))
    elif sid == SENSOR_POSITION:
        hw = replace(hw, actuator_position=percentage(value))
    elif sid == SENSOR_BATTERY:
        level = percentage(value)
        hw = replace(hw, battery_level=level,
                     is_battery_low=level < config.LOW_BATTERY_THRESHOLD)
    elif sid == SENSOR_DIAMETER:
        from .quantities import centi
        session = replace(session, diameter=centi(value))
        return state, session, False
    elif sid == SENSOR_KEY_HELD:
        return state, session, False
    else:
        return state, session, False
    if hw == state.hardware:
        return state, session, False
    return replace(state, hardware=hw), session, True


def dispatch(state: ControllerState, event, session: SessionData = None,
             ui: UIState = None, table=TRANSITION_TABLE) -> StepResult:
    """Route one event through the machine. Total: never raises on events."""
    if session is None:
        session = SessionData()
    if ui is None:
        ui = UIState()
    logs = [f"Log Event: {describe_event(event)}"]

    if isinstance(event, PowerCycle):
        action = UIAction(line1="", line2="", line3="", light=LightColor.OFF, emphasis=0)
        result = _bookkeep(
            replace(state, current=BehaviourState.OFF, keypad_lock=False),
            replace(session, candidates=(), selected=None, confirmed=False,
                    lock_armed=False),
            ui, action, logs, timer_ops=[_cancel(t) for t in KNOWN_TIMERS])
        # previous must chain from the pre-cycle state, not the OFF we forced
        return replace(result, state=replace(result.state, previous=state.current))

    if isinstance(event, ButtonPress):
        return _dispatch_button(state, event, session, ui, logs, table)

    if isinstance(event, TimerExpired):
        if event.timer_id == TIMER_LOCK_WINDOW:
            if session.lock_armed:
                session = replace(session, lock_armed=False)
                logs.append("Lock gesture window closed")
            return _identity(state, session, ui, logs)
        # timers are never lock-gated; a lock blocks keys, not deadlines
        arc = _find_arc(table, state, session, event)
        if arc is None:
            return _identity(state, session, ui, logs)
        result = _fire(arc, state, session, ui)
        return replace(result, logs=tuple(logs) + result.logs)

    if isinstance(event, SensorChanged):
        state, session, changed = _mirror_sensor(state, session, event)
        if not changed:
            return _identity(state, session, ui, logs)
        arc = _find_arc(table, state, session, event)
        if arc is None:
            return _identity(state, session, ui, logs)
        result = _fire(arc, state, session, ui)
        return replace(result, logs=tuple(logs) + result.logs)

    logs.append("Unrecognised event ignored")
    return _identity(state, session, ui, logs)


def _dispatch_button(state, event, session, ui, logs, table):
    button, kind = event.button, event.kind
    arms_gesture = (button is InputButton.INFO and kind is PressKind.LONG
                    and state.current is not BehaviourState.OFF)

    # Locked keypad: only INFO and the unlock gesture's YES get through.
    if state.keypad_lock and button is not InputButton.INFO:
        if session.lock_armed and button is InputButton.YES_START:
            return _toggle_lock(state, session, ui, logs)
        logs.append("Keypad Locked: input ignored")
        if session.lock_armed:
            session = replace(session, lock_armed=False)
        return _identity(state, session, ui, logs)

    arc = None
    if button is not InputButton.EMPTY:
        arc = _find_arc(table, state, session, event)

    if arc is not None:
        consumed_gesture = session.lock_armed
        if consumed_gesture:
            session = replace(session, lock_armed=False)
        result = _fire(arc, state, session, ui)
        timer_ops = result.timer_ops
        if consumed_gesture:
            timer_ops = timer_ops + (_cancel(TIMER_LOCK_WINDOW),)
        if arms_gesture:
            result = replace(result, session=replace(result.session, lock_armed=True))
            timer_ops = timer_ops + (_arm(TIMER_LOCK_WINDOW),)
        return replace(result, logs=tuple(logs) + result.logs, timer_ops=timer_ops)

    if session.lock_armed and button is InputButton.YES_START:
        return _toggle_lock(state, session, ui, logs)

    timer_ops = []
    if session.lock_armed and not arms_gesture:
        session = replace(session, lock_armed=False)
        timer_ops.append(_cancel(TIMER_LOCK_WINDOW))
    if arms_gesture:
        session = replace(session, lock_armed=True)
        timer_ops.append(_arm(TIMER_LOCK_WINDOW))
        logs.append("Lock gesture armed")
        result = _identity(state, session, ui, logs)
        return replace(result, timer_ops=tuple(timer_ops))

    result = _identity(state, session, ui, logs)
    return replace(result, timer_ops=tuple(timer_ops))


def _toggle_lock(state, session, ui, logs):
    locked = not state.keypad_lock
    label = "Keypad Locked" if locked else "Keypad Unlocked"
    logs.append(label)
    action = UIAction(line3=label, emphasis=3)
    session = replace(session, lock_armed=False)
    result = _bookkeep(replace(state, keypad_lock=locked), session, ui, action,
                       logs, timer_ops=(_cancel(TIMER_LOCK_WINDOW),))
    return result


# ---------- the update-control entry point ----------

def update_control(state: ControllerState, prev: BehaviourState, button: InputButton,
                   kind: PressKind = PressKind.SINGLE, session: SessionData = None,
                   ui: UIState = None):
    """Single-step the machine on a key (or EMPTY for autonomous steps).

    Returns (new state, UIAction). The returned state's previous field equals
    the input state's current field whenever a transition fired; otherwise
    the state comes back unchanged with an empty action. prev is the caller's
    record of how state.current was reached; it does not steer matching.
    """
    if session is None:
        session = SessionData()
    if ui is None:
        ui = UIState()
    if button is InputButton.EMPTY:
        for arc in TRANSITION_TABLE:
            if arc.source is not state.current:
                continue
            if isinstance(arc.trigger, BtnTrigger):
                continue
            if guards_hold(arc.guards, state, session):
                result = _fire(arc, state, session, ui)
                return result.state, result.action
        return state, EMPTY_ACTION
    result = dispatch(state, ButtonPress(button, kind), session, ui)
    return result.state, result.action
