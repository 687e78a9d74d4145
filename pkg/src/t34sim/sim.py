"""Discrete-event harness: virtual clock, seeded randomness, scenario replay.

A scenario is a seed, an optional epoch, hardware overrides, and a script of
timed events. Replay is exact: the same scenario file always yields the same
trace bytes and the same log bytes.
"""

from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from fractions import Fraction
import json
import os

from . import config, safety
from .controller import (
    KNOWN_TIMERS,
    ButtonPress,
    InputButton,
    PowerCycle,
    PressKind,
    SensorChanged,
    SessionData,
    TimerExpired,
    dispatch,
    new_controller,
    new_hardware,
)
from .display import EMPTY_ACTION, UIAction, UIState
from .quantities import centi
from .syringe_db import SEED_PATH, load_seed_store


# ---------- seeded randomness ----------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The splitmix64 generator, bit-exact against its reference stream."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_percentage(self) -> int:
        return self.next_u64() % 101


def seeded_percentage(seed: int) -> int:
    return SplitMix64(seed).next_percentage()


def seeded_rate(seed: int) -> Fraction:
    """A reproducible flow rate on the hundredth grid, never zero and never
    over the cap."""
    scale = max(seeded_percentage(seed), 1)
    return Fraction(scale * config.MAX_RATE_ML_H, 100)


# ---------- virtual clock ----------

@dataclass(frozen=True)
class VirtualClock:
    """Integer-second clock with one-shot named timers. Arming an id that is
    already pending replaces its deadline. Due timers fire in (deadline, id)
    order so ties never depend on arming order."""

    now: int = 0
    pending: tuple = ()  # (deadline, timer_id) pairs, kept sorted

    def arm(self, timer_id: str, seconds: int) -> "VirtualClock":
        if seconds < 0:
            raise ValueError(f"cannot arm {timer_id!r} {seconds}s in the past")
        entries = [entry for entry in self.pending if entry[1] != timer_id]
        entries.append((self.now + seconds, timer_id))
        entries.sort()
        return replace(self, pending=tuple(entries))

    def cancel(self, timer_id: str) -> "VirtualClock":
        entries = tuple(entry for entry in self.pending if entry[1] != timer_id)
        if len(entries) == len(self.pending):
            return self
        return replace(self, pending=entries)

    def peek(self, limit: int):
        """Earliest (deadline, timer_id) due at or before limit, else None."""
        if self.pending and self.pending[0][0] <= limit:
            return self.pending[0]
        return None

    def pop(self):
        """Remove the earliest pending timer, moving now to its deadline."""
        (deadline, timer_id), rest = self.pending[0], self.pending[1:]
        return replace(self, now=max(self.now, deadline), pending=rest), timer_id

    def advance(self, seconds: int):
        """Pure advance with no re-arming: returns the clock at now+seconds
        plus every (time, timer_id) that fired inside the window."""
        if seconds < 0:
            raise ValueError("cannot advance backwards")
        target = self.now + seconds
        clock = self
        fired = []
        while True:
            due = clock.peek(target)
            if due is None:
                break
            clock, timer_id = clock.pop()
            fired.append((clock.now, timer_id))
        return replace(clock, now=target), tuple(fired)


# ---------- timestamped log ----------

DEFAULT_EPOCH = "2022-09-26 03:27:00.00"
EPOCH_ENV = "T34SIM_EPOCH"


def default_epoch() -> str:
    return os.environ.get(EPOCH_ENV, DEFAULT_EPOCH)


def _parse_epoch(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%d %H:%M:%S.%f")


@dataclass(frozen=True)
class LogEntry:
    t: int  # centiseconds since the epoch
    message: str


def append_log(log: tuple, t: int, message: str) -> tuple:
    return log + (LogEntry(t, message),)


def render_log_entry(entry: LogEntry, epoch: str = None) -> str:
    moment = _parse_epoch(epoch or default_epoch()) + timedelta(milliseconds=entry.t * 10)
    centi_part = moment.microsecond // 10000
    return f"{moment:%Y-%m-%d %H:%M:%S}.{centi_part:02d} : {entry.message}"


def render_log(log: tuple, epoch: str = None) -> str:
    if not log:
        return ""
    return "\n".join(render_log_entry(entry, epoch) for entry in log) + "\n"


# ---------- event codec ----------

class ScenarioError(ValueError):
    """A scenario or trace file failed validation."""


def encode_event(event) -> dict:
    if isinstance(event, ButtonPress):
        return {"kind": "button", "button": event.button.value,
                "press": event.kind.value}
    if isinstance(event, TimerExpired):
        return {"kind": "timer", "id": event.timer_id}
    if isinstance(event, SensorChanged):
        return {"kind": "sensor", "id": event.sensor_id, "value": event.value}
    if isinstance(event, PowerCycle):
        return {"kind": "power_cycle"}
    raise ScenarioError(f"cannot encode event {event!r}")


def _expect_keys(payload, allowed, where):
    extra = set(payload) - set(allowed)
    if extra:
        raise ScenarioError(f"{where}: unknown keys {sorted(extra)}")


def decode_event(payload) -> object:
    if not isinstance(payload, dict) or "kind" not in payload:
        raise ScenarioError(f"event must be an object with a kind: {payload!r}")
    kind = payload["kind"]
    if kind == "button":
        _expect_keys(payload, ("kind", "button", "press"), "button event")
        try:
            button = InputButton(payload["button"])
            press = PressKind(payload.get("press", "SINGLE"))
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"bad button event: {payload!r}") from exc
        return ButtonPress(button, press)
    if kind == "timer":
        _expect_keys(payload, ("kind", "id"), "timer event")
        timer_id = payload.get("id")
        if not isinstance(timer_id, str) or not timer_id:
            raise ScenarioError(f"timer event needs a non-empty id: {payload!r}")
        return TimerExpired(timer_id)
    if kind == "sensor":
        _expect_keys(payload, ("kind", "id", "value"), "sensor event")
        sensor_id = payload.get("id")
        value = payload.get("value")
        if not isinstance(sensor_id, str) or not sensor_id:
            raise ScenarioError(f"sensor event needs an id: {payload!r}")
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ScenarioError(f"sensor value must be an int or text: {payload!r}")
        return SensorChanged(sensor_id, value)
    if kind == "power_cycle":
        _expect_keys(payload, ("kind",), "power_cycle event")
        return PowerCycle()
    raise ScenarioError(f"unknown event kind {kind!r}")


# ---------- scenarios ----------

_HARDWARE_KEYS = (
    "battery_level", "actuator_position", "is_barrel_clamp_ok", "is_plunger_ok",
    "is_barrel_flange_ok", "occlusion", "is_lcd_ok", "is_led_ok", "diameter",
)


@dataclass(frozen=True)
class Scenario:
    seed: int = 0
    epoch: str = None
    hardware: dict = field(default_factory=dict)
    script: tuple = ()  # (t, event) pairs, t non-decreasing
    name: str = "<scenario>"


def parse_scenario(text: str, name: str = "<scenario>") -> Scenario:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{name}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ScenarioError(f"{name}: scenario must be a JSON object")
    _expect_keys(payload, ("seed", "epoch", "hardware", "script"), name)
    seed = payload.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ScenarioError(f"{name}: seed must be a non-negative integer")
    epoch = payload.get("epoch")
    if epoch is not None:
        if not isinstance(epoch, str):
            raise ScenarioError(f"{name}: epoch must be text")
        try:
            _parse_epoch(epoch)
        except ValueError as exc:
            raise ScenarioError(f"{name}: bad epoch {epoch!r}") from exc
    hardware = payload.get("hardware", {})
    if not isinstance(hardware, dict):
        raise ScenarioError(f"{name}: hardware must be an object")
    _expect_keys(hardware, _HARDWARE_KEYS, f"{name} hardware")
    script = []
    last_t = 0
    for index, row in enumerate(payload.get("script", ())):
        where = f"{name} script[{index}]"
        if not isinstance(row, dict):
            raise ScenarioError(f"{where}: must be an object")
        _expect_keys(row, ("t", "event"), where)
        t = row.get("t")
        if isinstance(t, bool) or not isinstance(t, int) or t < 0:
            raise ScenarioError(f"{where}: t must be a non-negative integer")
        if t < last_t:
            raise ScenarioError(f"{where}: t={t} goes backwards")
        last_t = t
        event = decode_event(row.get("event"))
        if isinstance(event, TimerExpired) and event.timer_id in KNOWN_TIMERS:
            raise ScenarioError(
                f"{where}: timer {event.timer_id!r} is clock-owned and cannot "
                f"be scripted")
        script.append((t, event))
    return Scenario(seed=seed, epoch=epoch, hardware=hardware,
                    script=tuple(script), name=name)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as handle:
        return parse_scenario(handle.read(), name=str(path))


# ---------- live session ----------

@dataclass(frozen=True)
class TraceStep:
    t: int
    event: object
    state: object
    ui: UIState
    session: SessionData
    action: UIAction = EMPTY_ACTION
    matched: bool = False
    logs: tuple = ()


class Session:
    """One live device: controller state, preset store, virtual clock,
    display, log, trace, and the requirement monitor folded over each step.

    The clock is driven stepwise so a timer armed halfway through an advance
    still fires inside the same window.
    """

    def __init__(self, scenario: Scenario = None, mutations=(),
                 seed_path=SEED_PATH):
        scenario = scenario if scenario is not None else Scenario()
        self.scenario = scenario
        self.mutations = tuple(mutations)
        self.table = safety.mutated_table(self.mutations)
        flags = safety.loader_flags(self.mutations)
        store, seed_logs = load_seed_store(seed_path, **flags)
        self.rng = SplitMix64(scenario.seed)
        overrides = dict(scenario.hardware)
        diameter = overrides.pop("diameter", None)
        battery = overrides.pop("battery_level", None)
        if battery is None:
            battery = self.rng.next_percentage()
        self.state = new_controller(new_hardware(battery, **overrides),
                                    supported_syringe_count=len(store))
        self.session = SessionData(
            store=store,
            diameter=centi(diameter) if diameter is not None
            else config.DEFAULT_DIAMETER_MM,
        )
        self.ui = UIState()
        self.clock = VirtualClock()
        self.log = ()
        for line in seed_logs:
            self.log = append_log(self.log, 0, line)
        self.trace = []
        self.violations = []
        self.epoch = scenario.epoch or default_epoch()

    @property
    def now(self) -> int:
        return self.clock.now

    def inject(self, event):
        """Apply one external event now, then everything it made due."""
        steps = [self._step(event)]
        steps += self._drain_due()
        return steps

    def advance(self, seconds: int):
        """Move time forward, firing due timers in deadline order."""
        if seconds < 0:
            raise ValueError("cannot advance backwards")
        target = self.clock.now + seconds
        steps = []
        while True:
            due = self.clock.peek(target)
            if due is None:
                break
            self.clock, timer_id = self.clock.pop()
            steps.append(self._step(TimerExpired(timer_id)))
        self.clock = replace(self.clock, now=target)
        return steps

    def _drain_due(self):
        steps = []
        while True:
            due = self.clock.peek(self.clock.now)
            if due is None:
                break
            self.clock, timer_id = self.clock.pop()
            steps.append(self._step(TimerExpired(timer_id)))
        return steps

    def _step(self, event) -> TraceStep:
        before_state, before_session = self.state, self.session
        result = dispatch(self.state, event, self.session, self.ui,
                          table=self.table)
        clock = self.clock
        for op in result.timer_ops:
            if op.op == "arm":
                clock = clock.arm(op.timer_id, op.seconds)
            else:
                clock = clock.cancel(op.timer_id)
        self.clock = clock
        t = self.clock.now
        for line in result.logs:
            self.log = append_log(self.log, t * 100, line)
        step = TraceStep(t=t, event=event, state=result.state, ui=result.ui,
                         session=result.session, action=result.action,
                         matched=result.matched, logs=result.logs)
        self.trace.append(step)
        self.violations.extend(safety.check_state(
            result.state, result.ui, result.session))
        self.violations.extend(safety.check_transition(
            before_state, result.state, event, result.action,
            before_session, result.session))
        self.state = result.state
        self.session = result.session
        self.ui = result.ui
        return step


# ---------- scenario runs ----------

@dataclass(frozen=True)
class SimReport:
    scenario: Scenario
    epoch: str
    mutations: tuple
    trace: tuple
    log: tuple
    violations: tuple
    final: object
    final_ui: UIState


def run_scenario(scenario: Scenario, mutations=(), seed_path=SEED_PATH) -> SimReport:
    session = Session(scenario, mutations, seed_path)
    for t, event in scenario.script:
        session.advance(t - session.now)
        session.inject(event)
    found = list(session.violations)
    found += safety.check_trace(session.trace)
    deduped = {}
    for item in found:
        deduped.setdefault((item.requirement_id, item.message), item)
    return SimReport(
        scenario=scenario,
        epoch=session.epoch,
        mutations=tuple(mutations),
        trace=tuple(session.trace),
        log=session.log,
        violations=tuple(deduped.values()),
        final=session.state,
        final_ui=session.ui,
    )


# ---------- trace files ----------

def step_record(step: TraceStep) -> dict:
    return {
        "t": step.t,
        "event": encode_event(step.event),
        "prev": step.state.previous.name,
        "curr": step.state.current.name,
        "line1": step.ui.line1,
        "line2": step.ui.line2,
        "line3": step.ui.line3,
        "light": step.ui.light.name,
        "emphasis": step.ui.emphasis,
    }


def trace_lines(report: SimReport) -> list:
    header = {"header": {
        "seed": report.scenario.seed,
        "epoch": report.epoch,
        "hardware": report.scenario.hardware,
        "mutations": list(report.mutations),
    }}
    lines = [json.dumps(header)]
    for step in report.trace:
        lines.append(json.dumps(step_record(step)))
    return lines


def render_trace(report: SimReport) -> str:
    return "\n".join(trace_lines(report)) + "\n"


def parse_trace(text: str, name: str = "<trace>"):
    """Split a trace file back into its header and step records."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ScenarioError(f"{name}: empty trace")
    rows = []
    for number, line in enumerate(lines, start=1):
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{name}:{number}: {exc.msg}") from exc
    head = rows[0]
    if not isinstance(head, dict) or "header" not in head:
        raise ScenarioError(f"{name}: first line must hold the header")
    header = head["header"]
    _expect_keys(header, ("seed", "epoch", "hardware", "mutations"), f"{name} header")
    return header, rows[1:]


def scenario_from_trace(header, steps, name: str = "<trace>") -> Scenario:
    """Rebuild the external script from a trace: clock-owned timer firings
    were internal, everything else was injected."""
    script = []
    for row in steps:
        event = decode_event(row.get("event"))
        if isinstance(event, TimerExpired) and event.timer_id in KNOWN_TIMERS:
            continue
        t = row.get("t")
        if isinstance(t, bool) or not isinstance(t, int) or t < 0:
            raise ScenarioError(f"{name}: step has a bad time {t!r}")
        script.append((t, event))
    return Scenario(
        seed=header.get("seed", 0),
        epoch=header.get("epoch"),
        hardware=header.get("hardware", {}),
        script=tuple(script),
        name=name,
    )


def render_violations(violations) -> str:
    if not violations:
        return "no violations\n"
    lines = []
    for item in violations:
        lines.append(f"[{item.requirement_id}] {item.hazard}: {item.message}")
        for event in item.witness:
            lines.append(f"    {json.dumps(encode_event(event))}")
    return "\n".join(lines) + "\n"
