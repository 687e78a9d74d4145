"""Safety requirement monitor and explicit-state verifier.

Two enforcement routes that stay separate on purpose: a runtime monitor over
concrete states, transitions and timed traces, and an exhaustive search of a
finite abstraction of the control loop. Each requirement carries the hazard
it mitigates so reports group by consequence rather than by module.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

from . import config
from .controller import (
    TIMER_CONFIRM,
    TIMER_LOCK_WINDOW,
    Arc,
    BehaviourState,
    ButtonPress,
    ControllerState,
    InputButton,
    PowerCycle,
    PressKind,
    SENSOR_BATTERY,
    SENSOR_CLAMP,
    SENSOR_FLANGE,
    SENSOR_PLUNGER,
    SENSOR_POSITION,
    SENSOR_KEY_HELD,
    SessionData,
    SensorChanged,
    TimerExpired,
    TRANSITION_TABLE,
    dispatch,
    new_controller,
    new_hardware,
    power_on_self_test,
)
from .display import UIState, LightColor, apply_action
from .syringe_db import SEED_PATH, SyringeStore, load_seed_store, match_profiles, tolerance


# ---------- requirements and hazards ----------

@dataclass(frozen=True)
class Requirement:
    requirement_id: str
    hazard: str
    description: str


_R = Requirement

REQUIREMENTS = {r.requirement_id: r for r in (
    _R("1.1.1", "Delivery Quantity",
       "delivery follows the programmed rate over the whole infusion"),
    _R("1.1.2", "Syringe Data Integrity",
       "delivery starts only from a confirmed, paused, or stopped state"),
    _R("1.1.3", "Critical Performance",
       "the device reaches a usable state after power on"),
    _R("1.1.4", "Delivery Quantity",
       "volume delivered tracks elapsed delivery time within tolerance"),
    _R("1.2.1", "Delivery Quantity",
       "remaining volume accounting never goes negative"),
    _R("1.2.2", "Syringe Data Integrity",
       "a syringe is accepted only with clamp, plunger, and flange seated"),
    _R("1.2.3", "Critical Performance",
       "the occlusion threshold stays inside the calibrated range"),
    _R("1.2.4", "Alert",
       "an interruption longer than five minutes raises repeated alerts"),
    _R("1.2.5", "Critical Performance",
       "no stored preset may demand more than the rate cap"),
    _R("1.3.1", "Delivery Quantity",
       "progress reporting stays consistent with the fill volume"),
    _R("1.3.2", "Alert",
       "the end of a delivery is announced"),
    _R("1.4.1", "Syringe Data Integrity",
       "the control loop never rewrites the preset store"),
    _R("1.4.2", "Syringe Data Integrity",
       "the preset store holds no duplicate brand and fill pairs"),
    _R("2.1.1", "Alert",
       "every display line fits the fifteen character panel"),
    _R("2.1.2", "Alert",
       "waiting for input warns after a minute, and a pending confirmation "
       "always has its window armed"),
    _R("2.3.1", "Critical Performance",
       "the keypad stays responsive outside a deliberate lock"),
    _R("2.3.2", "Syringe Data Integrity",
       "presets are validated before they reach the store"),
    _R("2.3.3", "Alert",
       "a key held for three minutes raises an alert"),
    _R("3.1.1", "Voltage",
       "leaving the off state is gated on the power-on self test"),
    _R("3.2.1", "Alert",
       "a pending confirmation is resolved within its two minute window"),
    _R("3.2.2", "Alert",
       "every alert shows a red light and a message"),
    _R("3.2.3", "Critical Performance",
       "dispatch bookkeeping stays consistent from step to step"),
)}

DEFAULT_HAZARD = "Critical Performance"


def hazard_for(requirement_id: str) -> str:
    entry = REQUIREMENTS.get(requirement_id)
    return entry.hazard if entry is not None else DEFAULT_HAZARD


@dataclass(frozen=True)
class Violation:
    requirement_id: str
    hazard: str
    message: str
    witness: tuple = ()


def violation(requirement_id, message, witness=()) -> Violation:
    return Violation(requirement_id, hazard_for(requirement_id), message, tuple(witness))


# ---------- single-state and single-step checks ----------

# fill volumes above rate cap * infusion hours cannot be delivered in time;
# written as plain arithmetic so this check shares nothing with rate()
_MAX_FILL_ML = Fraction(config.MAX_RATE_ML_H * config.INFUSION_HOURS)

_DELIVERING = (BehaviourState.INFUSION_STARTED, BehaviourState.ACTUATOR_ON)

_START_SOURCES = (
    BehaviourState.SYRINGE_CONFIRMED,
    BehaviourState.PUMP_PAUSED,
    BehaviourState.INFUSION_STOPPED,
    BehaviourState.INFUSION_STARTED,
)


def check_state(state: ControllerState, ui: UIState, session: SessionData = None):
    """Requirements that one snapshot can already violate."""
    out = []
    if state.hardware.max_rate > config.MAX_RATE_ML_H:
        out.append(violation(
            "1.2.5", f"rate cap configured at {state.hardware.max_rate} ml/h"))
    if not 0 < state.hardware.occlusion <= config.MAX_OCCLUSION_MMHG:
        out.append(violation(
            "1.2.3", f"occlusion threshold {state.hardware.occlusion} mmHg out of range"))
    for index, line in enumerate(ui.lines, start=1):
        if len(line) > 15:
            out.append(violation(
                "2.1.1", f"display line {index} is {len(line)} characters"))
    if session is not None and session.selected is not None:
        if session.selected.fill_volume > _MAX_FILL_ML:
            out.append(violation(
                "1.2.5",
                f"selected preset {session.selected.brand} cannot finish "
                f"inside the rate cap"))
    return tuple(out)


def check_transition(before: ControllerState, after: ControllerState, event,
                     action, session_before: SessionData = None,
                     session_after: SessionData = None):
    """Requirements on one dispatch edge. Hardware may move without the
    behaviour fields moving (sensors mirror reality); chaining is only owed
    when the behaviour pair itself changed."""
    out = []
    moved = (after.previous, after.current) != (before.previous, before.current)
    if moved and after.previous is not before.current:
        out.append(violation(
            "3.2.3",
            f"previous-state chain broken: {before.current.name} stepped to "
            f"{after.current.name} but recorded {after.previous.name}"))
    if before.current is BehaviourState.OFF and after.current is BehaviourState.IDLE:
        if not power_on_self_test(after.hardware).passed:
            out.append(violation("3.1.1", "left OFF although the self test fails"))
    if (before.current is BehaviourState.ACTUATOR_ON
            and after.current is BehaviourState.SYRINGE_LOADED):
        if not after.hardware.seated:
            out.append(violation("1.2.2", "syringe accepted with seat sensors open"))
    if (after.current is BehaviourState.INFUSION_STARTED
            and before.current is not BehaviourState.INFUSION_STARTED):
        if before.current not in _START_SOURCES:
            out.append(violation(
                "1.1.2", f"delivery started from {before.current.name}"))
    if action is not None and getattr(action, "alert", False):
        lines = (action.line1, action.line2, action.line3)
        shown = any(line for line in lines if line)
        if action.light is not LightColor.RED or not shown:
            out.append(violation("3.2.2", "alert raised without red light and text"))
    if session_before is not None and session_after is not None:
        if session_before.store != session_after.store:
            out.append(violation("1.4.1", "preset store changed during dispatch"))
    return tuple(out)


def check_store_init(store: SyringeStore):
    """Requirements on the preset store as loaded, before any event runs."""
    out = []
    seen = set()
    for profile in store:
        key = (profile.brand, profile.fill_volume)
        if key in seen:
            out.append(violation(
                "1.4.2",
                f"duplicate preset {profile.brand} at "
                f"{float(profile.fill_volume):g} ml"))
        seen.add(key)
        if profile.fill_volume > _MAX_FILL_ML:
            out.append(violation(
                "1.2.5",
                f"preset {profile.brand} holds {float(profile.fill_volume):g} ml, "
                f"more than the cap can deliver"))
    return tuple(out)


# ---------- timed trace rules ----------

ALERT_INPUT_WAIT = "alert.input_wait"
ALERT_INTERRUPTION = "alert.interruption"
ALERT_KEY_HELD = "alert.key_held"


def _intervals(steps, target):
    """Maximal spans where the post-state behaviour equals target, as
    (t_enter, t_exit) with t_exit the exit step time or the trace end."""
    spans = []
    start = None
    for step in steps:
        inside = step.state.current is target
        if inside and start is None:
            start = step.t
        elif not inside and start is not None:
            spans.append((start, step.t))
            start = None
    if start is not None:
        spans.append((start, steps[-1].t))
    return spans


def _marker_times(steps, timer_id):
    return [step.t for step in steps
            if isinstance(step.event, TimerExpired) and step.event.timer_id == timer_id]


def _rule_confirm_residency(steps):
    out = []
    for t_enter, t_exit in _intervals(steps, BehaviourState.SYRINGE_CONFIRMED):
        held = t_exit - t_enter
        if held > config.CONFIRM_TIMEOUT_SECONDS:
            out.append(violation(
                "3.2.1",
                f"confirmation pending for {held}s from t={t_enter}s, over the "
                f"{config.CONFIRM_TIMEOUT_SECONDS}s window"))
    return out


def _rule_input_wait(steps):
    out = []
    limit = config.INPUT_WAIT_WARNING_SECONDS
    markers = _marker_times(steps, ALERT_INPUT_WAIT)
    for target in (BehaviourState.SYRINGE_LOADED, BehaviourState.SYRINGE_VERIFIED):
        for t_enter, t_exit in _intervals(steps, target):
            if t_exit - t_enter <= limit:
                continue
            if not any(t_enter + limit <= t <= t_exit for t in markers):
                out.append(violation(
                    "2.1.2",
                    f"waited in {target.name} from t={t_enter}s to t={t_exit}s "
                    f"with no input warning"))
    return out


def _rule_pause_alerts(steps):
    out = []
    onset = config.PAUSE_ALERT_ONSET_SECONDS
    gap = config.PAUSE_ALERT_GAP_SECONDS
    markers = _marker_times(steps, ALERT_INTERRUPTION)
    for t_enter, t_exit in _intervals(steps, BehaviourState.PUMP_PAUSED):
        if t_exit - t_enter <= onset:
            continue
        tend = min(t_exit, t_enter + config.PAUSE_ALERT_HORIZON_SECONDS)
        inside = [t for t in markers if t_enter <= t <= tend]
        where = f"pause from t={t_enter}s to t={t_exit}s"
        if not inside or inside[0] > t_enter + onset + gap:
            out.append(violation(
                "1.2.4", f"{where}: no interruption alert within the first "
                f"{onset + gap}s"))
            continue
        if any(b - a > gap for a, b in zip(inside, inside[1:])):
            out.append(violation(
                "1.2.4", f"{where}: interruption alerts more than {gap}s apart"))
        elif inside[-1] < tend - gap:
            out.append(violation(
                "1.2.4", f"{where}: interruption alerts stop before the pause ends"))
    return out


def _rule_key_held(steps):
    out = []
    limit = config.KEY_HELD_ALERT_SECONDS
    markers = _marker_times(steps, ALERT_KEY_HELD)
    start = None
    spans = []
    for step in steps:
        event = step.event
        if isinstance(event, SensorChanged) and event.sensor_id == SENSOR_KEY_HELD:
            if event.value and start is None:
                start = step.t
            elif not event.value and start is not None:
                spans.append((start, step.t))
                start = None
    if start is not None:
        spans.append((start, steps[-1].t))
    for t_start, t_end in spans:
        if t_end - t_start < limit:
            continue
        if not any(t_start + limit <= t <= t_end for t in markers):
            out.append(violation(
                "2.3.3",
                f"key held from t={t_start}s to t={t_end}s with no alert"))
    return out


def _delivering(step) -> bool:
    return step.session.confirmed and step.state.current in _DELIVERING


def _rule_delivery_evenness(steps):
    """Compare plunger-derived volume against rate * elapsed delivery time
    at every position sample taken while delivering. Expected volume is
    computed from first principles here, not through rate(), so a broken
    producer cannot certify itself."""
    out = []
    elapsed = 0
    prev = None
    for step in steps:
        if prev is not None:
            if _delivering(prev):
                elapsed += step.t - prev.t
            event = step.event
            if (isinstance(event, SensorChanged) and event.sensor_id == SENSOR_POSITION
                    and _delivering(prev) and prev.session.selected is not None):
                profile = prev.session.selected
                pos = int(event.value)
                measured = profile.fill_volume * Fraction(100 - pos, 100)
                expected = profile.fill_volume * Fraction(elapsed, 86400)
                margin = tolerance(profile.nominal_capacity, profile.fill_volume)
                if abs(measured - expected) > margin:
                    out.append(violation(
                        "1.1.4",
                        f"at t={step.t}s position {pos}%: plunger says "
                        f"{float(measured):.4f} ml delivered, schedule says "
                        f"{float(expected):.4f} ml"))
        prev = step
    return out


def check_trace(steps):
    """Run every timed rule over a finished trace of steps carrying
    t, event, state, ui, and session. Steps must be time-ordered."""
    steps = tuple(steps)
    if not steps:
        return ()
    times = [step.t for step in steps]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("trace steps must be ordered by time")
    out = []
    out += _rule_confirm_residency(steps)
    out += _rule_input_wait(steps)
    out += _rule_pause_alerts(steps)
    out += _rule_key_held(steps)
    out += _rule_delivery_evenness(steps)
    deduped = {}
    for item in out:
        deduped.setdefault((item.requirement_id, item.message), item)
    return tuple(deduped.values())


# ---------- table mutations ----------

@dataclass(frozen=True)
class Mutation:
    name: str
    kind: str  # "remove-arc" | "remove-guard" | "loader-flag"
    arc: str = ""
    guard: str = ""
    flag: str = ""
    note: str = ""


MUTATIONS = {m.name: m for m in (
    Mutation("drop-timeout-guard", "remove-arc", arc="confirm-timeout",
             note="the confirmation window expires without leaving the state"),
    Mutation("drop-post-gate", "remove-guard", arc="power-on", guard="post-ok",
             note="power-on no longer waits for the self test"),
    Mutation("drop-clamp-guard", "remove-guard", arc="seat-syringe", guard="seated",
             note="any single seat sensor edge loads the syringe"),
    Mutation("drop-duplicate-check", "loader-flag", flag="skip_duplicate_check",
             note="the seed loader admits duplicate presets"),
    Mutation("drop-rate-cap", "loader-flag", flag="skip_rate_cap",
             note="the seed loader admits presets over the rate cap"),
)}


def _lookup_mutations(names):
    out = []
    for name in names:
        if name not in MUTATIONS:
            known = ", ".join(sorted(MUTATIONS))
            raise ValueError(f"unknown mutation {name!r}; known: {known}")
        out.append(MUTATIONS[name])
    return out


def mutated_table(mutations=(), table=TRANSITION_TABLE):
    """The arc table with the named faults injected."""
    arcs = list(table)
    for mutation in _lookup_mutations(mutations):
        if mutation.kind == "remove-arc":
            before = len(arcs)
            arcs = [arc for arc in arcs if arc.name != mutation.arc]
            if len(arcs) == before:
                raise ValueError(f"no arc named {mutation.arc!r} to remove")
        elif mutation.kind == "remove-guard":
            for index, arc in enumerate(arcs):
                if arc.name == mutation.arc:
                    if mutation.guard not in arc.guards:
                        raise ValueError(
                            f"arc {mutation.arc!r} has no guard {mutation.guard!r}")
                    guards = tuple(g for g in arc.guards if g != mutation.guard)
                    arcs[index] = replace(arc, guards=guards)
                    break
            else:
                raise ValueError(f"no arc named {mutation.arc!r}")
    return tuple(arcs)


def loader_flags(mutations=()):
    flags = {"skip_duplicate_check": False, "skip_rate_cap": False}
    for mutation in _lookup_mutations(mutations):
        if mutation.kind == "loader-flag":
            flags[mutation.flag] = True
    return flags


# ---------- finite abstraction ----------

POSITION_ZERO = "ZERO"
POSITION_MID = "MID"
POSITION_FULL = "FULL"

_POSITION_REP = {POSITION_ZERO: 0, POSITION_MID: 50, POSITION_FULL: 100}

# second representative for MID, one step below the FULL boundary; only the
# BACK nudge is sensitive to where inside the bucket the value sits
_POSITION_MID_HIGH = 99

_LOW_BATTERY_REP = 10
_HIGH_BATTERY_REP = 99

# behaviours in which a profile has necessarily been matched and kept
_SELECTED_BEHAVIOURS = frozenset((
    BehaviourState.SYRINGE_LOADED,
    BehaviourState.SYRINGE_VERIFIED,
    BehaviourState.SYRINGE_CONFIRMED,
    BehaviourState.INFUSION_STARTED,
    BehaviourState.PUMP_PAUSED,
    BehaviourState.INFUSION_STOPPED,
    BehaviourState.PUMP_INFO,
))


@dataclass(frozen=True)
class AbstractState:
    behaviour: BehaviourState
    battery_low: bool
    position: str
    clamp: bool
    plunger: bool
    flange: bool
    locked: bool
    pending: frozenset
    confirmed: bool


def abstract_of(state: ControllerState, session: SessionData, pending) -> AbstractState:
    pos = state.hardware.actuator_position
    if pos == 0:
        bucket = POSITION_ZERO
    elif pos == 100:
        bucket = POSITION_FULL
    else:
        bucket = POSITION_MID
    return AbstractState(
        behaviour=state.current,
        battery_low=state.hardware.is_battery_low,
        position=bucket,
        clamp=state.hardware.is_barrel_clamp_ok,
        plunger=state.hardware.is_plunger_ok,
        flange=state.hardware.is_barrel_flange_ok,
        locked=state.keypad_lock,
        pending=frozenset(pending),
        confirmed=session.confirmed,
    )


_ALL_BUTTONS = (
    InputButton.INFO, InputButton.UP, InputButton.DOWN, InputButton.YES_START,
    InputButton.NO_STOP, InputButton.FF, InputButton.BACK, InputButton.ON_OFF,
)


class CheckContext:
    """Everything one exhaustive search needs: the arc table, the event
    alphabet shape, and the fixed store and diameter the session carries."""

    def __init__(self, table=TRANSITION_TABLE, store=None,
                 diameter=config.DEFAULT_DIAMETER_MM, buttons=_ALL_BUTTONS,
                 long_buttons=(InputButton.INFO,), position_samples=(0, 50, 100),
                 battery_samples=(_LOW_BATTERY_REP, _HIGH_BATTERY_REP),
                 seat_toggles=True, power_cycle=True, init_logs=()):
        self.table = tuple(table)
        self.store = store if store is not None else SyringeStore()
        self.diameter = diameter
        self.buttons = tuple(buttons)
        self.long_buttons = tuple(long_buttons)
        self.position_samples = tuple(position_samples)
        self.battery_samples = tuple(battery_samples)
        self.seat_toggles = seat_toggles
        self.power_cycle = power_cycle
        self.init_logs = tuple(init_logs)
        candidates = match_profiles(self.store, self.diameter, (True, True, True))
        self._candidates = candidates
        self._selected = candidates[0] if len(candidates) == 1 else None
        self._concrete = {}

    @classmethod
    def standard(cls, mutations=()):
        flags = loader_flags(mutations)
        store, logs = load_seed_store(SEED_PATH, **flags)
        return cls(table=mutated_table(mutations), store=store, init_logs=logs)

    def alphabet(self, abstract: AbstractState):
        events = [ButtonPress(b) for b in self.buttons]
        events += [ButtonPress(b, PressKind.LONG) for b in self.long_buttons]
        events += [TimerExpired(t) for t in sorted(abstract.pending)]
        if self.seat_toggles:
            events.append(SensorChanged(SENSOR_CLAMP, 0 if abstract.clamp else 1))
            events.append(SensorChanged(SENSOR_PLUNGER, 0 if abstract.plunger else 1))
            events.append(SensorChanged(SENSOR_FLANGE, 0 if abstract.flange else 1))
        events += [SensorChanged(SENSOR_POSITION, p) for p in self.position_samples]
        events += [SensorChanged(SENSOR_BATTERY, b) for b in self.battery_samples]
        if self.power_cycle:
            events.append(PowerCycle())
        return events

    def concretize(self, abstract: AbstractState, high_mid=False):
        """A representative concrete (state, session) pair. The session's
        candidate bookkeeping is a function of the behaviour here: in the
        stock machine a profile can only have been kept past loading, so the
        canonical choice is exact, not an approximation."""
        key = (abstract, high_mid)
        hit = self._concrete.get(key)
        if hit is not None:
            return hit
        pos = _POSITION_REP[abstract.position]
        if high_mid and abstract.position == POSITION_MID:
            pos = _POSITION_MID_HIGH
        level = _LOW_BATTERY_REP if abstract.battery_low else _HIGH_BATTERY_REP
        hardware = new_hardware(
            level,
            is_barrel_clamp_ok=abstract.clamp,
            is_plunger_ok=abstract.plunger,
            is_barrel_flange_ok=abstract.flange,
            actuator_position=pos,
        )
        state = ControllerState(
            previous=abstract.behaviour,
            current=abstract.behaviour,
            hardware=hardware,
            keypad_lock=abstract.locked,
            supported_syringe_count=len(self.store),
        )
        if abstract.behaviour in _SELECTED_BEHAVIOURS:
            candidates, selected = self._candidates, self._selected
        else:
            candidates, selected = (), None
        session = SessionData(
            store=self.store,
            diameter=self.diameter,
            candidates=candidates,
            selected=selected,
            confirmed=abstract.confirmed,
            lock_armed=TIMER_LOCK_WINDOW in abstract.pending,
        )
        self._concrete[key] = (state, session)
        return state, session


def _abstract_predicates(abstract: AbstractState):
    if (abstract.behaviour is BehaviourState.SYRINGE_CONFIRMED
            and TIMER_CONFIRM not in abstract.pending):
        return (violation(
            "2.1.2", "confirmation pending with no confirm window armed"),)
    return ()


@dataclass(frozen=True)
class Edge:
    event: object
    target: AbstractState
    violations: tuple


def successors(context: CheckContext, abstract: AbstractState):
    """Every abstract step out of one abstract state, with the requirement
    checks evaluated on the concrete edge underneath it."""
    edges = []
    for event in context.alphabet(abstract):
        reps = (False,)
        if (isinstance(event, ButtonPress) and event.button is InputButton.BACK
                and abstract.position == POSITION_MID):
            reps = (False, True)
        for high_mid in reps:
            state, session = context.concretize(abstract, high_mid)
            pending = set(abstract.pending)
            if isinstance(event, TimerExpired):
                pending.discard(event.timer_id)
            result = dispatch(state, event, session, UIState(), table=context.table)
            for op in result.timer_ops:
                if op.op == "arm":
                    pending.add(op.timer_id)
                else:
                    pending.discard(op.timer_id)
            target = abstract_of(result.state, result.session, pending)
            found = []
            found += check_transition(state, result.state, event, result.action,
                                      session, result.session)
            found += check_state(result.state, apply_action(UIState(), result.action),
                                 result.session)
            found += _abstract_predicates(target)
            edges.append(Edge(event=event, target=target, violations=tuple(found)))
    return tuple(edges)


def initial_abstract(context: CheckContext) -> AbstractState:
    state = new_controller(new_hardware(config.DEFAULT_BATTERY_LEVEL),
                           supported_syringe_count=len(context.store))
    session = SessionData(store=context.store, diameter=context.diameter)
    return abstract_of(state, session, ())


# ---------- exhaustive search ----------

@dataclass(frozen=True)
class CheckReport:
    explored: int
    depth: int
    behaviours: frozenset
    violations: tuple


def _witness(parents, node, last_event):
    events = [last_event]
    while parents[node] is not None:
        node, event = parents[node]
        events.append(event)
    events.reverse()
    return tuple(events)


def model_check(context: CheckContext = None, max_depth: int = None,
                mutations=(), workers: int = 1) -> CheckReport:
    """Breadth-first closure of the abstraction. Deterministic for any
    worker count: expansion runs per level in frontier order and results
    merge sequentially, so discovery order never depends on scheduling."""
    if context is None:
        context = CheckContext.standard(mutations)
    elif mutations:
        raise ValueError("pass mutations through CheckContext.standard")
    recorded = {}
    ordered = []

    def record(found, witness):
        key = (found.requirement_id, found.message)
        if key not in recorded:
            recorded[key] = True
            ordered.append(replace(found, witness=tuple(witness)))

    for found in check_store_init(context.store):
        record(found, ())
    root = initial_abstract(context)
    parents = {root: None}
    for found in _abstract_predicates(root):
        record(found, ())

    frontier = [root]
    depth = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frontier and (max_depth is None or depth < max_depth):
            if pool is not None:
                expansions = list(pool.map(
                    lambda node: successors(context, node), frontier))
            else:
                expansions = [successors(context, node) for node in frontier]
            grown = []
            for source, edges in zip(frontier, expansions):
                for edge in edges:
                    if edge.violations:
                        trail = _witness(parents, source, edge.event)
                        for found in edge.violations:
                            record(found, trail)
                    if edge.target not in parents:
                        parents[edge.target] = (source, edge.event)
                        grown.append(edge.target)
            frontier = grown
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return CheckReport(
        explored=len(parents),
        depth=depth,
        behaviours=frozenset(node.behaviour for node in parents),
        violations=tuple(ordered),
    )


# ---------- witness replay ----------

@dataclass(frozen=True)
class ReplayResult:
    state: ControllerState
    session: SessionData
    ui: UIState
    violations: tuple


def replay_events(events, mutations=(), context: CheckContext = None) -> ReplayResult:
    """Drive the real dispatcher through an event list from the boot state,
    re-running every check. A witness from the search must reproduce its
    violation here or the search result would be vacuous."""
    if context is None:
        context = CheckContext.standard(mutations)
    found = list(check_store_init(context.store))
    state = new_controller(new_hardware(config.DEFAULT_BATTERY_LEVEL),
                           supported_syringe_count=len(context.store))
    session = SessionData(store=context.store, diameter=context.diameter)
    ui = UIState()
    pending = set()
    found += _abstract_predicates(abstract_of(state, session, pending))
    consumed = []
    for event in events:
        if isinstance(event, TimerExpired):
            pending.discard(event.timer_id)
        result = dispatch(state, event, session, ui, table=context.table)
        for op in result.timer_ops:
            if op.op == "arm":
                pending.add(op.timer_id)
            else:
                pending.discard(op.timer_id)
        consumed.append(event)
        trail = tuple(consumed)
        for item in check_transition(state, result.state, event, result.action,
                                     session, result.session):
            found.append(replace(item, witness=trail))
        for item in check_state(result.state, result.ui, result.session):
            found.append(replace(item, witness=trail))
        for item in _abstract_predicates(abstract_of(result.state, result.session,
                                                     pending)):
            found.append(replace(item, witness=trail))
        state, session, ui = result.state, result.session, result.ui
    return ReplayResult(state=state, session=session, ui=ui,
                        violations=tuple(found))
