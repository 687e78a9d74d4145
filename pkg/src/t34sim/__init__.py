"""Deterministic T34 syringe-driver simulator and verifier."""

from .controller import (
    BehaviourState,
    ButtonPress,
    ControllerState,
    HardwareState,
    InputButton,
    PowerCycle,
    PressKind,
    SensorChanged,
    SessionData,
    TimerExpired,
    dispatch,
    export_transition_table,
    new_controller,
    new_hardware,
    power_on_self_test,
    update_control,
)
from .display import (
    LightColor,
    UIAction,
    UIState,
    apply_action,
    format_quantity,
    render_info_screen,
)
from .safety import (
    CheckContext,
    MUTATIONS,
    Violation,
    check_state,
    check_trace,
    check_transition,
    model_check,
    replay_events,
)
from .sim import (
    Scenario,
    Session,
    SimReport,
    SplitMix64,
    VirtualClock,
    append_log,
    load_scenario,
    parse_scenario,
    render_log,
    render_trace,
    run_scenario,
    seeded_percentage,
    seeded_rate,
)
from .syringe_db import (
    SyringeProfile,
    SyringeStore,
    add,
    load_seed_store,
    match_profiles,
    rate,
    remaining_volume,
    tolerance,
)

__version__ = "0.1.0"
