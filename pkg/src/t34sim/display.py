"""Verified display surface.

Three bounded LCD lines plus an LED. Lines are independent strings capped at
15 characters; numeric values follow the two formatting rules used across the
device: never print trailing zeros, always print a leading zero below one
unit. Over-length text is an error, never a silent truncation.
"""

from dataclasses import dataclass
from enum import Enum

from .quantities import centi

MAX_LINE_CHARS = 15


class LightColor(Enum):
    RED = "RED"
    GREEN = "GREEN"
    OFF = "OFF"


class LineOverflowError(ValueError):
    """A display line exceeded the 15-character budget."""


class QuantityRangeError(ValueError):
    """format_quantity only renders values in [0, 1000)."""


# ---------- state and actions ----------

@dataclass(frozen=True)
class UIState:
    line1: str = ""
    line2: str = ""
    line3: str = ""
    light: LightColor = LightColor.OFF
    emphasis: int = 0  # 0 = none, 1..3 = that line is primary

    def __post_init__(self):
        for name in ("line1", "line2", "line3"):
            text = getattr(self, name)
            if len(text) > MAX_LINE_CHARS:
                raise LineOverflowError(f"{name} is {len(text)} chars: {text!r}")
        if self.emphasis not in (0, 1, 2, 3):
            raise ValueError(f"emphasis must be 0..3, got {self.emphasis!r}")

    @property
    def lines(self) -> tuple:
        return (self.line1, self.line2, self.line3)


@dataclass(frozen=True)
class UIAction:
    """Partial display update. None fields leave the screen untouched.

    Alert actions must be visually accessible: a nonempty line and the RED
    light, enforced at construction.
    """

    line1: str = None
    line2: str = None
    line3: str = None
    light: LightColor = None
    emphasis: int = None
    alert: bool = False

    def __post_init__(self):
        if self.alert:
            if self.light is not LightColor.RED:
                raise ValueError("alert actions must set the RED light")
            if not any(text for text in (self.line1, self.line2, self.line3)):
                raise ValueError("alert actions must set a nonempty line")

    @property
    def is_empty(self) -> bool:
        return self == EMPTY_ACTION


EMPTY_ACTION = UIAction()


# ---------- operations ----------

def format_quantity(value, unit: str) -> str:
    """Render a quantity with its unit, e.g. 5 -> "5ml/h", 0.64 -> "0.64ml/h".

    Whole numbers carry no decimal part; values below one unit keep their
    leading zero. The unit is appended without a space.
    """
    frac = centi(value)
    if frac < 0 or frac >= 1000:
        raise QuantityRangeError(f"value out of display range [0, 1000): {value!r}")
    cents = int(frac * 100)
    whole, part = divmod(cents, 100)
    if part == 0:
        digits = str(whole)
    elif part % 10 == 0:
        digits = f"{whole}.{part // 10}"
    else:
        digits = f"{whole}.{part:02d}"
    return digits + unit


def apply_action(ui: UIState, action: UIAction) -> UIState:
    """Apply a partial update; unspecified lines and light persist."""
    if action.is_empty:
        return ui
    return UIState(
        line1=ui.line1 if action.line1 is None else action.line1,
        line2=ui.line2 if action.line2 is None else action.line2,
        line3=ui.line3 if action.line3 is None else action.line3,
        light=ui.light if action.light is None else action.light,
        emphasis=ui.emphasis if action.emphasis is None else action.emphasis,
    )


# Labels longer than the line budget shrink deterministically; the value part
# is never touched.
_ABBREVIATIONS = {
    "Occlusion": "Occl.",
    "Battery status": "Battery",
}


def fit_label(label: str, value_text: str) -> str:
    full = f"{label} {value_text}"
    if len(full) <= MAX_LINE_CHARS:
        return full
    short = _ABBREVIATIONS.get(label)
    if short is None:
        keep = MAX_LINE_CHARS - len(value_text) - 1
        if keep < 1:
            raise LineOverflowError(f"no room for a label next to {value_text!r}")
        short = label[:keep].rstrip()
    return f"{short} {value_text}"


def render_info_screen(state) -> UIState:
    """The three-line device info screen: max rate, occlusion, battery.

    Accepts a controller state or a bare hardware snapshot.
    """
    hw = getattr(state, "hardware", state)
    return UIState(
        line1=fit_label("Max. Rate", format_quantity(hw.max_rate, "ml/h")),
        line2=fit_label("Occlusion", format_quantity(hw.occlusion, "mmHg")),
        line3=fit_label("Battery status", format_quantity(hw.battery_level, "%")),
        light=LightColor.GREEN,
        emphasis=1,
    )
