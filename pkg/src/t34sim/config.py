"""Tunable defaults for the T34 model.

Everything here is a named constant so scenarios and tests can reason about
the exact numbers. Durations are whole virtual seconds.
"""

from fractions import Fraction

# ---------- hardware defaults ----------

LOW_BATTERY_THRESHOLD = 15      # percent; below this the battery reads "low"
MAX_RATE_ML_H = 5               # device-wide flow rate ceiling, ml/h
DEFAULT_OCCLUSION_MMHG = 720    # line back-pressure threshold shown on the info screen
MAX_OCCLUSION_MMHG = 730        # highest calibrated back-pressure setting
DEFAULT_BATTERY_LEVEL = 99
DEFAULT_ACTUATOR_POSITION = 100  # 100 = fully retracted (load position), 0 = delivered

# ---------- syringe math ----------

PRIMING_DEDUCTION_ML = Fraction(1, 2)   # average volume expelled while priming
DIAMETER_TOLERANCE_MM = Fraction(1, 2)  # sensed-diameter match window
DEFAULT_DIAMETER_MM = Fraction("19.10")
INFUSION_HOURS = 24

# ---------- timers (seconds) ----------

POWER_SETTLE_SECONDS = 0        # splash-to-preloading hop, same instant
PRELOAD_WINDOW_SECONDS = 4      # cancellable preloading window
CONFIRM_TIMEOUT_SECONDS = 120   # confirmation screen escape to the pause alert
DELIVERY_SETTLE_SECONDS = 2     # delivering splash back to the operating hub
LOCK_WINDOW_SECONDS = 5         # keypad lock gesture window after a long INFO press

# ---------- monitored durations (seconds) ----------

PAUSE_ALERT_ONSET_SECONDS = 300    # interruption longer than this must alert
PAUSE_ALERT_GAP_SECONDS = 60       # maximum gap between interruption alerts
PAUSE_ALERT_HORIZON_SECONDS = 3600 # alerts required up to this long
INPUT_WAIT_WARNING_SECONDS = 60    # warning due when an input state idles this long
KEY_HELD_ALERT_SECONDS = 180       # held key must alert after this long

# ---------- identity ----------

PUMP_ID = "Syringe Pump"          # exactly 12 characters
DEFAULT_PUMP_VERSION = "FGDFG858GE"  # exactly 10 characters
