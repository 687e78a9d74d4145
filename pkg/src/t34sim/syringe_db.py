"""Bounded syringe-profile store and the delivery math.

The store holds at most 15 profiles; duplicates, identified by
(brand, fill_volume), are ignored with an error log rather than an
exception. Flow rate spreads the fill volume over 24 hours exactly; the
graduated-syringe tolerance follows the four-band rule table below.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
import json

from . import config
from .quantities import centi

STORE_CAPACITY = 15
DUPLICATE_LOG = "Error: Duplicate Syringe Preset"
RATE_CAP_LOG = "Error: Max Rate Exceeded"

# presets shipped with the device image
SEED_PATH = Path(__file__).parent / "data" / "syringes.jsonl"


class ProfileError(ValueError):
    """A syringe profile failed validation."""


class StoreFullError(ValueError):
    """Add was called on a full store (capacity precondition)."""


# ---------- profiles ----------

def usable_capacity(nominal_capacity: Fraction) -> Fraction:
    """Largest fill volume the device accepts for a given nominal size.

    30 ml syringes are mechanically limited to 22 ml; everything else may
    fill to its nominal capacity.
    """
    if nominal_capacity == 30:
        return Fraction(22)
    return nominal_capacity


@dataclass(frozen=True)
class SyringeProfile:
    brand: str
    nominal_capacity: Fraction
    fill_volume: Fraction
    barrel_diameter: Fraction

    def __post_init__(self):
        object.__setattr__(self, "nominal_capacity", centi(self.nominal_capacity))
        object.__setattr__(self, "fill_volume", centi(self.fill_volume))
        object.__setattr__(self, "barrel_diameter", centi(self.barrel_diameter))
        if not self.brand or len(self.brand) > 15:
            raise ProfileError(f"brand must be 1..15 chars: {self.brand!r}")
        if self.nominal_capacity <= 0 or self.barrel_diameter <= 0:
            raise ProfileError(f"capacity and diameter must be positive: {self}")
        if self.fill_volume <= 0:
            raise ProfileError(f"fill volume must be positive: {self}")
        if self.fill_volume > usable_capacity(self.nominal_capacity):
            raise ProfileError(
                f"fill {self.fill_volume} exceeds usable capacity of "
                f"{self.nominal_capacity} ml syringe"
            )


def rate(profile: SyringeProfile) -> Fraction:
    """Flow rate in ml/h: the fill volume spread over 24 hours, exactly."""
    if profile.fill_volume <= 0:
        raise ProfileError(f"fill volume must be positive: {profile.fill_volume}")
    result = profile.fill_volume / config.INFUSION_HOURS
    if result > config.MAX_RATE_ML_H:
        raise ProfileError(
            f"rate {result} ml/h exceeds the {config.MAX_RATE_ML_H} ml/h cap"
        )
    return result


# ---------- store ----------

class AddOutcome(Enum):
    ADDED = "ADDED"
    DUPLICATE_IGNORED = "DUPLICATE_IGNORED"


@dataclass(frozen=True)
class AddResult:
    store: "SyringeStore"
    outcome: AddOutcome
    log: str = ""


@dataclass(frozen=True)
class SyringeStore:
    slots: tuple = ()

    def __post_init__(self):
        if len(self.slots) > STORE_CAPACITY:
            raise StoreFullError(f"store holds at most {STORE_CAPACITY} profiles")

    @property
    def last_index(self) -> int:
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def __len__(self):
        return len(self.slots)


def search(store: SyringeStore, candidate: SyringeProfile) -> int:
    """Count entries matching the candidate's (brand, fill_volume) identity."""
    count = 0
    for entry in store.slots:
        if entry.brand == candidate.brand and entry.fill_volume == candidate.fill_volume:
            count += 1
    return count


def add(store: SyringeStore, profile: SyringeProfile,
        *, skip_duplicate_check: bool = False) -> AddResult:
    """Append a profile unless its identity is already present.

    Duplicates leave the store bit-identical and report an error log line, no
    exception. A full store is a precondition failure. skip_duplicate_check
    exists only as a fault-injection hook for the safety checker.
    """
    if store.last_index >= STORE_CAPACITY:
        raise StoreFullError(f"store already holds {STORE_CAPACITY} profiles")
    if not skip_duplicate_check and search(store, profile) > 0:
        return AddResult(store, AddOutcome.DUPLICATE_IGNORED, DUPLICATE_LOG)
    return AddResult(SyringeStore(store.slots + (profile,)), AddOutcome.ADDED)


def match_profiles(store: SyringeStore, diameter: Fraction, sensors) -> tuple:
    """Profiles whose barrel diameter matches the sensed one.

    sensors is the (clamp, plunger, flange) triple; an unseated syringe
    matches nothing. Matches are candidates only, never auto-committed.
    """
    clamp, plunger, flange = sensors
    if not (clamp and plunger and flange):
        return ()
    diameter = centi(diameter)
    window = config.DIAMETER_TOLERANCE_MM
    return tuple(
        entry for entry in store.slots
        if abs(entry.barrel_diameter - diameter) <= window
    )


# ---------- delivery math ----------

def tolerance(nominal_capacity, expelled) -> Fraction:
    """Graduated-syringe tolerance in ml.

    Band table (expelled measured against half the nominal capacity):
      nominal < 5 ml:  >= half -> 5% of expelled
                       <  half -> 1.5% of nominal + 2% of expelled
      nominal >= 5 ml: >= half -> 4% of expelled
                       <  half -> 1.5% of nominal + 1% of expelled
    """
    nominal = centi(nominal_capacity)
    spent = centi(expelled)
    if nominal <= 0:
        raise ValueError(f"nominal capacity must be positive: {nominal_capacity!r}")
    if spent < 0 or spent > nominal:
        raise ValueError(f"expelled must lie in [0, nominal]: {expelled!r}")
    at_least_half = spent * 2 >= nominal
    if nominal < 5:
        if at_least_half:
            return Fraction(5, 100) * spent
        return Fraction(15, 1000) * nominal + Fraction(2, 100) * spent
    if at_least_half:
        return Fraction(4, 100) * spent
    return Fraction(15, 1000) * nominal + Fraction(1, 100) * spent


def remaining_volume(profile: SyringeProfile, primed: bool, delivered) -> tuple:
    """Remaining ml (floored at zero) and whether delivery counts as complete.

    Priming spends a fixed average volume before delivery starts. Completion
    is reached when the remainder sinks to the syringe tolerance for the full
    fill.
    """
    spent = centi(delivered)
    if spent < 0 or spent > profile.fill_volume:
        raise ValueError(f"delivered must lie in [0, fill_volume]: {delivered!r}")
    remaining = profile.fill_volume - spent
    if primed:
        remaining -= config.PRIMING_DEDUCTION_ML
    if remaining < 0:
        remaining = Fraction(0)
    complete = remaining <= tolerance(profile.nominal_capacity, profile.fill_volume)
    return remaining, complete


# ---------- seed loading ----------

def profile_from_json(obj: dict) -> SyringeProfile:
    return SyringeProfile(
        brand=obj["brand"],
        nominal_capacity=centi(obj["nominal_capacity"]),
        fill_volume=centi(obj["fill_volume"]),
        barrel_diameter=centi(obj["barrel_diameter"]),
    )


def load_seed_store(path, *, skip_duplicate_check: bool = False,
                    skip_rate_cap: bool = False) -> tuple:
    """Load and validate the power-on syringe presets.

    Each record is one JSON object per line. Records whose identity is
    already present or whose rate would break the device cap are rejected
    with a log line; the skip flags are fault-injection hooks that disable
    one validation each.

    Returns (store, logs).
    """
    store = SyringeStore()
    logs = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            try:
                profile = profile_from_json(json.loads(raw))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ProfileError(f"{path}:{lineno}: bad profile record: {exc}") from exc
            if not skip_rate_cap and profile.fill_volume > config.MAX_RATE_ML_H * config.INFUSION_HOURS:
                logs.append(f"{RATE_CAP_LOG}: {profile.brand}")
                continue
            result = add(store, profile, skip_duplicate_check=skip_duplicate_check)
            store = result.store
            if result.outcome is AddOutcome.DUPLICATE_IGNORED:
                logs.append(result.log)
            else:
                logs.append(profile.brand)
    return store, logs
