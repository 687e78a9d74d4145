"""The bounded preset store and the exact delivery math.

Run: python3 demos/02_syringe_store.py
"""

from fractions import Fraction

from t34sim.syringe_db import (
    STORE_CAPACITY,
    StoreFullError,
    SyringeProfile,
    SyringeStore,
    add,
    match_profiles,
    rate,
    remaining_volume,
    search,
    tolerance,
)

braun = SyringeProfile(brand="BRAUN Omnifix", nominal_capacity="20.00",
                       fill_volume="15.36", barrel_diameter="19.10")

print("rate spreads the fill over 24 h, exactly:")
print(f"  {float(braun.fill_volume)} ml / 24 h = {rate(braun)} ml/h "
      f"(= {float(rate(braun))})")
print()

store = add(SyringeStore(), braun).store
again = add(store, braun)
print("adding the same (brand, fill) twice:")
print(f"  outcome: {again.outcome.name}, log: {again.log!r}")
print(f"  store unchanged: {again.store is store}")
print(f"  search count: {search(store, braun)}")
print()

print(f"the store is capped at {STORE_CAPACITY} presets:")
full = store
for n in range(STORE_CAPACITY - 1):
    extra = SyringeProfile(brand=f"Filler{n:02d}", nominal_capacity="50.00",
                           fill_volume=Fraction(n + 1), barrel_diameter="25.00")
    full = add(full, extra).store
try:
    add(full, SyringeProfile(brand="One Too Many", nominal_capacity="50.00",
                             fill_volume="49.00", barrel_diameter="25.00"))
except StoreFullError as exc:
    print(f"  16th add raises: {exc}")
print()

print("diameter matching needs a fully seated syringe:")
print("  unseated:", match_profiles(store, Fraction("19.10"), (True, True, False)))
matched = match_profiles(store, Fraction("19.10"), (True, True, True))
print("  seated:  ", [p.brand for p in matched])
print()

print("graduated tolerance bands:")
for nominal, expelled in ((2, 2), (3, 1), (20, 12)):
    band = tolerance(Fraction(nominal), Fraction(expelled))
    print(f"  nominal {nominal:>2} ml, expelled {expelled:>2} ml "
          f"-> {band} ml (= {float(band)})")
print()

print("remaining volume after priming and partial delivery:")
for delivered in ("0.00", "14.00", "14.75"):
    left, done = remaining_volume(braun, True, delivered)
    print(f"  delivered {delivered} ml -> {float(left):5.2f} ml left, "
          f"complete: {done}")
