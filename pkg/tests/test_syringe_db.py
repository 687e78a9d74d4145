from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from t34sim.syringe_db import (
    DUPLICATE_LOG,
    RATE_CAP_LOG,
    SEED_PATH,
    STORE_CAPACITY,
    AddOutcome,
    ProfileError,
    StoreFullError,
    SyringeProfile,
    SyringeStore,
    add,
    load_seed_store,
    match_profiles,
    rate,
    remaining_volume,
    search,
    tolerance,
    usable_capacity,
)
from conftest import tolerance_oracle


# ---------- reference store ----------

class ListStore:
    """Naive reference model: a plain list of (brand, fill) identities.

    Written before the tests below so the real store is judged against an
    independent spelling of the contract, not its own code paths.
    """

    def __init__(self):
        self.rows = []

    def search(self, brand, fill):
        return sum(1 for row in self.rows if row == (brand, fill))

    def add(self, brand, fill):
        if len(self.rows) >= STORE_CAPACITY:
            return "full"
        if self.search(brand, fill) > 0:
            return "dup"
        self.rows.append((brand, fill))
        return "added"


def make_profile(brand, fill):
    return SyringeProfile(brand=brand, nominal_capacity=Fraction(25),
                          fill_volume=fill, barrel_diameter=Fraction("19.10"))


# 3 brands x 3 fills = 9 profile identities
UNIVERSE = [make_profile(brand, fill)
            for brand in ("Alpha", "Beta", "Gamma")
            for fill in (Fraction(6), Fraction(12), Fraction(24))]

op_strategy = st.tuples(st.sampled_from(["add", "search"]),
                        st.sampled_from(UNIVERSE))


class TestUsableCapacity:
    def test_thirty_ml_is_limited(self):
        assert usable_capacity(Fraction(30)) == 22

    def test_others_keep_nominal(self):
        assert usable_capacity(Fraction(20)) == 20
        assert usable_capacity(Fraction(50)) == 50


class TestProfile:
    def test_normalizes_to_fractions(self):
        profile = SyringeProfile(brand="BRAUN Omnifix", nominal_capacity="20.00",
                                 fill_volume="15.36", barrel_diameter="19.10")
        assert profile.fill_volume == Fraction(1536, 100)
        assert isinstance(profile.barrel_diameter, Fraction)

    def test_brand_length_limits(self):
        with pytest.raises(ProfileError):
            make_profile("", Fraction(6))
        with pytest.raises(ProfileError):
            make_profile("x" * 16, Fraction(6))

    def test_fill_over_usable_capacity(self):
        # a 30 ml syringe is usable to 22 ml only
        with pytest.raises(ProfileError):
            SyringeProfile(brand="Big", nominal_capacity=Fraction(30),
                           fill_volume=Fraction(23), barrel_diameter=Fraction(20))

    def test_fill_must_be_positive(self):
        with pytest.raises(ProfileError):
            make_profile("Alpha", Fraction(0))


class TestRate:
    def test_spec_example_exact(self):
        # 15.36 ml over 24 h = 0.64 ml/h, exactly 16/25
        profile = make_profile("Alpha", Fraction("15.36"))
        assert rate(profile) == Fraction(16, 25)

    def test_cap_boundary_allowed(self):
        profile = SyringeProfile(brand="Full", nominal_capacity=Fraction(150),
                                 fill_volume=Fraction(120), barrel_diameter=Fraction(40))
        assert rate(profile) == 5

    def test_over_cap_raises(self):
        profile = SyringeProfile(brand="Over", nominal_capacity=Fraction(150),
                                 fill_volume=Fraction(121), barrel_diameter=Fraction(40))
        with pytest.raises(ProfileError):
            rate(profile)


class TestStore:
    def test_empty(self):
        store = SyringeStore()
        assert store.last_index == 0
        assert len(store) == 0

    def test_add_appends(self):
        result = add(SyringeStore(), UNIVERSE[0])
        assert result.outcome is AddOutcome.ADDED
        assert result.store.slots == (UNIVERSE[0],)

    def test_duplicate_keeps_store_identical(self):
        store = add(SyringeStore(), UNIVERSE[0]).store
        result = add(store, UNIVERSE[0])
        assert result.outcome is AddOutcome.DUPLICATE_IGNORED
        assert result.store is store  # not a copy: the same object
        assert result.log == DUPLICATE_LOG

    def test_skip_duplicate_check_adds_twice(self):
        store = add(SyringeStore(), UNIVERSE[0]).store
        store = add(store, UNIVERSE[0], skip_duplicate_check=True).store
        assert search(store, UNIVERSE[0]) == 2

    def test_sixteenth_add_raises(self):
        store = SyringeStore()
        for n in range(STORE_CAPACITY):  # 15 distinct identities
            store = add(store, make_profile(f"Brand{n:02d}", Fraction(n + 1))).store
        assert store.last_index == 15
        with pytest.raises(StoreFullError):
            add(store, make_profile("OneMore", Fraction(20)))

    def test_oversized_tuple_rejected(self):
        with pytest.raises(StoreFullError):
            SyringeStore(slots=tuple(UNIVERSE[0] for _ in range(16)))

    @given(st.lists(op_strategy, max_size=5))
    @settings(max_examples=300)
    def test_matches_list_oracle(self, ops):
        store = SyringeStore()
        oracle = ListStore()
        for op, profile in ops:
            key = (profile.brand, profile.fill_volume)
            if op == "add":
                result = add(store, profile)
                expected = oracle.add(*key)
                got = "added" if result.outcome is AddOutcome.ADDED else "dup"
                assert got == expected
                store = result.store
            else:
                assert search(store, profile) == oracle.search(*key)
        assert [(p.brand, p.fill_volume) for p in store] == oracle.rows


class TestMatchProfiles:
    def test_unseated_matches_nothing(self, stock_store):
        assert match_profiles(stock_store, Fraction("19.10"), (True, True, False)) == ()

    def test_seated_matches_within_half_mm(self, stock_store):
        matched = match_profiles(stock_store, Fraction("19.10"), (True, True, True))
        assert [p.brand for p in matched] == ["BRAUN Omnifix"]

    def test_window_boundary_inclusive(self):
        store = add(SyringeStore(), UNIVERSE[0]).store  # diameter 19.10
        inside = match_profiles(store, Fraction("19.60"), (True, True, True))
        outside = match_profiles(store, Fraction("19.61"), (True, True, True))
        assert len(inside) == 1  # |19.10 - 19.60| = 0.50, at the window edge
        assert outside == ()

    def test_preserves_store_order(self):
        store = SyringeStore()
        for brand in ("First", "Second", "Third"):
            store = add(store, make_profile(brand, Fraction(6))).store
        matched = match_profiles(store, Fraction("19.10"), (True, True, True))
        assert [p.brand for p in matched] == ["First", "Second", "Third"]


# tolerance bands over centi-valued inputs; compared against the Decimal oracle
nominal_cents = st.integers(min_value=1, max_value=5000)


class TestTolerance:
    def test_small_syringe_at_half(self):
        # 2 ml nominal, 2 ml expelled: 5% of 2 = 0.10
        assert tolerance(Fraction(2), Fraction(2)) == Fraction(1, 10)

    def test_small_syringe_below_half(self):
        # 3 ml nominal, 1 ml expelled: 1.5% of 3 + 2% of 1 = 0.065
        assert tolerance(Fraction(3), Fraction(1)) == Fraction(65, 1000)

    def test_large_syringe_at_half(self):
        # 20 ml nominal, 12 ml expelled: 4% of 12 = 0.48
        assert tolerance(Fraction(20), Fraction(12)) == Fraction(48, 100)

    def test_half_boundary_uses_upper_band(self):
        # exactly half counts as ">= half"
        assert tolerance(Fraction(20), Fraction(10)) == Fraction(4, 100) * 10

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            tolerance(Fraction(20), Fraction(-1))
        with pytest.raises(ValueError):
            tolerance(Fraction(20), Fraction(21))
        with pytest.raises(ValueError):
            tolerance(Fraction(0), Fraction(0))

    @given(st.data())
    @settings(max_examples=300)
    def test_matches_decimal_oracle(self, data):
        nominal = data.draw(nominal_cents)
        expelled = data.draw(st.integers(min_value=0, max_value=nominal))
        got = tolerance(Fraction(nominal, 100), Fraction(expelled, 100))
        want = tolerance_oracle(Decimal(nominal) / 100, Decimal(expelled) / 100)
        assert got == Fraction(want)  # Decimal converts exactly


class TestRemainingVolume:
    def test_priming_deduction(self):
        profile = SyringeProfile(brand="BRAUN Omnifix", nominal_capacity="20.00",
                                 fill_volume="15.36", barrel_diameter="19.10")
        remaining, complete = remaining_volume(profile, True, Fraction(0))
        assert remaining == Fraction("14.86")  # 15.36 - 0.50 priming
        assert not complete

    def test_floors_at_zero(self):
        profile = make_profile("Alpha", Fraction(6))
        remaining, complete = remaining_volume(profile, True, Fraction(6))
        assert remaining == 0
        assert complete

    def test_complete_within_tolerance(self):
        profile = SyringeProfile(brand="BRAUN Omnifix", nominal_capacity="20.00",
                                 fill_volume="15.36", barrel_diameter="19.10")
        # tolerance(20, 15.36) = 4% of 15.36 = 0.6144
        near_done = remaining_volume(profile, False, Fraction("14.75"))
        assert near_done == (Fraction("0.61"), True)
        not_done = remaining_volume(profile, False, Fraction("14.00"))
        assert not_done == (Fraction("1.36"), False)

    def test_delivered_over_fill_rejected(self):
        profile = make_profile("Alpha", Fraction(6))
        with pytest.raises(ValueError):
            remaining_volume(profile, False, Fraction(7))


class TestLoadSeedStore:
    def test_stock_image(self):
        store, logs = load_seed_store(SEED_PATH)
        assert [p.brand for p in store] == ["BRAUN Omnifix", "Teruno"]
        assert logs == [
            "BRAUN Omnifix",
            "Teruno",
            "Error: Duplicate Syringe Preset",
            "Error: Max Rate Exceeded: BD Plastipak",
        ]

    def test_skip_duplicate_check(self):
        store, logs = load_seed_store(SEED_PATH, skip_duplicate_check=True)
        assert [p.brand for p in store] == ["BRAUN Omnifix", "Teruno", "BRAUN Omnifix"]
        assert DUPLICATE_LOG not in logs

    def test_skip_rate_cap(self):
        store, logs = load_seed_store(SEED_PATH, skip_rate_cap=True)
        assert [p.brand for p in store] == ["BRAUN Omnifix", "Teruno", "BD Plastipak"]
        assert not any(line.startswith(RATE_CAP_LOG) for line in logs)

    def test_bad_record_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"brand": "OK", "nominal_capacity": "20.00", '
                        '"fill_volume": "10.00", "barrel_diameter": "19.10"}\n'
                        "not json\n", encoding="utf-8")
        with pytest.raises(ProfileError, match=r"bad\.jsonl:2"):
            load_seed_store(path)

    def test_blank_and_comment_lines_skipped(self, tmp_path):
        path = tmp_path / "sparse.jsonl"
        path.write_text("\n# comment\n"
                        '{"brand": "Solo", "nominal_capacity": "20.00", '
                        '"fill_volume": "10.00", "barrel_diameter": "19.10"}\n',
                        encoding="utf-8")
        store, logs = load_seed_store(path)
        assert [p.brand for p in store] == ["Solo"]
        assert logs == ["Solo"]
