from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from t34sim.controller import new_hardware
from t34sim.display import (
    EMPTY_ACTION,
    LightColor,
    LineOverflowError,
    QuantityRangeError,
    UIAction,
    UIState,
    apply_action,
    fit_label,
    format_quantity,
    render_info_screen,
)
from conftest import digits_oracle


class TestFormatQuantity:
    def test_whole_number_no_decimals(self):
        assert format_quantity(5, "ml/h") == "5ml/h"

    def test_leading_zero_below_one(self):
        assert format_quantity("0.64", "ml/h") == "0.64ml/h"

    def test_single_trailing_zero_dropped(self):
        assert format_quantity("0.50", "ml") == "0.5ml"

    def test_zero(self):
        assert format_quantity(0, "ml") == "0ml"

    def test_unit_without_space(self):
        assert format_quantity(720, "mmHg") == "720mmHg"

    def test_top_of_range(self):
        assert format_quantity("999.99", "ml") == "999.99ml"

    def test_rejects_negative(self):
        with pytest.raises(QuantityRangeError):
            format_quantity("-0.01", "ml")

    def test_rejects_1000(self):
        with pytest.raises(QuantityRangeError):
            format_quantity(1000, "ml")

    def test_rejects_thousandths(self):
        with pytest.raises(ValueError):
            format_quantity("0.125", "ml")

    @given(st.integers(min_value=0, max_value=99999))
    def test_matches_string_oracle(self, cents):
        value = Fraction(cents, 100)
        assert format_quantity(value, "ml") == digits_oracle(cents) + "ml"


class TestUIState:
    def test_line_at_budget_ok(self):
        UIState(line1="x" * 15)  # 15 chars exactly

    def test_line_over_budget_raises(self):
        with pytest.raises(LineOverflowError):
            UIState(line2="x" * 16)

    def test_emphasis_out_of_range(self):
        with pytest.raises(ValueError):
            UIState(emphasis=4)

    def test_lines_property(self):
        ui = UIState(line1="a", line2="b", line3="c")
        assert ui.lines == ("a", "b", "c")


class TestUIAction:
    def test_alert_needs_red(self):
        with pytest.raises(ValueError):
            UIAction(line1="Load Syringe", alert=True)

    def test_alert_needs_text(self):
        with pytest.raises(ValueError):
            UIAction(light=LightColor.RED, alert=True)

    def test_alert_well_formed(self):
        action = UIAction(line1="Load Syringe", light=LightColor.RED, alert=True)
        assert action.alert

    def test_empty_action(self):
        assert EMPTY_ACTION.is_empty
        assert not UIAction(line1="x").is_empty


class TestApplyAction:
    def test_none_fields_persist(self):
        ui = UIState(line1="keep", line2="old", light=LightColor.GREEN, emphasis=2)
        out = apply_action(ui, UIAction(line2="new"))
        assert out == UIState(line1="keep", line2="new", light=LightColor.GREEN, emphasis=2)

    def test_empty_action_is_identity(self):
        ui = UIState(line1="keep")
        assert apply_action(ui, EMPTY_ACTION) is ui

    def test_full_overwrite(self):
        out = apply_action(
            UIState(line1="a", line2="b", line3="c", light=LightColor.RED, emphasis=3),
            UIAction(line1="", line2="", line3="", light=LightColor.OFF, emphasis=0),
        )
        assert out == UIState()

    @given(
        st.tuples(*(st.one_of(st.none(), st.text(max_size=15)) for _ in range(3))),
        st.one_of(st.none(), st.sampled_from(list(LightColor))),
    )
    def test_unset_fields_always_survive(self, lines, light):
        base = UIState(line1="111", line2="222", line3="333", light=LightColor.GREEN)
        out = apply_action(base, UIAction(line1=lines[0], line2=lines[1],
                                          line3=lines[2], light=light))
        for idx in range(3):
            expected = base.lines[idx] if lines[idx] is None else lines[idx]
            assert out.lines[idx] == expected
        assert out.light == (base.light if light is None else light)


class TestFitLabel:
    def test_exact_budget_untouched(self):
        # "Max. Rate" (9) + space + "5ml/h" (5) = 15
        assert fit_label("Max. Rate", "5ml/h") == "Max. Rate 5ml/h"

    def test_occlusion_abbreviates(self):
        # "Occlusion 720mmHg" is 17 chars, over budget
        assert fit_label("Occlusion", "720mmHg") == "Occl. 720mmHg"

    def test_battery_abbreviates(self):
        assert fit_label("Battery status", "99%") == "Battery 99%"

    def test_unknown_label_truncates(self):
        assert fit_label("Something Wordy", "123456ml") == "Someth 123456ml"

    def test_no_room_raises(self):
        with pytest.raises(LineOverflowError):
            fit_label("Rate", "x" * 15)


class TestRenderInfoScreen:
    def test_default_hardware(self):
        ui = render_info_screen(new_hardware(battery_level=99))
        assert ui.lines == ("Max. Rate 5ml/h", "Occl. 720mmHg", "Battery 99%")
        assert ui.light is LightColor.GREEN
        assert ui.emphasis == 1

    def test_every_line_fits(self):
        # the 100% battery case is the widest value the screen can show
        ui = render_info_screen(new_hardware(battery_level=100))
        for line in ui.lines:
            assert len(line) <= 15
