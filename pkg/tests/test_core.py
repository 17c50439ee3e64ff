import math
from datetime import datetime

import pytest
from hypothesis import given, strategies as st

from bems.core import (
    MINUTES_PER_DAY,
    AttributeKind,
    AttributeSpec,
    ChannelRole,
    ClockWindow,
    DeviceState,
    IntentLabel,
    MeterSnapshot,
    MeterStatus,
    PRIMARY_CATEGORIES,
    RateSchedule,
    SECONDARY_CATEGORIES,
    SECONDARY_TO_PRIMARY,
    TAXONOMY,
    TokenUsage,
    default_rate_schedule,
    from_micro,
    minute_of_day,
    resolve_enduse,
    taxonomy_check,
    to_micro,
    validate_series,
)
from conftest import make_series


def test_micro_round_trip():
    assert to_micro(0.10) == 100_000
    assert to_micro(2.50) == 2_500_000
    assert from_micro(to_micro(1.234567)) == pytest.approx(1.234567)
    # round, not truncate (ties follow round-half-even)
    assert to_micro(0.0000009) == 1
    assert to_micro(0.0000015) == 2


class TestValidateSeries:
    def test_clean_series_has_no_violations(self):
        series = make_series({"grid": [1.0, 2.0], "air1": [0.5, 0.5]})
        assert validate_series(series) == []

    def test_length_mismatch(self):
        series = make_series({"grid": [1.0, 2.0], "air1": [0.5]})
        assert any(v.message == "length mismatch" for v in validate_series(series))

    def test_empty_channels(self):
        series = make_series({"grid": [], "air1": []})
        assert any("empty" in v.message for v in validate_series(series))

    def test_no_channels_at_all(self):
        series = make_series({})
        assert [v.message for v in validate_series(series)] == ["series has no channels"]

    def test_grid_channel_cardinality(self):
        no_grid = make_series({"air1": [0.5]})
        assert any("grid" in v.message for v in validate_series(no_grid))
        two_grids = make_series(
            {"a": [1.0], "b": [1.0]},
            roles={"a": ChannelRole.GRID, "b": ChannelRole.GRID},
        )
        assert any("found 2" in v.message for v in validate_series(two_grids))

    def test_at_most_one_generation(self):
        series = make_series(
            {"grid": [1.0], "s1": [1.0], "s2": [1.0]},
            roles={"grid": ChannelRole.GRID, "s1": ChannelRole.GENERATION,
                   "s2": ChannelRole.GENERATION},
        )
        assert any("generation" in v.message for v in validate_series(series))

    def test_channel_without_role(self):
        series = make_series({"grid": [1.0], "x": [1.0]},
                             roles={"grid": ChannelRole.GRID})
        assert any(v.message == "channel has no role" for v in validate_series(series))

    def test_negative_non_grid_sample_located(self):
        series = make_series({"grid": [-1.0, 1.0], "air1": [0.5, -0.5]})
        violations = [v for v in validate_series(series)
                      if v.message == "negative non-grid sample"]
        assert [(v.channel, v.index) for v in violations] == [("air1", 1)]


class TestMeterSnapshot:
    def test_unit_must_be_kw(self):
        with pytest.raises(ValueError, match="unit mismatch"):
            MeterSnapshot("m", "m", "d", MeterStatus.AVAILABLE, True,
                          datetime(2021, 1, 1), unit="W", value=1.0)

    def test_unavailable_reports_no_value(self):
        with pytest.raises(ValueError, match="must not report"):
            MeterSnapshot("m", "m", "d", MeterStatus.UNAVAILABLE, True,
                          datetime(2021, 1, 1), value=1.0)
        snap = MeterSnapshot("m", "m", "d", MeterStatus.UNAVAILABLE, False,
                             datetime(2021, 1, 1))
        assert "value" not in snap.to_dict()

    def test_value_must_be_finite(self):
        for bad in (float("nan"), float("inf")):
            with pytest.raises(ValueError, match="finite"):
                MeterSnapshot("m", "m", "d", MeterStatus.AVAILABLE, True,
                              datetime(2021, 1, 1), value=bad)


class TestAttributeSpec:
    def test_switch_is_strictly_boolean(self):
        spec = AttributeSpec(kind=AttributeKind.SWITCH)
        assert spec.conforms(True) and spec.conforms(False)
        assert not spec.conforms(1)
        assert not spec.conforms("on")

    def test_numeric_rejects_bool_and_out_of_range(self):
        spec = AttributeSpec(kind=AttributeKind.NUMERIC, minimum=0, maximum=100)
        assert spec.conforms(0) and spec.conforms(100) and spec.conforms(50.5)
        assert not spec.conforms(True)  # bool is not a number here
        assert not spec.conforms(-1)
        assert not spec.conforms(101)
        assert not spec.conforms("50")

    def test_mode_membership(self):
        spec = AttributeSpec(kind=AttributeKind.MODE, modes=("off", "cool"))
        assert spec.conforms("cool")
        assert not spec.conforms("heat")
        assert not spec.conforms(0)

    @given(st.floats(allow_nan=False, allow_infinity=False, width=32))
    def test_numeric_conformance_matches_range(self, value):
        spec = AttributeSpec(kind=AttributeKind.NUMERIC, minimum=-10, maximum=10)
        assert spec.conforms(float(value)) == (-10 <= value <= 10)


def test_device_state_rejects_nonconforming_attributes():
    spec = AttributeSpec(kind=AttributeKind.NUMERIC, minimum=0, maximum=10)
    with pytest.raises(ValueError, match="does not conform"):
        DeviceState("d", "D", "room", True, {"level": 11}, {"level": spec})
    with pytest.raises(ValueError, match="has no spec"):
        DeviceState("d", "D", "room", True, {"other": 1}, {"level": spec})


class TestClockWindow:
    def test_contains_is_closed_open(self):
        w = ClockWindow(1020, 1200)
        assert not w.contains(1019)
        assert w.contains(1020)
        assert w.contains(1199)
        assert not w.contains(1200)

    def test_bounds_validation(self):
        for start, end in ((-1, 10), (10, 10), (20, 10), (0, MINUTES_PER_DAY + 1)):
            with pytest.raises(ValueError):
                ClockWindow(start, end)

    def test_as_text(self):
        assert ClockWindow(0, 1020).as_text() == "00:00 - 17:00"


class TestRateSchedule:
    def test_default_schedule_is_valid(self):
        rates = default_rate_schedule()
        assert rates.off_peak_rate == 0.10
        assert rates.peak_rate == 0.20
        assert rates.export_credit == 0.08
        assert rates.ev_discounted_rate == 0.05
        assert rates.ev_discount_window == ClockWindow(0, 360)

    def test_windows_must_partition_the_day(self):
        with pytest.raises(ValueError, match="overlap"):
            RateSchedule(
                off_peak_windows=(ClockWindow(0, 1030),),
                peak_windows=(ClockWindow(1020, 1440),),
                off_peak_rate=0.1, peak_rate=0.2, export_credit=0.08,
                ev_discount_window=ClockWindow(0, 360), ev_discounted_rate=0.05,
            )
        with pytest.raises(ValueError, match="do not cover"):
            RateSchedule(
                off_peak_windows=(ClockWindow(0, 1000),),
                peak_windows=(ClockWindow(1020, 1440),),
                off_peak_rate=0.1, peak_rate=0.2, export_credit=0.08,
                ev_discount_window=ClockWindow(0, 360), ev_discounted_rate=0.05,
            )

    def test_negative_rates_rejected(self):
        with pytest.raises(ValueError, match=">= 0"):
            RateSchedule(
                off_peak_windows=(ClockWindow(0, 1020), ClockWindow(1200, 1440)),
                peak_windows=(ClockWindow(1020, 1200),),
                off_peak_rate=-0.1, peak_rate=0.2, export_credit=0.08,
                ev_discount_window=ClockWindow(0, 360), ev_discounted_rate=0.05,
            )

    def test_dict_round_trip(self):
        rates = default_rate_schedule()
        assert RateSchedule.from_dict(rates.to_dict()) == rates


class TestTaxonomy:
    def test_shape(self):
        assert len(PRIMARY_CATEGORIES) == 6
        assert len(SECONDARY_CATEGORIES) == 24
        assert len(set(SECONDARY_CATEGORIES)) == 24
        for secondary, primary in SECONDARY_TO_PRIMARY.items():
            assert secondary in TAXONOMY[primary]

    def test_taxonomy_check(self):
        assert taxonomy_check(IntentLabel("Memory", "Memory Creation"))
        assert not taxonomy_check(IntentLabel("Memory", "Cost Information"))
        assert not taxonomy_check(IntentLabel("Nonsense", "Memory Creation"))


class TestTokenUsage:
    def test_cost_pico_is_exact(self):
        usage = TokenUsage(28_937, 530)
        assert usage.cost_pico() == 28_937 * 2_500_000 + 530 * 10_000_000
        assert usage.cost() == pytest.approx(0.0776425, abs=1e-12)
        assert usage.total == 29_467

    def test_combine_keeps_prices(self):
        a = TokenUsage(10, 1, input_price=1.0, output_price=2.0)
        b = TokenUsage(5, 2)
        combined = a.combine(b)
        assert combined.prompt_tokens == 15
        assert combined.completion_tokens == 3
        assert combined.input_price == 1.0

    @given(st.integers(0, 10**7), st.integers(0, 10**7))
    def test_cost_pico_never_loses_precision(self, prompt, completion):
        usage = TokenUsage(prompt, completion)
        # integer arithmetic end to end: recomputing from parts is identical
        assert usage.cost_pico() == prompt * 2_500_000 + completion * 10_000_000


def test_minute_of_day():
    assert minute_of_day(datetime(2021, 1, 1, 0, 0)) == 0
    assert minute_of_day(datetime(2021, 1, 1, 17, 5)) == 1025


def test_resolve_enduse_uses_tags():
    series = make_series({"grid": [1.0], "furnace1": [0.2]},
                         tags={"furnace1": "heating"})
    assert resolve_enduse(series, "heater") == "furnace1"
    assert resolve_enduse(series, "AC") is None
    assert resolve_enduse(series, "television") is None


def test_token_usage_nan_free_dict():
    d = TokenUsage(100, 10).to_dict()
    assert set(d) == {"prompt_tokens", "completion_tokens", "total", "cost"}
    assert all(not (isinstance(v, float) and math.isnan(v)) for v in d.values())
