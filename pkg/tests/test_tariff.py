import json
from datetime import datetime

import pytest

from bems import tariff
from bems.core import default_rate_schedule
from bems.tariff import (
    OFF_PEAK,
    PEAK,
    TariffError,
    band_of,
    cost,
    cost_forecast,
    interval_charge_micro,
    load_pricing_document,
    save_pricing_document,
)
from conftest import make_series

RATES = default_rate_schedule()


class TestBandOf:
    def test_boundaries_closed_open(self):
        assert band_of(datetime(2021, 1, 1, 16, 59), RATES) == OFF_PEAK
        assert band_of(datetime(2021, 1, 1, 17, 0), RATES) == PEAK
        assert band_of(datetime(2021, 1, 1, 19, 59), RATES) == PEAK
        assert band_of(datetime(2021, 1, 1, 20, 0), RATES) == OFF_PEAK
        assert band_of(datetime(2021, 1, 1, 0, 0), RATES) == OFF_PEAK


def test_interval_charge_single_quantization():
    # 1.5 kW for 15 min at $0.10/kWh = 37500 micro-dollars, one round()
    assert interval_charge_micro(1.5, 100_000) == 37_500
    assert interval_charge_micro(0.001, 100_000) == 25
    assert interval_charge_micro(0.0001, 100_000) == 2  # round(2.5) banker's


class TestCost:
    def test_hand_computed_band_split(self):
        # four off-peak then four peak intervals, one appliance at 2 kW
        series = make_series({"grid": [2.0] * 8, "air1": [2.0] * 8},
                             start=datetime(2021, 1, 1, 16, 0))
        breakdown = cost(series, RATES)
        # off-peak: 4 * round(2*0.25*100000) = 200000; peak: 4 * 100000 = 400000
        assert breakdown.per_channel_micro == {"air1": 600_000}
        assert breakdown.per_band_micro == {PEAK: 400_000, OFF_PEAK: 200_000}
        assert breakdown.export_credit_micro == 0
        assert breakdown.gross_micro == 600_000
        assert breakdown.net_total_micro == 600_000

    def test_positive_grid_is_not_billed(self):
        series = make_series({"grid": [5.0] * 4, "air1": [1.0] * 4})
        breakdown = cost(series, RATES)
        assert "grid" not in breakdown.per_channel_micro
        assert breakdown.export_credit_micro == 0

    def test_negative_grid_earns_export_credit(self):
        series = make_series({"grid": [-2.0, 1.0], "air1": [0.0, 0.0]})
        breakdown = cost(series, RATES)
        # 0.5 kWh exported at $0.08
        assert breakdown.export_credit_micro == 40_000
        assert breakdown.net_total_micro == -40_000

    def test_generation_never_billed(self):
        series = make_series({"grid": [0.0] * 4, "solar": [9.0] * 4,
                              "air1": [1.0] * 4})
        breakdown = cost(series, RATES)
        assert set(breakdown.per_channel_micro) == {"air1"}

    def test_ev_discount_window_override(self):
        # 05:00-05:45 inside the EV window, 06:00-06:45 outside; all off-peak
        series = make_series({"grid": [0.0] * 8, "car1": [4.0] * 8},
                             start=datetime(2021, 1, 1, 5, 0))
        breakdown = cost(series, RATES)
        # inside: 4 * round(1 kWh * 50000) = 200000
        # outside: 4 * round(1 kWh * 100000) = 400000
        assert breakdown.per_channel_micro == {"car1": 600_000}
        # savings: 4 * (100000 - 50000)
        assert breakdown.ev_discount_savings_micro == 200_000
        # discounted charges still land in the interval's band bucket
        assert breakdown.per_band_micro == {PEAK: 0, OFF_PEAK: 600_000}

    def test_window_argument(self):
        series = make_series({"grid": [0.0] * 8, "air1": [2.0] * 8})
        full = cost(series, RATES)
        half = cost(series, RATES, window=(0, 4))
        assert half.per_channel_micro["air1"] * 2 == full.per_channel_micro["air1"]
        with pytest.raises(TariffError, match="out of range"):
            cost(series, RATES, window=(0, 9))

    def test_to_dict_in_dollars(self):
        series = make_series({"grid": [-2.0] * 4, "air1": [2.0] * 4})
        d = cost(series, RATES).to_dict()
        assert d["per_channel"]["air1"] == 0.2
        assert d["export_credit"] == 0.16
        assert d["net_total"] == pytest.approx(0.04)


class TestCostForecast:
    def test_prices_forecast_energy_by_band_shares(self):
        series = make_series({"grid": [0.0] * 192, "air1": [2.0] * 192})
        cf = cost_forecast(series, RATES, "moving_average", 96)
        assert cf.predicted_kwh == pytest.approx(48.0)
        assert cf.per_channel_kwh == {"air1": pytest.approx(48.0)}
        # all intervals covered: 3/24 of energy in peak at 0.20, rest at 0.10
        expected = round(48.0 * (3 / 24) * 200_000) + round(48.0 * (21 / 24) * 100_000)
        assert cf.predicted_cost_micro == expected

    def test_zero_history_channel(self):
        series = make_series({"grid": [0.0] * 96, "air1": [0.0] * 96})
        cf = cost_forecast(series, RATES, "moving_average", 96)
        assert cf.predicted_cost_micro == 0


class TestPricingDocument:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "pricing.json"
        save_pricing_document(RATES, path)
        assert load_pricing_document(path) == RATES

    def test_document_is_human_readable(self, tmp_path):
        path = tmp_path / "pricing.json"
        save_pricing_document(RATES, path)
        doc = json.loads(path.read_text())
        assert doc["peak"]["windows"] == ["17:00 - 20:00"]
        assert doc["ev_discount"]["window"] == "00:00 - 06:00"

    def test_missing_file(self, tmp_path):
        with pytest.raises(TariffError, match="not found"):
            load_pricing_document(tmp_path / "nope.json")

    def test_malformed_document(self, tmp_path):
        path = tmp_path / "pricing.json"
        path.write_text(json.dumps({"off_peak": {}}))
        with pytest.raises(TariffError, match="unparseable"):
            load_pricing_document(path)

    def test_unparseable_json(self, tmp_path):
        path = tmp_path / "pricing.json"
        path.write_text("{nope")
        with pytest.raises(TariffError, match="unparseable"):
            load_pricing_document(path)
