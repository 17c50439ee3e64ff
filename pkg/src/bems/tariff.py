"""Time-of-use cost engine.

All monetary amounts are integer micro-currency; each 15-minute interval
is charged independently as round(kWh * rate_micro), so totals are exact
and independent of summation order. Band boundaries are closed-open.

The billing rules assert the sign conventions outright: consumption
channels (appliances and the EV charger) are billed at the band rate,
generation is never billed, and negative grid energy is always a credit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

from . import analytics
from .core import (
    INTERVAL_HOURS,
    ChannelRole,
    EnergySeries,
    RateSchedule,
    minute_of_day,
    to_micro,
)

PEAK = "peak"
OFF_PEAK = "off_peak"


class TariffError(Exception):
    pass


@dataclass
class CostBreakdown:
    """Cost of one window of a series, everything in micro-currency."""

    window: tuple[int, int]
    per_channel_micro: dict[str, int]
    per_band_micro: dict[str, int]
    export_credit_micro: int
    ev_discount_savings_micro: int

    @property
    def gross_micro(self) -> int:
        return sum(self.per_channel_micro.values())

    @property
    def net_total_micro(self) -> int:
        return self.gross_micro - self.export_credit_micro

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "per_channel": {k: v / 1e6 for k, v in self.per_channel_micro.items()},
            "per_band": {k: v / 1e6 for k, v in self.per_band_micro.items()},
            "export_credit": self.export_credit_micro / 1e6,
            "ev_discount_savings": self.ev_discount_savings_micro / 1e6,
            "net_total": self.net_total_micro / 1e6,
        }


def band_of(t: datetime, rates: RateSchedule) -> str:
    """Classify a timestamp into peak / off_peak by its clock minute."""
    minute = minute_of_day(t)
    for window in rates.peak_windows:
        if window.contains(minute):
            return PEAK
    return OFF_PEAK


def interval_charge_micro(kw: float, rate_micro: int) -> int:
    """Charge for one 15-minute sample; the single quantization point."""
    return round(kw * INTERVAL_HOURS * rate_micro)


def cost(
    series: EnergySeries,
    rates: RateSchedule,
    window: Optional[tuple[int, int]] = None,
) -> CostBreakdown:
    """Per-interval TOU billing over [window.start, window.stop).

    The EV channel is billed at the discounted rate inside the EV window
    (overriding the band rate there); negative grid energy earns the
    export credit. Generation channels are skipped outright, so they can
    never be double-billed as consumption.
    """
    lo, hi = window or (0, len(series))
    if not (0 <= lo <= hi <= len(series)):
        raise TariffError(f"window {window} out of range for series of length {len(series)}")

    peak_micro = to_micro(rates.peak_rate)
    off_peak_micro = to_micro(rates.off_peak_rate)
    ev_micro = to_micro(rates.ev_discounted_rate)
    export_micro_rate = to_micro(rates.export_credit)

    per_channel: dict[str, int] = {}
    per_band: dict[str, int] = {PEAK: 0, OFF_PEAK: 0}
    ev_savings = 0
    export_credit = 0

    for name in series.channels:
        role = series.channel_roles.get(name)
        if role is ChannelRole.GENERATION:
            continue
        values = series.channels[name]
        if role is ChannelRole.GRID:
            for k in range(lo, hi):
                kw = values[k]
                if kw < 0:
                    export_credit += interval_charge_micro(-kw, export_micro_rate)
            continue
        channel_total = 0
        for k in range(lo, hi):
            kw = values[k]
            t = series.timestamp(k)
            band = band_of(t, rates)
            band_rate = peak_micro if band == PEAK else off_peak_micro
            if role is ChannelRole.EV_CHARGER and rates.ev_discount_window.contains(minute_of_day(t)):
                charge = interval_charge_micro(kw, ev_micro)
                ev_savings += interval_charge_micro(kw, band_rate) - charge
            else:
                charge = interval_charge_micro(kw, band_rate)
            channel_total += charge
            per_band[band] += charge
        per_channel[name] = channel_total

    return CostBreakdown(
        window=(lo, hi),
        per_channel_micro=per_channel,
        per_band_micro=per_band,
        export_credit_micro=export_credit,
        ev_discount_savings_micro=ev_savings,
    )


@dataclass
class CostForecast:
    method: str
    horizon: int
    predicted_kwh: float
    predicted_cost_micro: int
    per_channel_kwh: dict[str, float] = field(default_factory=dict)


def _band_energy_shares(series: EnergySeries, channel: str, rates: RateSchedule) -> dict[str, float]:
    """Historical share of a channel's energy by effective rate bucket."""
    buckets = {PEAK: 0.0, OFF_PEAK: 0.0, "ev_discount": 0.0}
    role = series.channel_roles.get(channel)
    for k, kwh in enumerate(analytics.to_energy(series, channel)):
        t = series.timestamp(k)
        if role is ChannelRole.EV_CHARGER and rates.ev_discount_window.contains(minute_of_day(t)):
            buckets["ev_discount"] += kwh
        else:
            buckets[band_of(t, rates)] += kwh
    total = sum(buckets.values())
    if total == 0:
        return {key: 0.0 for key in buckets}
    return {key: value / total for key, value in buckets.items()}


def cost_forecast(
    series: EnergySeries,
    rates: RateSchedule,
    method: str,
    horizon: int,
) -> CostForecast:
    """Forecast consumption per channel and price it by historical band shares."""
    rate_micro = {
        PEAK: to_micro(rates.peak_rate),
        OFF_PEAK: to_micro(rates.off_peak_rate),
        "ev_discount": to_micro(rates.ev_discounted_rate),
    }
    total_kwh = 0.0
    total_cost = 0
    per_channel: dict[str, float] = {}
    for name in series.consumption_channels():
        result = analytics.forecast(series, name, method, horizon)
        energy = sum(result.predicted)
        per_channel[name] = energy
        total_kwh += energy
        shares = _band_energy_shares(series, name, rates)
        for bucket, share in shares.items():
            total_cost += round(energy * share * rate_micro[bucket])
    return CostForecast(
        method=method,
        horizon=horizon,
        predicted_kwh=total_kwh,
        predicted_cost_micro=total_cost,
        per_channel_kwh=per_channel,
    )


def save_pricing_document(rates: RateSchedule, path: str | Path) -> None:
    """Write the human-editable energy pricing document."""
    doc = {
        "description": "Residential time-of-use electricity pricing",
        "off_peak": {
            "windows": [w.as_text() for w in rates.off_peak_windows],
            "rate_per_kwh": rates.off_peak_rate,
        },
        "peak": {
            "windows": [w.as_text() for w in rates.peak_windows],
            "rate_per_kwh": rates.peak_rate,
        },
        "export_credit_per_kwh": rates.export_credit,
        "ev_discount": {
            "window": rates.ev_discount_window.as_text(),
            "rate_per_kwh": rates.ev_discounted_rate,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2))


def load_pricing_document(path: str | Path) -> RateSchedule:
    path = Path(path)
    if not path.exists():
        raise TariffError(f"pricing document not found: {path}")
    try:
        doc = json.loads(path.read_text())
        return RateSchedule(
            off_peak_windows=tuple(_parse_window(w) for w in doc["off_peak"]["windows"]),
            peak_windows=tuple(_parse_window(w) for w in doc["peak"]["windows"]),
            off_peak_rate=doc["off_peak"]["rate_per_kwh"],
            peak_rate=doc["peak"]["rate_per_kwh"],
            export_credit=doc["export_credit_per_kwh"],
            ev_discount_window=_parse_window(doc["ev_discount"]["window"]),
            ev_discounted_rate=doc["ev_discount"]["rate_per_kwh"],
        )
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise TariffError(f"unparseable pricing document: {exc}") from exc


def _parse_window(text: str):
    from .core import ClockWindow

    start_text, end_text = [part.strip() for part in text.split("-")]

    def minutes(clock: str) -> int:
        h, m = clock.split(":")
        return int(h) * 60 + int(m)

    return ClockWindow(minutes(start_text), minutes(end_text))
