"""Deterministic energy-analysis oracles.

These functions both serve the agent's analysis tool and define benchmark
ground truth, so they are kept pure and auditable. Every public result is
in kWh (one 15-minute sample at p kW contributes p * 0.25 kWh); nothing
here returns kW.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import INTERVAL_HOURS, ChannelRole, EnergySeries

Granularity = str  # interval | hourly | daily | monthly
Scope = str  # per-channel | total-consumption | net-grid

_BUCKET_INTERVALS = {"interval": 1, "hourly": 4, "daily": 96, "monthly": None}


class AnalyticsError(Exception):
    pass


@dataclass
class AggregateView:
    granularity: Granularity
    scope: Scope
    values: dict[str, list[float]] | list[float]
    partial_trailing: bool = False


@dataclass
class ForecastResult:
    method: str
    horizon: int
    predicted: list[float]
    fit_diagnostics: dict[str, float] = field(default_factory=dict)


def to_energy(series: EnergySeries, channel: str) -> list[float]:
    """Convert one channel's kW samples to per-interval kWh."""
    if channel not in series.channels:
        raise AnalyticsError(f"unknown channel {channel!r}")
    return [kw * INTERVAL_HOURS for kw in series.channels[channel]]


def _signal(series: EnergySeries, scope: Scope) -> list[float]:
    n = len(series)
    if scope == "net-grid":
        grid = series.grid_channel()
        if grid is None:
            raise AnalyticsError("series has no grid channel")
        return to_energy(series, grid)
    if scope == "total-consumption":
        totals = [0.0] * n
        for name in series.consumption_channels():
            for k, kwh in enumerate(to_energy(series, name)):
                totals[k] += kwh
        return totals
    raise AnalyticsError(f"unknown scope {scope!r}")


def _sum_groups(values: list[float], size: int) -> tuple[list[float], bool]:
    out = []
    for i in range(0, len(values), size):
        out.append(sum(values[i : i + size]))
    partial = len(values) % size != 0
    return out, partial


def _bucketize(values: list[float], granularity: Granularity) -> tuple[list[float], bool]:
    # Coarser buckets are sums of the next-finer buckets so that
    # additivity across granularities holds bit-exactly.
    if granularity == "interval":
        return list(values), False
    hourly, partial = _sum_groups(values, 4)
    if granularity == "hourly":
        return hourly, partial
    daily, p = _sum_groups(hourly, 24)
    partial = partial or p
    if granularity == "daily":
        return daily, partial
    monthly, p = _sum_groups(daily, len(daily) or 1)
    return monthly, partial or p


def aggregate(series: EnergySeries, granularity: Granularity, scope: Scope) -> AggregateView:
    """Sum per-interval energy into the requested buckets.

    A partial trailing bucket is included and flagged. Total-consumption
    excludes the grid and generation channels.
    """
    if granularity not in _BUCKET_INTERVALS:
        raise AnalyticsError(f"unknown granularity {granularity!r}")
    if scope == "per-channel":
        values: dict[str, list[float]] = {}
        partial = False
        for name in series.channels:
            values[name], partial = _bucketize(to_energy(series, name), granularity)
        return AggregateView(granularity, scope, values, partial)
    buckets, partial = _bucketize(_signal(series, scope), granularity)
    return AggregateView(granularity, scope, buckets, partial)


def peak_hours(series: EnergySeries, scope: Scope = "total-consumption", k: int = 3) -> list[tuple[int, float]]:
    """Rank hours of day by mean energy across all days in the window.

    This is deliberately an hour-of-day profile, not a list of individual
    datetimes; ties break toward the earlier hour.
    """
    if not 1 <= k <= 24:
        raise AnalyticsError("k must be in [1, 24]")
    energy = _signal(series, scope)
    sums = [0.0] * 24
    counts = [0] * 24
    for idx, kwh in enumerate(energy):
        hour = series.timestamp(idx).hour
        sums[hour] += kwh
        counts[hour] += 1
    means = [(h, sums[h] / counts[h]) for h in range(24) if counts[h]]
    means.sort(key=lambda pair: (-pair[1], pair[0]))
    return means[:k]


def device_breakdown(series: EnergySeries, window: Optional[tuple[int, int]] = None) -> dict[str, float]:
    """Per-channel share of total consumption; grid and generation excluded."""
    lo, hi = window or (0, len(series))
    totals: dict[str, float] = {}
    for name in series.consumption_channels():
        totals[name] = sum(to_energy(series, name)[lo:hi])
    grand = sum(totals.values())
    if grand <= 0:
        raise AnalyticsError("empty breakdown: total consumption in window is zero")
    return {name: value / grand for name, value in totals.items()}


def forecast(
    series: EnergySeries,
    channel: str,
    method: str,
    horizon: int,
    window: int = 96,
) -> ForecastResult:
    """Baseline forecasts over per-interval kWh.

    moving_average predicts the trailing-window mean, constant across the
    horizon. linear_regression fits ordinary least squares on
    (interval index, kWh) and extrapolates.
    """
    energy = to_energy(series, channel)
    n = len(energy)
    if method == "moving_average":
        if n < window:
            raise AnalyticsError(f"insufficient history: need >= {window} samples")
        mean = sum(energy[-window:]) / window
        tail = energy[-window:]
        return ForecastResult(
            method=method,
            horizon=horizon,
            predicted=[mean] * horizon,
            fit_diagnostics={"window": float(window),
                             "window_min": min(tail), "window_max": max(tail)},
        )
    if method == "linear_regression":
        if n < 2:
            raise AnalyticsError("insufficient history: need >= 2 samples")
        xs = range(n)
        mean_x = (n - 1) / 2
        mean_y = sum(energy) / n
        sxx = sum((x - mean_x) ** 2 for x in xs)
        sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, energy))
        slope = sxy / sxx
        intercept = mean_y - slope * mean_x
        predicted = [intercept + slope * (n + h) for h in range(horizon)]
        residuals = [y - (intercept + slope * x) for x, y in zip(xs, energy)]
        rss = sum(r * r for r in residuals)
        return ForecastResult(
            method=method,
            horizon=horizon,
            predicted=predicted,
            fit_diagnostics={"slope": slope, "intercept": intercept,
                             "residual_sum_of_squares": rss},
        )
    raise AnalyticsError(f"unknown forecast method {method!r}")


def self_consumption(series: EnergySeries, window: Optional[tuple[int, int]] = None) -> dict[str, float]:
    """PV balance over the window: generated, exported, self-consumed kWh.

    Exported energy is the negative part of the grid channel; what was
    generated but not exported was consumed on site.
    """
    gen = series.generation_channel()
    if gen is None:
        raise AnalyticsError("series has no generation channel")
    grid = series.grid_channel()
    lo, hi = window or (0, len(series))
    generated = sum(to_energy(series, gen)[lo:hi])
    exported = sum(max(-kwh, 0.0) for kwh in to_energy(series, grid)[lo:hi])
    return {
        "generated_kwh": generated,
        "exported_kwh": exported,
        "self_consumed_kwh": generated - exported,
    }


def detect_anomalies(
    series: EnergySeries, channel: str, z_threshold: float = 4.0
) -> tuple[list[tuple[int, float]], Optional[str]]:
    """Flag samples whose |z| exceeds the threshold against channel mean/sigma.

    Returns (anomalies, warning); a zero-variance channel yields no
    anomalies and a warning instead of an error.
    """
    if channel not in series.channels:
        raise AnalyticsError(f"unknown channel {channel!r}")
    values = series.channels[channel]
    n = len(values)
    if n < 2:
        raise AnalyticsError("need >= 2 samples")
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n
    if variance == 0:
        return [], "zero variance: no anomalies detectable"
    sigma = variance ** 0.5
    flagged = []
    for idx, v in enumerate(values):
        z = (v - mean) / sigma
        if abs(z) > z_threshold:
            flagged.append((idx, z))
    return flagged, None
