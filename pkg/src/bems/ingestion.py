"""Load historical energy CSVs and live-state documents; generate
synthetic buildings.

CSV contract: header row ``timestamp,<channel>...``, ISO-8601 timestamps
without zone, values in decimal kW at 15-minute steps. Single missing
rows are filled by linear interpolation; runs of two or more missing
rows are rejected (silent long-gap filling would corrupt the oracles).
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping, Optional

from .core import (
    INTERVAL,
    ChannelRole,
    EnergySeries,
    MeterSnapshot,
    MeterStatus,
    BuildingProfile,
    validate_series,
)

DEFAULT_ROLE_MAP: dict[str, ChannelRole] = {
    "grid": ChannelRole.GRID,
    "electrical grid": ChannelRole.GRID,
    "solar": ChannelRole.GENERATION,
    "pv": ChannelRole.GENERATION,
    "photovoltaic system": ChannelRole.GENERATION,
    "car1": ChannelRole.EV_CHARGER,
    "ev": ChannelRole.EV_CHARGER,
    "electric vehicle charger": ChannelRole.EV_CHARGER,
}


class IngestionError(Exception):
    pass


@dataclass
class IngestionReport:
    rows_read: int = 0
    channels_found: list[str] = field(default_factory=list)
    gaps_filled: int = 0
    rows_rejected: int = 0
    rejection_reasons: list[str] = field(default_factory=list)


def infer_role(channel: str, role_map: Optional[Mapping[str, ChannelRole]] = None) -> ChannelRole:
    mapping = dict(DEFAULT_ROLE_MAP)
    if role_map:
        mapping.update({k.lower(): v for k, v in role_map.items()})
    return mapping.get(channel.lower(), ChannelRole.APPLIANCE)


def load_history(
    path: str | Path,
    building_id: str,
    role_map: Optional[Mapping[str, ChannelRole]] = None,
    resample: bool = False,
    channel_tags: Optional[Mapping[str, str]] = None,
) -> tuple[EnergySeries, IngestionReport]:
    """Load a historical CSV into a validated EnergySeries.

    With ``resample`` set, data at a finer uniform step is downsampled to
    15 minutes by averaging; otherwise a non-15-minute interval is an
    error.
    """
    path = Path(path)
    report = IngestionReport()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError("no data rows") from None
        if len(header) < 2:
            raise IngestionError("malformed header: need timestamp plus channels")
        channel_names = header[1:]
        if len(set(channel_names)) != len(channel_names):
            raise IngestionError("malformed header: duplicate channel names")
        report.channels_found = list(channel_names)

        timestamps: list[datetime] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                report.rows_rejected += 1
                report.rejection_reasons.append(f"line {lineno}: wrong column count")
                continue
            try:
                ts = datetime.fromisoformat(row[0])
                values = [float(cell) for cell in row[1:]]
            except ValueError as exc:
                report.rows_rejected += 1
                report.rejection_reasons.append(f"line {lineno}: {exc}")
                continue
            if timestamps and ts <= timestamps[-1]:
                raise IngestionError(f"non-monotone timestamps at line {lineno}")
            timestamps.append(ts)
            rows.append(values)
        report.rows_read = len(rows) + report.rows_rejected

    if not rows:
        raise IngestionError("no data rows")

    if len(timestamps) > 1:
        step = timestamps[1] - timestamps[0]
    else:
        step = INTERVAL
    if step != INTERVAL:
        if not resample:
            raise IngestionError(
                f"interval is {step}, expected 15 minutes (pass resample to downsample)"
            )
        timestamps, rows = _resample_to_interval(timestamps, rows)

    timestamps, rows, filled = _fill_gaps(timestamps, rows)
    report.gaps_filled = filled

    channels = {
        name: tuple(row[i] for row in rows) for i, name in enumerate(channel_names)
    }
    series = EnergySeries(
        building_id=building_id,
        start=timestamps[0],
        channels=channels,
        channel_roles={n: infer_role(n, role_map) for n in channel_names},
        channel_tags=dict(channel_tags or {}),
    )
    violations = validate_series(series)
    if violations:
        raise IngestionError(
            "loaded series violates invariants: "
            + "; ".join(v.message for v in violations[:5])
        )
    return series, report


def _resample_to_interval(
    timestamps: list[datetime], rows: list[list[float]]
) -> tuple[list[datetime], list[list[float]]]:
    """Downsample a finer uniform grid to 15 minutes by bucket means."""
    step = timestamps[1] - timestamps[0]
    if INTERVAL.total_seconds() % step.total_seconds() != 0:
        raise IngestionError(f"cannot resample from interval {step}")
    factor = int(INTERVAL.total_seconds() // step.total_seconds())
    out_ts: list[datetime] = []
    out_rows: list[list[float]] = []
    for i in range(0, len(rows) - factor + 1, factor):
        bucket = rows[i : i + factor]
        out_ts.append(timestamps[i])
        out_rows.append([sum(col) / factor for col in zip(*bucket)])
    if not out_rows:
        raise IngestionError("not enough rows to resample")
    return out_ts, out_rows


def _fill_gaps(
    timestamps: list[datetime], rows: list[list[float]]
) -> tuple[list[datetime], list[list[float]], int]:
    filled = 0
    out_ts = [timestamps[0]]
    out_rows = [rows[0]]
    for ts, row in zip(timestamps[1:], rows[1:]):
        expected = out_ts[-1] + INTERVAL
        if ts == expected:
            out_ts.append(ts)
            out_rows.append(row)
            continue
        missing = int((ts - expected) / INTERVAL)
        if missing > 1:
            raise IngestionError(
                f"gap of {missing} intervals before {ts.isoformat()}; "
                "only single missing rows are interpolated"
            )
        prev = out_rows[-1]
        out_ts.append(expected)
        out_rows.append([(a + b) / 2 for a, b in zip(prev, row)])
        filled += 1
        out_ts.append(ts)
        out_rows.append(row)
    return out_ts, out_rows, filled


def save_history(series: EnergySeries, path: str | Path) -> None:
    """Write a series back to the CSV contract; inverse of load_history."""
    path = Path(path)
    names = list(series.channels)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp"] + names)
        for k in range(len(series)):
            row = [series.timestamp(k).isoformat()] + [
                repr(series.channels[n][k]) for n in names
            ]
            writer.writerow(row)


def load_meters(document: Mapping[str, Any], observed_at: Optional[datetime] = None) -> list[MeterSnapshot]:
    """Parse the smart-meters JSON document into snapshots.

    The document is an object keyed by meter name; each entry carries
    name/description/status/online/unit and, when AVAILABLE, a value in
    kW. Unknown extra fields are ignored.
    """
    observed_at = observed_at or datetime(2000, 1, 1)
    snapshots: list[MeterSnapshot] = []
    for meter_id, entry in document.items():
        for field_name in ("name", "description", "status", "online", "unit"):
            if field_name not in entry:
                raise IngestionError(f"meter {meter_id!r}: missing required field {field_name!r}")
        if entry["unit"] != "kW":
            raise IngestionError(f"meter {meter_id!r}: unit mismatch ({entry['unit']!r})")
        status = MeterStatus(entry["status"])
        value = entry.get("value") if status is MeterStatus.AVAILABLE else None
        snapshots.append(
            MeterSnapshot(
                meter_id=meter_id,
                name=entry["name"],
                description=entry["description"],
                status=status,
                online=bool(entry["online"]),
                unit=entry["unit"],
                value=value,
                observed_at=observed_at,
            )
        )
    return snapshots


def synth_month(
    seed: int,
    profile: BuildingProfile,
    days: int,
    season: str = "heating",
    start: Optional[datetime] = None,
) -> EnergySeries:
    """Generate a deterministic synthetic month for a building profile.

    Channel shapes: generation follows a midday bell and is zero outside
    06:00-20:00; EV charging clusters in overnight blocks; appliances are
    bursty over a small base load. The grid channel is computed as
    total consumption minus generation (summed in sorted channel order),
    so the balance identity holds by construction and the grid may go
    negative around midday.
    """
    if days not in range(28, 32):
        raise ValueError("days must be in 28..31")
    if season not in ("heating", "cooling"):
        raise ValueError("season must be 'heating' or 'cooling'")
    rng = random.Random(seed)
    n = days * 96
    if start is None:
        start = datetime(2021, 1, 1) if season == "heating" else datetime(2021, 6, 1)

    grid_name = None
    gen_name = None
    ev_name = None
    appliance_names: list[str] = []
    for sensor in profile.sensors:
        role = infer_role(sensor)
        if role is ChannelRole.GRID and grid_name is None:
            grid_name = sensor
        elif role is ChannelRole.GENERATION and gen_name is None:
            gen_name = sensor
        elif role is ChannelRole.EV_CHARGER and ev_name is None:
            ev_name = sensor
        else:
            appliance_names.append(sensor)
    if grid_name is None:
        raise ValueError("profile has no grid sensor")

    channels: dict[str, list[float]] = {}
    tags: dict[str, str] = {}

    if gen_name is not None:
        peak_kw = rng.uniform(3.0, 6.0)
        values = []
        for k in range(n):
            minute = ((k * 15) + start.hour * 60 + start.minute) % 1440
            hour = minute / 60
            if 6.0 <= hour < 20.0:
                envelope = math.sin(math.pi * (hour - 6.0) / 14.0) ** 2
                cloud = 1.0 - 0.4 * rng.random()
                values.append(round(peak_kw * envelope * cloud, 3))
            else:
                values.append(0.0)
        channels[gen_name] = values

    if ev_name is not None:
        charge_kw = rng.choice([3.3, 6.6, 7.2])
        values = [0.0] * n
        for day in range(days):
            if rng.random() < 0.7:
                start_slot = rng.randrange(0, 20)  # within 00:00-05:00
                length = rng.randrange(8, 20)
                for s in range(start_slot, min(start_slot + length, 96)):
                    values[day * 96 + s] = charge_kw
        channels[ev_name] = values

    for name in appliance_names:
        base = rng.uniform(0.02, 0.15)
        burst_kw = rng.uniform(0.4, 2.5)
        lowered = name.lower()
        if any(t in lowered for t in ("air", "compressor", "ac ")):
            tags[name] = "cooling"
            active = season == "cooling"
        elif any(t in lowered for t in ("furnace", "heater", "heat")):
            tags[name] = "heating"
            active = season == "heating"
        else:
            active = True
        values = []
        for k in range(n):
            v = base
            hour = (((k * 15) + start.hour * 60) % 1440) / 60
            busy = 6 <= hour < 23
            if active and busy and rng.random() < 0.15:
                v += burst_kw * rng.uniform(0.5, 1.0)
            values.append(round(v, 3))
        channels[name] = values

    grid = []
    consumption_names = sorted(set(channels) - ({gen_name} if gen_name else set()))
    for k in range(n):
        total = 0.0
        for cname in consumption_names:
            total += channels[cname][k]
        gen = channels[gen_name][k] if gen_name else 0.0
        grid.append(total - gen)
    channels[grid_name] = grid

    roles = {grid_name: ChannelRole.GRID}
    if gen_name:
        roles[gen_name] = ChannelRole.GENERATION
    if ev_name:
        roles[ev_name] = ChannelRole.EV_CHARGER
    for name in appliance_names:
        roles[name] = ChannelRole.APPLIANCE

    return EnergySeries(
        building_id=profile.building_id,
        start=start,
        channels={k: tuple(v) for k, v in channels.items()},
        channel_roles=roles,
        channel_tags=tags,
    )
