"""Shared domain types: energy series, device/meter state, tariffs, intents.

Everything in this module is an immutable value object and can be shared
freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Any, Mapping, Optional, Sequence

INTERVAL = timedelta(minutes=15)
INTERVAL_HOURS = 0.25
MINUTES_PER_DAY = 24 * 60

# Currency is handled as integer micro-units (1 dollar == 1_000_000) so
# that cost sums are independent of summation order.
MICRO = 1_000_000


def to_micro(dollars: float) -> int:
    """Convert a dollar amount to integer micro-currency."""
    return round(dollars * MICRO)


def from_micro(micro: int) -> float:
    return micro / MICRO


class ChannelRole(str, Enum):
    GRID = "grid"
    GENERATION = "generation"
    EV_CHARGER = "ev_charger"
    APPLIANCE = "appliance"


CONSUMPTION_ROLES = (ChannelRole.EV_CHARGER, ChannelRole.APPLIANCE)


@dataclass(frozen=True)
class EnergySeries:
    """Uniform 15-minute multi-channel power history for one building.

    Channel samples are instantaneous power in kW. Timestamps are implied
    by ``start + k * INTERVAL``; there are no gaps. ``channel_tags`` may
    carry an end-use tag per channel (e.g. "cooling", "heating") so user
    terms like "AC" can be resolved unambiguously.
    """

    building_id: str
    start: datetime
    channels: Mapping[str, tuple[float, ...]]
    channel_roles: Mapping[str, ChannelRole]
    channel_tags: Mapping[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        if not self.channels:
            return 0
        return len(next(iter(self.channels.values())))

    def timestamp(self, index: int) -> datetime:
        return self.start + index * INTERVAL

    def grid_channel(self) -> Optional[str]:
        for name, role in self.channel_roles.items():
            if role is ChannelRole.GRID:
                return name
        return None

    def generation_channel(self) -> Optional[str]:
        for name, role in self.channel_roles.items():
            if role is ChannelRole.GENERATION:
                return name
        return None

    def consumption_channels(self) -> list[str]:
        return [
            name
            for name in self.channels
            if self.channel_roles.get(name) in CONSUMPTION_ROLES
        ]


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate_series`."""

    message: str
    channel: Optional[str] = None
    index: Optional[int] = None


def validate_series(series: EnergySeries) -> list[Violation]:
    """Check every EnergySeries invariant; returns all violations found.

    Violations are data, not failures: an empty list means the series is
    well formed.
    """
    violations: list[Violation] = []
    lengths = {name: len(vals) for name, vals in series.channels.items()}
    if not lengths:
        violations.append(Violation("series has no channels"))
        return violations
    expected_len = next(iter(lengths.values()))
    for name, n in lengths.items():
        if n != expected_len:
            violations.append(Violation("length mismatch", channel=name))
    if expected_len < 1:
        violations.append(Violation("channels are empty"))

    grid_channels = [
        n for n, r in series.channel_roles.items() if r is ChannelRole.GRID
    ]
    gen_channels = [
        n for n, r in series.channel_roles.items() if r is ChannelRole.GENERATION
    ]
    if len(grid_channels) != 1:
        violations.append(
            Violation(f"expected exactly one grid channel, found {len(grid_channels)}")
        )
    if len(gen_channels) > 1:
        violations.append(
            Violation(f"at most one generation channel allowed, found {len(gen_channels)}")
        )
    for name in series.channels:
        if name not in series.channel_roles:
            violations.append(Violation("channel has no role", channel=name))

    for name, values in series.channels.items():
        role = series.channel_roles.get(name)
        if role is None or role is ChannelRole.GRID:
            continue
        for i, v in enumerate(values):
            if v < 0:
                violations.append(
                    Violation("negative non-grid sample", channel=name, index=i)
                )
    return violations


class MeterStatus(str, Enum):
    AVAILABLE = "AVAILABLE"
    UNAVAILABLE = "UNAVAILABLE"


@dataclass(frozen=True)
class MeterSnapshot:
    """One live smart-meter reading. UNAVAILABLE meters report no value."""

    meter_id: str
    name: str
    description: str
    status: MeterStatus
    online: bool
    observed_at: datetime
    unit: str = "kW"
    value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.unit != "kW":
            raise ValueError(f"unit mismatch: expected kW, got {self.unit!r}")
        if self.status is MeterStatus.UNAVAILABLE and self.value is not None:
            raise ValueError("UNAVAILABLE meter must not report a value")
        if self.value is not None and not _is_finite(self.value):
            raise ValueError("meter value must be finite")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "name": self.name,
            "description": self.description,
            "status": self.status.value,
            "online": self.online,
            "unit": self.unit,
        }
        if self.value is not None:
            d["value"] = self.value
        return d


def _is_finite(x: float) -> bool:
    return x == x and x not in (float("inf"), float("-inf"))


class AttributeKind(str, Enum):
    SWITCH = "switch"
    NUMERIC = "numeric"
    MODE = "mode"


@dataclass(frozen=True)
class AttributeSpec:
    """Controllable-attribute contract; immutable after device registration."""

    kind: AttributeKind
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    unit: Optional[str] = None
    modes: tuple[str, ...] = ()

    def conforms(self, value: Any) -> bool:
        if self.kind is AttributeKind.SWITCH:
            return isinstance(value, bool)
        if self.kind is AttributeKind.NUMERIC:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False
            lo = self.minimum if self.minimum is not None else float("-inf")
            hi = self.maximum if self.maximum is not None else float("inf")
            return lo <= value <= hi
        return isinstance(value, str) and value in self.modes

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is AttributeKind.NUMERIC:
            d["minimum"] = self.minimum
            d["maximum"] = self.maximum
            if self.unit:
                d["unit"] = self.unit
        if self.kind is AttributeKind.MODE:
            d["modes"] = list(self.modes)
        return d


@dataclass(frozen=True)
class DeviceState:
    """Snapshot of one simulated smart device."""

    device_id: str
    name: str
    room: str
    online: bool
    attributes: Mapping[str, Any]
    attribute_specs: Mapping[str, AttributeSpec]
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for attr, value in self.attributes.items():
            spec = self.attribute_specs.get(attr)
            if spec is None:
                raise ValueError(f"attribute {attr!r} has no spec")
            if not spec.conforms(value):
                raise ValueError(f"value {value!r} does not conform to spec of {attr!r}")


@dataclass(frozen=True)
class ClockWindow:
    """A [start, end) clock interval in minutes from midnight."""

    start_minute: int
    end_minute: int

    def __post_init__(self) -> None:
        if not (0 <= self.start_minute < self.end_minute <= MINUTES_PER_DAY):
            raise ValueError(f"bad clock window [{self.start_minute}, {self.end_minute})")

    def contains(self, minute_of_day: int) -> bool:
        return self.start_minute <= minute_of_day < self.end_minute

    def as_text(self) -> str:
        def fmt(m: int) -> str:
            return f"{m // 60:02d}:{m % 60:02d}"

        return f"{fmt(self.start_minute)} - {fmt(self.end_minute)}"


@dataclass(frozen=True)
class RateSchedule:
    """Time-of-use tariff with export credit and an EV discount window.

    The shipped default rates are synthetic: the tariff *windows* follow the
    usual off-peak (00:00 - 17:00, 20:00 - 24:00) / peak (17:00 - 20:00)
    split with EV discounts between 00:00 and 06:00, but the $/kWh figures
    are placeholders, not a real utility tariff.
    """

    off_peak_windows: tuple[ClockWindow, ...]
    peak_windows: tuple[ClockWindow, ...]
    off_peak_rate: float
    peak_rate: float
    export_credit: float
    ev_discount_window: ClockWindow
    ev_discounted_rate: float

    def __post_init__(self) -> None:
        for rate in (self.off_peak_rate, self.peak_rate, self.export_credit,
                     self.ev_discounted_rate):
            if rate < 0:
                raise ValueError("rates must be >= 0")
        covered = [False] * MINUTES_PER_DAY
        for window in self.off_peak_windows + self.peak_windows:
            for m in range(window.start_minute, window.end_minute):
                if covered[m]:
                    raise ValueError("peak/off-peak windows overlap")
                covered[m] = True
        if not all(covered):
            raise ValueError("peak/off-peak windows do not cover the 24-hour clock")

    def to_dict(self) -> dict[str, Any]:
        return {
            "off_peak_windows": [[w.start_minute, w.end_minute] for w in self.off_peak_windows],
            "peak_windows": [[w.start_minute, w.end_minute] for w in self.peak_windows],
            "off_peak_rate": self.off_peak_rate,
            "peak_rate": self.peak_rate,
            "export_credit": self.export_credit,
            "ev_discount_window": [self.ev_discount_window.start_minute,
                                   self.ev_discount_window.end_minute],
            "ev_discounted_rate": self.ev_discounted_rate,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RateSchedule":
        return cls(
            off_peak_windows=tuple(ClockWindow(a, b) for a, b in d["off_peak_windows"]),
            peak_windows=tuple(ClockWindow(a, b) for a, b in d["peak_windows"]),
            off_peak_rate=d["off_peak_rate"],
            peak_rate=d["peak_rate"],
            export_credit=d["export_credit"],
            ev_discount_window=ClockWindow(*d["ev_discount_window"]),
            ev_discounted_rate=d["ev_discounted_rate"],
        )


def default_rate_schedule() -> RateSchedule:
    """Synthetic default tariff (windows are the standard TOU split)."""
    return RateSchedule(
        off_peak_windows=(ClockWindow(0, 17 * 60), ClockWindow(20 * 60, MINUTES_PER_DAY)),
        peak_windows=(ClockWindow(17 * 60, 20 * 60),),
        off_peak_rate=0.10,
        peak_rate=0.20,
        export_credit=0.08,
        ev_discount_window=ClockWindow(0, 6 * 60),
        ev_discounted_rate=0.05,
    )


# The 6-primary / 24-secondary user-intent taxonomy. Every secondary maps
# to exactly one primary.
TAXONOMY: dict[str, tuple[str, ...]] = {
    "Energy Consumption & Analysis": (
        "Historical Energy Data",
        "Energy Prediction",
        "Energy Optimization",
        "Energy Suggestions",
        "Energy Visualization",
    ),
    "Cost Management": (
        "Cost Information",
        "Cost Prediction",
        "Cost Suggestions",
        "Cost Visualization",
    ),
    "Device Status & Control": (
        "Meter Status Check",
        "Device Status Check",
        "Device General Operation",
        "Group Device Management",
        "Device Custom Configurations",
    ),
    "Device Scheduling & Automation": (
        "Schedule Information",
        "General Scheduling",
        "Conditional Automation",
        "Schedule Management",
    ),
    "Memory": (
        "Memory Information",
        "Memory Creation",
        "Memory Management",
    ),
    "General Information & Support": (
        "System Guidance and Tutorials",
        "Troubleshooting and Technical Support",
        "FAQs and General Queries",
    ),
}

PRIMARY_CATEGORIES: tuple[str, ...] = tuple(TAXONOMY)
SECONDARY_CATEGORIES: tuple[str, ...] = tuple(
    s for subs in TAXONOMY.values() for s in subs
)
SECONDARY_TO_PRIMARY: dict[str, str] = {
    s: p for p, subs in TAXONOMY.items() for s in subs
}


@dataclass(frozen=True)
class IntentLabel:
    primary: str
    secondary: str

    def to_dict(self) -> dict[str, str]:
        return {"primary": self.primary, "secondary": self.secondary}


def taxonomy_check(label: IntentLabel) -> bool:
    """True iff the secondary category is listed under the primary."""
    return label.secondary in TAXONOMY.get(label.primary, ())


@dataclass(frozen=True)
class BuildingProfile:
    """Static description of one building; sensor/device names must match
    the simulator's registered names exactly."""

    building_id: str
    description: str
    occupants: str
    sensors: tuple[str, ...]
    devices: tuple[str, ...]
    rate_schedule: RateSchedule

    def to_dict(self) -> dict[str, Any]:
        return {
            "building_id": self.building_id,
            "description": self.description,
            "occupants": self.occupants,
            "sensors": list(self.sensors),
            "devices": list(self.devices),
            "rate_schedule": self.rate_schedule.to_dict(),
        }


@dataclass(frozen=True)
class TokenUsage:
    """Prompt/completion token counts plus per-1M-token prices in dollars."""

    prompt_tokens: int
    completion_tokens: int
    input_price: float = 2.50
    output_price: float = 10.00

    @property
    def total(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def cost_pico(self) -> int:
        """Inference cost in integer pico-dollars (1e-12 $), exact.

        Prices are per 1M tokens; multiplying the token count by the
        micro-currency price leaves the result in pico-dollars without any
        division, so sums are order independent.
        """
        input_micro = to_micro(self.input_price)
        output_micro = to_micro(self.output_price)
        return self.prompt_tokens * input_micro + self.completion_tokens * output_micro

    def cost(self) -> float:
        return self.cost_pico() / 1e12

    def combine(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            prompt_tokens=self.prompt_tokens + other.prompt_tokens,
            completion_tokens=self.completion_tokens + other.completion_tokens,
            input_price=self.input_price,
            output_price=self.output_price,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "total": self.total,
            "cost": self.cost(),
        }


def minute_of_day(t: datetime) -> int:
    return t.hour * 60 + t.minute


def resolve_enduse(series: EnergySeries, term: str) -> Optional[str]:
    """Map a user term like "AC" to the channel tagged with that end use.

    Heating/cooling channel names vary across buildings ('air', 'furnace',
    'heater'); the tag disambiguates.
    """
    wanted = {"ac": "cooling", "air conditioning": "cooling", "cooling": "cooling",
              "heater": "heating", "furnace": "heating", "heating": "heating"}.get(term.lower())
    if wanted is None:
        return None
    for name, tag in series.channel_tags.items():
        if tag == wanted:
            return name
    return None
