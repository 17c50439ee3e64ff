"""The simulated smart home: live meters plus the device
sync-query-execute API.

HomeState is the one mutable store in the system. Reads are free;
command application is serialized by a per-home lock and each command is
atomic. Every mutation (attempted or applied) lands in an append-only
audit log, which is also the ground truth the benchmark uses to verify
device-control responses.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping, Optional

from .core import (
    AttributeKind,
    AttributeSpec,
    BuildingProfile,
    DeviceState,
    EnergySeries,
    MeterSnapshot,
    MeterStatus,
)
from .ingestion import load_meters


class HomeError(Exception):
    pass


class UnknownMeter(HomeError):
    pass


class UnknownDevice(HomeError):
    pass


class OfflineDevice(HomeError):
    pass


class InvalidAttribute(HomeError):
    pass


class ValueOutOfRange(HomeError):
    pass


@dataclass
class AuditEntry:
    seq: int
    at: datetime
    device_id: str
    attribute: str
    requested: Any
    previous: Any
    applied: bool
    error: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "at": self.at.isoformat(),
            "device_id": self.device_id,
            "attribute": self.attribute,
            "requested": self.requested,
            "previous": self.previous,
            "applied": self.applied,
            "error": self.error,
        }


@dataclass
class ExecuteResult:
    device_id: str
    ok: bool
    state: Optional[DeviceState] = None
    error: Optional[str] = None


class HomeState:
    """Shared mutable store for one building's meters and devices."""

    def __init__(self, building_id: str, sim_clock: Optional[datetime] = None):
        self.building_id = building_id
        self.sim_clock = sim_clock or datetime(2021, 1, 1)
        self._meters: dict[str, MeterSnapshot] = {}
        self._devices: dict[str, DeviceState] = {}
        self._audit: list[AuditEntry] = []
        self._seq = itertools.count(1)
        self._lock = threading.RLock()
        self._listeners: list = []

    # -- registration -----------------------------------------------------

    def register_meter(self, snapshot: MeterSnapshot) -> None:
        self._meters[snapshot.name] = snapshot

    def register_device(self, device: DeviceState) -> None:
        if device.device_id in self._devices:
            raise HomeError(f"device {device.device_id!r} already registered")
        self._devices[device.device_id] = device

    def load_meters_document(self, document: Mapping[str, Any]) -> None:
        for snap in load_meters(document, observed_at=self.sim_clock):
            self.register_meter(snap)

    def subscribe(self, callback) -> None:
        """Register a callback(event_dict) invoked after each applied command."""
        self._listeners.append(callback)

    # -- perception -------------------------------------------------------

    def meters_query(self, name: Optional[str] = None) -> list[MeterSnapshot]:
        if name is None or name == "all":
            return list(self._meters.values())
        if name not in self._meters:
            raise UnknownMeter(f"unknown meter {name!r}")
        return [self._meters[name]]

    # -- sync-query-execute ----------------------------------------------

    def devices_sync(self) -> list[DeviceState]:
        """Full device inventory, specs included; never fabricates devices."""
        return list(self._devices.values())

    def devices_query(self, device_id: str) -> DeviceState:
        if device_id not in self._devices:
            raise UnknownDevice(f"unknown device {device_id!r}")
        return self._devices[device_id]

    def devices_execute(self, device_id: str, attribute: str, value: Any) -> DeviceState:
        """Apply one validated command atomically; audit either way."""
        with self._lock:
            device = self.devices_query(device_id)
            previous = device.attributes.get(attribute)
            error: Optional[Exception] = None
            if not device.online:
                error = OfflineDevice(f"device {device_id!r} is offline")
            elif attribute not in device.attribute_specs:
                error = InvalidAttribute(f"device {device_id!r} has no attribute {attribute!r}")
            elif not device.attribute_specs[attribute].conforms(value):
                error = ValueOutOfRange(
                    f"value {value!r} out of range for {device_id}.{attribute}"
                )
            entry = AuditEntry(
                seq=next(self._seq),
                at=self.sim_clock,
                device_id=device_id,
                attribute=attribute,
                requested=value,
                previous=previous,
                applied=error is None,
                error=str(error) if error else None,
            )
            self._audit.append(entry)
            if error is not None:
                raise error
            attributes = dict(device.attributes)
            attributes[attribute] = value
            updated = DeviceState(
                device_id=device.device_id,
                name=device.name,
                room=device.room,
                online=device.online,
                attributes=attributes,
                attribute_specs=device.attribute_specs,
                tags=device.tags,
            )
            self._devices[device_id] = updated
        for listener in list(self._listeners):
            listener({"type": "device", "device_id": device_id,
                      "attribute": attribute, "value": value})
        return updated

    def group_execute(self, selector: str, attribute: str, value: Any) -> list[ExecuteResult]:
        """Apply a command to every device whose room or tag matches.

        Per-device outcomes are independent; there is no rollback.
        """
        matches = [
            d for d in self._devices.values()
            if d.room.lower() == selector.lower() or selector.lower() in (t.lower() for t in d.tags)
        ]
        results = []
        for device in matches:
            try:
                state = self.devices_execute(device.device_id, attribute, value)
                results.append(ExecuteResult(device.device_id, True, state=state))
            except HomeError as exc:
                results.append(ExecuteResult(device.device_id, False, error=str(exc)))
        return results

    def set_online(self, device_id: str, online: bool) -> None:
        device = self.devices_query(device_id)
        self._devices[device_id] = DeviceState(
            device_id=device.device_id,
            name=device.name,
            room=device.room,
            online=online,
            attributes=device.attributes,
            attribute_specs=device.attribute_specs,
            tags=device.tags,
        )

    @property
    def audit_log(self) -> list[AuditEntry]:
        return list(self._audit)

    # -- persistence ------------------------------------------------------

    def meters_document(self) -> dict[str, Any]:
        return {name: snap.to_dict() for name, snap in self._meters.items()}

    def devices_document(self, schedules: Optional[list[dict]] = None) -> dict[str, Any]:
        info = {}
        state = {}
        for device in self._devices.values():
            info[device.device_id] = {
                "name": device.name,
                "room": device.room,
                "tags": list(device.tags),
                "attribute_specs": {
                    a: spec.to_dict() for a, spec in device.attribute_specs.items()
                },
            }
            state[device.device_id] = {
                "online": device.online,
                "attributes": dict(device.attributes),
            }
        doc = {"devices-info": info, "devices-state": state}
        if schedules is not None:
            doc["schedules"] = schedules
        return doc

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "meters.json").write_text(json.dumps(self.meters_document(), indent=2))
        (directory / "devices.json").write_text(json.dumps(self.devices_document(), indent=2))

    @classmethod
    def from_documents(
        cls,
        building_id: str,
        meters_doc: Mapping[str, Any],
        devices_doc: Mapping[str, Any],
        sim_clock: Optional[datetime] = None,
    ) -> "HomeState":
        home = cls(building_id, sim_clock=sim_clock)
        home.load_meters_document(meters_doc)
        info = devices_doc.get("devices-info", {})
        state = devices_doc.get("devices-state", {})
        for device_id, meta in info.items():
            specs = {
                a: _spec_from_dict(spec) for a, spec in meta["attribute_specs"].items()
            }
            device_state = state.get(device_id, {})
            home.register_device(
                DeviceState(
                    device_id=device_id,
                    name=meta["name"],
                    room=meta["room"],
                    online=device_state.get("online", True),
                    attributes=device_state.get("attributes", {}),
                    attribute_specs=specs,
                    tags=tuple(meta.get("tags", ())),
                )
            )
        return home


def _spec_from_dict(d: Mapping[str, Any]) -> AttributeSpec:
    kind = AttributeKind(d["kind"])
    return AttributeSpec(
        kind=kind,
        minimum=d.get("minimum"),
        maximum=d.get("maximum"),
        unit=d.get("unit"),
        modes=tuple(d.get("modes", ())),
    )


def playback_snapshot(series: EnergySeries, at: datetime, home: HomeState) -> None:
    """Optionally derive meter values from the historical series at a
    simulated clock instead of the frozen meters document."""
    if at < series.start or at > series.timestamp(len(series) - 1):
        raise HomeError("playback instant outside series range")
    index = int((at - series.start).total_seconds() // 900)
    for name, values in series.channels.items():
        home.register_meter(
            MeterSnapshot(
                meter_id=name,
                name=name,
                description=f"playback value for {name}",
                status=MeterStatus.AVAILABLE,
                online=True,
                value=values[index],
                observed_at=at,
            )
        )


# -- default simulated home ----------------------------------------------

_SWITCH = AttributeSpec(kind=AttributeKind.SWITCH)


def default_devices(building_id: str) -> list[DeviceState]:
    """The smart-device inventory shared by the synthetic buildings.

    Notable fixtures: the living-room light starts at brightness 50, the
    kitchen kettle is offline, the AC exposes the full mode set, and
    there is deliberately no TV.
    """
    brightness = AttributeSpec(kind=AttributeKind.NUMERIC, minimum=0, maximum=100)
    setpoint = AttributeSpec(kind=AttributeKind.NUMERIC, minimum=16, maximum=30, unit="degC")
    kettle_temp = AttributeSpec(kind=AttributeKind.NUMERIC, minimum=40, maximum=100, unit="degC")
    ac_mode = AttributeSpec(
        kind=AttributeKind.MODE,
        modes=("off", "on", "cool", "heat", "fan-only", "eco"),
    )
    fan_mode = AttributeSpec(kind=AttributeKind.MODE, modes=("auto", "on", "off"))
    return [
        DeviceState(
            device_id="living_room_light",
            name="Living Room Light",
            room="living room",
            online=True,
            attributes={"power": True, "brightness": 50},
            attribute_specs={"power": _SWITCH, "brightness": brightness},
            tags=("light",),
        ),
        DeviceState(
            device_id="kitchen_light",
            name="Kitchen Light",
            room="kitchen",
            online=True,
            attributes={"power": False, "brightness": 80},
            attribute_specs={"power": _SWITCH, "brightness": brightness},
            tags=("light",),
        ),
        DeviceState(
            device_id="ac",
            name="AC",
            room="living room",
            online=True,
            attributes={"mode": "off", "setpoint": 22, "fan": "auto"},
            attribute_specs={"mode": ac_mode, "setpoint": setpoint, "fan": fan_mode},
            tags=("hvac",),
        ),
        DeviceState(
            device_id="kettle",
            name="Kitchen Kettle",
            room="kitchen",
            online=False,
            attributes={"power": False, "temperature": 80},
            attribute_specs={"power": _SWITCH, "temperature": kettle_temp},
            tags=("appliance", "kitchen appliance"),
        ),
        DeviceState(
            device_id="coffee_maker",
            name="Coffee Maker",
            room="kitchen",
            online=True,
            attributes={"power": False},
            attribute_specs={"power": _SWITCH},
            tags=("appliance", "kitchen appliance"),
        ),
        DeviceState(
            device_id="dishwasher",
            name="Dishwasher",
            room="kitchen",
            online=True,
            attributes={"power": False},
            attribute_specs={"power": _SWITCH},
            tags=("appliance", "kitchen appliance"),
        ),
        DeviceState(
            device_id="ev_charger",
            name="Car Charger",
            room="garage",
            online=True,
            attributes={"power": False},
            attribute_specs={"power": _SWITCH},
            tags=("charger",),
        ),
    ]


def default_meters_document(profile: BuildingProfile, series: Optional[EnergySeries] = None) -> dict[str, Any]:
    """Frozen meters document for a profile; the Dishwasher reads 1.8 kW."""
    doc: dict[str, Any] = {}
    for name in profile.sensors:
        value = 0.0
        if series is not None and name in series.channels:
            value = series.channels[name][-1]
        if name == "Dishwasher":
            value = 1.8
        doc[name] = {
            "name": name,
            "description": f"eGauge meter data present for power draw of the {name.lower()}.",
            "status": "AVAILABLE",
            "online": True,
            "unit": "kW",
            "value": value,
        }
    return doc


def build_home(
    profile: BuildingProfile,
    series: Optional[EnergySeries] = None,
    sim_clock: Optional[datetime] = None,
) -> HomeState:
    """Assemble a HomeState with the default device inventory and frozen
    meter snapshots derived from the profile."""
    home = HomeState(profile.building_id, sim_clock=sim_clock)
    home.load_meters_document(default_meters_document(profile, series))
    for device in default_devices(profile.building_id):
        home.register_device(device)
    return home
