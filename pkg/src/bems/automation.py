"""Device scheduling and conditional automation over a simulated clock.

Time triggers fire for scheduled instants in (prev_tick, now]; a large
clock jump coalesces missed instants into a single catch-up fire.
Condition rules are level-expressed but fire only on the false -> true
edge, which together with idempotent execute avoids command storms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from datetime import datetime, time, timedelta
from typing import Any, Callable, Optional

from .homesim import HomeError, HomeState

RECURRENCES = ("once", "daily", "weekdays", "weekends")
CONDITION_OPS: dict[str, Callable[[Any, Any], bool]] = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "gt": lambda a, b: a > b,
    "lt": lambda a, b: a < b,
}


class AutomationError(Exception):
    pass


@dataclass(frozen=True)
class TimeTrigger:
    at: time
    recurrence: str = "daily"

    def __post_init__(self):
        if self.recurrence not in RECURRENCES:
            raise AutomationError(f"unknown recurrence {self.recurrence!r}")

    def to_dict(self):
        return {"kind": "time", "at": self.at.isoformat(), "recurrence": self.recurrence}


@dataclass(frozen=True)
class ConditionTrigger:
    """Predicate over another device's attribute, e.g. dishwasher power eq True."""

    device_id: str
    attribute: str
    op: str
    value: Any

    def __post_init__(self):
        if self.op not in CONDITION_OPS:
            raise AutomationError(f"unknown condition op {self.op!r}")

    def to_dict(self):
        return {"kind": "condition", "device_id": self.device_id,
                "attribute": self.attribute, "op": self.op, "value": self.value}


@dataclass(frozen=True)
class ScheduleEntry:
    schedule_id: str
    device_id: str
    attribute: str
    value: Any
    trigger: TimeTrigger | ConditionTrigger
    enabled: bool = True
    created_at: Optional[datetime] = None

    def to_dict(self):
        return {
            "schedule_id": self.schedule_id,
            "device_id": self.device_id,
            "attribute": self.attribute,
            "value": self.value,
            "trigger": self.trigger.to_dict(),
            "enabled": self.enabled,
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }


def trigger_from_dict(d: dict) -> TimeTrigger | ConditionTrigger:
    if d.get("kind") == "time":
        return TimeTrigger(at=time.fromisoformat(d["at"]), recurrence=d["recurrence"])
    if d.get("kind") == "condition":
        return ConditionTrigger(device_id=d["device_id"], attribute=d["attribute"],
                                op=d["op"], value=d["value"])
    raise AutomationError(f"malformed trigger {d!r}")


def entry_from_dict(d: dict) -> ScheduleEntry:
    return ScheduleEntry(
        schedule_id=d["schedule_id"],
        device_id=d["device_id"],
        attribute=d["attribute"],
        value=d["value"],
        trigger=trigger_from_dict(d["trigger"]),
        enabled=d.get("enabled", True),
        created_at=datetime.fromisoformat(d["created_at"]) if d.get("created_at") else None,
    )


@dataclass
class FiredAction:
    schedule_id: str
    device_id: str
    attribute: str
    value: Any
    scheduled_for: datetime
    ok: bool
    error: Optional[str] = None

    def to_dict(self):
        return {
            "schedule_id": self.schedule_id,
            "device_id": self.device_id,
            "attribute": self.attribute,
            "value": self.value,
            "scheduled_for": self.scheduled_for.isoformat(),
            "ok": self.ok,
            "error": self.error,
        }


class Scheduler:
    """Schedule CRUD plus the externally driven tick loop for one home."""

    def __init__(self, home: HomeState, now: Optional[datetime] = None):
        self.home = home
        self._entries: dict[str, ScheduleEntry] = {}
        self._seq = itertools.count(1)
        self._prev_tick = now or home.sim_clock
        # last observed predicate value per condition entry (edge detection)
        self._condition_levels: dict[str, bool] = {}
        # (schedule_id, scheduled instant) pairs already fired
        self._fired_instants: set[tuple[str, datetime]] = set()

    # -- CRUD -------------------------------------------------------------

    def schedule_create(
        self,
        device_id: str,
        attribute: str,
        value: Any,
        trigger: TimeTrigger | ConditionTrigger,
        enabled: bool = True,
    ) -> ScheduleEntry:
        device = self.home.devices_query(device_id)  # raises on unknown device
        if attribute not in device.attribute_specs:
            raise AutomationError(f"device {device_id!r} has no attribute {attribute!r}")
        if not device.attribute_specs[attribute].conforms(value):
            raise AutomationError(f"value {value!r} not valid for {device_id}.{attribute}")
        if isinstance(trigger, ConditionTrigger):
            watched = self.home.devices_query(trigger.device_id)
            if trigger.attribute not in watched.attribute_specs:
                raise AutomationError(
                    f"condition references unknown attribute {trigger.attribute!r}"
                )
        schedule_id = f"sched-{next(self._seq)}"
        entry = ScheduleEntry(
            schedule_id=schedule_id,
            device_id=device_id,
            attribute=attribute,
            value=value,
            trigger=trigger,
            enabled=enabled,
            created_at=self._prev_tick,
        )
        self._entries[schedule_id] = entry
        if isinstance(trigger, ConditionTrigger):
            self._condition_levels[schedule_id] = self._evaluate(trigger)
        return entry

    def schedule_sync(self, device_id: Optional[str] = None) -> list[ScheduleEntry]:
        """Complete, current entries; never omits entries for registered devices."""
        entries = list(self._entries.values())
        if device_id is not None:
            entries = [e for e in entries if e.device_id == device_id]
        return entries

    def schedule_change(
        self,
        schedule_id: str,
        *,
        delete: bool = False,
        enabled: Optional[bool] = None,
        trigger: Optional[TimeTrigger | ConditionTrigger] = None,
        value: Any = None,
    ) -> Optional[ScheduleEntry]:
        if schedule_id not in self._entries:
            raise AutomationError(f"unknown schedule {schedule_id!r}")
        if delete:
            del self._entries[schedule_id]
            self._condition_levels.pop(schedule_id, None)
            return None
        entry = self._entries[schedule_id]
        if enabled is not None:
            entry = replace(entry, enabled=enabled)
        if trigger is not None:
            entry = replace(entry, trigger=trigger)
            if isinstance(trigger, ConditionTrigger):
                self._condition_levels[schedule_id] = self._evaluate(trigger)
        if value is not None:
            entry = replace(entry, value=value)
        self._entries[schedule_id] = entry
        return entry

    # -- execution --------------------------------------------------------

    def _evaluate(self, trigger: ConditionTrigger) -> bool:
        try:
            device = self.home.devices_query(trigger.device_id)
        except HomeError:
            return False
        current = device.attributes.get(trigger.attribute)
        try:
            return CONDITION_OPS[trigger.op](current, trigger.value)
        except TypeError:
            return False

    def _instants(self, trigger: TimeTrigger, prev: datetime, now: datetime) -> list[datetime]:
        instants = []
        day = prev.date()
        while day <= now.date():
            candidate = datetime.combine(day, trigger.at)
            if prev < candidate <= now:
                weekday = candidate.weekday()
                if (
                    trigger.recurrence in ("once", "daily")
                    or (trigger.recurrence == "weekdays" and weekday < 5)
                    or (trigger.recurrence == "weekends" and weekday >= 5)
                ):
                    instants.append(candidate)
            day += timedelta(days=1)
        return instants

    def tick(self, now: datetime) -> list[FiredAction]:
        """Advance the clock, firing due time triggers and condition edges."""
        if now < self._prev_tick:
            raise AutomationError("tick must not move backwards")
        prev = self._prev_tick
        self._prev_tick = now
        self.home.sim_clock = now

        due: list[tuple[datetime, ScheduleEntry]] = []
        for entry in list(self._entries.values()):
            if not entry.enabled:
                continue
            if isinstance(entry.trigger, TimeTrigger):
                instants = [
                    t for t in self._instants(entry.trigger, prev, now)
                    if (entry.schedule_id, t) not in self._fired_instants
                ]
                if not instants:
                    continue
                # catch-up coalescing: one fire per entry per tick, at the
                # latest missed instant; all of them are marked fired.
                for t in instants:
                    self._fired_instants.add((entry.schedule_id, t))
                due.append((instants[-1], entry))

        fired: list[FiredAction] = []
        for scheduled_for, entry in sorted(due, key=lambda pair: (pair[0], pair[1].schedule_id)):
            fired.append(self._fire(entry, scheduled_for))
            if isinstance(entry.trigger, TimeTrigger) and entry.trigger.recurrence == "once":
                if entry.schedule_id in self._entries:
                    self._entries[entry.schedule_id] = replace(entry, enabled=False)

        for entry in list(self._entries.values()):
            if not entry.enabled or not isinstance(entry.trigger, ConditionTrigger):
                continue
            level = self._evaluate(entry.trigger)
            previous_level = self._condition_levels.get(entry.schedule_id, False)
            self._condition_levels[entry.schedule_id] = level
            if level and not previous_level:
                fired.append(self._fire(entry, now))
        return fired

    def _fire(self, entry: ScheduleEntry, scheduled_for: datetime) -> FiredAction:
        try:
            self.home.devices_execute(entry.device_id, entry.attribute, entry.value)
            return FiredAction(entry.schedule_id, entry.device_id, entry.attribute,
                               entry.value, scheduled_for, ok=True)
        except HomeError as exc:
            return FiredAction(entry.schedule_id, entry.device_id, entry.attribute,
                               entry.value, scheduled_for, ok=False, error=str(exc))

    # -- persistence ------------------------------------------------------

    def to_documents(self) -> list[dict]:
        return [entry.to_dict() for entry in self._entries.values()]

    def load_documents(self, docs: list[dict]) -> None:
        for d in docs:
            entry = entry_from_dict(d)
            self._entries[entry.schedule_id] = entry
            if isinstance(entry.trigger, ConditionTrigger):
                self._condition_levels[entry.schedule_id] = self._evaluate(entry.trigger)
