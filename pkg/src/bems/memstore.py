"""Long-term memory: rule-based derivation of preference entries from
utterances, plus CRUD and retrieval.

Derivation is deterministic by design (marker phrases, device-name
matching, time-phrase normalization); a language-model provider may also
submit pre-structured entries through the memory tool. Entries never
touch device state by themselves.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Optional

MEMORY_MARKERS = ("remember that", "remember ", "don't forget", "do not forget",
                  "note that", "keep in mind", "i prefer", "i usually", "i like")

# user phrasing -> canonical device target
DEVICE_ALIASES = {
    "ac": "AC",
    "air conditioning": "AC",
    "air conditioner": "AC",
    "bedroom lights": "bedroom lights",
    "bedroom light": "bedroom lights",
    "living room light": "living room light",
    "kitchen light": "kitchen light",
    "car charger": "car charger",
    "ev charger": "car charger",
    "coffee maker": "coffee maker",
    "dishwasher": "dishwasher",
    "kettle": "kettle",
    "fan": "AC",
}

NAMED_MOMENTS = ("sunset", "sunrise", "bedtime", "morning", "evening", "night")


class MemoryError_(Exception):
    pass


@dataclass(frozen=True)
class MemoryEntry:
    memory_id: str
    summary: str
    source: str  # explicit | inferred
    target_device: Optional[str] = None
    time_condition: Optional[str] = None
    recurrence: Optional[str] = None
    created_at: Optional[datetime] = None

    def to_dict(self) -> dict:
        return {
            "memory_id": self.memory_id,
            "summary": self.summary,
            "source": self.source,
            "target_device": self.target_device,
            "time_condition": self.time_condition,
            "recurrence": self.recurrence,
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MemoryEntry":
        return cls(
            memory_id=d["memory_id"],
            summary=d["summary"],
            source=d.get("source", "explicit"),
            target_device=d.get("target_device"),
            time_condition=d.get("time_condition"),
            recurrence=d.get("recurrence"),
            created_at=datetime.fromisoformat(d["created_at"]) if d.get("created_at") else None,
        )


def _find_device(text: str) -> Optional[str]:
    lowered = text.lower()
    # longest alias first so "bedroom lights" beats "lights"
    for alias in sorted(DEVICE_ALIASES, key=len, reverse=True):
        if alias in lowered:
            return DEVICE_ALIASES[alias]
    return None


def _find_time(text: str) -> tuple[Optional[str], Optional[str]]:
    """Extract a normalized time condition and recurrence from an utterance."""
    lowered = text.lower()
    recurrence = None
    if any(w in lowered for w in ("every day", "daily", "usually", "always")):
        recurrence = "daily"
    elif "weekday" in lowered:
        recurrence = "weekdays"
    elif "weekend" in lowered:
        recurrence = "weekends"

    for moment in NAMED_MOMENTS:
        if moment in lowered:
            return moment, recurrence
    m = re.search(r"(?:after|at|by)\s+(\d{1,2})(?::(\d{2}))?\s*(a\.?m\.?|p\.?m\.?)?", lowered)
    if m:
        hour = int(m.group(1))
        minute = int(m.group(2) or 0)
        meridiem = (m.group(3) or "").replace(".", "")
        if meridiem == "pm" and hour < 12:
            hour += 12
        if meridiem == "am" and hour == 12:
            hour = 0
        return f"{hour:02d}:{minute:02d}", recurrence
    return None, recurrence


def derive_entry(utterance: str, source: str = "explicit") -> dict:
    """Rule-based extraction of a normalized memory entry from an utterance.

    Deterministic: the same utterance always yields the same fields.
    Raises when nothing extractable is present.
    """
    text = utterance.strip()
    if not text:
        raise MemoryError_("no extractable content: empty utterance")
    lowered = text.lower()
    if source == "explicit" and not any(marker in lowered for marker in MEMORY_MARKERS):
        raise MemoryError_("no extractable content: utterance has no memory marker")

    device = _find_device(text)
    time_condition, recurrence = _find_time(text)

    # strip the marker prefix for the preference clause
    clause = text
    for marker in MEMORY_MARKERS:
        idx = lowered.find(marker)
        if idx >= 0:
            clause = text[idx + len(marker):].strip()
            break
    clause = clause.rstrip(".").strip()
    if not clause:
        raise MemoryError_("no extractable content after memory marker")

    # normalize leading first person into third person
    clause = re.sub(r"^i\s+(usually\s+)?(like to|prefer to|prefer|want to|want)\s+",
                    "", clause, flags=re.IGNORECASE)
    summary = f"The user prefers {clause}"
    if time_condition and time_condition not in summary.lower():
        summary += f" at {time_condition}"
    if recurrence == "daily" and "daily" not in summary.lower():
        summary += " on a daily basis"

    return {
        "summary": summary,
        "target_device": device,
        "time_condition": time_condition,
        "recurrence": recurrence,
        "source": source,
    }


class MemoryStore:
    """Serialized-write CRUD store persisted as one structured JSON document."""

    def __init__(self, now: Optional[datetime] = None):
        self._entries: dict[str, MemoryEntry] = {}
        self._seq = itertools.count(1)
        self._now = now or datetime(2021, 1, 1)

    def memory_create(self, utterance: Optional[str] = None, entry: Optional[dict] = None) -> MemoryEntry:
        """Store a normalized entry from an utterance or a pre-structured dict."""
        if entry is None:
            if utterance is None:
                raise MemoryError_("either an utterance or a structured entry is required")
            entry = derive_entry(utterance)
        if not entry.get("summary"):
            raise MemoryError_("entry summary must be non-empty")
        memory_id = f"mem-{next(self._seq)}"
        record = MemoryEntry(
            memory_id=memory_id,
            summary=entry["summary"],
            source=entry.get("source", "explicit"),
            target_device=entry.get("target_device"),
            time_condition=entry.get("time_condition"),
            recurrence=entry.get("recurrence"),
            created_at=self._now,
        )
        self._entries[memory_id] = record
        return record

    def memory_sync(self, device: Optional[str] = None, text: Optional[str] = None) -> list[MemoryEntry]:
        entries = list(self._entries.values())
        if device is not None:
            entries = [e for e in entries
                       if e.target_device and e.target_device.lower() == device.lower()]
        if text is not None:
            needle = text.lower()
            entries = [
                e for e in entries
                if needle in e.summary.lower()
                or (e.time_condition and needle in e.time_condition.lower())
            ]
        return entries

    def memory_change(self, memory_id: str, *, delete: bool = False,
                      updates: Optional[dict] = None) -> Optional[MemoryEntry]:
        if memory_id not in self._entries:
            raise MemoryError_(f"unknown memory {memory_id!r}")
        if delete:
            del self._entries[memory_id]
            return None
        entry = self._entries[memory_id]
        for key, value in (updates or {}).items():
            if key not in ("summary", "target_device", "time_condition", "recurrence"):
                raise MemoryError_(f"cannot update field {key!r}")
            entry = replace(entry, **{key: value})
        self._entries[memory_id] = entry
        return entry

    # -- persistence ------------------------------------------------------

    def to_document(self) -> list[dict]:
        return [entry.to_dict() for entry in self._entries.values()]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_document(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "MemoryStore":
        store = cls()
        raw = json.loads(Path(path).read_text())
        max_num = 0
        for d in raw:
            entry = MemoryEntry.from_dict(d)
            store._entries[entry.memory_id] = entry
            m = re.match(r"mem-(\d+)", entry.memory_id)
            if m:
                max_num = max(max_num, int(m.group(1)))
        store._seq = itertools.count(max_num + 1)
        return store
