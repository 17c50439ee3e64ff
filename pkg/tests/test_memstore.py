import pytest
from hypothesis import given, settings, strategies as st

from bems.memstore import MemoryError_, MemoryStore, derive_entry


class TestDeriveEntry:
    def test_marker_required_for_explicit(self):
        with pytest.raises(MemoryError_, match="no memory marker"):
            derive_entry("turn on the lights")
        entry = derive_entry("Remember that I like the kitchen light dimmed")
        assert entry["summary"].startswith("The user prefers")
        assert entry["target_device"] == "kitchen light"

    def test_inferred_source_skips_marker_check(self):
        entry = derive_entry("sets the AC to 21 every night", source="inferred")
        assert entry["source"] == "inferred"
        assert entry["target_device"] == "AC"

    def test_empty_utterance(self):
        with pytest.raises(MemoryError_, match="empty"):
            derive_entry("   ")
        with pytest.raises(MemoryError_, match="after memory marker"):
            derive_entry("Remember that")

    def test_longest_device_alias_wins(self):
        entry = derive_entry("Remember to turn off the bedroom lights at sunset")
        assert entry["target_device"] == "bedroom lights"

    def test_clock_time_normalization(self):
        entry = derive_entry("Remember that I charge the car charger at 11 pm")
        assert entry["time_condition"] == "23:00"
        entry = derive_entry("Remember the coffee maker runs at 7:30 am")
        assert entry["time_condition"] == "07:30"
        entry = derive_entry("Remember I want the AC off by 12 am")
        assert entry["time_condition"] == "00:00"

    def test_named_moment_beats_clock_time(self):
        entry = derive_entry("Remember that the bedroom lights go on at sunset")
        assert entry["time_condition"] == "sunset"

    def test_recurrence_detection(self):
        assert derive_entry("Remember I usually run the dishwasher")["recurrence"] == "daily"
        assert derive_entry("Remember the AC runs on weekdays")["recurrence"] == "weekdays"
        assert derive_entry("Remember the kettle is for weekends")["recurrence"] == "weekends"

    def test_first_person_normalized(self):
        entry = derive_entry("Remember that I prefer to run the dishwasher at night")
        assert "I prefer" not in entry["summary"]
        assert entry["summary"].startswith("The user prefers")

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from([
        "Remember that I like the AC cool",
        "Don't forget the dishwasher runs at 11 pm",
        "Note that the coffee maker starts at 7 am on weekdays",
    ]))
    def test_derivation_is_deterministic(self, utterance):
        assert derive_entry(utterance) == derive_entry(utterance)


class TestMemoryStore:
    def test_create_from_utterance_and_entry(self):
        store = MemoryStore()
        a = store.memory_create(utterance="Remember that I like the AC at 21")
        b = store.memory_create(entry={"summary": "The user prefers tea",
                                       "target_device": "kettle"})
        assert (a.memory_id, b.memory_id) == ("mem-1", "mem-2")
        assert a.created_at is not None

    def test_create_requires_content(self):
        store = MemoryStore()
        with pytest.raises(MemoryError_, match="either an utterance"):
            store.memory_create()
        with pytest.raises(MemoryError_, match="summary must be non-empty"):
            store.memory_create(entry={"summary": ""})

    def test_sync_filters(self):
        store = MemoryStore()
        store.memory_create(entry={"summary": "The user prefers the AC cool",
                                   "target_device": "AC"})
        store.memory_create(entry={"summary": "The user prefers tea at 07:00",
                                   "target_device": "kettle",
                                   "time_condition": "07:00"})
        assert len(store.memory_sync()) == 2
        assert [e.target_device for e in store.memory_sync(device="ac")] == ["AC"]
        assert len(store.memory_sync(text="tea")) == 1
        assert len(store.memory_sync(text="07:00")) == 1
        assert store.memory_sync(device="AC", text="tea") == []

    def test_change_update_and_delete(self):
        store = MemoryStore()
        entry = store.memory_create(entry={"summary": "The user prefers tea"})
        updated = store.memory_change(entry.memory_id,
                                      updates={"time_condition": "08:00"})
        assert updated.time_condition == "08:00"
        with pytest.raises(MemoryError_, match="cannot update field"):
            store.memory_change(entry.memory_id, updates={"memory_id": "mem-9"})
        assert store.memory_change(entry.memory_id, delete=True) is None
        with pytest.raises(MemoryError_, match="unknown memory"):
            store.memory_change(entry.memory_id, delete=True)

    def test_save_load_round_trip_preserves_sequence(self, tmp_path):
        store = MemoryStore()
        store.memory_create(entry={"summary": "A"})
        store.memory_create(entry={"summary": "B"})
        store.memory_change("mem-1", delete=True)
        path = tmp_path / "memory.json"
        store.save(path)
        loaded = MemoryStore.load(path)
        assert [e.summary for e in loaded.memory_sync()] == ["B"]
        # the id counter continues past the highest persisted id
        assert loaded.memory_create(entry={"summary": "C"}).memory_id == "mem-3"
