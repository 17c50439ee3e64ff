from datetime import datetime, time, timedelta

import pytest

from bems.automation import (
    AutomationError,
    ConditionTrigger,
    Scheduler,
    TimeTrigger,
    entry_from_dict,
    trigger_from_dict,
)
from bems.battery import synthetic_profiles
from bems.homesim import build_home

T0 = datetime(2021, 1, 4)  # a Monday


@pytest.fixture()
def sched():
    home = build_home(synthetic_profiles()["TX-01"], sim_clock=T0)
    return Scheduler(home, now=T0)


class TestCrud:
    def test_create_validates_against_device_specs(self, sched):
        with pytest.raises(Exception, match="unknown device"):
            sched.schedule_create("tv", "power", True, TimeTrigger(time(7, 0)))
        with pytest.raises(AutomationError, match="no attribute"):
            sched.schedule_create("ac", "color", "red", TimeTrigger(time(7, 0)))
        with pytest.raises(AutomationError, match="not valid"):
            sched.schedule_create("ac", "setpoint", 99, TimeTrigger(time(7, 0)))
        with pytest.raises(AutomationError, match="unknown attribute"):
            sched.schedule_create(
                "ac", "mode", "cool",
                ConditionTrigger("dishwasher", "speed", "eq", 1),
            )

    def test_ids_are_sequential(self, sched):
        a = sched.schedule_create("coffee_maker", "power", True, TimeTrigger(time(7)))
        b = sched.schedule_create("dishwasher", "power", True, TimeTrigger(time(23)))
        assert (a.schedule_id, b.schedule_id) == ("sched-1", "sched-2")

    def test_sync_filters_by_device(self, sched):
        sched.schedule_create("coffee_maker", "power", True, TimeTrigger(time(7)))
        sched.schedule_create("dishwasher", "power", True, TimeTrigger(time(23)))
        assert len(sched.schedule_sync()) == 2
        assert [e.device_id for e in sched.schedule_sync("dishwasher")] == ["dishwasher"]

    def test_change_and_delete(self, sched):
        entry = sched.schedule_create("coffee_maker", "power", True, TimeTrigger(time(7)))
        updated = sched.schedule_change(entry.schedule_id, enabled=False)
        assert not updated.enabled
        updated = sched.schedule_change(entry.schedule_id, value=False)
        assert updated.value is False
        assert sched.schedule_change(entry.schedule_id, delete=True) is None
        assert sched.schedule_sync() == []
        with pytest.raises(AutomationError, match="unknown schedule"):
            sched.schedule_change(entry.schedule_id, delete=True)

    def test_unknown_recurrence_rejected(self):
        with pytest.raises(AutomationError, match="unknown recurrence"):
            TimeTrigger(time(7), recurrence="fortnightly")
        with pytest.raises(AutomationError, match="unknown condition op"):
            ConditionTrigger("ac", "mode", "ge", "cool")


class TestTimeTriggers:
    def test_fires_once_per_instant(self, sched):
        entry = sched.schedule_create("coffee_maker", "power", True,
                                      TimeTrigger(time(7, 0)))
        fired = sched.tick(T0 + timedelta(hours=7))
        assert [f.schedule_id for f in fired] == [entry.schedule_id]
        assert fired[0].ok
        assert sched.home.devices_query("coffee_maker").attributes["power"] is True
        # same instant never refires
        assert sched.tick(T0 + timedelta(hours=7)) == []
        assert sched.tick(T0 + timedelta(hours=8)) == []

    def test_daily_refires_next_day(self, sched):
        sched.schedule_create("coffee_maker", "power", True, TimeTrigger(time(7, 0)))
        assert len(sched.tick(T0 + timedelta(hours=7))) == 1
        assert len(sched.tick(T0 + timedelta(days=1, hours=7))) == 1

    def test_catch_up_coalesces_to_single_fire(self, sched):
        entry = sched.schedule_create("coffee_maker", "power", True,
                                      TimeTrigger(time(7, 0)))
        # jump three days: one catch-up fire at the latest missed instant
        fired = sched.tick(T0 + timedelta(days=3))
        assert len(fired) == 1
        assert fired[0].scheduled_for == T0 + timedelta(days=2, hours=7)
        # the skipped instants are marked fired and stay silent
        assert sched.tick(T0 + timedelta(days=3, hours=1)) == []
        assert entry.schedule_id in {e.schedule_id for e in sched.schedule_sync()}

    def test_once_disables_after_firing(self, sched):
        entry = sched.schedule_create("dishwasher", "power", True,
                                      TimeTrigger(time(9, 0), recurrence="once"))
        assert len(sched.tick(T0 + timedelta(hours=9))) == 1
        assert not sched.schedule_sync()[0].enabled
        assert sched.tick(T0 + timedelta(days=1, hours=9)) == []
        assert entry.schedule_id == sched.schedule_sync()[0].schedule_id

    def test_weekday_weekend_recurrence(self, sched):
        sched.schedule_create("coffee_maker", "power", True,
                              TimeTrigger(time(7, 0), recurrence="weekdays"))
        sched.schedule_create("dishwasher", "power", True,
                              TimeTrigger(time(7, 0), recurrence="weekends"))
        monday = sched.tick(T0 + timedelta(hours=7, minutes=1))
        assert [f.device_id for f in monday] == ["coffee_maker"]
        # the Saturday jump also catches up the weekday trigger's missed
        # Friday instant, coalesced to the latest missed occurrence
        saturday = sched.tick(T0 + timedelta(days=5, hours=7, minutes=1))
        assert sorted(f.device_id for f in saturday) == \
               ["coffee_maker", "dishwasher"]
        by_device = {f.device_id: f for f in saturday}
        assert by_device["coffee_maker"].scheduled_for == \
               T0 + timedelta(days=4, hours=7)
        assert by_device["dishwasher"].scheduled_for == \
               T0 + timedelta(days=5, hours=7)

    def test_disabled_entries_never_fire(self, sched):
        entry = sched.schedule_create("coffee_maker", "power", True,
                                      TimeTrigger(time(7, 0)))
        sched.schedule_change(entry.schedule_id, enabled=False)
        assert sched.tick(T0 + timedelta(hours=8)) == []

    def test_offline_target_reports_failure(self, sched):
        sched.schedule_create("kettle", "power", True, TimeTrigger(time(7, 0)))
        # kettle is offline but schedule creation validates only the spec
        fired = sched.tick(T0 + timedelta(hours=7))
        assert len(fired) == 1
        assert not fired[0].ok
        assert "offline" in fired[0].error

    def test_tick_must_not_go_backwards(self, sched):
        sched.tick(T0 + timedelta(hours=1))
        with pytest.raises(AutomationError, match="backwards"):
            sched.tick(T0)


class TestConditionTriggers:
    def test_edge_not_level(self, sched):
        sched.schedule_create(
            "kitchen_light", "power", True,
            ConditionTrigger("dishwasher", "power", "eq", True),
        )
        # level false: nothing
        assert sched.tick(T0 + timedelta(minutes=15)) == []
        sched.home.devices_execute("dishwasher", "power", True)
        fired = sched.tick(T0 + timedelta(minutes=30))
        assert len(fired) == 1 and fired[0].device_id == "kitchen_light"
        # level stays true: no double fire
        assert sched.tick(T0 + timedelta(minutes=45)) == []
        # falling edge re-arms
        sched.home.devices_execute("dishwasher", "power", False)
        assert sched.tick(T0 + timedelta(minutes=60)) == []
        sched.home.devices_execute("dishwasher", "power", True)
        assert len(sched.tick(T0 + timedelta(minutes=75))) == 1

    def test_condition_true_at_creation_does_not_fire(self, sched):
        sched.home.devices_execute("dishwasher", "power", True)
        sched.schedule_create(
            "kitchen_light", "power", True,
            ConditionTrigger("dishwasher", "power", "eq", True),
        )
        # the level was already true when the rule was created: no edge
        assert sched.tick(T0 + timedelta(minutes=15)) == []

    def test_numeric_comparison_ops(self, sched):
        sched.schedule_create(
            "ac", "mode", "cool",
            ConditionTrigger("ac", "setpoint", "gt", 25),
        )
        assert sched.tick(T0 + timedelta(minutes=15)) == []
        sched.home.devices_execute("ac", "setpoint", 28)
        fired = sched.tick(T0 + timedelta(minutes=30))
        assert len(fired) == 1
        assert sched.home.devices_query("ac").attributes["mode"] == "cool"


class TestReplayEquivalence:
    def test_document_round_trip_preserves_behavior(self, sched):
        sched.schedule_create("coffee_maker", "power", True, TimeTrigger(time(7, 0)))
        sched.schedule_create(
            "kitchen_light", "power", True,
            ConditionTrigger("dishwasher", "power", "eq", True),
        )
        docs = sched.to_documents()
        assert all(entry_from_dict(d).to_dict() == d for d in docs)

        home2 = build_home(synthetic_profiles()["TX-01"], sim_clock=T0)
        replay = Scheduler(home2, now=T0)
        replay.load_documents(docs)

        # raise the condition edge in both homes, then walk the same day
        sched.home.devices_execute("dishwasher", "power", True)
        home2.devices_execute("dishwasher", "power", True)
        for minutes in range(15, 8 * 60 + 1, 15):
            a = sched.tick(T0 + timedelta(minutes=minutes))
            b = replay.tick(T0 + timedelta(minutes=minutes))
            assert [f.to_dict() for f in a] == [f.to_dict() for f in b]

    def test_trigger_from_dict_validation(self):
        with pytest.raises(AutomationError, match="malformed trigger"):
            trigger_from_dict({"kind": "astral"})
        t = trigger_from_dict({"kind": "time", "at": "07:30:00", "recurrence": "daily"})
        assert t == TimeTrigger(time(7, 30))
