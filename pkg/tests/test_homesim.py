from datetime import datetime

import pytest
from hypothesis import given, settings, strategies as st

from bems.battery import synthetic_profiles
from bems.homesim import (
    HomeError,
    HomeState,
    InvalidAttribute,
    OfflineDevice,
    UnknownDevice,
    UnknownMeter,
    ValueOutOfRange,
    build_home,
    default_devices,
    playback_snapshot,
)
from bems.ingestion import synth_month
from conftest import make_series


@pytest.fixture()
def home():
    return build_home(synthetic_profiles()["TX-01"])


class TestDevicesExecute:
    def test_apply_and_audit(self, home):
        state = home.devices_execute("living_room_light", "brightness", 75)
        assert state.attributes["brightness"] == 75
        entry = home.audit_log[-1]
        assert entry.applied
        assert entry.previous == 50
        assert entry.requested == 75

    def test_offline_device_rejects_everything(self, home):
        with pytest.raises(OfflineDevice):
            home.devices_execute("kettle", "power", True)
        entry = home.audit_log[-1]
        assert not entry.applied
        assert "offline" in entry.error
        # state untouched
        assert home.devices_query("kettle").attributes["power"] is False

    def test_unknown_device(self, home):
        with pytest.raises(UnknownDevice):
            home.devices_execute("tv", "power", True)

    def test_unknown_attribute_audited(self, home):
        with pytest.raises(InvalidAttribute):
            home.devices_execute("ac", "color", "red")
        assert not home.audit_log[-1].applied

    def test_out_of_range_value(self, home):
        with pytest.raises(ValueOutOfRange):
            home.devices_execute("living_room_light", "brightness", 150)
        with pytest.raises(ValueOutOfRange):
            home.devices_execute("ac", "mode", "turbo")

    def test_listener_fires_only_on_applied(self, home):
        events = []
        home.subscribe(events.append)
        home.devices_execute("ac", "setpoint", 21)
        with pytest.raises(OfflineDevice):
            home.devices_execute("kettle", "power", True)
        assert events == [{"type": "device", "device_id": "ac",
                           "attribute": "setpoint", "value": 21}]


class TestGroupExecute:
    def test_per_device_outcomes_no_rollback(self, home):
        results = {r.device_id: r for r in home.group_execute("kitchen", "power", True)}
        # kitchen room: kitchen_light, kettle, coffee_maker, dishwasher
        assert set(results) == {"kitchen_light", "kettle", "coffee_maker", "dishwasher"}
        assert results["kitchen_light"].ok
        assert not results["kettle"].ok and "offline" in results["kettle"].error
        assert home.devices_query("dishwasher").attributes["power"] is True

    def test_tag_selector(self, home):
        results = home.group_execute("light", "power", False)
        assert {r.device_id for r in results} == {"living_room_light", "kitchen_light"}
        assert all(r.ok for r in results)

    def test_no_match_is_empty(self, home):
        assert home.group_execute("attic", "power", True) == []


class TestMeters:
    def test_query_all_and_by_name(self, home):
        meters = home.meters_query()
        assert len(meters) == 18  # TX-01 sensor count
        assert home.meters_query("grid")[0].name == "grid"
        with pytest.raises(UnknownMeter):
            home.meters_query("uranium1")

    def test_dishwasher_fixture_value(self, home):
        # series-derived values except the fixed Dishwasher fixture
        assert {m.name for m in home.meters_query()} >= {"grid", "solar", "car1"}


class TestPersistence:
    def test_document_round_trip(self, home):
        home.devices_execute("living_room_light", "brightness", 30)
        clone = HomeState.from_documents(
            "TX-01", home.meters_document(), home.devices_document(),
            sim_clock=home.sim_clock,
        )
        assert {d.device_id for d in clone.devices_sync()} == \
               {d.device_id for d in home.devices_sync()}
        light = clone.devices_query("living_room_light")
        assert light.attributes["brightness"] == 30
        assert not clone.devices_query("kettle").online
        # specs survive: validation still active in the clone
        with pytest.raises(ValueOutOfRange):
            clone.devices_execute("living_room_light", "brightness", 500)

    def test_save_writes_documents(self, home, tmp_path):
        home.save(tmp_path)
        assert (tmp_path / "meters.json").exists()
        assert (tmp_path / "devices.json").exists()

    def test_duplicate_registration_rejected(self, home):
        with pytest.raises(HomeError, match="already registered"):
            home.register_device(default_devices("TX-01")[0])


class TestPlayback:
    def test_snapshot_at_instant(self):
        profile = synthetic_profiles()["NY-01"]
        series = synth_month(7, profile, 30, "cooling")
        home = HomeState("NY-01")
        at = series.timestamp(10)
        playback_snapshot(series, at, home)
        snap = home.meters_query("grid")[0]
        assert snap.value == series.channels["grid"][10]
        assert snap.observed_at == at

    def test_out_of_range_instant(self):
        series = make_series({"grid": [1.0, 2.0]})
        with pytest.raises(HomeError, match="outside series range"):
            playback_snapshot(series, datetime(2020, 1, 1), HomeState("b"))


# -- property test: no command sequence can corrupt device state --------------

_DEVICES = [d.device_id for d in default_devices("TX-01")]
_ATTRS = ["power", "brightness", "mode", "setpoint", "fan", "temperature"]
_VALUES = st.one_of(
    st.booleans(), st.integers(-50, 150),
    st.sampled_from(["off", "on", "cool", "heat", "auto", "turbo", ""]),
    st.floats(-1e6, 1e6, allow_nan=False),
)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(_DEVICES), st.sampled_from(_ATTRS), _VALUES),
                max_size=30))
def test_random_commands_never_corrupt_state(commands):
    home = build_home(synthetic_profiles()["TX-01"])
    for device_id, attribute, value in commands:
        try:
            home.devices_execute(device_id, attribute, value)
        except HomeError:
            pass
        for device in home.devices_sync():
            for attr, current in device.attributes.items():
                assert device.attribute_specs[attr].conforms(current), \
                    f"{device.device_id}.{attr} left at {current!r}"
