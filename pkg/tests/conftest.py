from datetime import datetime

import pytest

from bems.battery import build_environment
from bems.core import ChannelRole, EnergySeries


@pytest.fixture()
def env(tmp_path):
    """Fresh TX-01 environment; mutating tests get their own copy."""
    return build_environment("TX-01", data_dir=tmp_path)


def make_series(
    channels: dict[str, list[float]],
    roles: dict[str, ChannelRole] | None = None,
    start: datetime = datetime(2021, 1, 1),
    tags: dict[str, str] | None = None,
) -> EnergySeries:
    """Small hand-built series; default roles: 'grid' is grid, 'solar' is
    generation, 'car1' is the EV charger, everything else an appliance."""
    if roles is None:
        roles = {}
        for name in channels:
            if name == "grid":
                roles[name] = ChannelRole.GRID
            elif name == "solar":
                roles[name] = ChannelRole.GENERATION
            elif name == "car1":
                roles[name] = ChannelRole.EV_CHARGER
            else:
                roles[name] = ChannelRole.APPLIANCE
    return EnergySeries(
        building_id="test",
        start=start,
        channels={k: tuple(v) for k, v in channels.items()},
        channel_roles=roles,
        channel_tags=dict(tags or {}),
    )
