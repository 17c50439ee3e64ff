"""The canonical benchmark battery: 120 queries (24 secondary intent
categories x 5), their expected tool sets and answer comparators, and
the scripted-provider fixture that answers them.

The fixture and the comparators are built together from the same
environment so that a faithful replay scores well by construction;
the scoring rubric itself lives in bench and is tested against
hand-adversarial fixtures, not against this battery.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

from . import analytics, tariff
from .agent import AgentEnvironment
from .automation import Scheduler
from .core import (
    BuildingProfile,
    ChannelRole,
    EnergySeries,
    IntentLabel,
    SECONDARY_CATEGORIES,
    SECONDARY_TO_PRIMARY,
    default_rate_schedule,
)
from .homesim import HomeState, build_home
from .ingestion import synth_month
from .memstore import MemoryStore
from .provider import ANSWER, NEEDS_CLARIFICATION, QueryScript, ScriptTurn

QUERIES_PER_SECONDARY = 5


@dataclass(frozen=True)
class Comparator:
    """Mechanical answer oracle for one query.

    kinds: numeric (number in the response within tolerance), set (every
    expected string appears in the response), state_diff (expected device
    deltas present in the audit log), response_type, artifact (a chart of
    the expected type was emitted).
    """

    kind: str
    expected: Any = None
    rel_tol: float = 0.01
    abs_tol: float = 0.01


@dataclass(frozen=True)
class BenchmarkQuery:
    query_id: str
    text: str
    ground_truth_label: IntentLabel
    expected_tools: frozenset[str]
    answer_spec: Comparator
    ambiguous: bool = False


# -- synthetic buildings ----------------------------------------------------

_APPLIANCE_POOL = (
    "air1", "furnace1", "dishwasher1", "refrigerator1", "kitchenapp1",
    "kitchenapp2", "clotheswasher1", "dryer1", "microwave1", "oven1",
    "bedroom1", "livingroom1", "bathroom1", "office1", "waterheater1",
)

# (appliance count, days, season, occupants, description) per building;
# sensor totals are appliances + grid + solar + car1.
_BUILDING_SHAPES: dict[str, tuple[int, int, str, str, str]] = {
    "TX-01": (15, 31, "heating",
              "2 adults, 2 children",
              "Two-story single-family home in Texas with rooftop PV and an EV."),
    "TX-02": (13, 31, "heating",
              "2 adults",
              "Single-family home in Texas with rooftop PV and an EV."),
    "NY-01": (9, 30, "cooling",
              "2 adults, 1 child",
              "Suburban home in New York with rooftop PV and an EV."),
    "NY-02": (7, 30, "cooling",
              "1 adult",
              "Townhouse in New York with rooftop PV and an EV."),
}

BUILDING_IDS = tuple(_BUILDING_SHAPES)


def synthetic_profiles() -> dict[str, BuildingProfile]:
    """Four building profiles with 18/16/12/10 sensors respectively."""
    profiles = {}
    for building_id, (n_appliances, _, _, occupants, description) in _BUILDING_SHAPES.items():
        sensors = ("grid", "solar", "car1") + _APPLIANCE_POOL[:n_appliances]
        profiles[building_id] = BuildingProfile(
            building_id=building_id,
            description=description,
            occupants=occupants,
            sensors=sensors,
            devices=("living_room_light", "kitchen_light", "ac", "kettle",
                     "coffee_maker", "dishwasher", "ev_charger"),
            rate_schedule=default_rate_schedule(),
        )
    return profiles


def building_days_season(building_id: str) -> tuple[int, str]:
    shape = _BUILDING_SHAPES[building_id]
    return shape[1], shape[2]


def seed_memory(store: MemoryStore) -> None:
    """Pre-seeded long-term memory the battery's memory queries rely on."""
    for entry in (
        {"summary": "The user prefers to turn on the bedroom lights at sunset",
         "target_device": "bedroom lights", "time_condition": "sunset",
         "recurrence": "daily"},
        {"summary": "The user prefers the AC set to 21 degrees at bedtime",
         "target_device": "AC", "time_condition": "bedtime"},
        {"summary": "The user prefers the AC fan mode on",
         "target_device": "AC"},
        {"summary": "The user prefers the coffee maker to start at 07:00 on weekdays",
         "target_device": "coffee maker", "time_condition": "07:00",
         "recurrence": "weekdays"},
        {"summary": "The user prefers to run the dishwasher during off-peak hours",
         "target_device": "dishwasher", "recurrence": "daily"},
    ):
        store.memory_create(entry=entry)


def build_environment(
    building_id: str,
    seed: int = 7,
    data_dir: Optional[Path] = None,
) -> AgentEnvironment:
    """Fresh environment for one battery run: synthetic month, default
    devices, seeded memory, a pricing document on disk, and the simulated
    clock parked at the end of the month."""
    profile = synthetic_profiles()[building_id]
    days, season = building_days_season(building_id)
    series = synth_month(seed + sorted(BUILDING_IDS).index(building_id),
                         profile, days, season)
    end_of_month = series.timestamp(len(series) - 1)
    home = build_home(profile, series, sim_clock=end_of_month)
    scheduler = Scheduler(home, now=end_of_month)
    memory = MemoryStore(now=end_of_month)
    seed_memory(memory)
    if data_dir is None:
        data_dir = Path(tempfile.gettempdir())
    data_dir.mkdir(parents=True, exist_ok=True)
    pricing_path = data_dir / f"pricing-{building_id}.json"
    tariff.save_pricing_document(profile.rate_schedule, pricing_path)
    return AgentEnvironment(
        profile=profile, home=home, scheduler=scheduler, memory=memory,
        series=series, rates=profile.rate_schedule, pricing_path=pricing_path,
    )


# -- battery construction ---------------------------------------------------


class _Builder:
    def __init__(self):
        self.queries: list[BenchmarkQuery] = []
        self.fixture: dict[str, QueryScript] = {}
        self._counter = 0

    def add(
        self,
        secondary: str,
        text: str,
        tools: Iterable[str],
        comparator: Comparator,
        turns: list[ScriptTurn],
        response: str,
        response_type: str = ANSWER,
        ambiguous: bool = False,
        classify: bool = True,
    ) -> None:
        self._counter += 1
        label = IntentLabel(SECONDARY_TO_PRIMARY[secondary], secondary)
        if text in self.fixture:
            raise ValueError(f"duplicate query text: {text!r}")
        self.queries.append(
            BenchmarkQuery(
                query_id=f"q{self._counter:03d}",
                text=text,
                ground_truth_label=label,
                expected_tools=frozenset(tools),
                answer_spec=comparator,
                ambiguous=ambiguous,
            )
        )
        self.fixture[text] = QueryScript(
            classification=label if classify else None,
            turns=turns,
            response_template=response,
            response_type=response_type,
        )


def _cooling_channel(series: EnergySeries) -> str:
    for name, tag in series.channel_tags.items():
        if tag == "cooling":
            return name
    raise ValueError("series has no cooling-tagged channel")


def _ev_channel(series: EnergySeries) -> str:
    for name, role in series.channel_roles.items():
        if role is ChannelRole.EV_CHARGER:
            return name
    raise ValueError("series has no EV channel")


def build_battery(
    env: AgentEnvironment,
    drop_classification: Iterable[str] = (),
) -> tuple[list[BenchmarkQuery], dict[str, QueryScript]]:
    """Build the 120-query battery and its scripted fixture for one
    environment.

    ``drop_classification`` names query ids whose script skips the
    classification step (used to model and to inject shifts in the intent
    classification execution rate). Memory-category queries always skip
    it, modeling the observed bypass behavior of memory tooling.
    """
    b = _Builder()
    series = env.series
    rates = env.rates
    ac = _cooling_channel(series)
    ev = _ev_channel(series)

    # --- oracle values computed once, inlined into responses ------------
    monthly = analytics.aggregate(series, "monthly", "total-consumption")
    total_kwh = sum(monthly.values)
    per_channel = analytics.aggregate(series, "monthly", "per-channel")
    ac_kwh = sum(per_channel.values[ac])
    daily = analytics.aggregate(series, "daily", "total-consumption")
    yesterday_kwh = daily.values[-1]
    peak_day = max(range(len(daily.values)), key=lambda i: daily.values[i]) + 1
    balance = analytics.self_consumption(series)
    ranked_hours = analytics.peak_hours(series, k=3)
    top_hours = [f"{h:02d}:00" for h, _ in ranked_hours]
    shares = analytics.device_breakdown(series)
    top_device = max(shares, key=shares.get)
    fc_month = analytics.forecast(series, series.grid_channel(), "moving_average", 2880)
    fc_day = analytics.forecast(series, series.grid_channel(), "moving_average", 96)
    fc_trend = analytics.forecast(series, series.grid_channel(), "linear_regression", 96)
    trend_word = "increase" if fc_trend.fit_diagnostics["slope"] >= 0 else "decrease"
    fc_ac_week = analytics.forecast(series, ac, "moving_average", 672)
    fc_ev_week = analytics.forecast(series, ev, "moving_average", 672)
    breakdown = tariff.cost(series, rates).to_dict()
    ac_cost = breakdown["per_channel"][ac]
    top_cost_device = max(breakdown["per_channel"], key=breakdown["per_channel"].get)
    cf_month = tariff.cost_forecast(series, rates, "moving_average", 2880)
    cf_week = tariff.cost_forecast(series, rates, "moving_average", 672)
    cf_day = tariff.cost_forecast(series, rates, "linear_regression", 96)
    pv_savings = (balance["self_consumed_kwh"] * rates.off_peak_rate
                  + balance["exported_kwh"] * rates.export_credit)
    meters = {m.name: m for m in env.home.meters_query()}
    light = env.home.devices_query("living_room_light")
    ac_device = env.home.devices_query("ac")

    def run(kind: str, **kw) -> ScriptTurn:
        return ScriptTurn(calls=[("analysis.run", {"kind": kind, **kw})])

    # ===================== Energy Consumption & Analysis =================
    sec = "Historical Energy Data"
    b.add(sec, "How much energy did I use last month?", {"analysis.run"},
          Comparator("numeric", total_kwh),
          [run("aggregate", granularity="monthly", scope="total-consumption")],
          f"You used {total_kwh:.3f} kWh in total over the past month.")
    b.add(sec, "How much energy did the AC use last month?", {"analysis.run"},
          Comparator("numeric", ac_kwh),
          [run("aggregate", granularity="monthly", scope="per-channel")],
          f"The AC ({ac}) used {ac_kwh:.3f} kWh over the past month.")
    b.add(sec, "What was my energy use yesterday?", {"analysis.run"},
          Comparator("numeric", yesterday_kwh),
          [run("aggregate", granularity="daily", scope="total-consumption")],
          f"You used {yesterday_kwh:.3f} kWh yesterday.")
    b.add(sec, "Which day last month had the highest energy consumption?",
          {"analysis.run"},
          Comparator("set", [f"day {peak_day}"]),
          [run("aggregate", granularity="daily", scope="total-consumption")],
          f"Day {peak_day} of the month had the highest consumption.")
    b.add(sec, "How much solar energy did I generate last month?", {"analysis.run"},
          Comparator("numeric", balance["generated_kwh"]),
          [run("self_consumption")],
          f"Your PV panels generated {balance['generated_kwh']:.3f} kWh last month.")

    sec = "Energy Prediction"
    b.add(sec, "What is the predicted energy use for the next month?",
          {"analysis.run"},
          Comparator("numeric", sum(fc_month.predicted)),
          [run("forecast", channel=series.grid_channel(), method="moving_average",
               horizon=2880)],
          f"Based on a trailing average, your predicted net energy use for next "
          f"month is {sum(fc_month.predicted):.3f} kWh.")
    b.add(sec, "Predict my energy consumption for tomorrow.", {"analysis.run"},
          Comparator("numeric", sum(fc_day.predicted)),
          [run("forecast", channel=series.grid_channel(), method="moving_average",
               horizon=96)],
          f"Tomorrow's predicted net energy use is {sum(fc_day.predicted):.3f} kWh.")
    b.add(sec, "Will my energy use go up or down next month?", {"analysis.run"},
          Comparator("set", [trend_word]),
          [run("forecast", channel=series.grid_channel(), method="linear_regression",
               horizon=96)],
          f"The fitted trend suggests your energy use will {trend_word} next month.")
    b.add(sec, "Forecast the AC energy use for the next week.", {"analysis.run"},
          Comparator("numeric", sum(fc_ac_week.predicted)),
          [run("forecast", channel=ac, method="moving_average", horizon=672)],
          f"The AC is forecast to use {sum(fc_ac_week.predicted):.3f} kWh next week.")
    b.add(sec, "Predict my EV charging energy for next week.", {"analysis.run"},
          Comparator("numeric", sum(fc_ev_week.predicted)),
          [run("forecast", channel=ev, method="moving_average", horizon=672)],
          f"Your EV is forecast to draw {sum(fc_ev_week.predicted):.3f} kWh next week.")

    sec = "Energy Optimization"
    b.add(sec, "How can I reduce my energy consumption during peak hours?",
          {"analysis.run"},
          Comparator("set", [top_hours[0]]),
          [run("peak_hours", k=3)],
          f"Your heaviest hour is {top_hours[0]}; shifting flexible loads such as "
          f"the dishwasher out of the 17:00 - 20:00 peak window will cut peak use.")
    b.add(sec, "What are my top 3 peak usage hours?", {"analysis.run"},
          Comparator("set", top_hours),
          [run("peak_hours", k=3)],
          f"Your top three usage hours are {top_hours[0]}, {top_hours[1]} "
          f"and {top_hours[2]}.")
    b.add(sec, "Which appliance should I run less to lower my energy use?",
          {"analysis.run"},
          Comparator("set", [top_device]),
          [run("device_breakdown")],
          f"The largest consumer is {top_device}; reducing its runtime has the "
          f"biggest effect.")
    b.add(sec, "When is the best time to run my dishwasher to use less grid energy?",
          {"pricing.search"},
          Comparator("set", ["off-peak"]),
          [ScriptTurn(calls=[("pricing.search", {})])],
          "Run the dishwasher during off-peak hours, ideally around midday when "
          "your PV panels are producing.")
    b.add(sec, "How can I shift my EV charging to cheaper hours?", {"pricing.search"},
          Comparator("set", ["00:00", "06:00"]),
          [ScriptTurn(calls=[("pricing.search", {})])],
          "Charge between 00:00 and 06:00: the EV discount window gives you the "
          "lowest rate of the day.")

    sec = "Energy Suggestions"
    b.add(sec, "Based on my past month energy use, can you give me some "
          "suggestions to save energy?", {"analysis.run"},
          Comparator("set", [top_device, "reduce"]),
          [run("device_breakdown")],
          f"Your biggest consumer is {top_device}. Reduce its runtime, avoid the "
          f"evening peak, and batch appliance use into daylight hours.")
    b.add(sec, "Give me three tips to save energy at home.", {"analysis.run"},
          Comparator("set", ["peak", "standby"]),
          [run("device_breakdown")],
          "1) Shift flexible loads out of the evening peak. 2) Cut standby draw "
          "with switched outlets. 3) Match appliance use to your solar window.")
    b.add(sec, "Any advice for lowering my heating energy use?", {"analysis.run"},
          Comparator("set", ["setpoint"]),
          [run("aggregate", granularity="monthly", scope="per-channel")],
          "Lower the heating setpoint by one or two degrees and schedule heating "
          "around occupancy instead of running it continuously.")
    b.add(sec, "Suggest ways to use more of my solar generation.", {"analysis.run"},
          Comparator("set", ["daytime"]),
          [run("self_consumption")],
          "Move the dishwasher, laundry and EV charging into daytime hours so the "
          "energy is self-consumed instead of exported.")
    b.add(sec, "What's one change that would cut my standby consumption?",
          {"analysis.run"},
          Comparator("set", ["standby"]),
          [run("device_breakdown")],
          "Put entertainment and kitchen electronics on switched outlets so their "
          "standby draw drops to zero overnight.")

    sec = "Energy Visualization"
    b.add(sec, "Can you show me a pie chart of my energy energy use by device "
          "or system?", {"analysis.run"},
          Comparator("artifact", "pie"),
          [run("device_breakdown", chart="pie")],
          "Here is a pie chart of your energy use by device.")
    b.add(sec, "Show me a bar chart of my daily energy use.", {"analysis.run"},
          Comparator("artifact", "bar"),
          [run("aggregate", granularity="daily", scope="total-consumption",
               chart="bar")],
          "Here is a bar chart of your daily energy use for the month.")
    b.add(sec, "Plot my hourly energy consumption for the month.", {"analysis.run"},
          Comparator("artifact", "line"),
          [run("aggregate", granularity="hourly", scope="total-consumption",
               chart="line")],
          "Here is a line plot of your hourly consumption.")
    b.add(sec, "Show me a heatmap of my energy use by hour and day.",
          {"analysis.run"},
          Comparator("artifact", "heatmap"),
          [run("hourly_heatmap")],
          "Here is an hour-by-day heatmap of your energy use.")
    b.add(sec, "Plot my net grid energy for each day of the month.",
          {"analysis.run"},
          Comparator("artifact", "line"),
          [run("aggregate", granularity="daily", scope="net-grid", chart="line")],
          "Here is a line plot of your daily net grid energy.")

    # ========================= Cost Management ===========================
    sec = "Cost Information"
    b.add(sec, "How much did I spend on AC last month?", {"analysis.run"},
          Comparator("numeric", ac_cost),
          [run("cost")],
          f"You spent ${ac_cost:.4f} on the AC ({ac}) last month.")
    b.add(sec, "What was my total energy bill last month?", {"analysis.run"},
          Comparator("numeric", breakdown["net_total"]),
          [run("cost")],
          f"Your total energy bill last month was ${breakdown['net_total']:.4f} "
          f"after export credits.")
    b.add(sec, "How much did peak-hour electricity cost me last month?",
          {"analysis.run"},
          Comparator("numeric", breakdown["per_band"]["peak"]),
          [run("cost")],
          f"Peak-band electricity cost you ${breakdown['per_band']['peak']:.4f} "
          f"last month.")
    b.add(sec, "How much credit did I earn from exporting solar?", {"analysis.run"},
          Comparator("numeric", breakdown["export_credit"]),
          [run("cost")],
          f"You earned ${breakdown['export_credit']:.4f} in export credits.")
    b.add(sec, "What did my EV discount save me last month?", {"analysis.run"},
          Comparator("numeric", breakdown["ev_discount_savings"]),
          [run("cost")],
          f"The overnight EV discount saved you "
          f"${breakdown['ev_discount_savings']:.4f} last month.")

    sec = "Cost Prediction"
    b.add(sec, "How much money will I save from my PV panels next month?",
          {"analysis.run", "pricing.search"},
          Comparator("numeric", pv_savings),
          [run("self_consumption"), ScriptTurn(calls=[("pricing.search", {})])],
          f"Assuming last month repeats, your PV panels will save you about "
          f"${pv_savings:.4f} next month between self-consumption and export "
          f"credits.")
    b.add(sec, "Predict my electricity cost for next month.", {"analysis.run"},
          Comparator("numeric", cf_month.predicted_cost_micro / 1e6),
          [run("cost_forecast", method="moving_average", horizon=2880)],
          f"Your predicted electricity cost for next month is "
          f"${cf_month.predicted_cost_micro / 1e6:.4f}.")
    b.add(sec, "How much will my electricity cost next week?", {"analysis.run"},
          Comparator("numeric", cf_week.predicted_cost_micro / 1e6),
          [run("cost_forecast", method="moving_average", horizon=672)],
          f"Next week is predicted to cost "
          f"${cf_week.predicted_cost_micro / 1e6:.4f}.")
    b.add(sec, "Estimate my energy cost for tomorrow.", {"analysis.run"},
          Comparator("numeric", cf_day.predicted_cost_micro / 1e6),
          [run("cost_forecast", method="linear_regression", horizon=96)],
          f"Tomorrow's estimated energy cost is "
          f"${cf_day.predicted_cost_micro / 1e6:.4f}.")
    b.add(sec, "If my usage stays the same, what will my bill be next month?",
          {"analysis.run"},
          Comparator("numeric", cf_month.predicted_cost_micro / 1e6),
          [run("cost_forecast", method="moving_average", horizon=2880)],
          f"With unchanged usage, next month's bill lands around "
          f"${cf_month.predicted_cost_micro / 1e6:.4f}.")

    sec = "Cost Suggestions"
    b.add(sec, "Based on my past month energy cost, can you give me some "
          "suggestions to save money on energy?", {"analysis.run"},
          Comparator("set", [top_cost_device, "off-peak"]),
          [run("cost")],
          f"Your costliest channel is {top_cost_device}; moving its use into "
          f"off-peak hours is the quickest saving.")
    b.add(sec, "How can I cut my peak-hour electricity costs?", {"pricing.search"},
          Comparator("set", ["17:00", "20:00"]),
          [ScriptTurn(calls=[("pricing.search", {})])],
          "Avoid running large appliances between 17:00 and 20:00, when the peak "
          "rate applies.")
    b.add(sec, "Is it cheaper to charge my car at night?", {"pricing.search"},
          Comparator("set", ["00:00", "06:00"]),
          [ScriptTurn(calls=[("pricing.search", {})])],
          "Yes - charging between 00:00 and 06:00 uses the discounted EV rate, "
          "the cheapest of the day.")
    b.add(sec, "What tariff band should I avoid to save money?", {"pricing.search"},
          Comparator("set", ["peak"]),
          [ScriptTurn(calls=[("pricing.search", {})])],
          "Avoid the peak band (17:00 - 20:00); it carries the highest rate.")
    b.add(sec, "Recommend the best time to run high-power appliances.",
          {"pricing.search"},
          Comparator("set", ["off-peak"]),
          [ScriptTurn(calls=[("pricing.search", {})])],
          "Run high-power appliances in off-peak hours, ideally overlapping your "
          "midday solar production.")

    sec = "Cost Visualization"
    b.add(sec, "Show me the cost I spent on charging my car over the past month "
          "in a plot.", {"analysis.run"},
          Comparator("artifact", "bar"),
          [run("cost", chart="bar")],
          "Here is a bar chart of last month's cost per device, including your "
          "car charger.")
    b.add(sec, "Show me a pie chart of my energy costs by device.",
          {"analysis.run"},
          Comparator("artifact", "pie"),
          [run("cost", chart="pie")],
          "Here is a pie chart of your energy costs by device.")
    b.add(sec, "Visualize how my costs split between peak and off-peak.",
          {"analysis.run"},
          Comparator("artifact", "pie"),
          [run("cost", chart="pie", by="band")],
          "Here is a pie chart of your costs by tariff band.")
    b.add(sec, "Chart my spending by tariff band for last month.",
          {"analysis.run"},
          Comparator("artifact", "bar"),
          [run("cost", chart="bar", by="band")],
          "Here is a bar chart of last month's spending by tariff band.")
    b.add(sec, "Plot my spending by appliance.", {"analysis.run"},
          Comparator("artifact", "bar"),
          [run("cost", chart="bar")],
          "Here is a bar chart of your spending by appliance.")

    # ====================== Device Status & Control ======================
    sec = "Meter Status Check"
    b.add(sec, "What is my PV panel meter reading?", {"meters.query"},
          Comparator("numeric", meters["solar"].value),
          [ScriptTurn(calls=[("meters.query", {"name": "solar"})])],
          f"Your PV panel meter currently reads {meters['solar'].value:.3f} kW.")
    b.add(sec, "What is my grid meter reading right now?", {"meters.query"},
          Comparator("numeric", meters["grid"].value),
          [ScriptTurn(calls=[("meters.query", {"name": "grid"})])],
          f"Your grid meter currently reads {meters['grid'].value:.3f} kW.")
    b.add(sec, "Give me the current readings from all my meters.",
          {"meters.query"},
          Comparator("numeric", float(len(meters))),
          [ScriptTurn(calls=[("meters.query", {"name": "all"})])],
          f"All {len(meters)} meters reported readings; see the attached table.")
    b.add(sec, "Is my dishwasher meter online?", {"meters.query"},
          Comparator("set", ["online"]),
          [ScriptTurn(calls=[("meters.query", {"name": "dishwasher1"})])],
          "Yes, the dishwasher meter is online and reporting.")
    b.add(sec, "What does the AC meter read at the moment?", {"meters.query"},
          Comparator("numeric", meters[ac].value),
          [ScriptTurn(calls=[("meters.query", {"name": ac})])],
          f"The AC meter ({ac}) currently reads {meters[ac].value:.3f} kW.")

    sec = "Device Status Check"
    light_state = "on" if light.attributes["power"] else "off"
    b.add(sec, "Is the living room light currently on?",
          {"devices.sync", "devices.query"},
          Comparator("set", [f"is {light_state}"]),
          [ScriptTurn(calls=[("devices.sync", {})]),
           ScriptTurn(calls=[("devices.query", {"device_id": "living_room_light"})])],
          f"Yes, the living room light is {light_state}."
          if light_state == "on" else
          f"No, the living room light is {light_state}.")
    b.add(sec, "Is the AC running?", {"devices.query"},
          Comparator("set", [ac_device.attributes["mode"]]),
          [ScriptTurn(calls=[("devices.query", {"device_id": "ac"})])],
          f"The AC is currently in {ac_device.attributes['mode']!r} mode.")
    b.add(sec, "What is the current brightness of the living room light?",
          {"devices.query"},
          Comparator("numeric", float(light.attributes["brightness"])),
          [ScriptTurn(calls=[("devices.query", {"device_id": "living_room_light"})])],
          f"The living room light is at brightness "
          f"{light.attributes['brightness']}.")
    b.add(sec, "Is the kettle online?", {"devices.query"},
          Comparator("set", ["offline"]),
          [ScriptTurn(calls=[("devices.query", {"device_id": "kettle"})])],
          "The kettle is currently offline.")
    b.add(sec, "What's the AC setpoint right now?", {"devices.query"},
          Comparator("numeric", float(ac_device.attributes["setpoint"])),
          [ScriptTurn(calls=[("devices.query", {"device_id": "ac"})])],
          f"The AC setpoint is {ac_device.attributes['setpoint']} degrees.")

    control_tools = {"devices.sync", "devices.query", "devices.execute"}

    def control(device_id: str, attribute: str, value: Any) -> list[ScriptTurn]:
        # the sync-query-execute workflow
        return [
            ScriptTurn(calls=[("devices.sync", {})]),
            ScriptTurn(calls=[("devices.query", {"device_id": device_id})]),
            ScriptTurn(calls=[("devices.execute", {
                "device_id": device_id, "attribute": attribute, "value": value})]),
        ]

    sec = "Device General Operation"
    b.add(sec, "Set the AC to 20 degrees.", control_tools,
          Comparator("state_diff", [["ac", "setpoint", 20]]),
          control("ac", "setpoint", 20),
          "Done - the AC setpoint is now 20 degrees.")
    b.add(sec, "Turn off the living room light.", control_tools,
          Comparator("state_diff", [["living_room_light", "power", False]]),
          control("living_room_light", "power", False),
          "The living room light is now off.")
    b.add(sec, "Turn on the coffee maker.", control_tools,
          Comparator("state_diff", [["coffee_maker", "power", True]]),
          control("coffee_maker", "power", True),
          "The coffee maker is now on.")
    b.add(sec, "Dim the living room light to 30.", control_tools,
          Comparator("state_diff", [["living_room_light", "brightness", 30]]),
          control("living_room_light", "brightness", 30),
          "The living room light is dimmed to 30.")
    b.add(sec, "Switch the AC to eco mode.", control_tools,
          Comparator("state_diff", [["ac", "mode", "eco"]]),
          control("ac", "mode", "eco"),
          "The AC is now in eco mode.")

    sec = "Group Device Management"
    group_tools = {"devices.sync", "devices.execute"}
    b.add(sec, "Turn off all kitchen appliances.", group_tools,
          Comparator("state_diff", [["coffee_maker", "power", False],
                                    ["dishwasher", "power", False]]),
          [ScriptTurn(calls=[("devices.sync", {})]),
           ScriptTurn(calls=[
               ("devices.execute", {"device_id": "coffee_maker",
                                    "attribute": "power", "value": False}),
               ("devices.execute", {"device_id": "dishwasher",
                                    "attribute": "power", "value": False}),
               ("devices.execute", {"device_id": "kettle",
                                    "attribute": "power", "value": False}),
           ])],
          "I turned off the coffee maker and the dishwasher. The kettle is "
          "offline, so it could not be reached.")
    b.add(sec, "Turn on all the lights.", group_tools,
          Comparator("state_diff", [["living_room_light", "power", True],
                                    ["kitchen_light", "power", True]]),
          [ScriptTurn(calls=[("devices.sync", {})]),
           ScriptTurn(calls=[
               ("devices.execute", {"device_id": "living_room_light",
                                    "attribute": "power", "value": True}),
               ("devices.execute", {"device_id": "kitchen_light",
                                    "attribute": "power", "value": True}),
           ])],
          "Both lights are now on.")
    b.add(sec, "Turn off every device in the kitchen.", group_tools,
          Comparator("state_diff", [["kitchen_light", "power", False],
                                    ["coffee_maker", "power", False],
                                    ["dishwasher", "power", False]]),
          [ScriptTurn(calls=[("devices.sync", {})]),
           ScriptTurn(calls=[
               ("devices.execute", {"device_id": "kitchen_light",
                                    "attribute": "power", "value": False}),
               ("devices.execute", {"device_id": "coffee_maker",
                                    "attribute": "power", "value": False}),
               ("devices.execute", {"device_id": "dishwasher",
                                    "attribute": "power", "value": False}),
               ("devices.execute", {"device_id": "kettle",
                                    "attribute": "power", "value": False}),
           ])],
          "Every reachable kitchen device is now off; only the offline kettle "
          "could not be reached.")
    b.add(sec, "Set all lights to half brightness.", group_tools,
          Comparator("state_diff", [["living_room_light", "brightness", 50],
                                    ["kitchen_light", "brightness", 50]]),
          [ScriptTurn(calls=[("devices.sync", {})]),
           ScriptTurn(calls=[
               ("devices.execute", {"device_id": "living_room_light",
                                    "attribute": "brightness", "value": 50}),
               ("devices.execute", {"device_id": "kitchen_light",
                                    "attribute": "brightness", "value": 50}),
           ])],
          "Both lights are set to brightness 50.")
    b.add(sec, "Switch off all appliances at once.", group_tools,
          Comparator("state_diff", [["coffee_maker", "power", False],
                                    ["dishwasher", "power", False]]),
          [ScriptTurn(calls=[("devices.sync", {})]),
           ScriptTurn(calls=[
               ("devices.execute", {"device_id": "coffee_maker",
                                    "attribute": "power", "value": False}),
               ("devices.execute", {"device_id": "dishwasher",
                                    "attribute": "power", "value": False}),
               ("devices.execute", {"device_id": "kettle",
                                    "attribute": "power", "value": False}),
           ])],
          "All reachable appliances are off; the kettle is offline.")

    sec = "Device Custom Configurations"
    b.add(sec, "Set the living room light to a brightness level good for reading.",
          control_tools,
          Comparator("state_diff", [["living_room_light", "brightness", 75]]),
          control("living_room_light", "brightness", 75),
          "I set the living room light to brightness 75, a comfortable reading "
          "level.")
    b.add(sec, "Set the AC to a comfortable temperature for sleeping.", set(),
          Comparator("response_type", NEEDS_CLARIFICATION),
          [],
          "Happy to help - what time do you usually go to sleep, and do you "
          "prefer it cooler or warmer overnight?",
          response_type=NEEDS_CLARIFICATION, ambiguous=True)
    b.add(sec, "Make the kitchen light brighter for cooking.", control_tools,
          Comparator("state_diff", [["kitchen_light", "brightness", 90]]),
          control("kitchen_light", "brightness", 90),
          "The kitchen light is at brightness 90 for cooking.")
    b.add(sec, "Put the AC in a quiet nighttime mode.", control_tools,
          Comparator("state_diff", [["ac", "fan", "off"]]),
          control("ac", "fan", "off"),
          "I switched the AC fan off for quiet nighttime operation.")
    b.add(sec, "Set the light to a cozy movie level.", control_tools,
          Comparator("state_diff", [["living_room_light", "brightness", 20]]),
          control("living_room_light", "brightness", 20),
          "The living room light is dimmed to 20 for movie watching.")

    # =================== Device Scheduling & Automation ==================
    sec = "Schedule Information"
    sync_only = {"schedule.sync"}

    def sched_sync(device_id: Optional[str] = None) -> ScriptTurn:
        args = {} if device_id is None else {"device_id": device_id}
        return ScriptTurn(calls=[("schedule.sync", args)])

    b.add(sec, "Have I set a schedule for my car charger?", sync_only,
          Comparator("set", ["no schedule"]),
          [sched_sync("ev_charger")],
          "No, you have no schedules set for the car charger.")
    b.add(sec, "What schedules do I have right now?", sync_only,
          Comparator("numeric", 0.0),
          [sched_sync()],
          "You currently have 0 schedules.")
    b.add(sec, "List my schedules for the AC.", sync_only,
          Comparator("set", ["no schedule"]),
          [sched_sync("ac")],
          "There are no schedules set for the AC.")
    b.add(sec, "Do I have any schedule for the coffee maker?", sync_only,
          Comparator("set", ["no schedule"]),
          [sched_sync("coffee_maker")],
          "No schedules exist for the coffee maker yet.")
    b.add(sec, "Show me all my automation rules.", sync_only,
          Comparator("numeric", 0.0),
          [sched_sync()],
          "You have 0 automation rules at the moment.")

    sec = "General Scheduling"
    create_only = {"schedule.create"}

    def sched_create(device_id: str, attribute: str, value: Any,
                     at: str, recurrence: str = "daily") -> ScriptTurn:
        return ScriptTurn(calls=[("schedule.create", {
            "device_id": device_id, "attribute": attribute, "value": value,
            "time": at, "recurrence": recurrence})])

    b.add(sec, "Turn on my coffee maker at 7 in the morning.", create_only,
          Comparator("set", ["07:00", "coffee"]),
          [sched_create("coffee_maker", "power", True, "07:00")],
          "Scheduled: the coffee maker will turn on daily at 07:00.")
    b.add(sec, "Schedule the dishwasher to start at 23:00.", create_only,
          Comparator("set", ["23:00"]),
          [sched_create("dishwasher", "power", True, "23:00")],
          "Scheduled: the dishwasher will start at 23:00.")
    b.add(sec, "Turn on the AC at 6 pm every day.", create_only,
          Comparator("set", ["18:00"]),
          [sched_create("ac", "mode", "on", "18:00")],
          "Scheduled: the AC will turn on daily at 18:00.")
    b.add(sec, "Charge my car every night at midnight.", create_only,
          Comparator("set", ["00:00"]),
          [sched_create("ev_charger", "power", True, "00:00")],
          "Scheduled: car charging will start nightly at 00:00.")
    b.add(sec, "Turn off the living room light at 11 pm on weekdays.",
          create_only,
          Comparator("set", ["23:00", "weekday"]),
          [sched_create("living_room_light", "power", False, "23:00", "weekdays")],
          "Scheduled: the living room light turns off at 23:00 on weekdays.")

    sec = "Conditional Automation"

    def cond_create(device_id: str, attribute: str, value: Any,
                    condition: dict[str, Any]) -> ScriptTurn:
        return ScriptTurn(calls=[("schedule.create", {
            "device_id": device_id, "attribute": attribute, "value": value,
            "condition": condition})])

    b.add(sec, "If the dishwasher is on, keep the kitchen light on.", create_only,
          Comparator("set", ["dishwasher", "kitchen"]),
          [cond_create("kitchen_light", "power", True,
                       {"device_id": "dishwasher", "attribute": "power",
                        "op": "eq", "value": True})],
          "Rule created: whenever the dishwasher turns on, the kitchen light "
          "stays on.")
    b.add(sec, "If the AC is heating, turn off the kettle.", create_only,
          Comparator("set", ["kettle"]),
          [cond_create("kettle", "power", False,
                       {"device_id": "ac", "attribute": "mode",
                        "op": "eq", "value": "heat"})],
          "Rule created: the kettle turns off whenever the AC switches to "
          "heating.")
    b.add(sec, "If the coffee maker turns on, turn on the kitchen light.",
          create_only,
          Comparator("set", ["coffee"]),
          [cond_create("kitchen_light", "power", True,
                       {"device_id": "coffee_maker", "attribute": "power",
                        "op": "eq", "value": True})],
          "Rule created: the kitchen light follows the coffee maker turning on.")
    b.add(sec, "If the EV charger is running, switch the AC to eco.", create_only,
          Comparator("set", ["eco"]),
          [cond_create("ac", "mode", "eco",
                       {"device_id": "ev_charger", "attribute": "power",
                        "op": "eq", "value": True})],
          "Rule created: the AC drops to eco mode while the EV charger runs.")
    b.add(sec, "If the AC setpoint goes above 25, set it back to 22.", create_only,
          Comparator("set", ["25", "22"]),
          [cond_create("ac", "setpoint", 22,
                       {"device_id": "ac", "attribute": "setpoint",
                        "op": "gt", "value": 25})],
          "Rule created: if the AC setpoint exceeds 25 it will be reset to 22.")

    sec = "Schedule Management"
    manage_tools = {"schedule.sync", "schedule.change"}

    def sched_delete(device_id: str) -> list[ScriptTurn]:
        return [
            sched_sync(device_id),
            ScriptTurn(calls=[("schedule.change", {
                "schedule_id": {"$ref": "t0.entries.0.schedule_id"},
                "delete": True})]),
        ]

    b.add(sec, "Remove the schedule I set for AC.", manage_tools,
          Comparator("set", ["removed"]),
          sched_delete("ac"),
          "The AC schedule has been removed.")
    b.add(sec, "Cancel my dishwasher schedule.", manage_tools,
          Comparator("set", ["cancelled"]),
          sched_delete("dishwasher"),
          "Your dishwasher schedule is cancelled.")
    b.add(sec, "Disable the coffee maker schedule but keep it.", manage_tools,
          Comparator("set", ["disabled"]),
          [sched_sync("coffee_maker"),
           ScriptTurn(calls=[("schedule.change", {
               "schedule_id": {"$ref": "t0.entries.0.schedule_id"},
               "enabled": False})])],
          "The coffee maker schedule is disabled but kept for later.")
    b.add(sec, "Change my car charging schedule to 1 am.", manage_tools,
          Comparator("set", ["01:00"]),
          [sched_sync("ev_charger"),
           ScriptTurn(calls=[("schedule.change", {
               "schedule_id": {"$ref": "t0.entries.0.schedule_id"},
               "time": "01:00"})])],
          "Your car charging schedule now fires at 01:00.")
    b.add(sec, "Delete all my schedules for the living room light.", manage_tools,
          Comparator("set", ["deleted"]),
          sched_delete("living_room_light"),
          "All living room light schedules have been deleted.")

    # ============================== Memory ===============================
    # Memory-category scripts skip the classification step, modeling the
    # observed bypass straight to memory tools.
    sec = "Memory Information"
    mem_sync = {"memory.sync"}
    b.add(sec, "What device do I usually turn on at sunset time?", mem_sync,
          Comparator("set", ["bedroom lights"]),
          [ScriptTurn(calls=[("memory.sync", {"text": "sunset"})])],
          "You usually turn on the bedroom lights at sunset.", classify=False)
    b.add(sec, "What temperature do I like the AC at night?", mem_sync,
          Comparator("set", ["21"]),
          [ScriptTurn(calls=[("memory.sync", {"device": "AC"})])],
          "You prefer the AC set to 21 degrees at bedtime.", classify=False)
    b.add(sec, "When do I usually run the coffee maker?", mem_sync,
          Comparator("set", ["07:00"]),
          [ScriptTurn(calls=[("memory.sync", {"device": "coffee maker"})])],
          "You usually start the coffee maker at 07:00 on weekdays.",
          classify=False)
    b.add(sec, "Do I have any stored preferences for the dishwasher?", mem_sync,
          Comparator("set", ["off-peak"]),
          [ScriptTurn(calls=[("memory.sync", {"device": "dishwasher"})])],
          "Yes - you prefer to run the dishwasher during off-peak hours.",
          classify=False)
    b.add(sec, "What are all my saved preferences?", mem_sync,
          Comparator("numeric", 5.0),
          [ScriptTurn(calls=[("memory.sync", {})])],
          "You have 5 saved preferences.", classify=False)

    sec = "Memory Creation"
    mem_create = {"memory.create"}

    def remember(utterance: str) -> list[ScriptTurn]:
        return [ScriptTurn(calls=[("memory.create", {"utterance": utterance})])]

    q = "Remember that I usually like to have the fan on for my AC."
    b.add(sec, q, mem_create, Comparator("set", ["fan"]), remember(q),
          "Noted - I'll remember you like the AC fan on.", classify=False)
    q = "Remember that I want the living room light at 30 in the evening."
    b.add(sec, q, mem_create, Comparator("set", ["30"]), remember(q),
          "Noted - living room light at 30 in the evening.", classify=False)
    q = "Note that I prefer to charge my car after 11 pm."
    b.add(sec, q, mem_create, Comparator("set", ["23:00"]), remember(q),
          "Noted - car charging after 23:00.", classify=False)
    q = "Don't forget that I like the kitchen light off at night."
    b.add(sec, q, mem_create, Comparator("set", ["kitchen"]), remember(q),
          "Noted - kitchen light off at night.", classify=False)
    q = "Remember to keep the AC on eco mode on weekends."
    b.add(sec, q, mem_create, Comparator("set", ["eco"]), remember(q),
          "Noted - AC in eco mode on weekends.", classify=False)

    sec = "Memory Management"
    mem_manage = {"memory.sync", "memory.change"}

    def forget(sync_args: dict[str, Any]) -> list[ScriptTurn]:
        return [
            ScriptTurn(calls=[("memory.sync", sync_args)]),
            ScriptTurn(calls=[("memory.change", {
                "memory_id": {"$ref": "t0.entries.0.memory_id"},
                "delete": True})]),
        ]

    b.add(sec, "Forget my preference for the AC fan mode settings.", mem_manage,
          Comparator("set", ["forgotten"]),
          forget({"text": "fan"}),
          "Your AC fan preference is forgotten.", classify=False)
    b.add(sec, "Delete my stored preference about the dishwasher.", mem_manage,
          Comparator("set", ["deleted"]),
          forget({"device": "dishwasher"}),
          "Your dishwasher preference has been deleted.", classify=False)
    b.add(sec, "Update my bedtime AC temperature to 22.", mem_manage,
          Comparator("set", ["22"]),
          [ScriptTurn(calls=[("memory.sync", {"text": "bedtime"})]),
           ScriptTurn(calls=[("memory.change", {
               "memory_id": {"$ref": "t0.entries.0.memory_id"},
               "updates": {
                   "summary": "The user prefers the AC set to 22 degrees at bedtime",
               }})])],
          "Updated - your bedtime AC temperature is now 22 degrees.",
          classify=False)
    b.add(sec, "Remove what you remembered about the kitchen light.", mem_manage,
          Comparator("set", ["removed"]),
          forget({"text": "kitchen"}),
          "Removed what I had stored about the kitchen light.", classify=False)
    b.add(sec, "Forget my coffee maker preference.", mem_manage,
          Comparator("set", ["coffee"]),
          forget({"device": "coffee maker"}),
          "Your coffee maker preference is gone.", classify=False)

    # ==================== General Information & Support ==================
    sec = "System Guidance and Tutorials"
    no_tools: set[str] = set()
    b.add(sec, "Guide me through the process of controlling my smart devices.",
          no_tools, Comparator("set", ["devices"]), [],
          "To control your smart devices: ask me to list your devices, check "
          "one device's state, then tell me the change you want - for example "
          "'turn off the living room light'.")
    b.add(sec, "How do I create a schedule for a device?", no_tools,
          Comparator("set", ["schedule"]), [],
          "Tell me the device, the action and the time - for example 'schedule "
          "the dishwasher to start at 23:00' - and I will create the schedule.")
    b.add(sec, "Walk me through checking my energy usage.", no_tools,
          Comparator("set", ["energy"]), [],
          "Ask about a period ('how much energy did I use last month?') or a "
          "device, and I will compute the energy totals and show charts on "
          "request.")
    b.add(sec, "How do I use the memory feature?", no_tools,
          Comparator("set", ["remember"]), [],
          "Start a sentence with 'remember that ...' and I will store the "
          "preference; ask me to forget it any time.")
    b.add(sec, "Guide me through reading my meters.", no_tools,
          Comparator("set", ["meter"]), [],
          "Ask for a specific meter by name or say 'all meters'; each meter "
          "reports its live power draw in kW.")

    sec = "Troubleshooting and Technical Support"
    b.add(sec, "My kettle doesn't work, can you help me check it?",
          {"devices.sync", "devices.query"},
          Comparator("set", ["offline", "network"]),
          [ScriptTurn(calls=[("devices.sync", {})]),
           ScriptTurn(calls=[("devices.query", {"device_id": "kettle"})])],
          "The kettle shows as offline. Please check its power connection and "
          "your network settings; once it reconnects I can control it again.")
    b.add(sec, "The living room light is not responding, help me troubleshoot.",
          {"devices.query"},
          Comparator("set", ["online"]),
          [ScriptTurn(calls=[("devices.query", {"device_id": "living_room_light"})])],
          "The light reports online from here, so the issue is likely the bulb "
          "or its physical switch rather than connectivity.")
    b.add(sec, "My AC doesn't seem to cool, can you check it?",
          {"devices.query"},
          Comparator("set", ["mode"]),
          [ScriptTurn(calls=[("devices.query", {"device_id": "ac"})])],
          "The AC is reachable; check that its mode is set to 'cool' rather "
          "than 'fan-only' or 'eco', and that the setpoint is below room "
          "temperature.")
    b.add(sec, "The dishwasher is not working, what should I check?",
          {"devices.query"},
          Comparator("set", ["power"]),
          [ScriptTurn(calls=[("devices.query", {"device_id": "dishwasher"})])],
          "The dishwasher is online but its power is off; check the door latch "
          "and start it again, or ask me to turn it on.")
    b.add(sec, "Help me check why my coffee maker is not turning on.",
          {"devices.query"},
          Comparator("set", ["online"]),
          [ScriptTurn(calls=[("devices.query", {"device_id": "coffee_maker"})])],
          "The coffee maker is online and accepting commands; if it still "
          "doesn't start, check the water tank sensor.")

    sec = "FAQs and General Queries"
    b.add(sec, "What should I do if I want to add a new device to my smart "
          "network?", no_tools,
          Comparator("set", ["add"]), [],
          "Pair the device with your home hub first; once it is registered I "
          "can add it to the device list and control it.")
    b.add(sec, "What can you help me with?", no_tools,
          Comparator("set", ["energy"]), [],
          "I can analyze your energy use and costs, control and schedule "
          "devices, remember your preferences, and help troubleshoot.")
    b.add(sec, "What data do you use to answer my questions?", no_tools,
          Comparator("set", ["meter"]), [],
          "I use your building's historical 15-minute energy data, live meter "
          "readings, device states and your stored preferences.")
    b.add(sec, "Is my data stored locally?", no_tools,
          Comparator("set", ["local"]), [],
          "Yes - the energy history, device states and memory file live in "
          "local documents on this system.")
    b.add(sec, "Which devices do you support?", no_tools,
          Comparator("set", ["light"]), [],
          "Lights, the AC, the kettle, the coffee maker, the dishwasher and "
          "the car charger are registered in this home.")

    # --- validation ------------------------------------------------------
    assert len(b.queries) == len(SECONDARY_CATEGORIES) * QUERIES_PER_SECONDARY
    per_secondary: dict[str, int] = {}
    for query in b.queries:
        per_secondary[query.ground_truth_label.secondary] = (
            per_secondary.get(query.ground_truth_label.secondary, 0) + 1
        )
    assert all(n == QUERIES_PER_SECONDARY for n in per_secondary.values())

    dropped = set(drop_classification)
    unknown = dropped - {query.query_id for query in b.queries}
    if unknown:
        raise ValueError(f"unknown query ids in drop_classification: {sorted(unknown)}")
    for query in b.queries:
        if query.query_id in dropped:
            b.fixture[query.text].classification = None

    return b.queries, b.fixture


def classification_drop_ids(count: int) -> tuple[str, ...]:
    """First ``count`` non-memory query ids, used to inject a downward
    shift in one building's classification execution rate."""
    env = build_environment(BUILDING_IDS[0])
    queries, fixture = build_battery(env)
    ids = [q.query_id for q in queries
           if fixture[q.text].classification is not None]
    if count > len(ids):
        raise ValueError("not enough classified queries to drop")
    return tuple(ids[:count])


# -- adversarial rubric fixtures --------------------------------------------


@dataclass
class AdversarialCase:
    """One hand-built scoring scenario with its rubric-prescribed scores."""

    name: str
    query: BenchmarkQuery
    script: QueryScript
    expected_tool_score: float
    expected_response_score: float
    expected_classified: bool = True


def adversarial_cases(env: AgentEnvironment) -> list[AdversarialCase]:
    """Six fixtures probing every branch of the scoring rubric."""
    label = IntentLabel("Device Status & Control", "Device Custom Configurations")
    control_tools = frozenset({"devices.sync", "devices.query", "devices.execute"})
    brightness_query = BenchmarkQuery(
        query_id="adv-brightness",
        text="Set the living room light to a brightness level good for reading.",
        ground_truth_label=label,
        expected_tools=control_tools,
        answer_spec=Comparator("state_diff", [["living_room_light", "brightness", 75]]),
    )
    energy_label = IntentLabel("Energy Consumption & Analysis", "Historical Energy Data")
    total_kwh = sum(analytics.aggregate(env.series, "monthly", "total-consumption").values)
    numeric_query = BenchmarkQuery(
        query_id="adv-numeric",
        text="How much energy did I use last month?",
        ground_truth_label=energy_label,
        expected_tools=frozenset({"analysis.run"}),
        answer_spec=Comparator("numeric", total_kwh),
    )
    ambiguous_query = BenchmarkQuery(
        query_id="adv-clarify",
        text="Set the AC to a comfortable temperature for sleeping.",
        ground_truth_label=label,
        expected_tools=frozenset(),
        answer_spec=Comparator("response_type", NEEDS_CLARIFICATION),
        ambiguous=True,
    )

    execute_turns = [
        ScriptTurn(calls=[("devices.sync", {})]),
        ScriptTurn(calls=[("devices.query", {"device_id": "living_room_light"})]),
        ScriptTurn(calls=[("devices.execute", {
            "device_id": "living_room_light", "attribute": "brightness",
            "value": 75})]),
    ]

    return [
        # a memory tool on a device-control query: wrong category -> 0
        AdversarialCase(
            name="wrong_tool",
            query=brightness_query,
            script=QueryScript(
                classification=label,
                turns=[ScriptTurn(calls=[("memory.sync", {})])],
                response_template="I looked that up in your preferences.",
            ),
            expected_tool_score=0.0,
            expected_response_score=0.0,
        ),
        # only devices.sync out of the expected three -> 0.5
        AdversarialCase(
            name="subset_of_tools",
            query=brightness_query,
            script=QueryScript(
                classification=label,
                turns=[ScriptTurn(calls=[("devices.sync", {})])],
                response_template="Here are your devices.",
            ),
            expected_tool_score=0.5,
            expected_response_score=0.0,
        ),
        # wrong number and the expected tool never ran -> response 0
        AdversarialCase(
            name="wrong_numeric_answer",
            query=numeric_query,
            script=QueryScript(
                classification=energy_label,
                turns=[],
                response_template=f"You used {total_kwh * 10:.3f} kWh last month.",
            ),
            expected_tool_score=0.0 if numeric_query.expected_tools else 1.0,
            expected_response_score=0.0,
        ),
        # off-tolerance number but the right tool ran -> method credit 0.5
        AdversarialCase(
            name="off_tolerance_answer",
            query=numeric_query,
            script=QueryScript(
                classification=energy_label,
                turns=[ScriptTurn(calls=[("analysis.run", {
                    "kind": "aggregate", "granularity": "monthly",
                    "scope": "total-consumption"})])],
                response_template=f"You used {total_kwh * 1.2:.3f} kWh last month.",
            ),
            expected_tool_score=1.0,
            expected_response_score=0.5,
        ),
        # classification omitted entirely
        AdversarialCase(
            name="missing_classification",
            query=brightness_query,
            script=QueryScript(
                classification=None,
                turns=execute_turns,
                response_template="Brightness set to 75.",
            ),
            expected_tool_score=1.0,
            expected_response_score=1.0,
            expected_classified=False,
        ),
        # clarification on a genuinely ambiguous query -> 0.5 by flag
        AdversarialCase(
            name="clarification_response",
            query=ambiguous_query,
            script=QueryScript(
                classification=label,
                turns=[],
                response_template="What time do you usually go to sleep?",
                response_type=NEEDS_CLARIFICATION,
            ),
            expected_tool_score=1.0,
            expected_response_score=0.5,
        ),
    ]
