"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints exactly one PASS/FAIL line (run with ``pytest -sv`` to
see them stream). The tariff check re-prices every interval with an
independent brute-force implementation written from the documented
billing contract, not by calling into the package.
"""

import random
import time
from contextlib import contextmanager
from datetime import timedelta

import pytest
from scipy import stats as scipy_stats

from bems import analytics, bench, tariff
from bems.agent import SimulatedClock, run_query
from bems.battery import (
    BUILDING_IDS,
    adversarial_cases,
    build_environment,
    classification_drop_ids,
    synthetic_profiles,
)
from bems.bench import (
    ScoreCard,
    aggregate_report,
    anova_oneway,
    four_building_anova,
    pearson,
    run_battery,
    score_run,
    token_cost_dollars,
)
from bems.core import (
    ChannelRole,
    ClockWindow,
    RateSchedule,
    default_rate_schedule,
)
from bems.homesim import HomeError, build_home
from bems.ingestion import synth_month
from bems.provider import ScriptedProvider
from conftest import make_series


@contextmanager
def criterion(name):
    ok = False
    try:
        yield
        ok = True
    finally:
        print(f"{'PASS' if ok else 'FAIL'}: {name}", flush=True)


# -- 1. tariff oracle equivalence --------------------------------------------


def brute_force_cost(series, rates):
    """Independent per-interval re-pricing from the billing contract:
    generation is never billed, positive grid flow is not billed, negative
    grid flow earns the export credit, consumption pays the band rate, and
    the EV channel pays the discounted rate inside the EV window."""
    peak = round(rates.peak_rate * 1_000_000)
    off_peak = round(rates.off_peak_rate * 1_000_000)
    ev_rate = round(rates.ev_discounted_rate * 1_000_000)
    export = round(rates.export_credit * 1_000_000)
    per_channel = {}
    per_band = {"peak": 0, "off_peak": 0}
    credit = 0
    savings = 0
    for name, values in series.channels.items():
        role = series.channel_roles.get(name)
        if role is ChannelRole.GENERATION:
            continue
        if role is ChannelRole.GRID:
            for kw in values:
                if kw < 0:
                    credit += round(-kw * 0.25 * export)
            continue
        total = 0
        for k, kw in enumerate(values):
            at = series.start + k * timedelta(minutes=15)
            minute = at.hour * 60 + at.minute
            in_peak = any(w.start_minute <= minute < w.end_minute
                          for w in rates.peak_windows)
            band_rate = peak if in_peak else off_peak
            in_ev_window = (rates.ev_discount_window.start_minute <= minute
                            < rates.ev_discount_window.end_minute)
            if role is ChannelRole.EV_CHARGER and in_ev_window:
                charge = round(kw * 0.25 * ev_rate)
                savings += round(kw * 0.25 * band_rate) - charge
            else:
                charge = round(kw * 0.25 * band_rate)
            total += charge
            per_band["peak" if in_peak else "off_peak"] += charge
        per_channel[name] = total
    gross = sum(per_channel.values())
    return per_channel, per_band, credit, savings, gross - credit


def random_rate_schedule(rng):
    boundary_a = rng.randrange(1, 1430) // 15 * 15 or 15
    boundary_b = rng.randrange(boundary_a + 15, 1440)
    return RateSchedule(
        off_peak_windows=(ClockWindow(0, boundary_a),
                          ClockWindow(boundary_b, 1440)),
        peak_windows=(ClockWindow(boundary_a, boundary_b),),
        off_peak_rate=rng.choice([0.08, 0.11, 0.13]),
        peak_rate=rng.choice([0.19, 0.27, 0.31]),
        export_credit=rng.choice([0.04, 0.07]),
        ev_discount_window=ClockWindow(0, rng.randrange(60, 600)),
        ev_discounted_rate=rng.choice([0.03, 0.06]),
    )


def test_tariff_oracle_equivalence():
    with criterion("tariff oracle equivalence on 50 randomized synthetic "
                   "months, exact to the micro-dollar, < 10 s"):
        rng = random.Random(2024)
        profiles = list(synthetic_profiles().values())
        started = time.monotonic()
        for trial in range(50):
            profile = profiles[trial % len(profiles)]
            series = synth_month(
                seed=rng.randrange(10**6),
                profile=profile,
                days=rng.randrange(28, 32),
                season=rng.choice(["heating", "cooling"]),
            )
            rates = (default_rate_schedule() if trial % 3
                     else random_rate_schedule(rng))
            breakdown = tariff.cost(series, rates)
            per_channel, per_band, credit, savings, net = \
                brute_force_cost(series, rates)
            assert breakdown.per_channel_micro == per_channel
            assert breakdown.per_band_micro == per_band
            assert breakdown.export_credit_micro == credit
            assert breakdown.ev_discount_savings_micro == savings
            assert breakdown.net_total_micro == net
        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"took {elapsed:.1f} s"


# -- 2. analytics additivity and units ---------------------------------------


def test_analytics_additivity_and_units():
    with criterion("analytics additivity exact; to_energy = 0.25 x kW exact; "
                   "breakdown shares sum to 1 within 1e-9"):
        series = synth_month(13, synthetic_profiles()["TX-01"], 31, "heating")
        for scope in ("total-consumption", "net-grid"):
            interval = analytics.aggregate(series, "interval", scope).values
            hourly = analytics.aggregate(series, "hourly", scope).values
            daily = analytics.aggregate(series, "daily", scope).values
            monthly = analytics.aggregate(series, "monthly", scope).values
            assert hourly == [sum(interval[i:i + 4])
                              for i in range(0, len(interval), 4)]
            assert daily == [sum(hourly[i:i + 24])
                             for i in range(0, len(hourly), 24)]
            assert monthly == [sum(daily)]
        for name, values in series.channels.items():
            energy = analytics.to_energy(series, name)
            assert energy == [kw * 0.25 for kw in values]
        shares = analytics.device_breakdown(series)
        assert abs(sum(shares.values()) - 1.0) <= 1e-9


# -- 3. forecast baselines ----------------------------------------------------


def test_forecast_baselines():
    with criterion("OLS recovers an exact line to 1e-9 relative; moving "
                   "average of a constant series is that constant exactly"):
        n = 500
        slope, intercept = 0.375, 3.25  # binary-exact after the 0.25 factor
        line = make_series({"grid": [(intercept + slope * k) * 4.0
                                     for k in range(n)]})
        fit = analytics.forecast(line, "grid", "linear_regression", 10)
        assert abs(fit.fit_diagnostics["slope"] - slope) <= 1e-9 * slope
        assert abs(fit.fit_diagnostics["intercept"] - intercept) \
               <= 1e-9 * intercept
        for h, predicted in enumerate(fit.predicted):
            expected = intercept + slope * (n + h)
            assert abs(predicted - expected) <= 1e-9 * expected

        # 1.75 kW -> 0.4375 kWh is binary-exact, so the mean is too
        constant = make_series({"grid": [1.75] * 200})
        ma = analytics.forecast(constant, "grid", "moving_average", 96)
        assert ma.predicted == [1.75 * 0.25] * 96


# -- 4. statistics ------------------------------------------------------------

# R's PlantGrowth dataset; published one-way ANOVA F(2,27)=4.846, p=0.0159.
PLANT_CTRL = [4.17, 5.58, 5.18, 6.11, 4.50, 4.61, 5.17, 4.53, 5.33, 5.14]
PLANT_TRT1 = [4.81, 4.17, 4.41, 3.59, 5.87, 3.83, 6.03, 4.89, 4.32, 4.69]
PLANT_TRT2 = [6.31, 5.12, 5.54, 5.50, 5.37, 5.29, 4.92, 6.15, 5.80, 5.26]
PLANT_F = 4.846087862380136
PLANT_P = 0.0159099583256229


def test_statistics():
    with criterion("ANOVA fixture F = 3.0 within 1e-9; textbook dataset F/p "
                   "within 1e-6 relative; Pearson of linear pairs = +/-1 "
                   "within 1e-12"):
        fixture = anova_oneway([[1, 2, 3], [2, 3, 4], [3, 4, 5]])
        # hand decomposition: SSB = 6, SSW = 6, MSB = 3, MSW = 1 -> F = 3
        assert abs(fixture.f_value - 3.0) <= 1e-9

        textbook = anova_oneway([PLANT_CTRL, PLANT_TRT1, PLANT_TRT2])
        assert abs(textbook.f_value - PLANT_F) <= 1e-6 * PLANT_F
        assert abs(textbook.p_value - PLANT_P) <= 1e-6 * PLANT_P
        ref_f, ref_p = scipy_stats.f_oneway(PLANT_CTRL, PLANT_TRT1, PLANT_TRT2)
        assert abs(textbook.f_value - ref_f) <= 1e-6 * ref_f
        assert abs(textbook.p_value - ref_p) <= 1e-6 * ref_p

        xs = [0.5, 1.5, 2.25, 9.0, 4.0]
        assert abs(pearson(xs, [3 * x - 2 for x in xs]) - 1.0) <= 1e-12
        assert abs(pearson(xs, [-0.5 * x for x in xs]) + 1.0) <= 1e-12


# -- 5. simulator state-machine safety ----------------------------------------


def test_simulator_safety():
    with criterion("10,000 random command sequences leave device state "
                   "spec-conformant; offline devices reject; group execution "
                   "reports per-device outcomes"):
        rng = random.Random(99)
        profile = synthetic_profiles()["TX-01"]
        values = [True, False, 0, 50, 100, -5, 101, 22, 16, 30, 99, "off",
                  "cool", "heat", "auto", "turbo", "", 3.5, None, float("nan")]
        attributes = ["power", "brightness", "mode", "setpoint", "fan",
                      "temperature", "color"]
        commands_run = 0
        home = build_home(profile)
        device_ids = [d.device_id for d in home.devices_sync()] + ["tv"]
        for sequence in range(500):
            home = build_home(profile)
            for _ in range(20):
                device = rng.choice(device_ids)
                try:
                    home.devices_execute(device, rng.choice(attributes),
                                         rng.choice(values))
                except HomeError:
                    pass
                commands_run += 1
            for device in home.devices_sync():
                for attr, current in device.attributes.items():
                    assert device.attribute_specs[attr].conforms(current)
        assert commands_run == 10_000

        # offline devices reject every command, audited but unapplied
        for attr, value in (("power", True), ("power", False),
                            ("temperature", 80)):
            with pytest.raises(HomeError):
                home.devices_execute("kettle", attr, value)
        assert all(not e.applied for e in home.audit_log
                   if e.device_id == "kettle")

        results = home.group_execute("kitchen", "power", True)
        assert {r.device_id for r in results} == \
               {"kitchen_light", "kettle", "coffee_maker", "dishwasher"}
        assert {r.device_id for r in results if not r.ok} == {"kettle"}


# -- 6. automation replay ----------------------------------------------------


def test_automation_replay():
    from datetime import datetime, time as clock_time

    from bems.automation import ConditionTrigger, Scheduler, TimeTrigger

    with criterion("day traversal fires each enabled trigger once per "
                   "instant; condition rules never double-fire; CRUD replay "
                   "equivalence"):
        t0 = datetime(2021, 1, 4)  # Monday

        def build():
            home = build_home(synthetic_profiles()["TX-01"], sim_clock=t0)
            scheduler = Scheduler(home, now=t0)
            scheduler.schedule_create("coffee_maker", "power", True,
                                      TimeTrigger(clock_time(7, 0)))
            scheduler.schedule_create("dishwasher", "power", True,
                                      TimeTrigger(clock_time(23, 0)))
            scheduler.schedule_create("ac", "mode", "eco",
                                      TimeTrigger(clock_time(9, 30),
                                                  recurrence="weekdays"))
            disabled = scheduler.schedule_create(
                "kitchen_light", "power", True, TimeTrigger(clock_time(12, 0)))
            scheduler.schedule_change(disabled.schedule_id, enabled=False)
            scheduler.schedule_create(
                "living_room_light", "power", False,
                ConditionTrigger("dishwasher", "power", "eq", True))
            return home, scheduler

        home, scheduler = build()
        fired = []
        for step in range(1, 97):
            fired.extend(scheduler.tick(t0 + timedelta(minutes=15 * step)))
        by_schedule = {}
        for action in fired:
            by_schedule.setdefault(action.schedule_id, []).append(action)
        # three enabled time triggers, one instant each; the condition rule
        # fires exactly once on the 23:00 dishwasher edge
        assert sorted(by_schedule) == ["sched-1", "sched-2", "sched-3", "sched-5"]
        assert all(len(actions) == 1 for actions in by_schedule.values())
        assert by_schedule["sched-5"][0].device_id == "living_room_light"

        # replay from persisted documents matches the original trace
        home2, original = build()
        docs = original.to_documents()
        home3 = build_home(synthetic_profiles()["TX-01"], sim_clock=t0)
        replayed = Scheduler(home3, now=t0)
        replayed.load_documents(docs)
        for step in range(1, 97):
            now = t0 + timedelta(minutes=15 * step)
            a = original.tick(now)
            b = replayed.tick(now)
            assert [f.to_dict() for f in a] == [f.to_dict() for f in b]


# -- 7. agent determinism -----------------------------------------------------


def test_agent_determinism(tmp_path):
    with criterion("3 repeated 120-query battery runs: bitwise-identical "
                   "machine logs and identical aggregate report, < 60 s"):
        started = time.monotonic()
        blobs = []
        reports = []
        for repeat in range(3):
            out_dir = tmp_path / f"run-{repeat}"
            result = run_battery("TX-01", out_dir=out_dir)
            blobs.append((out_dir / "TX-01-results.jsonl").read_bytes())
            log_bytes = b"".join(
                path.read_bytes()
                for path in sorted((out_dir / "logs").iterdir())
            )
            blobs[-1] += log_bytes
            reports.append(aggregate_report(result.cards).to_dict())
        assert blobs[0] == blobs[1] == blobs[2]
        assert reports[0] == reports[1] == reports[2]
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"took {elapsed:.1f} s"


# -- 8. benchmark arithmetic --------------------------------------------------


def test_benchmark_arithmetic():
    with criterion("hand-built score cards aggregate to exact means; token "
                   "cost $0.0776425 within $0.0002 of $0.0777; 600 s trim "
                   "excludes exactly the intended rows"):
        def card(query_id, building, latency, response, tokens):
            return ScoreCard(
                building_id=building, query_id=query_id,
                primary="Cost Management", secondary="Cost Information",
                latency_s=latency, classification_executed=True,
                primary_correct=True, secondary_correct=False,
                tool_call_count=2, tool_counts={"analysis.run": 2},
                tool_call_score=1.0, response_score=response,
                prompt_tokens=tokens, completion_tokens=0,
                total_tokens=tokens, cost_dollars=tokens * 2.5e-6)

        cards = [
            card("q001", "TX-01", 2.0, 1.0, 1000),
            card("q002", "TX-01", 6.0, 0.5, 3000),
            card("q003", "NY-01", 4.0, 0.0, 2000),
            card("q004", "NY-01", 601.0, 1.0, 2000),
        ]
        report = aggregate_report(cards)
        assert report.per_building["TX-01"]["response_score"] == 0.75
        assert report.per_building["TX-01"]["latency_s"] == 4.0
        assert report.per_building["TX-01"]["total_tokens"] == 2000.0
        assert report.per_building["NY-01"]["response_score"] == 0.5
        assert report.overall["response_score"] == 0.625
        assert report.overall["secondary_correct"] == 0.0
        assert report.overall["classification_executed"] == 1.0

        # the 601 s row (and only it) leaves the trimmed latency means
        assert report.outliers_removed == 1
        assert report.overall["latency_s"] == pytest.approx(613.0 / 4)
        assert report.overall["latency_trimmed_s"] == 4.0
        assert report.per_building["NY-01"]["latency_trimmed_s"] == 4.0
        assert report.per_building["NY-01"]["latency_s"] == 302.5

        cost = token_cost_dollars(28_937, 530)
        assert cost == pytest.approx(0.0776425, abs=1e-12)
        assert abs(cost - 0.0777) < 0.0002


# -- 9. rubric scoring on adversarial fixtures --------------------------------


def test_rubric_adversarial_fixtures(tmp_path):
    with criterion("six adversarial fixtures receive exactly the prescribed "
                   "tool/response scores"):
        env = build_environment("TX-01", data_dir=tmp_path)
        cases = adversarial_cases(env)
        assert [c.name for c in cases] == [
            "wrong_tool", "subset_of_tools", "wrong_numeric_answer",
            "off_tolerance_answer", "missing_classification",
            "clarification_response",
        ]
        for case in cases:
            provider = ScriptedProvider({case.query.text: case.script})
            run = run_query(case.query.text, env, provider,
                            clock=SimulatedClock(), run_id=f"adv-{case.name}")
            assert run.state == "end", case.name
            scored = score_run(run.to_dict(), case.query)
            assert scored.tool_call_score == case.expected_tool_score, case.name
            assert scored.response_score == case.expected_response_score, case.name
            assert scored.classification_executed is case.expected_classified, \
                case.name


# -- 10. four-building generalizability pipeline ------------------------------


def test_four_building_pipeline(tmp_path):
    with criterion("four-building ANOVA: p = 1 for construction-identical "
                   "metrics; injected classification-rate shift significant "
                   "at alpha = 0.05 and isolated to the shifted building"):
        drop = classification_drop_ids(19)  # 19/120 ~ the modeled 0.16 shift
        results = []
        for building_id in BUILDING_IDS:
            results.append(run_battery(
                building_id,
                out_dir=tmp_path / building_id,
                drop_classification=drop if building_id == "NY-02" else (),
            ))
        anovas = four_building_anova(results)

        # scripted replay makes these identical across buildings by
        # construction: zero between-group variance, so p is exactly 1
        for metric in ("latency_s", "tool_call_score", "response_score"):
            assert anovas[metric].f_value == 0.0, metric
            assert anovas[metric].p_value == 1.0, metric

        shifted = anovas["classification_executed"]
        assert shifted.p_value < 0.05
        rates = {r.building_id: sum(c.classification_executed for c in r.cards)
                 / len(r.cards) for r in results}
        assert rates["TX-01"] == pytest.approx(0.875)
        assert rates["NY-02"] == pytest.approx(0.875 - 19 / 120)
        significant = {frozenset((p.group_a, p.group_b))
                       for p in shifted.tukey if p.significant}
        assert significant == {frozenset(("NY-02", other))
                               for other in ("TX-01", "TX-02", "NY-01")}


# -- 11. machine logs stay loadable -------------------------------------------


def test_archived_logs_rescore(tmp_path):
    with criterion("archived machine logs re-score to the original cards"):
        out_dir = tmp_path / "out"
        result = run_battery("TX-01", out_dir=out_dir)
        env = build_environment("TX-01", data_dir=tmp_path / "env")
        from bems.battery import build_battery

        queries, _ = build_battery(env)
        rescored = bench.rescore(out_dir / "TX-01-results.jsonl", queries)
        assert [c.to_dict() for c in rescored] == \
               [c.to_dict() for c in result.cards]
