"""The brain: intent classification, tool dispatch, and the run state
machine over a pluggable language-model provider.

The action space is closed: the provider can only invoke registered
tools, arguments are validated against each tool's declared schema
before dispatch, and there is no free-form command execution path. The
general-purpose code interpreter of typical assistant stacks is replaced
by a typed analysis-tool catalogue backed by the deterministic
analytics/tariff oracles.
"""

from __future__ import annotations

import json
import re
import time as _time
from dataclasses import dataclass, field
from datetime import datetime, time
from pathlib import Path
from typing import Any, Callable, Optional

from . import analytics, tariff
from .automation import (
    AutomationError,
    ConditionTrigger,
    Scheduler,
    TimeTrigger,
)
from .core import (
    BuildingProfile,
    EnergySeries,
    IntentLabel,
    RateSchedule,
    TokenUsage,
    taxonomy_check,
)
from .homesim import HomeError, HomeState
from .memstore import MemoryError_, MemoryStore
from .provider import (
    ANSWER,
    ChatRequest,
    ChatResponse,
    Provider,
    ProviderError,
    ToolCallRequest,
)

MAX_TURNS = 24

QUEUED = "queued"
IN_PROGRESS = "in_progress"
REQUIRES_ACTION = "requires_action"
END = "end"


class AgentError(Exception):
    pass


class SimulatedClock:
    """Deterministic clock for scripted runs; each reading advances by a
    fixed step so archived logs are bitwise stable."""

    def __init__(self, start: float = 0.0, step: float = 0.001):
        self._now = start
        self._step = step

    def __call__(self) -> float:
        value = self._now
        self._now += self._step
        return value


@dataclass
class AgentEnvironment:
    """Everything a run may touch: the home, its stores, and the data."""

    profile: BuildingProfile
    home: HomeState
    scheduler: Scheduler
    memory: MemoryStore
    series: EnergySeries
    rates: RateSchedule
    pricing_path: Optional[Path] = None


@dataclass
class ToolSpec:
    name: str
    description: str
    parameters: dict[str, dict[str, Any]]  # name -> {type, required}
    handler: Callable[..., dict[str, Any]]

    def schema(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "parameters": self.parameters,
        }

    def validate(self, arguments: dict[str, Any]) -> Optional[str]:
        for pname, meta in self.parameters.items():
            if meta.get("required") and pname not in arguments:
                return f"missing required argument {pname!r}"
        for pname in arguments:
            if pname not in self.parameters:
                return f"unknown argument {pname!r}"
        return None


@dataclass
class ToolCall:
    tool: str
    arguments: dict[str, Any]
    result: dict[str, Any]
    started: float
    ended: float

    def to_dict(self):
        return {
            "tool": self.tool,
            "arguments": self.arguments,
            "result": self.result,
            "started": self.started,
            "ended": self.ended,
        }


@dataclass
class AgentRun:
    run_id: str
    query: str
    state: str = QUEUED
    classification: Optional[IntentLabel] = None
    classification_error: Optional[str] = None
    tool_calls: list[ToolCall] = field(default_factory=list)
    response: str = ""
    response_type: str = ANSWER
    artifacts: list[dict[str, Any]] = field(default_factory=list)
    audit_entries: list[dict[str, Any]] = field(default_factory=list)
    token_usage: TokenUsage = field(default_factory=lambda: TokenUsage(0, 0))
    wall_time: float = 0.0
    states: list[str] = field(default_factory=lambda: [QUEUED])

    def _transition(self, state: str) -> None:
        allowed = {
            QUEUED: {IN_PROGRESS},
            IN_PROGRESS: {REQUIRES_ACTION, END},
            REQUIRES_ACTION: {IN_PROGRESS},
            END: set(),
        }
        if state not in allowed[self.state]:
            raise AgentError(f"illegal transition {self.state} -> {state}")
        self.state = state
        self.states.append(state)

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "query": self.query,
            "state": self.state,
            "classification": self.classification.to_dict() if self.classification else None,
            "classification_error": self.classification_error,
            "tool_calls": [c.to_dict() for c in self.tool_calls],
            "response": self.response,
            "response_type": self.response_type,
            "artifacts": self.artifacts,
            "audit_entries": self.audit_entries,
            "token_usage": self.token_usage.to_dict(),
            "wall_time": self.wall_time,
        }

    def to_markdown(self) -> str:
        lines = [
            f"# Interaction log: {self.run_id}",
            "",
            f"**Query:** {self.query}",
            "",
        ]
        if self.classification:
            lines.append(
                f"**Intent:** {self.classification.primary} / {self.classification.secondary}"
            )
        else:
            lines.append("**Intent:** (classification not executed)")
        lines += ["", "## Function calls", ""]
        if not self.tool_calls:
            lines.append("(none)")
        for call in self.tool_calls:
            lines.append(f"- `{call.tool}` args `{json.dumps(call.arguments, default=str)}`")
            lines.append(f"  result `{json.dumps(call.result, default=str)[:500]}`")
        lines += [
            "",
            f"**Execution time:** {self.wall_time:.3f} s",
            f"**Token usage:** prompt {self.token_usage.prompt_tokens}, "
            f"completion {self.token_usage.completion_tokens}, total {self.token_usage.total}",
            "",
            "## Response",
            "",
            self.response,
            "",
        ]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# analysis tool


def analysis_tool(env: AgentEnvironment, request: dict[str, Any]) -> dict[str, Any]:
    """Typed analysis catalogue dispatching to the analytics/tariff oracles.

    Visualization-capable kinds attach a chart-spec document (bar, line,
    pie, or hour-by-day heatmap) that the UI/CLI renderers consume.
    """
    kind = request.get("kind")
    series = env.series
    chart = request.get("chart")
    if kind == "aggregate":
        view = analytics.aggregate(
            series, request.get("granularity", "monthly"),
            request.get("scope", "total-consumption"),
        )
        result: dict[str, Any] = {
            "kind": kind,
            "granularity": view.granularity,
            "scope": view.scope,
            "values": view.values,
            "partial_trailing": view.partial_trailing,
            "unit": "kWh",
        }
        if isinstance(view.values, list):
            result["total_kwh"] = sum(view.values)
        if chart in ("bar", "line") and isinstance(view.values, list):
            result["chart"] = {
                "type": chart,
                "title": f"{view.scope} energy ({view.granularity})",
                "x": list(range(len(view.values))),
                "y": view.values,
                "unit": "kWh",
            }
        return result
    if kind == "peak_hours":
        ranked = analytics.peak_hours(
            series, request.get("scope", "total-consumption"), request.get("k", 3)
        )
        return {
            "kind": kind,
            "hours": [h for h, _ in ranked],
            "mean_kwh": [m for _, m in ranked],
        }
    if kind == "device_breakdown":
        shares = analytics.device_breakdown(series)
        result = {"kind": kind, "shares": shares,
                  "top_channel": max(shares, key=shares.get)}
        if chart == "pie":
            result["chart"] = {
                "type": "pie",
                "title": "Energy use by device",
                "labels": list(shares),
                "values": [shares[k] for k in shares],
            }
        return result
    if kind == "forecast":
        fr = analytics.forecast(
            series,
            request["channel"],
            request.get("method", "moving_average"),
            request.get("horizon", 96),
        )
        result = {
            "kind": kind,
            "method": fr.method,
            "horizon": fr.horizon,
            "total_kwh": sum(fr.predicted),
            "fit_diagnostics": fr.fit_diagnostics,
        }
        if chart == "line":
            result["chart"] = {
                "type": "line",
                "title": f"Forecast for {request['channel']}",
                "x": list(range(fr.horizon)),
                "y": fr.predicted,
                "unit": "kWh",
            }
        return result
    if kind == "cost":
        breakdown = tariff.cost(series, env.rates)
        result = {"kind": kind, **breakdown.to_dict()}
        per_channel = breakdown.to_dict()["per_channel"]
        result["top_channel"] = max(per_channel, key=per_channel.get) if per_channel else None
        if chart in ("bar", "pie"):
            if request.get("by") == "band":
                slices = breakdown.to_dict()["per_band"]
                title = "Energy cost by tariff band"
            else:
                slices = per_channel
                title = "Energy cost by device"
            result["chart"] = {
                "type": chart,
                "title": title,
                "labels": list(slices),
                "values": [slices[k] for k in slices],
                "unit": "$",
            }
        return result
    if kind == "cost_forecast":
        cf = tariff.cost_forecast(
            series, env.rates, request.get("method", "moving_average"),
            request.get("horizon", 96),
        )
        return {
            "kind": kind,
            "method": cf.method,
            "horizon": cf.horizon,
            "predicted_kwh": cf.predicted_kwh,
            "predicted_cost": cf.predicted_cost_micro / 1e6,
        }
    if kind == "self_consumption":
        return {"kind": kind, **analytics.self_consumption(series)}
    if kind == "anomalies":
        flagged, warning = analytics.detect_anomalies(
            series, request["channel"], request.get("z_threshold", 4.0)
        )
        return {
            "kind": kind,
            "anomalies": [{"index": i, "z": z} for i, z in flagged],
            "warning": warning,
        }
    if kind == "hourly_heatmap":
        energy = analytics.aggregate(series, "hourly", request.get("scope", "total-consumption"))
        assert isinstance(energy.values, list)
        days: list[list[float]] = []
        for i in range(0, len(energy.values) - 23, 24):
            days.append(energy.values[i : i + 24])
        return {
            "kind": kind,
            "chart": {
                "type": "heatmap",
                "title": "Hourly energy by day",
                "rows": days,
                "x_labels": [str(h) for h in range(24)],
                "unit": "kWh",
            },
        }
    raise AgentError(f"unknown analysis kind {kind!r}")


def pricing_search(env: AgentEnvironment) -> dict[str, Any]:
    """Parse the energy pricing document into a rate extract."""
    if env.pricing_path is None:
        raise tariff.TariffError("pricing document missing")
    rates = tariff.load_pricing_document(env.pricing_path)
    return {
        "off_peak_windows": [w.as_text() for w in rates.off_peak_windows],
        "peak_windows": [w.as_text() for w in rates.peak_windows],
        "off_peak_rate": rates.off_peak_rate,
        "peak_rate": rates.peak_rate,
        "export_credit": rates.export_credit,
        "ev_discount_window": rates.ev_discount_window.as_text(),
        "ev_discounted_rate": rates.ev_discounted_rate,
    }


# ---------------------------------------------------------------------------
# tool registry


def _device_to_dict(device) -> dict[str, Any]:
    return {
        "device_id": device.device_id,
        "name": device.name,
        "room": device.room,
        "online": device.online,
        "attributes": dict(device.attributes),
        "attribute_specs": {a: s.to_dict() for a, s in device.attribute_specs.items()},
        "tags": list(device.tags),
    }


def _trigger_from_args(args: dict[str, Any]):
    if "time" in args and args["time"] is not None:
        return TimeTrigger(at=time.fromisoformat(args["time"]),
                           recurrence=args.get("recurrence", "daily"))
    cond = args.get("condition")
    if cond:
        return ConditionTrigger(
            device_id=cond["device_id"], attribute=cond["attribute"],
            op=cond.get("op", "eq"), value=cond["value"],
        )
    raise AutomationError("malformed trigger: need a time or a condition")


def build_registry(env: AgentEnvironment) -> dict[str, ToolSpec]:
    home = env.home
    scheduler = env.scheduler
    memory = env.memory

    def meters_query(name: str = "all") -> dict[str, Any]:
        snaps = home.meters_query(name)
        return {"meters": [s.to_dict() | {"meter_id": s.meter_id} for s in snaps]}

    def devices_sync() -> dict[str, Any]:
        return {"devices": [_device_to_dict(d) for d in home.devices_sync()]}

    def devices_query(device_id: str) -> dict[str, Any]:
        return {"device": _device_to_dict(home.devices_query(device_id))}

    def devices_execute(device_id: str, attribute: str, value: Any) -> dict[str, Any]:
        state = home.devices_execute(device_id, attribute, value)
        return {"device": _device_to_dict(state), "applied": True}

    def schedule_create(device_id: str, attribute: str, value: Any,
                        time: Optional[str] = None, recurrence: str = "daily",
                        condition: Optional[dict] = None) -> dict[str, Any]:
        trigger = _trigger_from_args({"time": time, "recurrence": recurrence,
                                      "condition": condition})
        entry = scheduler.schedule_create(device_id, attribute, value, trigger)
        return {"entry": entry.to_dict()}

    def schedule_sync(device_id: Optional[str] = None) -> dict[str, Any]:
        return {"entries": [e.to_dict() for e in scheduler.schedule_sync(device_id)]}

    def schedule_change(schedule_id: str, delete: bool = False,
                        enabled: Optional[bool] = None,
                        time: Optional[str] = None,
                        value: Any = None) -> dict[str, Any]:
        trigger = None
        if time is not None:
            trigger = TimeTrigger(at=__import__("datetime").time.fromisoformat(time))
        entry = scheduler.schedule_change(
            schedule_id, delete=delete, enabled=enabled, trigger=trigger, value=value
        )
        return {"deleted": delete, "entry": entry.to_dict() if entry else None}

    def memory_create(utterance: Optional[str] = None,
                      entry: Optional[dict] = None) -> dict[str, Any]:
        record = memory.memory_create(utterance=utterance, entry=entry)
        return {"entry": record.to_dict()}

    def memory_sync(device: Optional[str] = None,
                    text: Optional[str] = None) -> dict[str, Any]:
        return {"entries": [e.to_dict() for e in memory.memory_sync(device=device, text=text)]}

    def memory_change(memory_id: str, delete: bool = False,
                      updates: Optional[dict] = None) -> dict[str, Any]:
        entry = memory.memory_change(memory_id, delete=delete, updates=updates)
        return {"deleted": delete, "entry": entry.to_dict() if entry else None}

    specs = [
        ToolSpec("analysis.run", "Run a typed energy/cost analysis",
                 {"kind": {"type": "string", "required": True},
                  "granularity": {"type": "string"}, "scope": {"type": "string"},
                  "channel": {"type": "string"}, "method": {"type": "string"},
                  "horizon": {"type": "integer"}, "k": {"type": "integer"},
                  "z_threshold": {"type": "number"}, "chart": {"type": "string"},
                  "by": {"type": "string"}},
                 lambda **kw: analysis_tool(env, kw)),
        ToolSpec("pricing.search", "Read the energy pricing document",
                 {}, lambda: pricing_search(env)),
        ToolSpec("meters.query", "Read one smart meter or all of them",
                 {"name": {"type": "string"}}, meters_query),
        ToolSpec("devices.sync", "Full device inventory with attribute specs",
                 {}, devices_sync),
        ToolSpec("devices.query", "Current state of one device",
                 {"device_id": {"type": "string", "required": True}}, devices_query),
        ToolSpec("devices.execute", "Issue a validated device command",
                 {"device_id": {"type": "string", "required": True},
                  "attribute": {"type": "string", "required": True},
                  "value": {"type": "any", "required": True}}, devices_execute),
        ToolSpec("schedule.create", "Create a schedule or automation rule",
                 {"device_id": {"type": "string", "required": True},
                  "attribute": {"type": "string", "required": True},
                  "value": {"type": "any", "required": True},
                  "time": {"type": "string"}, "recurrence": {"type": "string"},
                  "condition": {"type": "object"}}, schedule_create),
        ToolSpec("schedule.sync", "List schedules",
                 {"device_id": {"type": "string"}}, schedule_sync),
        ToolSpec("schedule.change", "Modify, disable, or delete a schedule",
                 {"schedule_id": {"type": "string", "required": True},
                  "delete": {"type": "boolean"}, "enabled": {"type": "boolean"},
                  "time": {"type": "string"}, "value": {"type": "any"}},
                 schedule_change),
        ToolSpec("memory.create", "Store a long-term memory entry",
                 {"utterance": {"type": "string"}, "entry": {"type": "object"}},
                 memory_create),
        ToolSpec("memory.sync", "Retrieve memory entries",
                 {"device": {"type": "string"}, "text": {"type": "string"}},
                 memory_sync),
        ToolSpec("memory.change", "Update or delete a memory entry",
                 {"memory_id": {"type": "string", "required": True},
                  "delete": {"type": "boolean"}, "updates": {"type": "object"}},
                 memory_change),
    ]
    return {spec.name: spec for spec in specs}


# ---------------------------------------------------------------------------
# classification


def classify_intent(query: str, provider: Provider) -> tuple[Optional[IntentLabel], Optional[str]]:
    """Single-turn classification; invalid output becomes a structured
    failure record instead of being silently coerced."""
    request = ChatRequest(
        messages=[
            {"role": "system", "content": "Classify the query into one primary and one secondary intent category."},
            {"role": "user", "content": query},
        ]
    )
    try:
        response = provider.complete(request)
    except ProviderError as exc:
        return None, f"provider failure: {exc}"
    if not response.classification:
        return None, "no classification returned"
    label = IntentLabel(
        primary=response.classification.get("primary", ""),
        secondary=response.classification.get("secondary", ""),
    )
    if not taxonomy_check(label):
        return None, f"invalid label {label.primary!r}/{label.secondary!r}"
    return label, None


# Documented priority order for the keyword classifier; the first group
# whose rule matches wins, which resolves multi-category collisions.
def rule_classifier(query: str) -> IntentLabel:
    """Deterministic keyword/pattern classifier over the intent taxonomy.

    Offline baseline for the same 6/24 taxonomy; falls back to
    (General Information & Support, FAQs and General Queries).
    """
    q = query.lower().strip()

    def has(*words: str) -> bool:
        return any(w in q for w in words)

    # troubleshooting / guidance first: they quote device words freely
    if has("doesn't work", "does not work", "not working", "broken", "help me check",
           "troubleshoot"):
        return IntentLabel("General Information & Support", "Troubleshooting and Technical Support")
    if has("guide me", "tutorial", "walk me through", "how do i use"):
        return IntentLabel("General Information & Support", "System Guidance and Tutorials")

    # memory
    if has("remember", "don't forget", "do not forget", "note that"):
        return IntentLabel("Memory", "Memory Creation")
    if has("forget", "remove my preference", "delete my preference"):
        return IntentLabel("Memory", "Memory Management")
    if has("usually", "do i prefer", "my preference", "what device do i"):
        return IntentLabel("Memory", "Memory Information")

    # scheduling & automation
    if q.startswith("if ") or has("keep the", "when no one", "whenever"):
        return IntentLabel("Device Scheduling & Automation", "Conditional Automation")
    if has("schedule"):
        if has("remove", "delete", "cancel", "change", "disable"):
            return IntentLabel("Device Scheduling & Automation", "Schedule Management")
        if has("have i", "did i", "what schedule", "list", "show"):
            return IntentLabel("Device Scheduling & Automation", "Schedule Information")
        return IntentLabel("Device Scheduling & Automation", "General Scheduling")
    if re.search(r"\b(at|by)\s+\d", q) or has("in the morning", "tonight", "during off-peak",
                                              "every day at", "each morning"):
        if has("turn", "set", "start", "run", "charge"):
            return IntentLabel("Device Scheduling & Automation", "General Scheduling")

    # cost
    if has("cost", "spend", "spent", "money", "bill", "price", "$", "dollar"):
        if has("plot", "chart", "graph", "visualiz", "show me"):
            return IntentLabel("Cost Management", "Cost Visualization")
        if has("next month", "will i", "estimate", "predict", "forecast"):
            return IntentLabel("Cost Management", "Cost Prediction")
        if has("suggestion", "save money", "tips", "advice", "recommend"):
            return IntentLabel("Cost Management", "Cost Suggestions")
        return IntentLabel("Cost Management", "Cost Information")

    # device status & control
    if has("meter reading", "meter value", "meter status") or (has("meter") and has("reading", "read")):
        return IntentLabel("Device Status & Control", "Meter Status Check")
    if q.startswith(("is ", "are ")) or has("currently on", "currently off", "status of"):
        return IntentLabel("Device Status & Control", "Device Status Check")
    if has("all ", "every ") and has("turn", "switch", "set"):
        return IntentLabel("Device Status & Control", "Group Device Management")
    if has("good for", "comfortable", "suitable for", "appropriate", "level for"):
        return IntentLabel("Device Status & Control", "Device Custom Configurations")
    if has("turn on", "turn off", "switch on", "switch off", "set the", "dim", "set my"):
        return IntentLabel("Device Status & Control", "Device General Operation")

    # energy
    if has("energy", "usage", "consumption", "kwh", "power use", "generation"):
        if has("predict", "next month", "forecast", "future"):
            return IntentLabel("Energy Consumption & Analysis", "Energy Prediction")
        if has("reduce", "optimiz", "lower my", "cut down", "peak hours"):
            return IntentLabel("Energy Consumption & Analysis", "Energy Optimization")
        if has("suggestion", "tips", "advice", "recommend"):
            return IntentLabel("Energy Consumption & Analysis", "Energy Suggestions")
        if has("chart", "plot", "graph", "pie", "show me", "visualiz", "heatmap"):
            return IntentLabel("Energy Consumption & Analysis", "Energy Visualization")
        return IntentLabel("Energy Consumption & Analysis", "Historical Energy Data")

    return IntentLabel("General Information & Support", "FAQs and General Queries")


# ---------------------------------------------------------------------------
# the run state machine


def _system_instructions(env: AgentEnvironment) -> str:
    profile = env.profile
    return (
        "You are an AI agent for a smart building energy management system. "
        "You have access to the building's energy history, live meters, smart "
        "devices, schedules, and long-term memory through registered tools.\n"
        f"Building: {profile.description} Occupants: {profile.occupants}.\n"
        f"Sensors: {', '.join(profile.sensors)}.\n"
        f"Devices: {', '.join(profile.devices)}.\n"
        "First classify the query into one of 6 primary and 24 secondary "
        "intent categories, then plan step by step and call tools as needed."
    )


def run_query(
    query: str,
    env: AgentEnvironment,
    provider: Provider,
    clock: Optional[Callable[[], float]] = None,
    run_id: Optional[str] = None,
) -> AgentRun:
    """Execute one query through the queued -> in_progress ->
    (requires_action <-> in_progress)* -> end state machine.

    Tool errors are surfaced to the provider rather than aborting the run
    (the offline-device advisory flow depends on this); provider failures
    end the run with a structured error response.
    """
    clock = clock or _time.monotonic
    registry = build_registry(env)
    run = AgentRun(run_id=run_id or f"run-{id(env.home)}-{len(env.home.audit_log)}",
                   query=query)
    audit_before = len(env.home.audit_log)

    messages: list[dict[str, Any]] = [
        {"role": "system", "content": _system_instructions(env)},
        {"role": "user", "content": query},
    ]
    schemas = [spec.schema() for spec in registry.values()]

    started = clock()
    run._transition(IN_PROGRESS)
    turns = 0
    try:
        while True:
            turns += 1
            if turns > MAX_TURNS:
                raise AgentError("provider exceeded the turn budget")
            response: ChatResponse = provider.complete(
                ChatRequest(messages=messages, tools=schemas)
            )
            run.token_usage = run.token_usage.combine(response.usage)
            if response.classification and run.classification is None:
                label = IntentLabel(
                    primary=response.classification.get("primary", ""),
                    secondary=response.classification.get("secondary", ""),
                )
                if taxonomy_check(label):
                    run.classification = label
                else:
                    run.classification_error = (
                        f"invalid label {label.primary!r}/{label.secondary!r}"
                    )
            if response.is_final:
                run.response = response.content or ""
                run.response_type = response.response_type
                break
            run._transition(REQUIRES_ACTION)
            messages.append({
                "role": "assistant",
                "tool_calls": [c.to_dict() for c in response.tool_calls],
            })
            for call in response.tool_calls:
                result = _dispatch(registry, call, run, clock)
                messages.append({
                    "role": "tool",
                    "call_id": call.call_id,
                    "content": json.dumps(result, default=str),
                })
            run._transition(IN_PROGRESS)
    except ProviderError as exc:
        run.response = f"Provider failure: {exc}"
        run.response_type = "error"
    except AgentError as exc:
        run.response = f"Agent error: {exc}"
        run.response_type = "error"
    run._transition(END)
    run.wall_time = clock() - started
    run.audit_entries = [
        e.to_dict() for e in env.home.audit_log[audit_before:]
    ]
    return run


def _dispatch(registry, call: ToolCallRequest, run: AgentRun, clock) -> dict[str, Any]:
    started = clock()
    spec = registry.get(call.tool)
    if spec is None:
        result: dict[str, Any] = {"error": f"unknown tool {call.tool!r}"}
    else:
        problem = spec.validate(call.arguments)
        if problem:
            result = {"error": f"invalid arguments: {problem}"}
        else:
            try:
                result = spec.handler(**call.arguments)
            except (HomeError, AutomationError, MemoryError_, AgentError,
                    analytics.AnalyticsError, tariff.TariffError) as exc:
                result = {"error": str(exc)}
    ended = clock()
    run.tool_calls.append(
        ToolCall(tool=call.tool, arguments=call.arguments, result=result,
                 started=started, ended=ended)
    )
    if isinstance(result, dict) and "chart" in result:
        run.artifacts.append(result["chart"])
    return result
