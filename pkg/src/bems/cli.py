"""Command-line entry points and the HTTP service API.

One process hosts the simulator, the agent and the API; isolation is per
building id. Exit codes: 0 success, 1 validation failure, 2 provider
failure. The provider credential is only ever read from the environment
and never appears in responses or logs.
"""

from __future__ import annotations

import json
import os
import queue
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import click

from . import agent as agent_mod
from . import analytics, battery, bench, ingestion, tariff
from .agent import AgentEnvironment, SimulatedClock, run_query
from .automation import AutomationError, entry_from_dict, trigger_from_dict
from .core import IntentLabel
from .homesim import HomeError
from .memstore import MemoryError_
from .provider import (
    HttpProvider,
    Provider,
    ProviderError,
    QueryScript,
    ScriptTurn,
    ScriptedProvider,
)

CREDENTIAL_ENV = "BEMS_PROVIDER_CREDENTIAL"


@dataclass
class ServiceConfig:
    data_dir: Path = field(default_factory=lambda: Path("bems-data"))
    provider_kind: str = "scripted"  # scripted | live
    provider_endpoint: Optional[str] = None
    fixture_path: Optional[Path] = None
    listen_host: str = "127.0.0.1"
    listen_port: int = 8750
    default_building: str = "TX-01"
    outlier_threshold_s: float = bench.OUTLIER_THRESHOLD_S
    seed: int = 7

    @classmethod
    def load(cls, path: Optional[Path]) -> "ServiceConfig":
        config = cls()
        if path is not None:
            raw = json.loads(Path(path).read_text())
            for key in ("provider_kind", "provider_endpoint", "listen_host",
                        "default_building"):
                if key in raw:
                    setattr(config, key, raw[key])
            if "data_dir" in raw:
                config.data_dir = Path(raw["data_dir"])
            if "fixture_path" in raw:
                config.fixture_path = Path(raw["fixture_path"])
            if "listen_port" in raw:
                config.listen_port = int(raw["listen_port"])
            if "outlier_threshold_s" in raw:
                config.outlier_threshold_s = float(raw["outlier_threshold_s"])
            if "seed" in raw:
                config.seed = int(raw["seed"])
        config.validate()
        return config

    def validate(self) -> None:
        if self.provider_kind not in ("scripted", "live"):
            raise ValueError(f"unknown provider kind {self.provider_kind!r}")
        if self.provider_kind == "live":
            if not self.provider_endpoint:
                raise ValueError("live provider requires provider_endpoint")
            if not os.environ.get(CREDENTIAL_ENV):
                raise ValueError(
                    f"live provider requires the {CREDENTIAL_ENV} environment variable"
                )


def fixture_from_document(document: dict[str, Any]) -> dict[str, QueryScript]:
    """Parse an external scripted-provider fixture document.

    Shape: {"query text": {"classification": {"primary", "secondary"}?,
    "turns": [[["tool", {args}], ...], ...], "response_template": str,
    "response_type": str?}}.
    """
    fixture = {}
    for text, raw in document.items():
        classification = None
        if raw.get("classification"):
            classification = IntentLabel(
                primary=raw["classification"]["primary"],
                secondary=raw["classification"]["secondary"],
            )
        turns = [
            ScriptTurn(calls=[(tool, args) for tool, args in turn])
            for turn in raw.get("turns", [])
        ]
        fixture[text] = QueryScript(
            classification=classification,
            turns=turns,
            response_template=raw.get("response_template", ""),
            response_type=raw.get("response_type", "answer"),
        )
    return fixture


def make_provider(config: ServiceConfig, env: AgentEnvironment) -> Provider:
    if config.provider_kind == "live":
        return HttpProvider(
            endpoint=config.provider_endpoint,
            credential=os.environ.get(CREDENTIAL_ENV),
        )
    if config.fixture_path is not None:
        return ScriptedProvider(
            fixture_from_document(json.loads(config.fixture_path.read_text()))
        )
    _, fixture = battery.build_battery(env)
    return ScriptedProvider(fixture)


# -- CLI -----------------------------------------------------------------------


@click.group()
def main() -> None:
    """Smart-building energy agent: ingestion, benchmark, chat, and API."""


@main.command("ingest")
@click.argument("csv_path", type=click.Path(exists=True, path_type=Path))
@click.option("--building-id", required=True)
@click.option("--resample", is_flag=True, help="Downsample finer data to 15 min.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the validated series back out as CSV.")
def cmd_ingest(csv_path: Path, building_id: str, resample: bool, out: Optional[Path]) -> None:
    """Load and validate a historical energy CSV."""
    try:
        series, report = ingestion.load_history(csv_path, building_id, resample=resample)
    except ingestion.IngestionError as exc:
        click.echo(f"ingestion failed: {exc}", err=True)
        sys.exit(1)
    click.echo(
        f"loaded {report.rows_read} rows, {len(report.channels_found)} channels, "
        f"{report.gaps_filled} gaps filled"
    )
    if out is not None:
        ingestion.save_history(series, out)
        click.echo(f"wrote {out}")


@main.command("bench")
@click.option("--buildings", default=",".join(battery.BUILDING_IDS),
              help="Comma-separated building ids.")
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("bench-out"))
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--seed", default=7, type=int)
@click.option("--query", "query_filter", default=None,
              help="Run only the query whose id matches.")
@click.option("--resume", is_flag=True)
@click.option("--rescore", "rescore_only", is_flag=True,
              help="Rebuild the report from archived logs without re-running.")
def cmd_bench(buildings: str, out_dir: Path, config_path: Optional[Path],
              seed: int, query_filter: Optional[str], resume: bool,
              rescore_only: bool) -> None:
    """Run the 120-query battery and write logs and the report."""
    try:
        config = ServiceConfig.load(config_path)
    except ValueError as exc:
        click.echo(f"bad config: {exc}", err=True)
        sys.exit(1)
    ids = [b.strip() for b in buildings.split(",") if b.strip()]
    unknown = [b for b in ids if b not in battery.BUILDING_IDS]
    if unknown:
        click.echo(f"unknown buildings: {unknown}", err=True)
        sys.exit(1)

    all_cards = []
    results = []
    for building_id in ids:
        env = battery.build_environment(building_id, seed)
        queries, fixture = battery.build_battery(env)
        if rescore_only:
            results_path = out_dir / f"{building_id}-results.jsonl"
            if not results_path.exists():
                click.echo(f"no archived results for {building_id}", err=True)
                sys.exit(1)
            cards = bench.rescore(results_path, queries)
            results.append(bench.BatteryResult(building_id, cards, []))
            all_cards.extend(cards)
            continue
        if query_filter is not None:
            queries = [q for q in queries if q.query_id == query_filter]
            if not queries:
                click.echo(f"no query with id {query_filter!r}", err=True)
                sys.exit(1)
            provider = ScriptedProvider(fixture)
            run = run_query(queries[0].text, env, provider,
                            clock=SimulatedClock(),
                            run_id=f"{building_id}-{queries[0].query_id}")
            out_dir.mkdir(parents=True, exist_ok=True)
            log_path = out_dir / f"{run.run_id}.md"
            log_path.write_text(run.to_markdown())
            click.echo(f"wrote {log_path}")
            continue
        try:
            provider = (make_provider(config, env)
                        if config.provider_kind == "live" else None)
            result = bench.run_battery(
                building_id, out_dir=out_dir, seed=seed,
                provider=provider, env=env, resume=resume,
            )
        except ProviderError as exc:
            click.echo(f"provider failure (partial results kept): {exc}", err=True)
            sys.exit(2)
        results.append(result)
        all_cards.extend(result.cards)
        click.echo(f"{building_id}: {len(result.cards)} rows")

    if query_filter is not None:
        return
    report = bench.aggregate_report(all_cards, config.outlier_threshold_s)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.md").write_text(report.to_markdown())
    (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    if len(results) >= 2:
        anovas = bench.four_building_anova(results)
        doc = {
            metric: {"F": r.f_value, "p": r.p_value}
            for metric, r in anovas.items()
        }
        (out_dir / "anova.json").write_text(json.dumps(doc, indent=2))
    click.echo(f"report written to {out_dir}")


@main.command("chat")
@click.option("--building", default="TX-01")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--artifact-dir", type=click.Path(path_type=Path),
              default=Path("chat-artifacts"))
def cmd_chat(building: str, config_path: Optional[Path], artifact_dir: Path) -> None:
    """Interactive chat session against one simulated building."""
    try:
        config = ServiceConfig.load(config_path)
        if building not in battery.BUILDING_IDS:
            raise ValueError(f"unknown building {building!r}")
    except ValueError as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    env = battery.build_environment(building, config.seed)
    provider = make_provider(config, env)
    click.echo(f"chatting with {building}; type 'exit' to quit")
    counter = 0
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line.lower() in ("exit", "quit"):
            break
        counter += 1
        run = run_query(line, env, provider, run_id=f"chat-{counter}")
        click.echo(run.response)
        if run.response_type == "error" and "Provider failure" in run.response:
            continue  # surfaced per turn, session stays up
        for i, artifact in enumerate(run.artifacts):
            artifact_dir.mkdir(parents=True, exist_ok=True)
            path = artifact_dir / f"{run.run_id}-chart-{i}.json"
            path.write_text(json.dumps(artifact, indent=2))
            click.echo(f"[chart saved: {path}]")
    click.echo("bye")


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
def cmd_serve(config_path: Optional[Path], host: Optional[str], port: Optional[int]) -> None:
    """Serve the HTTP API (and the web UI bundle if present)."""
    import uvicorn

    try:
        config = ServiceConfig.load(config_path)
    except ValueError as exc:
        click.echo(f"bad config: {exc}", err=True)
        sys.exit(1)
    app = create_app(config)
    uvicorn.run(app, host=host or config.listen_host, port=port or config.listen_port)


# -- HTTP API -------------------------------------------------------------------


class EventBus:
    """Fan-out of state-change and run-progress events to SSE clients."""

    def __init__(self):
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=1000)
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: dict[str, Any]) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            try:
                q.put_nowait(event)
            except queue.Full:
                pass  # slow client: drop rather than block the simulator


def _device_payload(device) -> dict[str, Any]:
    return {
        "device_id": device.device_id,
        "name": device.name,
        "room": device.room,
        "online": device.online,
        "attributes": dict(device.attributes),
        "attribute_specs": {a: s.to_dict() for a, s in device.attribute_specs.items()},
        "tags": list(device.tags),
    }


def create_app(config: Optional[ServiceConfig] = None):
    """Build the FastAPI application hosting simulator + agent + API."""
    import asyncio

    from fastapi import FastAPI, HTTPException
    from fastapi.responses import StreamingResponse
    from fastapi.staticfiles import StaticFiles

    config = config or ServiceConfig()
    app = FastAPI(title="Building energy agent API")
    bus = EventBus()
    envs: dict[str, AgentEnvironment] = {}
    providers: dict[str, Provider] = {}
    chat_locks: dict[str, threading.Lock] = {}
    run_counter = iter(range(1, 10**9))

    def get_env(building_id: Optional[str]) -> tuple[str, AgentEnvironment]:
        building_id = building_id or config.default_building
        if building_id not in battery.BUILDING_IDS:
            raise HTTPException(status_code=404, detail=f"unknown building {building_id!r}")
        if building_id not in envs:
            env = battery.build_environment(building_id, config.seed)
            env.home.subscribe(
                lambda event, b=building_id: bus.publish({"building_id": b, **event})
            )
            envs[building_id] = env
            providers[building_id] = make_provider(config, env)
            chat_locks[building_id] = threading.Lock()
        return building_id, envs[building_id]

    @app.post("/chat")
    def chat(body: dict):
        query = body.get("query")
        if not isinstance(query, str) or not query.strip():
            raise HTTPException(status_code=422, detail="query must be a non-empty string")
        building_id, env = get_env(body.get("building_id"))
        # one chat run in flight per building session
        with chat_locks[building_id]:
            run = run_query(query, env, providers[building_id],
                            run_id=f"{building_id}-api-{next(run_counter)}")
        doc = run.to_dict()
        doc["building_id"] = building_id
        bus.publish({"type": "run", "building_id": building_id,
                     "run_id": run.run_id, "response_type": run.response_type})
        if run.response_type == "error":
            return {"error": {"kind": "provider", "message": run.response}, "run": doc}
        return {"run": doc}

    @app.get("/home")
    def home(building_id: Optional[str] = None):
        bid, env = get_env(building_id)
        return {
            "building_id": bid,
            "meters": [
                m.to_dict() | {"meter_id": m.meter_id}
                for m in env.home.meters_query()
            ],
            "devices": [_device_payload(d) for d in env.home.devices_sync()],
        }

    @app.post("/devices/{device_id}/execute")
    def execute(device_id: str, body: dict, building_id: Optional[str] = None):
        _, env = get_env(building_id)
        if "attribute" not in body or "value" not in body:
            raise HTTPException(status_code=422, detail="attribute and value required")
        try:
            state = env.home.devices_execute(device_id, body["attribute"], body["value"])
        except HomeError as exc:
            status = 404 if "unknown device" in str(exc) else 409
            raise HTTPException(status_code=status, detail=str(exc))
        return {"device": _device_payload(state)}

    @app.get("/schedules")
    def schedules(building_id: Optional[str] = None, device_id: Optional[str] = None):
        _, env = get_env(building_id)
        return {"schedules": [e.to_dict() for e in env.scheduler.schedule_sync(device_id)]}

    @app.post("/schedules")
    def schedule_create(body: dict, building_id: Optional[str] = None):
        _, env = get_env(building_id)
        try:
            trigger = trigger_from_dict(body["trigger"])
            entry = env.scheduler.schedule_create(
                body["device_id"], body["attribute"], body["value"], trigger,
            )
        except (KeyError, AutomationError, HomeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        bus.publish({"type": "schedule", "schedule_id": entry.schedule_id})
        return {"schedule": entry.to_dict()}

    @app.delete("/schedules/{schedule_id}")
    def schedule_delete(schedule_id: str, building_id: Optional[str] = None):
        _, env = get_env(building_id)
        try:
            env.scheduler.schedule_change(schedule_id, delete=True)
        except AutomationError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        bus.publish({"type": "schedule", "schedule_id": schedule_id, "deleted": True})
        return {"deleted": schedule_id}

    @app.get("/memories")
    def memories(building_id: Optional[str] = None, device: Optional[str] = None,
                 text: Optional[str] = None):
        _, env = get_env(building_id)
        return {"memories": [e.to_dict() for e in env.memory.memory_sync(device=device, text=text)]}

    @app.post("/memories")
    def memory_create(body: dict, building_id: Optional[str] = None):
        _, env = get_env(building_id)
        try:
            entry = env.memory.memory_create(
                utterance=body.get("utterance"), entry=body.get("entry"),
            )
        except MemoryError_ as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"memory": entry.to_dict()}

    @app.delete("/memories/{memory_id}")
    def memory_delete(memory_id: str, building_id: Optional[str] = None):
        _, env = get_env(building_id)
        try:
            env.memory.memory_change(memory_id, delete=True)
        except MemoryError_ as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"deleted": memory_id}

    @app.get("/analytics")
    def analytics_endpoint(kind: str, building_id: Optional[str] = None,
                           granularity: str = "monthly",
                           scope: str = "total-consumption",
                           channel: Optional[str] = None,
                           method: str = "moving_average",
                           horizon: int = 96, k: int = 3,
                           chart: Optional[str] = None,
                           by: Optional[str] = None):
        _, env = get_env(building_id)
        request = {"kind": kind, "granularity": granularity, "scope": scope,
                   "method": method, "horizon": horizon, "k": k}
        if channel is not None:
            request["channel"] = channel
        if chart is not None:
            request["chart"] = chart
        if by is not None:
            request["by"] = by
        try:
            return agent_mod.analysis_tool(env, request)
        except (agent_mod.AgentError, analytics.AnalyticsError,
                tariff.TariffError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/bench/report")
    def bench_report():
        report_path = config.data_dir / "report.json"
        if not report_path.exists():
            raise HTTPException(status_code=404, detail="no benchmark report available")
        return json.loads(report_path.read_text())

    @app.get("/events")
    async def events():
        q = bus.subscribe()

        async def stream():
            try:
                while True:
                    try:
                        event = await asyncio.to_thread(q.get, True, 15.0)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    yield f"data: {json.dumps(event)}\n\n"
            finally:
                bus.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    ui_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dist.is_dir():
        app.mount("/", StaticFiles(directory=ui_dist, html=True), name="ui")

    return app


if __name__ == "__main__":
    main()
