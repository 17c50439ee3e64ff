"""Language-model provider boundary.

The wire contract is chat-with-tool-calls: a request carries the message
history and tool schemas; the response is either a batch of tool-call
requests or final text, always with token counts. Any service speaking
this JSON shape plugs in. The scripted provider is the deterministic CI
stand-in: it replays a per-query script and never touches the network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol

from .core import IntentLabel, TokenUsage

ANSWER = "answer"
NEEDS_CLARIFICATION = "needs_clarification"
ERROR = "error"


@dataclass
class ToolCallRequest:
    call_id: str
    tool: str
    arguments: dict[str, Any]

    def to_dict(self):
        return {"call_id": self.call_id, "tool": self.tool, "arguments": self.arguments}


@dataclass
class ChatRequest:
    messages: list[dict[str, Any]]
    tools: list[dict[str, Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self):
        return {"messages": self.messages, "tools": self.tools, "metadata": self.metadata}


@dataclass
class ChatResponse:
    content: Optional[str] = None
    tool_calls: list[ToolCallRequest] = field(default_factory=list)
    classification: Optional[dict[str, str]] = None
    response_type: str = ANSWER
    usage: TokenUsage = field(default_factory=lambda: TokenUsage(0, 0))

    @property
    def is_final(self) -> bool:
        return not self.tool_calls


class ProviderError(Exception):
    pass


class Provider(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


def _approx_tokens(text: str) -> int:
    # deterministic stand-in for a real tokenizer
    return max(1, len(text) // 4)


def _request_tokens(request: ChatRequest) -> int:
    return _approx_tokens(json.dumps(request.messages, sort_keys=True, default=str))


@dataclass
class ScriptTurn:
    """One requires_action step: the tool calls the provider asks for.

    Argument values may be references of the form {"$ref": "t0.path.0.key"}
    resolving into earlier tool results, indexed flat in dispatch order.
    """

    calls: list[tuple[str, dict[str, Any]]]


@dataclass
class QueryScript:
    """Fully deterministic behavior for one benchmark query."""

    classification: Optional[IntentLabel] = None
    turns: list[ScriptTurn] = field(default_factory=list)
    response_template: str = ""
    response_type: str = ANSWER


def resolve_ref(path: str, results: list[Any]) -> Any:
    """Resolve "tN.key.0.key" into the Nth turn's recorded results."""
    parts = path.split(".")
    head = parts[0]
    if not head.startswith("t"):
        raise ProviderError(f"bad reference {path!r}")
    value: Any = results[int(head[1:])]
    for part in parts[1:]:
        if isinstance(value, list):
            value = value[int(part)]
        else:
            value = value[part]
    return value


def _resolve_arguments(arguments: dict[str, Any], results: list[Any]) -> dict[str, Any]:
    resolved = {}
    for key, value in arguments.items():
        if isinstance(value, dict) and "$ref" in value:
            resolved[key] = resolve_ref(value["$ref"], results)
        else:
            resolved[key] = value
    return resolved


class _Formattable(dict):
    """dict wrapper so templates can write {t0[key][0]} via str.format."""


class ScriptedProvider:
    """Replays QueryScripts keyed by query text.

    Position within a script is derived from the message history (the
    number of tool-result messages seen so far), so the provider itself
    is stateless and replay is bitwise reproducible.
    """

    def __init__(self, fixture: dict[str, QueryScript]):
        self.fixture = fixture

    def complete(self, request: ChatRequest) -> ChatResponse:
        query = next(
            (m["content"] for m in request.messages if m["role"] == "user"), None
        )
        if query is None or query not in self.fixture:
            raise ProviderError(f"fixture miss for query {query!r}")
        script = self.fixture[query]

        tool_results: list[Any] = [
            json.loads(m["content"]) for m in request.messages if m["role"] == "tool"
        ]
        # A turn may batch several calls, so the position within the script
        # is found by consuming results turn by turn, not one per result.
        consumed = 0
        turn_index = 0
        for turn in script.turns:
            if consumed + len(turn.calls) > len(tool_results):
                break
            consumed += len(turn.calls)
            turn_index += 1
        if consumed != len(tool_results):
            raise ProviderError(
                f"script desync for query {query!r}: {len(tool_results)} results"
            )
        prompt = _request_tokens(request)

        classification = None
        if turn_index == 0 and script.classification is not None:
            classification = script.classification.to_dict()

        if turn_index < len(script.turns):
            turn = script.turns[turn_index]
            calls = [
                ToolCallRequest(
                    call_id=f"call-{turn_index}-{i}",
                    tool=tool,
                    arguments=_resolve_arguments(args, tool_results),
                )
                for i, (tool, args) in enumerate(turn.calls)
            ]
            completion = _approx_tokens(json.dumps([c.to_dict() for c in calls], default=str))
            return ChatResponse(
                tool_calls=calls,
                classification=classification,
                usage=TokenUsage(prompt, completion),
            )

        namespace = {f"t{i}": _wrap(r) for i, r in enumerate(tool_results)}
        try:
            content = script.response_template.format(**namespace)
        except (KeyError, IndexError, TypeError) as exc:
            content = f"(response template error: {exc})"
        return ChatResponse(
            content=content,
            classification=classification,
            response_type=script.response_type,
            usage=TokenUsage(prompt, _approx_tokens(content)),
        )


def _wrap(value: Any) -> Any:
    if isinstance(value, dict):
        return _Formattable({k: _wrap(v) for k, v in value.items()})
    if isinstance(value, list):
        return [_wrap(v) for v in value]
    return value


class HttpProvider:
    """Client for a live service speaking the wire contract over HTTP.

    POST {endpoint} with ChatRequest JSON; expects ChatResponse JSON:
    {"content" | "tool_calls", "classification"?, "response_type"?,
    "usage": {"prompt_tokens", "completion_tokens"}}.
    """

    def __init__(self, endpoint: str, credential: Optional[str] = None,
                 timeout: float = 120.0):
        self.endpoint = endpoint
        self.credential = credential
        self.timeout = timeout

    def complete(self, request: ChatRequest) -> ChatResponse:
        import httpx

        headers = {}
        if self.credential:
            headers["Authorization"] = f"Bearer {self.credential}"
        try:
            response = httpx.post(
                self.endpoint, json=request.to_dict(), headers=headers,
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
        except Exception as exc:  # timeout, connection, HTTP status
            raise ProviderError(f"provider call failed: {exc}") from exc
        usage = payload.get("usage", {})
        return ChatResponse(
            content=payload.get("content"),
            tool_calls=[
                ToolCallRequest(
                    call_id=c.get("call_id", f"call-{i}"),
                    tool=c["tool"],
                    arguments=c.get("arguments", {}),
                )
                for i, c in enumerate(payload.get("tool_calls", []))
            ],
            classification=payload.get("classification"),
            response_type=payload.get("response_type", ANSWER),
            usage=TokenUsage(
                usage.get("prompt_tokens", 0), usage.get("completion_tokens", 0)
            ),
        )
