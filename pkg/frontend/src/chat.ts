import { ApiClient, ApiError } from "./api.js";
import { renderChart } from "./charts.js";
import type { ChatReply, RunDocument, ToolCall } from "./types.js";

/**
 * Conversational panel: each sent query renders the full interaction —
 * classification, expandable tool-call trace, final text, latency/token
 * badge, and any chart artifacts. Clarification responses open a follow-up
 * input; provider errors render a retry affordance.
 */
export class ChatPanel {
  readonly transcript: HTMLElement;
  private form: HTMLFormElement;
  private input: HTMLInputElement;

  constructor(
    root: HTMLElement,
    private api: ApiClient,
  ) {
    this.transcript = document.createElement("div");
    this.transcript.className = "transcript";
    this.form = document.createElement("form");
    this.input = document.createElement("input");
    this.input.type = "text";
    this.input.placeholder = "Ask about your home…";
    const button = document.createElement("button");
    button.type = "submit";
    button.textContent = "Send";
    this.form.append(this.input, button);
    this.form.addEventListener("submit", (e) => {
      e.preventDefault();
      const query = this.input.value.trim();
      if (!query) return;
      this.input.value = "";
      void this.send(query);
    });
    root.append(this.transcript, this.form);
  }

  async send(query: string): Promise<void> {
    const userLine = document.createElement("p");
    userLine.className = "user-line";
    userLine.textContent = query;
    this.transcript.appendChild(userLine);
    try {
      const reply = await this.api.chat(query);
      this.transcript.appendChild(this.runEntry(query, reply));
    } catch (err) {
      this.transcript.appendChild(this.failureEntry(query, err));
    }
  }

  private runEntry(query: string, reply: ChatReply): HTMLElement {
    const run = reply.run;
    const entry = document.createElement("article");
    entry.className = "run-entry";
    entry.dataset.runId = run.run_id;

    if (run.classification) {
      const label = document.createElement("span");
      label.className = "classification-badge";
      label.textContent = `${run.classification.primary} / ${run.classification.secondary}`;
      entry.appendChild(label);
    }
    if (run.tool_calls.length) entry.appendChild(trace(run.tool_calls));

    const text = document.createElement("p");
    text.className = `response ${run.response_type}`;
    text.textContent = run.response;
    entry.appendChild(text);

    for (const artifact of run.artifacts) {
      entry.appendChild(renderChart(artifact));
    }
    entry.appendChild(badge(run));

    if (reply.error) {
      entry.appendChild(this.retryButton(query));
    } else if (run.response_type === "needs_clarification") {
      entry.appendChild(this.clarifyInput());
    }
    return entry;
  }

  private failureEntry(query: string, err: unknown): HTMLElement {
    const entry = document.createElement("article");
    entry.className = "run-entry error";
    const text = document.createElement("p");
    text.className = "response error";
    text.textContent = err instanceof ApiError ? err.detail : String(err);
    entry.append(text, this.retryButton(query));
    return entry;
  }

  private retryButton(query: string): HTMLButtonElement {
    const retry = document.createElement("button");
    retry.className = "retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void this.send(query));
    return retry;
  }

  private clarifyInput(): HTMLElement {
    const follow = document.createElement("form");
    follow.className = "clarify";
    const input = document.createElement("input");
    input.type = "text";
    input.placeholder = "Clarify…";
    follow.appendChild(input);
    follow.addEventListener("submit", (e) => {
      e.preventDefault();
      if (input.value.trim()) void this.send(input.value.trim());
    });
    return follow;
  }
}

function trace(calls: ToolCall[]): HTMLElement {
  const details = document.createElement("details");
  details.className = "tool-trace";
  const summary = document.createElement("summary");
  summary.textContent = `${calls.length} tool call${calls.length === 1 ? "" : "s"}`;
  details.appendChild(summary);
  const list = document.createElement("ol");
  for (const call of calls) {
    const item = document.createElement("li");
    item.dataset.tool = call.tool;
    const name = document.createElement("code");
    name.textContent = `${call.tool}(${JSON.stringify(call.arguments)})`;
    const result = document.createElement("pre");
    result.textContent = JSON.stringify(call.result, null, 1);
    item.append(name, result);
    list.appendChild(item);
  }
  details.appendChild(list);
  return details;
}

function badge(run: RunDocument): HTMLElement {
  const span = document.createElement("span");
  span.className = "usage-badge";
  span.textContent =
    `${run.wall_time.toFixed(3)} s · ${run.token_usage.total} tokens · ` +
    `$${run.token_usage.cost.toFixed(4)}`;
  return span;
}
