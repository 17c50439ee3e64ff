import type {
  ChatReply,
  HomeEvent,
  HomeSnapshot,
  MemoryEntry,
  ScheduleEntry,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    throw new ApiError(res.status, String(body.detail ?? res.statusText));
  }
  return body as T;
}

/** Thin typed client over the agent service; one instance per building. */
export class ApiClient {
  constructor(
    private base = "",
    private buildingId?: string,
  ) {}

  private url(path: string, params: Record<string, string> = {}): string {
    const search = new URLSearchParams(params);
    if (this.buildingId) search.set("building_id", this.buildingId);
    const qs = search.toString();
    return `${this.base}${path}${qs ? `?${qs}` : ""}`;
  }

  getHome(): Promise<HomeSnapshot> {
    return request(this.url("/home"));
  }

  chat(query: string): Promise<ChatReply> {
    return request(this.url("/chat"), {
      method: "POST",
      body: JSON.stringify({ query }),
    });
  }

  executeDevice(deviceId: string, attribute: string, value: unknown) {
    return request<{ device: HomeSnapshot["devices"][number] }>(
      this.url(`/devices/${deviceId}/execute`),
      { method: "POST", body: JSON.stringify({ attribute, value }) },
    );
  }

  listSchedules(): Promise<{ schedules: ScheduleEntry[] }> {
    return request(this.url("/schedules"));
  }

  createSchedule(body: {
    device_id: string;
    attribute: string;
    value: unknown;
    trigger: Record<string, unknown>;
  }): Promise<{ schedule: ScheduleEntry }> {
    return request(this.url("/schedules"), {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  deleteSchedule(scheduleId: string) {
    return request<{ deleted: string }>(this.url(`/schedules/${scheduleId}`), {
      method: "DELETE",
    });
  }

  listMemories(): Promise<{ memories: MemoryEntry[] }> {
    return request(this.url("/memories"));
  }

  createMemory(utterance: string): Promise<{ memory: MemoryEntry }> {
    return request(this.url("/memories"), {
      method: "POST",
      body: JSON.stringify({ utterance }),
    });
  }

  deleteMemory(memoryId: string) {
    return request<{ deleted: string }>(this.url(`/memories/${memoryId}`), {
      method: "DELETE",
    });
  }

  analytics(params: Record<string, string>): Promise<Record<string, unknown>> {
    return request(this.url("/analytics", params));
  }
}

/**
 * Subscribe to the server-sent event stream. Returns the EventSource so the
 * caller owns its lifetime; events arrive already JSON-decoded.
 */
export function connectEvents(
  base: string,
  onEvent: (event: HomeEvent) => void,
): EventSource {
  const es = new EventSource(`${base}/events`);
  es.onmessage = (e) => {
    try {
      onEvent(JSON.parse(e.data));
    } catch {
      // keep-alives and malformed frames are dropped silently
    }
  };
  return es;
}
