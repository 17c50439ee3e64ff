import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import { vi } from "vitest";

/** Load a captured API document from tests/fixtures. */
export function loadFixture<T>(name: string): T {
  return JSON.parse(
    readFileSync(resolve(process.cwd(), "tests/fixtures", name), "utf8"),
  ) as T;
}

export interface Route {
  method: string;
  path: string | RegExp;
  status?: number;
  body: unknown | ((url: URL, init?: RequestInit) => unknown);
}

export interface FakeFetch {
  calls: { method: string; url: string; body: unknown }[];
  countFor(path: string): number;
}

/** Install a route-table fetch double; unmatched requests fail the test. */
export function installFetch(routes: Route[]): FakeFetch {
  const calls: FakeFetch["calls"] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: string, init?: RequestInit) => {
      const method = init?.method ?? "GET";
      const url = new URL(input, "http://test.local");
      calls.push({
        method,
        url: input,
        body: init?.body ? JSON.parse(String(init.body)) : undefined,
      });
      const route = routes.find(
        (r) =>
          r.method === method &&
          (typeof r.path === "string"
            ? r.path === url.pathname
            : r.path.test(url.pathname)),
      );
      if (!route) throw new Error(`unrouted ${method} ${url.pathname}`);
      const body =
        typeof route.body === "function" ? route.body(url, init) : route.body;
      return {
        ok: (route.status ?? 200) < 400,
        status: route.status ?? 200,
        statusText: "",
        json: async () => body,
      } as Response;
    }),
  );
  return {
    calls,
    countFor: (path) => calls.filter((c) => c.url.split("?")[0].endsWith(path)).length,
  };
}

/** Minimal EventSource double: tests push frames with emit(). */
export class FakeEventSource {
  static instances: FakeEventSource[] = [];
  onmessage: ((e: MessageEvent) => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  constructor(public url: string) {
    FakeEventSource.instances.push(this);
  }

  emit(event: unknown): void {
    this.onmessage?.({ data: JSON.stringify(event) } as MessageEvent);
  }

  close(): void {
    this.closed = true;
  }
}

export function installEventSource(): void {
  FakeEventSource.instances = [];
  vi.stubGlobal("EventSource", FakeEventSource);
}

export function flush(): Promise<void> {
  // drain the microtask queue so awaited fetches settle
  return new Promise((resolve) => setTimeout(resolve, 0));
}
