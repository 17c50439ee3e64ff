import { ApiClient, connectEvents } from "./api.js";
import { ChatPanel } from "./chat.js";
import { Dashboard } from "./dashboard.js";
import { MemoriesPanel } from "./memories.js";
import { SchedulesPanel } from "./schedules.js";
import { renderChart } from "./charts.js";
import type { ChartSpec } from "./types.js";

export interface App {
  chat: ChatPanel;
  dashboard: Dashboard;
  schedules: SchedulesPanel;
  memories: MemoriesPanel;
  events: EventSource;
}

/**
 * Composition root. One API client, one event-stream subscription; every
 * panel renders only confirmed server state.
 */
export async function mount(root: HTMLElement, base = ""): Promise<App> {
  const api = new ApiClient(base);
  root.innerHTML = `
    <header><h1>Home energy agent</h1></header>
    <main>
      <section id="chat"><h2>Chat</h2></section>
      <section id="dashboard"><h2>Home</h2></section>
      <section id="charts"><h2>Energy</h2></section>
      <section id="schedules"><h2>Schedules</h2></section>
      <section id="memories"><h2>Memories</h2></section>
    </main>`;

  const pick = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;
  const chat = new ChatPanel(pick("chat"), api);
  const dashboard = new Dashboard(pick("dashboard"), api);
  const schedules = new SchedulesPanel(pick("schedules"), api);
  const memories = new MemoriesPanel(pick("memories"), api);

  dashboard.load(await api.getHome());
  await schedules.refresh();
  await memories.refresh();

  const chartsRoot = pick("charts");
  for (const params of [
    { kind: "aggregate", granularity: "daily", chart: "bar" },
    { kind: "device_breakdown", chart: "pie" },
    { kind: "hourly_heatmap" },
  ]) {
    const doc = await api.analytics(params as Record<string, string>);
    if (doc.chart) chartsRoot.appendChild(renderChart(doc.chart as ChartSpec));
  }

  const events = connectEvents(base, (event) => dashboard.onEvent(event));
  return { chat, dashboard, schedules, memories, events };
}
