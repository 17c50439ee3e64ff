// Documents exchanged with the energy-agent HTTP API. The UI never derives
// its own truth: everything here mirrors a server response verbatim.

export interface AttributeSpec {
  kind: "switch" | "numeric" | "mode";
  minimum?: number;
  maximum?: number;
  unit?: string;
  modes?: string[];
}

export interface Device {
  device_id: string;
  name: string;
  room: string;
  online: boolean;
  attributes: Record<string, unknown>;
  attribute_specs: Record<string, AttributeSpec>;
  tags: string[];
}

export interface Meter {
  meter_id: string;
  name: string;
  description: string;
  status: string;
  online: boolean;
  unit: string;
  value?: number;
}

export interface HomeSnapshot {
  building_id: string;
  meters: Meter[];
  devices: Device[];
}

export interface ToolCall {
  tool: string;
  arguments: Record<string, unknown>;
  result: unknown;
  started: number;
  ended: number;
}

export interface TokenUsage {
  prompt_tokens: number;
  completion_tokens: number;
  total: number;
  cost: number;
}

export interface Classification {
  primary: string;
  secondary: string;
}

export interface RunDocument {
  run_id: string;
  query: string;
  state: string;
  classification: Classification | null;
  classification_error: string | null;
  tool_calls: ToolCall[];
  response: string;
  response_type: "answer" | "needs_clarification" | "error";
  artifacts: ChartSpec[];
  audit_entries: Record<string, unknown>[];
  token_usage: TokenUsage;
  wall_time: number;
}

export interface ChatReply {
  run: RunDocument;
  error?: { kind: string; message: string };
}

// Chart-spec documents produced server-side by analysis.run; the renderers
// below consume them as-is and never recompute analytics.
export interface BarLineChart {
  type: "bar" | "line";
  title: string;
  x: number[];
  y: number[];
  unit?: string;
}

export interface PieChart {
  type: "pie";
  title: string;
  labels: string[];
  values: number[];
  unit?: string;
}

export interface HeatmapChart {
  type: "heatmap";
  title: string;
  rows: number[][];
  x_labels: string[];
  unit?: string;
}

export type ChartSpec = BarLineChart | PieChart | HeatmapChart;

export interface ScheduleEntry {
  schedule_id: string;
  device_id: string;
  attribute: string;
  value: unknown;
  enabled: boolean;
  trigger: Record<string, unknown>;
}

export interface MemoryEntry {
  memory_id: string;
  summary: string;
  target_device: string | null;
  time_condition: string | null;
  recurrence: string | null;
  source: string;
  created_at: string | null;
}

export interface HomeEvent {
  type: string;
  building_id?: string;
  device_id?: string;
  attribute?: string;
  value?: unknown;
  [key: string]: unknown;
}
