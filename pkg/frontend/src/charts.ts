import type { BarLineChart, ChartSpec, HeatmapChart, PieChart } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 480;
const HEIGHT = 240;
const PAD = 28;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

function frame(title: string): SVGSVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
    role: "img",
  });
  const caption = svgEl("text", { x: WIDTH / 2, y: 16, "text-anchor": "middle", class: "chart-title" });
  caption.textContent = title;
  svg.appendChild(caption);
  return svg;
}

function emptyState(title: string): HTMLElement {
  const div = document.createElement("div");
  div.className = "chart chart-empty";
  div.textContent = `${title}: no data`;
  return div;
}

function renderBars(spec: BarLineChart): SVGSVGElement {
  const svg = frame(spec.title);
  const max = Math.max(...spec.y, 0) || 1;
  const plotW = WIDTH - 2 * PAD;
  const plotH = HEIGHT - 2 * PAD;
  const step = plotW / spec.y.length;
  spec.y.forEach((v, i) => {
    const h = (Math.max(v, 0) / max) * plotH;
    svg.appendChild(
      svgEl("rect", {
        class: "bar",
        x: PAD + i * step + step * 0.1,
        y: HEIGHT - PAD - h,
        width: step * 0.8,
        height: h,
        "data-value": v,
      }),
    );
  });
  return svg;
}

function renderLine(spec: BarLineChart): SVGSVGElement {
  const svg = frame(spec.title);
  const max = Math.max(...spec.y, 0) || 1;
  const min = Math.min(...spec.y, 0);
  const span = max - min || 1;
  const plotW = WIDTH - 2 * PAD;
  const plotH = HEIGHT - 2 * PAD;
  const points = spec.y
    .map((v, i) => {
      const x = PAD + (i / Math.max(spec.y.length - 1, 1)) * plotW;
      const y = HEIGHT - PAD - ((v - min) / span) * plotH;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  svg.appendChild(svgEl("polyline", { class: "line", points, fill: "none" }));
  return svg;
}

function renderPie(spec: PieChart): SVGSVGElement {
  const svg = frame(spec.title);
  const total = spec.values.reduce((a, b) => a + b, 0);
  const cx = WIDTH / 2;
  const cy = (HEIGHT + PAD) / 2;
  const r = (HEIGHT - 3 * PAD) / 2;
  let angle = -Math.PI / 2;
  spec.values.forEach((v, i) => {
    const share = total > 0 ? v / total : 0;
    const next = angle + share * 2 * Math.PI;
    const x0 = cx + r * Math.cos(angle);
    const y0 = cy + r * Math.sin(angle);
    const x1 = cx + r * Math.cos(next);
    const y1 = cy + r * Math.sin(next);
    const large = share > 0.5 ? 1 : 0;
    const path = svgEl("path", {
      class: "slice",
      d: `M ${cx} ${cy} L ${x0} ${y0} A ${r} ${r} 0 ${large} 1 ${x1} ${y1} Z`,
      "data-label": spec.labels[i],
      "data-share": share,
    });
    svg.appendChild(path);
    const mid = (angle + next) / 2;
    const label = svgEl("text", {
      class: "slice-label",
      x: cx + (r + 14) * Math.cos(mid),
      y: cy + (r + 14) * Math.sin(mid),
      "text-anchor": "middle",
    });
    label.textContent = `${spec.labels[i]} ${(share * 100).toFixed(1)}%`;
    svg.appendChild(label);
    angle = next;
  });
  return svg;
}

function renderHeatmap(spec: HeatmapChart): SVGSVGElement {
  const svg = frame(spec.title);
  const flat = spec.rows.flat();
  const max = Math.max(...flat, 0) || 1;
  const cols = spec.x_labels.length;
  const cellW = (WIDTH - 2 * PAD) / cols;
  const cellH = (HEIGHT - 2 * PAD) / spec.rows.length;
  spec.rows.forEach((row, d) => {
    row.forEach((v, h) => {
      svg.appendChild(
        svgEl("rect", {
          class: "cell",
          x: PAD + h * cellW,
          y: PAD + d * cellH,
          width: cellW,
          height: cellH,
          "fill-opacity": (v / max).toFixed(3),
          "data-value": v,
        }),
      );
    });
  });
  return svg;
}

/** Render a server chart-spec document; never recomputes analytics. */
export function renderChart(spec: ChartSpec): Element {
  if (spec.type === "pie") {
    return spec.values.length ? renderPie(spec) : emptyState(spec.title);
  }
  if (spec.type === "heatmap") {
    return spec.rows.length ? renderHeatmap(spec) : emptyState(spec.title);
  }
  if (!spec.y.length) return emptyState(spec.title);
  return spec.type === "bar" ? renderBars(spec) : renderLine(spec);
}
