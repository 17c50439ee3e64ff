import { ApiClient, ApiError } from "./api.js";
import type { Device, HomeEvent, HomeSnapshot, Meter } from "./types.js";

/**
 * Live device/meter grid. State comes only from API responses and the
 * event stream; controls render disabled for offline devices and each
 * control maps to exactly one execute call.
 */
export class Dashboard {
  private devices = new Map<string, Device>();

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {}

  load(home: HomeSnapshot): void {
    this.devices = new Map(home.devices.map((d) => [d.device_id, d]));
    this.root.innerHTML = "";
    const grid = document.createElement("div");
    grid.className = "device-grid";
    for (const device of home.devices) grid.appendChild(this.card(device));
    this.root.appendChild(grid);
    this.root.appendChild(meterTable(home.meters));
  }

  /** Apply a device event from the stream without a reload or refetch. */
  onEvent(event: HomeEvent): void {
    if (event.type !== "device" || !event.device_id) return;
    const device = this.devices.get(event.device_id);
    if (!device || !event.attribute) return;
    device.attributes[event.attribute] = event.value;
    const existing = this.root.querySelector(
      `[data-device-id="${device.device_id}"]`,
    );
    existing?.replaceWith(this.card(device));
  }

  private card(device: Device): HTMLElement {
    const card = document.createElement("section");
    card.className = `device-card${device.online ? "" : " offline"}`;
    card.dataset.deviceId = device.device_id;

    const head = document.createElement("h3");
    head.textContent = device.name;
    const badge = document.createElement("span");
    badge.className = "status-badge";
    badge.textContent = device.online ? device.room : "offline";
    head.appendChild(badge);
    card.appendChild(head);

    const errorBox = document.createElement("p");
    errorBox.className = "device-error";
    errorBox.hidden = true;

    for (const [attr, spec] of Object.entries(device.attribute_specs)) {
      const row = document.createElement("label");
      row.className = "attr-row";
      row.append(`${attr} `);
      const control = this.control(device, attr, spec.kind, errorBox);
      if (!device.online) control.setAttribute("disabled", "");
      row.appendChild(control);
      card.appendChild(row);
    }
    card.appendChild(errorBox);
    return card;
  }

  private control(
    device: Device,
    attr: string,
    kind: string,
    errorBox: HTMLElement,
  ): HTMLInputElement | HTMLSelectElement {
    const spec = device.attribute_specs[attr];
    const current = device.attributes[attr];
    const send = async (value: unknown) => {
      errorBox.hidden = true;
      try {
        await this.api.executeDevice(device.device_id, attr, value);
        // confirmed state arrives via the event stream; no optimistic UI
      } catch (err) {
        errorBox.hidden = false;
        errorBox.textContent =
          err instanceof ApiError ? err.detail : String(err);
      }
    };

    if (kind === "switch") {
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = current === true;
      box.dataset.attr = attr;
      box.addEventListener("change", () => void send(box.checked));
      return box;
    }
    if (kind === "numeric") {
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(spec.minimum ?? 0);
      slider.max = String(spec.maximum ?? 100);
      slider.value = String(current ?? spec.minimum ?? 0);
      slider.dataset.attr = attr;
      slider.addEventListener("change", () => void send(Number(slider.value)));
      return slider;
    }
    const select = document.createElement("select");
    select.dataset.attr = attr;
    for (const mode of spec.modes ?? []) {
      const option = document.createElement("option");
      option.value = mode;
      option.textContent = mode;
      option.selected = mode === current;
      select.appendChild(option);
    }
    select.addEventListener("change", () => void send(select.value));
    return select;
  }
}

function meterTable(meters: Meter[]): HTMLElement {
  const table = document.createElement("table");
  table.className = "meter-table";
  for (const meter of meters) {
    const row = table.insertRow();
    row.insertCell().textContent = meter.name;
    row.insertCell().textContent =
      meter.value !== undefined ? `${meter.value} ${meter.unit}` : meter.status;
  }
  return table;
}
