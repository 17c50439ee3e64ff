import { ApiClient, ApiError } from "./api.js";
import type { ScheduleEntry } from "./types.js";

/** Schedules list with delete buttons and a minimal time-trigger form. */
export class SchedulesPanel {
  private list: HTMLUListElement;
  private error: HTMLElement;

  constructor(
    root: HTMLElement,
    private api: ApiClient,
  ) {
    this.list = document.createElement("ul");
    this.list.className = "schedule-list";
    this.error = document.createElement("p");
    this.error.className = "panel-error";
    this.error.hidden = true;
    root.append(this.list, this.buildForm(), this.error);
  }

  async refresh(): Promise<void> {
    const { schedules } = await this.api.listSchedules();
    this.list.innerHTML = "";
    for (const entry of schedules) this.list.appendChild(this.item(entry));
  }

  private item(entry: ScheduleEntry): HTMLLIElement {
    const li = document.createElement("li");
    li.dataset.scheduleId = entry.schedule_id;
    const trigger = entry.trigger as { kind: string; at?: string };
    li.textContent =
      `${entry.device_id}.${entry.attribute} = ${JSON.stringify(entry.value)}` +
      (trigger.kind === "time" ? ` at ${trigger.at}` : " (conditional)");
    const remove = document.createElement("button");
    remove.textContent = "Delete";
    remove.addEventListener("click", async () => {
      await this.api.deleteSchedule(entry.schedule_id);
      li.remove();
    });
    li.appendChild(remove);
    return li;
  }

  private buildForm(): HTMLFormElement {
    const form = document.createElement("form");
    form.className = "schedule-form";
    const device = input(form, "device_id", "device id");
    const attribute = input(form, "attribute", "attribute");
    const value = input(form, "value", "value (JSON)");
    const at = input(form, "at", "HH:MM");
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Add schedule";
    form.appendChild(submit);
    form.addEventListener("submit", async (e) => {
      e.preventDefault();
      this.error.hidden = true;
      try {
        await this.api.createSchedule({
          device_id: device.value,
          attribute: attribute.value,
          value: JSON.parse(value.value || "null"),
          trigger: { kind: "time", at: `${at.value}:00`, recurrence: "daily" },
        });
        await this.refresh();
      } catch (err) {
        this.error.hidden = false;
        this.error.textContent =
          err instanceof ApiError ? err.detail : String(err);
      }
    });
    return form;
  }
}

function input(
  form: HTMLFormElement,
  name: string,
  placeholder: string,
): HTMLInputElement {
  const el = document.createElement("input");
  el.name = name;
  el.placeholder = placeholder;
  form.appendChild(el);
  return el;
}
