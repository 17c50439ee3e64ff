import { ApiClient, ApiError } from "./api.js";
import type { MemoryEntry } from "./types.js";

/** Preference-memory manager: list, create from an utterance, delete. */
export class MemoriesPanel {
  private list: HTMLUListElement;
  private error: HTMLElement;

  constructor(
    root: HTMLElement,
    private api: ApiClient,
  ) {
    this.list = document.createElement("ul");
    this.list.className = "memory-list";
    this.error = document.createElement("p");
    this.error.className = "panel-error";
    this.error.hidden = true;

    const form = document.createElement("form");
    const input = document.createElement("input");
    input.placeholder = "Remember that…";
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Save";
    form.append(input, submit);
    form.addEventListener("submit", async (e) => {
      e.preventDefault();
      this.error.hidden = true;
      try {
        await this.api.createMemory(input.value);
        input.value = "";
        await this.refresh();
      } catch (err) {
        this.error.hidden = false;
        this.error.textContent =
          err instanceof ApiError ? err.detail : String(err);
      }
    });
    root.append(this.list, form, this.error);
  }

  async refresh(): Promise<void> {
    const { memories } = await this.api.listMemories();
    this.list.innerHTML = "";
    for (const entry of memories) this.list.appendChild(this.item(entry));
  }

  private item(entry: MemoryEntry): HTMLLIElement {
    const li = document.createElement("li");
    li.dataset.memoryId = entry.memory_id;
    const bits = [entry.summary];
    if (entry.time_condition) bits.push(`@ ${entry.time_condition}`);
    if (entry.recurrence) bits.push(`(${entry.recurrence})`);
    li.textContent = bits.join(" ");
    const remove = document.createElement("button");
    remove.textContent = "Forget";
    remove.addEventListener("click", async () => {
      await this.api.deleteMemory(entry.memory_id);
      li.remove();
    });
    li.appendChild(remove);
    return li;
  }
}
