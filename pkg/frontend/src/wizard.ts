/** Screen rendering and user actions for the six-phase configuration wizard.
 *
 * The server is the single source of truth: every action is an API call and
 * the view re-renders from the returned/re-fetched state, so reloading the
 * page and resuming the session reproduces the same screen.
 */

import { ApiClient, ApiError, SolutionView } from "./api.js";
import { Store, WizardViewState, solutionKey } from "./store.js";

export const BUILTIN_MODELS = ["lowest-total", "energy-saver", "cheapest"];

export class Wizard {
  readonly store: Store;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    store?: Store,
  ) {
    this.store = store ?? new Store();
    this.store.subscribe(() => this.render());
  }

  // -- lifecycle ------------------------------------------------------------

  async start(sessionId?: string): Promise<void> {
    if (sessionId) {
      await this.resume(sessionId);
      return;
    }
    const created = await this.api.createSession();
    this.store.set({ sessionId: created.id, phase: created.phase });
    await this.refresh();
  }

  /** Re-fetch the session and everything its phase shows. */
  async resume(sessionId: string): Promise<void> {
    const session = await this.api.session(sessionId);
    this.store.set({
      sessionId: session.id,
      phase: session.phase,
      task: session.task,
      model: session.model,
      extrasChecked: session.extras.map((r) => r.property_id),
    });
    await this.refresh();
  }

  private async refresh(): Promise<void> {
    const state = this.store.get();
    const id = state.sessionId;
    if (!id) return;
    try {
      if (state.phase === "ANSWERING") {
        const [question, tasks] = await Promise.all([
          this.api.question(id),
          this.api.tasks(id),
        ]);
        this.store.set({
          question: question.question,
          remaining: question.remaining,
          tasks: tasks.tasks,
          error: null,
        });
      } else if (state.phase === "SOLUTIONS_READY" || state.phase === "EXTRAS_SELECTED") {
        await this.refreshSolutions();
      } else if (state.phase === "NO_SOLUTION") {
        const recs = await this.api.recommendations(id);
        this.store.set({ recommendations: recs.recommendations, error: null });
      } else if (state.phase === "BUNDLE_READY") {
        const bundle = await this.api.bundle(id);
        this.store.set({ bundle, error: null });
      }
    } catch (err) {
      await this.handleError(err);
    }
  }

  private async refreshSolutions(): Promise<void> {
    const state = this.store.get();
    const id = state.sessionId!;
    const ranked = await this.api.solutions(id, state.model);
    const costsByModel: Record<string, Record<string, number>> = {};
    for (const model of BUILTIN_MODELS) {
      const listing =
        model === state.model ? ranked : await this.api.solutions(id, model);
      costsByModel[model] = {};
      for (const solution of listing.solutions) {
        costsByModel[model][solutionKey(solution)] = solution.cost;
      }
    }
    const extras = await this.api.extras(id);
    this.store.set({
      solutions: ranked.solutions,
      costsByModel,
      extrasAvailable: extras.extras,
      error: null,
    });
  }

  /** 409 means our view got ahead of (or behind) the server: roll back to it. */
  private async handleError(err: unknown): Promise<void> {
    if (err instanceof ApiError && err.status === 409 && this.store.get().sessionId) {
      this.store.set({ error: err.message });
      await this.resume(this.store.get().sessionId!);
      return;
    }
    this.store.set({ error: err instanceof Error ? err.message : String(err) });
  }

  // -- actions --------------------------------------------------------------

  async answer(facet: string, value: string): Promise<void> {
    const id = this.store.get().sessionId!;
    try {
      await this.api.answer(id, facet, value);
      await this.refresh();
    } catch (err) {
      await this.handleError(err);
    }
  }

  skip(): void {
    this.store.set({ skipQuestions: true });
  }

  async chooseTask(taskId: string): Promise<void> {
    const id = this.store.get().sessionId!;
    try {
      const result = await this.api.selectTask(id, taskId);
      const chosen = this.store.get().tasks.find((t) => t.id === taskId) ?? null;
      this.store.set({ phase: result.phase, task: chosen });
      await this.refresh();
    } catch (err) {
      await this.handleError(err);
    }
  }

  toggleExtra(propertyId: string): void {
    const checked = new Set(this.store.get().extrasChecked);
    if (checked.has(propertyId)) {
      checked.delete(propertyId);
    } else {
      checked.add(propertyId);
    }
    this.store.set({ extrasChecked: [...checked].sort() });
  }

  async confirmExtras(): Promise<void> {
    const state = this.store.get();
    try {
      const result = await this.api.selectExtras(state.sessionId!, state.extrasChecked);
      this.store.set({ phase: result.phase });
      await this.refresh();
    } catch (err) {
      await this.handleError(err);
    }
  }

  /** Re-rank on the server under another model (column header click). */
  async sortBy(model: string): Promise<void> {
    this.store.set({ model });
    try {
      await this.refreshSolutions();
    } catch (err) {
      await this.handleError(err);
    }
  }

  async useSolution(index: number): Promise<void> {
    const state = this.store.get();
    try {
      const result = await this.api.select(state.sessionId!, index, state.model);
      this.store.set({ phase: result.phase });
      await this.refresh();
    } catch (err) {
      await this.handleError(err);
    }
  }

  // -- rendering ------------------------------------------------------------

  private render(): void {
    const state = this.store.get();
    this.root.innerHTML = "";
    const container = el("div", { class: "wizard" });
    container.appendChild(this.renderHeader(state));
    if (state.error) {
      container.appendChild(el("p", { class: "error", "data-testid": "error" }, state.error));
    }
    switch (state.phase) {
      case "ANSWERING":
        container.appendChild(this.renderAnswering(state));
        break;
      case "NO_SOLUTION":
        container.appendChild(this.renderRecommendations(state));
        break;
      case "SOLUTIONS_READY":
      case "EXTRAS_SELECTED":
        container.appendChild(this.renderSolutions(state));
        break;
      case "BUNDLE_READY":
        container.appendChild(this.renderBundle(state));
        break;
    }
    this.root.appendChild(container);
  }

  private renderHeader(state: WizardViewState): HTMLElement {
    const header = el("header", {});
    header.appendChild(el("h1", {}, "Sensor configuration wizard"));
    header.appendChild(
      el("p", { class: "phase", "data-testid": "phase" }, state.phase),
    );
    if (state.task) {
      header.appendChild(
        el("p", { class: "task" }, `Task: ${state.task.label} (${state.task.id})`),
      );
    }
    return header;
  }

  private renderAnswering(state: WizardViewState): HTMLElement {
    const section = el("section", { class: "answering" });

    if (state.question && !state.skipQuestions) {
      const qa = el("div", { class: "question", "data-testid": "question" });
      qa.appendChild(el("h2", {}, state.question.text));
      qa.appendChild(
        el("p", { "data-testid": "remaining" }, `${state.remaining} matching tasks`),
      );
      for (const option of state.question.options) {
        const button = el(
          "button",
          { "data-testid": `option-${option}` },
          option,
        ) as HTMLButtonElement;
        button.addEventListener("click", () => void this.answer(state.question!.facet, option));
        qa.appendChild(button);
      }
      const skip = el("button", { "data-testid": "skip" }, "Skip questions") as HTMLButtonElement;
      skip.addEventListener("click", () => this.skip());
      qa.appendChild(skip);
      section.appendChild(qa);
    }

    const picker = el("div", { class: "tasks" });
    picker.appendChild(el("h2", {}, "Pick a task"));
    const list = el("ul", { "data-testid": "task-list" });
    for (const task of state.tasks) {
      const item = el("li", {});
      const button = el(
        "button",
        { "data-testid": `task-${task.id}` },
        `${task.label} (${task.produces.property_id}/${task.produces.unit})`,
      ) as HTMLButtonElement;
      button.addEventListener("click", () => void this.chooseTask(task.id));
      item.appendChild(button);
      list.appendChild(item);
    }
    picker.appendChild(list);
    section.appendChild(picker);
    return section;
  }

  private renderRecommendations(state: WizardViewState): HTMLElement {
    const section = el("section", { class: "recommendations" });
    section.appendChild(el("h2", {}, "No solution with the available sensors"));
    section.appendChild(
      el("p", {}, "Deploying the sensors below would make this task configurable:"),
    );
    const list = el("ul", { "data-testid": "recommendations" });
    for (const rec of state.recommendations) {
      const specs = rec.missing
        .map((m) => `${m.property_id}/${m.unit}${m.location ? ` at ${m.location}` : ""}`)
        .join(", ");
      list.appendChild(
        el(
          "li",
          { "data-testid": "recommendation" },
          `Deploy ${specs} (existing nodes cost ${rec.present_cost})`,
        ),
      );
    }
    section.appendChild(list);
    return section;
  }

  private renderSolutions(state: WizardViewState): HTMLElement {
    const section = el("section", { class: "solutions" });

    section.appendChild(el("h2", {}, "Solutions"));
    const table = el("table", { "data-testid": "solutions" });
    const head = el("tr", {});
    head.appendChild(el("th", {}, "#"));
    head.appendChild(el("th", {}, "composition"));
    for (const model of BUILTIN_MODELS) {
      const th = el("th", {});
      const sort = el(
        "button",
        { "data-testid": `sort-${model}`, class: model === state.model ? "active" : "" },
        `${model} cost`,
      ) as HTMLButtonElement;
      sort.addEventListener("click", () => void this.sortBy(model));
      th.appendChild(sort);
      head.appendChild(th);
    }
    head.appendChild(el("th", {}, ""));
    table.appendChild(head);

    state.solutions.forEach((solution, index) => {
      const row = el("tr", {
        "data-testid": `solution-${index}`,
        class: index === 0 ? "default-selection" : "",
      });
      row.appendChild(el("td", {}, String(index)));
      row.appendChild(el("td", {}, describeSolution(solution)));
      for (const model of BUILTIN_MODELS) {
        const cost = state.costsByModel[model]?.[solutionKey(solution)];
        row.appendChild(
          el("td", { "data-testid": `cost-${model}-${index}` },
            cost === undefined ? "" : String(cost)),
        );
      }
      const cell = el("td", {});
      const use = el("button", { "data-testid": `use-${index}` }, "Use this solution") as HTMLButtonElement;
      use.addEventListener("click", () => void this.useSolution(index));
      cell.appendChild(use);
      row.appendChild(cell);
      table.appendChild(row);
    });
    section.appendChild(table);
    section.appendChild(
      el("p", {}, "The first row is the default: it has the lowest cost under the selected model."),
    );

    const extras = el("div", { class: "extras" });
    extras.appendChild(el("h2", {}, "Additional context streams"));
    const list = el("ul", { "data-testid": "extras" });
    for (const ref of state.extrasAvailable) {
      const item = el("li", {});
      const box = el("input", {
        type: "checkbox",
        "data-testid": `extra-${ref.property_id}`,
      }) as HTMLInputElement;
      box.checked = state.extrasChecked.includes(ref.property_id);
      box.addEventListener("change", () => this.toggleExtra(ref.property_id));
      item.appendChild(box);
      item.appendChild(el("span", {}, ` ${ref.property_id}/${ref.unit}`));
      list.appendChild(item);
    }
    extras.appendChild(list);
    const confirm = el("button", { "data-testid": "confirm-extras" }, "Attach selected extras") as HTMLButtonElement;
    confirm.addEventListener("click", () => void this.confirmExtras());
    extras.appendChild(confirm);
    section.appendChild(extras);
    return section;
  }

  private renderBundle(state: WizardViewState): HTMLElement {
    const section = el("section", { class: "bundle" });
    section.appendChild(el("h2", {}, "Configuration bundle"));
    const bundle = state.bundle ?? {};
    for (const filename of Object.keys(bundle).sort()) {
      const block = el("div", { class: "file", "data-testid": `file-${filename}` });
      const link = el("a", { "data-testid": `download-${filename}` }, `Download ${filename}`) as HTMLAnchorElement;
      wireDownload(link, filename, bundle[filename]);
      block.appendChild(link);
      const pre = el("pre", { "data-testid": `content-${filename}` });
      pre.textContent = bundle[filename];
      block.appendChild(pre);
      section.appendChild(block);
    }
    return section;
  }
}

function describeSolution(solution: SolutionView): string {
  if (solution.edges.length === 0) {
    return `sensor ${solution.root}`;
  }
  const edges = solution.edges
    .map(([consumer, port, producer]) => `${producer} -> ${consumer}[${port}]`)
    .join(", ");
  return `root ${solution.root}; ${edges}`;
}

function wireDownload(link: HTMLAnchorElement, filename: string, content: string): void {
  link.download = filename;
  if (typeof URL.createObjectURL === "function") {
    link.href = URL.createObjectURL(new Blob([content], { type: "text/plain" }));
  } else {
    link.href = `data:text/plain;charset=utf-8,${encodeURIComponent(content)}`;
  }
}

function el(
  tag: string,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (value !== "") {
      node.setAttribute(key, value);
    }
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}
