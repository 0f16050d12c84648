/** DOM controller: wires gestures to state transitions and the API.
 *
 * Re-renders are debounced 150 ms after the last gesture; chart drawing
 * happens client-side from the returned Vega-Lite document. All numbers
 * on screen come from /query and /render responses.
 */

import { ApiFailure, Client } from "./api.js";
import { fullExpansion } from "./pivot.js";
import { parseSpec, serializeSpec } from "./serialize.js";
import * as st from "./state.js";
import type { Mark, PivotModel, Scalar, Shelf, Spec } from "./types.js";
import { dataTableHtml, esc, fieldListHtml, pivotHtml, shelvesHtml, tabBarHtml } from "./view.js";

const RENDER_DEBOUNCE_MS = 150;

type Embedder = (el: HTMLElement, spec: unknown) => Promise<unknown>;

export class App {
  state: st.UiState = st.initialState();
  private pivotModels = new Map<number, PivotModel>();
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private root: Document,
    private client: Client,
    private embed: Embedder | null = null,
  ) {}

  async start(): Promise<void> {
    const datasets = await this.client.datasets();
    if (datasets.length) {
      const info = await this.client.datasetInfo(datasets[0].id);
      this.state = st.loadDataset(this.state, info.id, info.fields);
      await this.renderDataTab();
    }
    this.paint();
    this.bind();
    this.scheduleRender();
  }

  /** Apply a pure gesture and schedule a re-render. */
  apply(next: st.UiState, rerender = true): void {
    this.state = next;
    this.paint();
    if (rerender) this.scheduleRender();
  }

  private scheduleRender(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => void this.renderChart(), RENDER_DEBOUNCE_MS);
  }

  private el(id: string): HTMLElement {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  }

  paint(): void {
    const spec = st.activeSpec(this.state);
    this.el("field-list").innerHTML = fieldListHtml(
      this.state.fields,
      spec.computed.map((c) => c.out_fid),
    );
    this.el("shelves").innerHTML = shelvesHtml(spec);
    this.el("tab-bar").innerHTML = tabBarHtml(this.state);
    (this.el("mark-picker") as HTMLSelectElement).value = spec.mark;
    (this.el("aggregated-toggle") as HTMLInputElement).checked = spec.aggregated;
    (this.el("stack-picker") as HTMLSelectElement).value = spec.stack;
    (this.el("palette-input") as HTMLInputElement).value = spec.config.palette;
    this.paintFilterEditor();
  }

  private paintFilterEditor(): void {
    const host = this.el("filter-editor");
    const editor = this.state.filterEditor;
    if (!editor) {
      host.innerHTML = "";
      host.classList.remove("open");
      return;
    }
    const meta = this.state.fields.find((f) => f.fid === editor.fid);
    host.classList.add("open");
    if (!meta) return;
    if (meta.analytic_type === "measure") {
      host.innerHTML =
        `<h4>Filter ${esc(meta.name)}</h4>` +
        `<input id="flt-lo" type="number" value="${meta.min ?? 0}"> – ` +
        `<input id="flt-hi" type="number" value="${meta.max ?? 0}">` +
        `<button id="flt-apply">Apply</button>`;
      return;
    }
    host.innerHTML =
      `<h4>Filter ${esc(meta.name)}</h4>` +
      `<p class="hint">Comma-separated values to keep.</p>` +
      `<input id="flt-values" type="text" placeholder="North Asia, Oceania">` +
      `<button id="flt-apply">Apply</button>`;
  }

  private async renderDataTab(): Promise<void> {
    if (!this.state.datasetId) return;
    const preview = await this.client.rows(this.state.datasetId, 100);
    this.el("data-tab").innerHTML = dataTableHtml(
      this.state.fields,
      preview.rows,
      preview.fields.map((f) => f.fid),
    );
  }

  async renderChart(): Promise<void> {
    if (!this.state.datasetId) return;
    const tab = this.state.active;
    const spec = st.activeSpec(this.state);
    const host = this.el("chart");
    try {
      const response = await this.client.render(tab, this.state.datasetId, spec);
      if (response.kind === "pivot") {
        this.pivotModels.set(tab, response.pivot);
        this.state = st.setAllExpansion(this.state, fullExpansion(response.pivot));
        this.paintPivot();
      } else {
        this.pivotModels.delete(tab);
        host.innerHTML = "";
        if (this.embed) await this.embed(host, response.chart);
      }
      this.el("violations").innerHTML = "";
    } catch (err) {
      if ((err as Error).name === "AbortError") return;
      if (err instanceof ApiFailure) {
        const items = err.payload.details.map((d) => `<li>${esc(d.code)}: ${esc(d.message)}</li>`);
        this.el("violations").innerHTML = `<ul class="toast">${items.join("") || esc(err.payload.message)}</ul>`;
        return;
      }
      throw err;
    }
  }

  paintPivot(): void {
    const model = this.pivotModels.get(this.state.active);
    if (!model) return;
    const expansion = this.state.tabs[this.state.active].expansion;
    this.el("chart").innerHTML = pivotHtml(model, expansion);
  }

  exportSpec(): string {
    return serializeSpec(st.activeSpec(this.state));
  }

  importSpecText(text: string): void {
    try {
      const spec: Spec = parseSpec(text);
      this.apply(st.importSpec(this.state, spec));
    } catch (err) {
      this.el("violations").innerHTML = `<ul class="toast"><li>${esc((err as Error).message)}</li></ul>`;
    }
  }

  private bind(): void {
    const root = this.root;

    root.addEventListener("dragstart", (event) => {
      const target = event.target as HTMLElement;
      const fieldEl = target.closest?.(".field") as HTMLElement | null;
      const chipEl = target.closest?.(".chip[data-shelf]") as HTMLElement | null;
      if (fieldEl?.dataset.fid) {
        this.state = st.startDrag(this.state, fieldEl.dataset.fid);
      } else if (chipEl) {
        const shelf = chipEl.dataset.shelf as Shelf;
        const index = Number(chipEl.dataset.index);
        const spec = st.activeSpec(this.state);
        const fid = (spec.channels as Record<string, { fid: string }[]>)[shelf]?.[index]?.fid;
        if (fid) this.state = st.startDrag(this.state, fid, { shelf: shelf as never, index });
      }
    });

    root.addEventListener("dragover", (event) => {
      if ((event.target as HTMLElement).closest?.(".shelf")) event.preventDefault();
    });

    root.addEventListener("drop", (event) => {
      const shelfEl = (event.target as HTMLElement).closest?.(".shelf") as HTMLElement | null;
      const drag = this.state.drag;
      if (!drag) return;
      event.preventDefault();
      if (shelfEl) {
        this.apply(st.dropOnShelf(this.state, drag.fid, shelfEl.dataset.shelf as Shelf));
      } else if (drag.from) {
        // dragged off any shelf: removal
        this.apply(st.removeFromShelf(this.state, drag.from.shelf, drag.from.index));
      }
    });

    root.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      if (target.matches("button.remove")) {
        this.apply(
          st.removeFromShelf(this.state, target.dataset.shelf as never, Number(target.dataset.index)),
        );
      } else if (target.matches("button.remove-filter")) {
        this.apply(st.removeFilter(this.state, Number(target.dataset.index)));
      } else if (target.matches("button.toggle")) {
        const axis = target.dataset.axis as "cols" | "rows";
        const path = JSON.parse(target.dataset.path ?? "[]") as Scalar[];
        this.apply(st.setExpanded(this.state, axis, path, target.dataset.expand === "1"), false);
        this.paintPivot(); // expansion is purely client-side
      } else if (target.id === "add-tab") {
        this.apply(st.addTab(this.state));
      } else if (target.matches("button.close-tab")) {
        this.apply(st.deleteTab(this.state, Number(target.dataset.tab)));
      } else if (target.matches(".tab, .tab-name")) {
        this.apply(st.selectTab(this.state, Number(target.dataset.tab)));
      } else if (target.id === "flt-apply") {
        this.applyFilterEditor();
      } else if (target.id === "export-btn") {
        this.download(`${st.activeSpec(this.state).name || "config"}.json`, this.exportSpec());
      }
    });

    root.addEventListener("dblclick", (event) => {
      const target = event.target as HTMLElement;
      if (target.matches(".tab-name")) {
        const index = Number(target.dataset.tab);
        const name = root.defaultView?.prompt?.("Tab name", this.state.tabs[index].spec.name);
        if (name) this.apply(st.renameTab(this.state, index, name));
      }
    });

    this.el("mark-picker").addEventListener("change", (event) => {
      this.apply(st.setMark(this.state, (event.target as HTMLSelectElement).value as Mark));
    });
    this.el("aggregated-toggle").addEventListener("change", () => {
      this.apply(st.toggleAggregated(this.state));
    });
    this.el("stack-picker").addEventListener("change", (event) => {
      this.apply(st.setStack(this.state, (event.target as HTMLSelectElement).value as Spec["stack"]));
    });
    this.el("palette-input").addEventListener("change", (event) => {
      this.apply(st.setPalette(this.state, (event.target as HTMLInputElement).value));
    });
    this.el("import-input").addEventListener("change", async (event) => {
      const input = event.target as HTMLInputElement;
      const file = input.files?.[0];
      if (file) this.importSpecText(await file.text());
      input.value = "";
    });
  }

  private applyFilterEditor(): void {
    const editor = this.state.filterEditor;
    if (!editor) return;
    const meta = this.state.fields.find((f) => f.fid === editor.fid);
    if (!meta) return;
    if (meta.analytic_type === "measure") {
      const lo = Number((this.el("flt-lo") as HTMLInputElement).value);
      const hi = Number((this.el("flt-hi") as HTMLInputElement).value);
      this.apply(st.setFilterRule(this.state, editor.index, { fid: editor.fid, range: [lo, hi] }));
      return;
    }
    const text = (this.el("flt-values") as HTMLInputElement).value;
    const values = text
      .split(",")
      .map((v) => v.trim())
      .filter((v) => v.length > 0)
      .map((v) => (meta.semantic_type === "ordinal" && v !== "" && !Number.isNaN(Number(v)) ? Number(v) : v));
    if (values.length) {
      this.apply(st.setFilterRule(this.state, editor.index, { fid: editor.fid, one_of: values }));
    }
  }

  private download(filename: string, text: string): void {
    const view = this.root.defaultView;
    if (!view) return;
    const blob = new view.Blob([text], { type: "application/json" });
    const url = view.URL.createObjectURL(blob);
    const link = this.root.createElement("a");
    link.href = url;
    link.download = filename;
    link.click();
    view.URL.revokeObjectURL(url);
  }
}
