/** HTML renderers (pure string builders, testable without a browser). */

import { pivotGrid, type PivotGrid } from "./pivot.js";
import type { PivotExpansion, UiState } from "./state.js";
import type { FieldMeta, PivotModel, Scalar, Spec } from "./types.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const TYPE_ICONS: Record<FieldMeta["semantic_type"], string> = {
  nominal: "Abc",
  ordinal: "1-2-3",
  quantitative: "#",
  temporal: "⏱",
};

export function formatScalar(value: Scalar): string {
  if (value === null) return "(null)";
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value) : String(Math.round(value * 100) / 100);
  }
  return String(value);
}

/** Dimensions and measures in separate sections, draggable entries. */
export function fieldListHtml(fields: FieldMeta[], computed: string[] = []): string {
  if (fields.length === 0 && computed.length === 0) {
    return '<p class="empty">Upload or pick a dataset to see its fields.</p>';
  }
  const entry = (f: FieldMeta) =>
    `<li class="field ${f.analytic_type}" draggable="true" data-fid="${esc(f.fid)}">` +
    `<span class="icon">${TYPE_ICONS[f.semantic_type]}</span>${esc(f.name)}</li>`;
  const dims = fields.filter((f) => f.analytic_type === "dimension");
  const meas = fields.filter((f) => f.analytic_type === "measure");
  const computedItems = computed
    .map(
      (fid) =>
        `<li class="field computed" draggable="true" data-fid="${esc(fid)}">` +
        `<span class="icon">fx</span>${esc(fid)}</li>`,
    )
    .join("");
  return (
    `<h3>Dimensions</h3><ul class="fields">${dims.map(entry).join("")}</ul>` +
    `<h3>Measures</h3><ul class="fields">${meas.map(entry).join("")}${computedItems}</ul>`
  );
}

export function shelvesHtml(spec: Spec): string {
  const shelfRow = (shelf: string, label: string) => {
    const refs = (spec.channels as Record<string, { fid: string; aggregation: string }[]>)[shelf] ?? [];
    const chips = refs
      .map((ref, i) => {
        const agg = ref.aggregation !== "none" ? `${ref.aggregation}(${esc(ref.fid)})` : esc(ref.fid);
        return (
          `<span class="chip" draggable="true" data-shelf="${shelf}" data-index="${i}">` +
          `${agg}<button class="remove" data-shelf="${shelf}" data-index="${i}">×</button></span>`
        );
      })
      .join("");
    return `<div class="shelf" data-shelf="${shelf}"><label>${label}</label>${chips}</div>`;
  };
  const filters = spec.filters
    .map((f, i) => {
      const rule = f.one_of !== undefined ? `in {${f.one_of.map(formatScalar).join(", ")}}` : `[${f.range![0]}, ${f.range![1]}]`;
      return (
        `<span class="chip filter" data-index="${i}">${esc(f.fid)} ${esc(rule)}` +
        `<button class="remove-filter" data-index="${i}">×</button></span>`
      );
    })
    .join("");
  return (
    shelfRow("x", "X-Axis") +
    shelfRow("y", "Y-Axis") +
    shelfRow("color", "Color") +
    shelfRow("size", "Size") +
    shelfRow("shape", "Shape") +
    shelfRow("opacity", "Opacity") +
    `<div class="shelf" data-shelf="filters"><label>Filters</label>${filters}</div>`
  );
}

export function tabBarHtml(state: UiState): string {
  const tabs = state.tabs
    .map((tab, i) => {
      const active = i === state.active ? " active" : "";
      return (
        `<span class="tab${active}" data-tab="${i}">` +
        `<span class="tab-name" data-tab="${i}">${esc(tab.spec.name)}</span>` +
        `<button class="close-tab" data-tab="${i}">×</button></span>`
      );
    })
    .join("");
  return `${tabs}<button id="add-tab">+</button>`;
}

export function dataTableHtml(fields: FieldMeta[], rows: Scalar[][], fids: string[]): string {
  const head = fids.map((fid) => `<th>${esc(fid)}</th>`).join("");
  const body = rows
    .map((row) => `<tr>${row.map((v) => `<td>${esc(formatScalar(v))}</td>`).join("")}</tr>`)
    .join("");
  const meta = fields
    .map(
      (f) =>
        `<tr><td>${esc(f.fid)}</td><td>${esc(f.name)}</td><td>${f.semantic_type}</td>` +
        `<td>${f.analytic_type}</td><td>${f.distinct_count}</td></tr>`,
    )
    .join("");
  return (
    `<h3>Fields</h3><table class="meta"><tr><th>fid</th><th>name</th><th>semantic</th><th>analytic</th><th>distinct</th></tr>${meta}</table>` +
    `<h3>First ${rows.length} rows</h3><table class="preview"><tr>${head}</tr>${body}</table>`
  );
}

function toggleButton(axis: "cols" | "rows", path: Scalar[], expand: boolean): string {
  const glyph = expand ? "+" : "−";
  return (
    `<button class="toggle" data-axis="${axis}" data-path='${esc(JSON.stringify(path))}'` +
    ` data-expand="${expand ? 1 : 0}">${glyph}</button>`
  );
}

/** Pivot table with collapse/expand toggles on internal headers. */
export function pivotHtml(model: PivotModel, expansion: PivotExpansion): string {
  const grid: PivotGrid = pivotGrid(model, expansion);
  const nm = model.measures.length;
  const colDepth = Math.max(1, ...grid.colLeaves.map((l) => l.path.length));
  const rowDepth = Math.max(0, ...grid.rowLeaves.map((l) => l.path.length));

  const headerRows: string[] = [];
  for (let depth = 0; depth < colDepth; depth++) {
    const cells: string[] = [];
    if (depth === 0 && rowDepth > 0) {
      cells.push(`<th rowspan="${colDepth + 1}" colspan="${rowDepth}"></th>`);
    }
    let i = 0;
    while (i < grid.colLeaves.length) {
      const leaf = grid.colLeaves[i];
      if (leaf.path.length <= depth) {
        i += 1; // ended at a shallower level; covered by its rowspan
        continue;
      }
      const prefix = leaf.path.slice(0, depth + 1);
      const prefixKey = JSON.stringify(prefix);
      let span = 0;
      let j = i;
      while (
        j < grid.colLeaves.length &&
        grid.colLeaves[j].path.length > depth &&
        JSON.stringify(grid.colLeaves[j].path.slice(0, depth + 1)) === prefixKey
      ) {
        span += 1;
        j += 1;
      }
      const endsHere = leaf.path.length === depth + 1;
      const label = esc(formatScalar(prefix[depth]));
      if (endsHere) {
        // a true leaf or a collapsed subtree: stretch to the measure row
        const button = leaf.collapsed ? toggleButton("cols", prefix, true) : "";
        const rowspan = colDepth - depth > 1 ? ` rowspan="${colDepth - depth}"` : "";
        cells.push(`<th${rowspan} colspan="${span * nm}">${label}${button}</th>`);
      } else {
        cells.push(`<th colspan="${span * nm}">${label}${toggleButton("cols", prefix, false)}</th>`);
      }
      i = j;
    }
    headerRows.push(`<tr>${cells.join("")}</tr>`);
  }
  const measureCells: string[] = [];
  if (colDepth === 0 && rowDepth > 0) measureCells.push(`<th colspan="${rowDepth}"></th>`);
  for (const _leaf of grid.colLeaves) {
    for (const m of model.measures) measureCells.push(`<th>${esc(m)}</th>`);
  }
  headerRows.push(`<tr>${measureCells.join("")}</tr>`);

  const bodyRows: string[] = [];
  const emitted = new Set<string>();
  grid.rowLeaves.forEach((rowLeaf, r) => {
    const cells: string[] = [];
    for (let depth = 0; depth < rowLeaf.path.length; depth++) {
      const prefix = rowLeaf.path.slice(0, depth + 1);
      const key = JSON.stringify(prefix);
      if (emitted.has(key)) continue;
      emitted.add(key);
      const span = grid.rowLeaves.filter(
        (other) => JSON.stringify(other.path.slice(0, depth + 1)) === key,
      ).length;
      const isLeafHere = rowLeaf.path.length === depth + 1;
      const toggler =
        isLeafHere && rowLeaf.collapsed
          ? toggleButton("rows", prefix, true)
          : !isLeafHere
            ? toggleButton("rows", prefix, false)
            : "";
      const colspan = isLeafHere && rowLeaf.path.length < rowDepth ? ` colspan="${rowDepth - depth}"` : "";
      cells.push(`<th rowspan="${span}"${colspan}>${esc(formatScalar(prefix[depth]))}${toggler}</th>`);
    }
    if (rowLeaf.path.length === 0 && rowDepth > 0) {
      cells.push(`<th colspan="${rowDepth}"></th>`);
    }
    grid.values[r].forEach((value) => {
      cells.push(`<td>${value === null ? "" : esc(formatScalar(value))}</td>`);
    });
    bodyRows.push(`<tr>${cells.join("")}</tr>`);
  });

  return `<table class="pivot">${headerRows.join("")}${bodyRows.join("")}</table>`;
}
