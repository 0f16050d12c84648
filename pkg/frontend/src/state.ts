/** Pure UI state and gesture transitions.
 *
 * Every gesture is a (state, args) -> state function; replaying a
 * recorded gesture log reproduces the same specs. The state holds no
 * chart semantics: it only edits spec documents that the engine
 * interprets.
 */

import { emptySpec, normalizeOneOf } from "./serialize.js";
import {
  SINGLE_SLOT,
  type Aggregation,
  type Channel,
  type ComputedField,
  type FieldMeta,
  type FieldRef,
  type FilterRule,
  type Mark,
  type Scalar,
  type Shelf,
  type Spec,
} from "./types.js";

export interface PivotExpansion {
  cols: Scalar[][];
  rows: Scalar[][];
}

export interface TabState {
  spec: Spec;
  expansion: PivotExpansion;
}

export interface DragState {
  fid: string;
  from: { shelf: Channel; index: number } | null;
}

export interface FilterEditor {
  fid: string;
  index: number; // position in spec.filters being edited
}

export interface UiState {
  datasetId: string | null;
  fields: FieldMeta[];
  tabs: TabState[];
  active: number;
  drag: DragState | null;
  filterEditor: FilterEditor | null;
}

export function initialState(): UiState {
  return {
    datasetId: null,
    fields: [],
    tabs: [{ spec: emptySpec(), expansion: { cols: [], rows: [] } }],
    active: 0,
    drag: null,
    filterEditor: null,
  };
}

export function activeSpec(state: UiState): Spec {
  return state.tabs[state.active].spec;
}

function replaceSpec(state: UiState, spec: Spec): UiState {
  const tabs = state.tabs.map((tab, i) => (i === state.active ? { ...tab, spec } : tab));
  return { ...state, tabs };
}

export function fieldByFid(state: UiState, fid: string): FieldMeta | undefined {
  const meta = state.fields.find((f) => f.fid === fid);
  if (meta) return meta;
  const computed = activeSpec(state).computed.find((c) => c.out_fid === fid);
  if (!computed) return undefined;
  // transform outputs: logs behave as measures, bins as ordinal dimensions
  return computed.kind === "bin"
    ? { fid, name: fid, semantic_type: "ordinal", analytic_type: "dimension", distinct_count: 0 }
    : { fid, name: fid, semantic_type: "quantitative", analytic_type: "measure", distinct_count: 0 };
}

export function loadDataset(state: UiState, datasetId: string, fields: FieldMeta[]): UiState {
  return { ...state, datasetId, fields };
}

// --- tabs -----------------------------------------------------------------

export function addTab(state: UiState): UiState {
  const name = `Chart ${state.tabs.length + 1}`;
  const tabs = [...state.tabs, { spec: emptySpec(name), expansion: { cols: [], rows: [] } }];
  return { ...state, tabs, active: tabs.length - 1 };
}

export function deleteTab(state: UiState, index: number): UiState {
  if (state.tabs.length <= 1) return state;
  const tabs = state.tabs.filter((_, i) => i !== index);
  return { ...state, tabs, active: Math.min(state.active, tabs.length - 1) };
}

export function selectTab(state: UiState, index: number): UiState {
  return { ...state, active: Math.max(0, Math.min(index, state.tabs.length - 1)) };
}

export function renameTab(state: UiState, index: number, name: string): UiState {
  const tabs = state.tabs.map((tab, i) => (i === index ? { ...tab, spec: { ...tab.spec, name } } : tab));
  return { ...state, tabs };
}

// --- drag and drop ---------------------------------------------------------

export function startDrag(state: UiState, fid: string, from: DragState["from"] = null): UiState {
  return { ...state, drag: { fid, from } };
}

export function endDrag(state: UiState): UiState {
  return { ...state, drag: null };
}

function defaultRef(state: UiState, fid: string): FieldRef {
  const meta = fieldByFid(state, fid);
  const spec = activeSpec(state);
  if (spec.aggregated && meta?.analytic_type === "measure" && spec.mark !== "table") {
    return { fid, aggregation: "sum" };
  }
  return { fid, aggregation: "none" };
}

/** Drop a field onto a shelf: append on axes, replace on single-slot
 * shelves; dropping on filters opens the rule editor. */
export function dropOnShelf(state: UiState, fid: string, shelf: Shelf): UiState {
  if (state.drag?.from) {
    state = removeFromShelf(state, state.drag.from.shelf, state.drag.from.index);
  }
  if (shelf === "filters") {
    const meta = fieldByFid(state, fid);
    if (!meta || fieldIsComputed(state, fid)) return endDrag(state); // filters see dataset fields only
    const spec = activeSpec(state);
    const rule: FilterRule =
      meta.analytic_type === "measure"
        ? { fid, range: [meta.min ?? 0, meta.max ?? 0] }
        : { fid, one_of: [] };
    const filters = [...spec.filters, rule];
    const next = replaceSpec(state, { ...spec, filters });
    return endDrag({ ...next, filterEditor: { fid, index: filters.length - 1 } });
  }
  const spec = activeSpec(state);
  const ref = defaultRef(state, fid);
  const existing = spec.channels[shelf] ?? [];
  const refs = SINGLE_SLOT.includes(shelf) ? [ref] : [...existing, ref];
  return endDrag(replaceSpec(state, { ...spec, channels: { ...spec.channels, [shelf]: refs } }));
}

function fieldIsComputed(state: UiState, fid: string): boolean {
  return activeSpec(state).computed.some((c) => c.out_fid === fid);
}

export function removeFromShelf(state: UiState, shelf: Channel, index: number): UiState {
  const spec = activeSpec(state);
  const refs = [...(spec.channels[shelf] ?? [])];
  refs.splice(index, 1);
  const channels = { ...spec.channels };
  if (refs.length) channels[shelf] = refs;
  else delete channels[shelf];
  return replaceSpec(state, { ...spec, channels });
}

export function removeFilter(state: UiState, index: number): UiState {
  const spec = activeSpec(state);
  return replaceSpec(state, { ...spec, filters: spec.filters.filter((_, i) => i !== index) });
}

// --- spec editing -----------------------------------------------------------

export function setMark(state: UiState, mark: Mark): UiState {
  return replaceSpec(state, { ...activeSpec(state), mark });
}

export function toggleAggregated(state: UiState): UiState {
  const spec = activeSpec(state);
  const aggregated = !spec.aggregated;
  const channels: Spec["channels"] = {};
  for (const [ch, refs] of Object.entries(spec.channels)) {
    channels[ch as Channel] = refs.map((ref) => {
      const meta = state.fields.find((f) => f.fid === ref.fid);
      if (aggregated && meta?.analytic_type === "measure" && ref.aggregation === "none") {
        return { ...ref, aggregation: "sum" as Aggregation };
      }
      if (!aggregated) return { ...ref, aggregation: "none" as Aggregation };
      return ref;
    });
  }
  return replaceSpec(state, { ...spec, aggregated, channels });
}

export function setAggregation(state: UiState, shelf: Channel, index: number, aggregation: Aggregation): UiState {
  const spec = activeSpec(state);
  const refs = [...(spec.channels[shelf] ?? [])];
  if (!refs[index]) return state;
  refs[index] = { ...refs[index], aggregation };
  return replaceSpec(state, { ...spec, channels: { ...spec.channels, [shelf]: refs } });
}

export function setFilterRule(state: UiState, index: number, rule: FilterRule): UiState {
  const spec = activeSpec(state);
  const filters = spec.filters.map((f, i) =>
    i === index
      ? rule.one_of !== undefined
        ? { fid: rule.fid, one_of: normalizeOneOf(rule.one_of) }
        : rule
      : f,
  );
  return { ...replaceSpec(state, { ...spec, filters }), filterEditor: null };
}

export function setStack(state: UiState, stack: Spec["stack"]): UiState {
  return replaceSpec(state, { ...activeSpec(state), stack });
}

export function setSort(state: UiState, sort: Spec["sort"]): UiState {
  return replaceSpec(state, { ...activeSpec(state), sort });
}

export function setPalette(state: UiState, palette: string): UiState {
  const spec = activeSpec(state);
  return replaceSpec(state, { ...spec, config: { ...spec.config, palette } });
}

export function setLayout(state: UiState, layout: Spec["config"]["layout"]): UiState {
  const spec = activeSpec(state);
  return replaceSpec(state, { ...spec, config: { ...spec.config, layout } });
}

export function addComputed(state: UiState, field: ComputedField): UiState {
  const spec = activeSpec(state);
  if (spec.computed.some((c) => c.out_fid === field.out_fid)) return state;
  return replaceSpec(state, { ...spec, computed: [...spec.computed, field] });
}

export function setTableValues(state: UiState, refs: FieldRef[]): UiState {
  const spec = activeSpec(state);
  const style = { ...spec.config.style };
  if (refs.length) {
    style.table_values = refs.map((r) => ({ fid: r.fid, aggregation: r.aggregation }));
  } else {
    delete style.table_values;
  }
  return replaceSpec(state, { ...spec, config: { ...spec.config, style } });
}

/** Replace the active tab's spec wholesale (import path). */
export function importSpec(state: UiState, spec: Spec): UiState {
  return replaceSpec(state, spec);
}

// --- pivot expansion --------------------------------------------------------

function samePath(a: Scalar[], b: Scalar[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

export function setExpanded(state: UiState, axis: "cols" | "rows", path: Scalar[], expanded: boolean): UiState {
  const tabs = state.tabs.map((tab, i) => {
    if (i !== state.active) return tab;
    const current = tab.expansion[axis].filter((p) => !samePath(p, path));
    const next = expanded ? [...current, path] : current;
    return { ...tab, expansion: { ...tab.expansion, [axis]: next } };
  });
  return { ...state, tabs };
}

export function isExpanded(state: UiState, axis: "cols" | "rows", path: Scalar[]): boolean {
  return state.tabs[state.active].expansion[axis].some((p) => samePath(p, path));
}

export function setAllExpansion(state: UiState, expansion: PivotExpansion): UiState {
  const tabs = state.tabs.map((tab, i) => (i === state.active ? { ...tab, expansion } : tab));
  return { ...state, tabs };
}
