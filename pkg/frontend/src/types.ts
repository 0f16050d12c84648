/** JSON shapes shared with the engine's HTTP API. */

export type Channel = "x" | "y" | "color" | "size" | "shape" | "opacity";
export type Shelf = Channel | "filters";

export const CHANNELS: Channel[] = ["x", "y", "color", "size", "shape", "opacity"];
export const SINGLE_SLOT: Channel[] = ["color", "size", "shape", "opacity"];

export type Aggregation =
  | "none" | "sum" | "mean" | "count" | "min" | "max"
  | "median" | "variance" | "stddev" | "count_distinct";

export type Mark =
  | "auto" | "bar" | "line" | "area" | "point" | "circle"
  | "tick" | "rect" | "arc" | "text" | "table";

export const MARKS: Mark[] = [
  "auto", "bar", "line", "area", "point", "circle", "tick", "rect", "arc", "text", "table",
];

export type Scalar = string | number | null;

export interface FieldMeta {
  fid: string;
  name: string;
  semantic_type: "nominal" | "ordinal" | "quantitative" | "temporal";
  analytic_type: "dimension" | "measure";
  distinct_count: number;
  min?: number;
  max?: number;
}

export interface FieldRef {
  fid: string;
  aggregation: Aggregation;
}

export interface ComputedField {
  out_fid: string;
  source_fid: string;
  kind: "log2" | "log10" | "bin";
  k?: number;
}

export interface FilterRule {
  fid: string;
  one_of?: Scalar[];
  range?: [number, number];
}

export interface SortRule {
  fid: string;
  direction: "asc" | "desc";
}

export interface SpecConfig {
  coord: "generic" | "geographic";
  layout: null | { w: number; h: number };
  palette: string;
  style: Record<string, unknown>;
}

/** Mirror of the engine's chart spec (document schema v1). */
export interface Spec {
  version: 1;
  name: string;
  mark: Mark;
  aggregated: boolean;
  channels: Partial<Record<Channel, FieldRef[]>>;
  computed: ComputedField[];
  filters: FilterRule[];
  sort: SortRule | null;
  stack: "stack" | "normalize" | "none";
  config: SpecConfig;
}

export interface ViewColumn {
  fid: string;
  kind: "float64" | "utf8" | "temporal";
  bin_min?: number;
  bin_width?: number;
}

export interface ViewTable {
  fields: ViewColumn[];
  rows: Scalar[][];
}

export interface QueryResponse extends ViewTable {
  workflow: unknown;
}

export interface PivotQueryResponse {
  rollups: ViewTable[];
  workflows: unknown[];
}

export interface PivotNode {
  value: Scalar;
  depth: number;
  leaf_span: number;
  children: PivotNode[];
}

export interface PivotCell {
  col: Scalar[];
  row: Scalar[];
  values: (number | null)[];
}

export interface PivotModel {
  col_tree: PivotNode[];
  row_tree: PivotNode[];
  measures: string[];
  cells: PivotCell[];
}

export type RenderResponse =
  | { kind: "chart"; chart: Record<string, unknown> }
  | { kind: "pivot"; pivot: PivotModel };

export interface ApiError {
  code: string;
  message: string;
  details: { code: string; path: string; message: string }[];
}
