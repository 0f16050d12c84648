/** Canonical spec serialization, byte-compatible with the engine.
 *
 * Canonical form: compact separators, fixed schema key order, integral
 * numbers printed without a fraction part, one_of sets sorted (nulls,
 * then numbers, then strings), style keys sorted.
 */

import {
  CHANNELS,
  type Channel,
  type FieldRef,
  type FilterRule,
  type Scalar,
  type Spec,
} from "./types.js";

const MAX_EXACT_INT = 2 ** 53;

/** Python-repr-compatible float text (the engine's shortest roundtrip form). */
export function canonicalNumber(value: number): string {
  if (Number.isInteger(value) && Math.abs(value) <= MAX_EXACT_INT) {
    // -0 collapses to 0, as on the engine side
    return String(value + 0);
  }
  const plain = String(value);
  if (!plain.includes("e") && !plain.includes("E")) {
    // positional notation zones agree except |x| < 1e-4, where the
    // engine switches to exponent form earlier than JS does
    if (Math.abs(value) >= 1e-4 || value === 0) return plain;
    return toPythonExponent(value.toExponential());
  }
  return toPythonExponent(plain);
}

function toPythonExponent(text: string): string {
  const [mantissa, exp] = text.split(/[eE]/);
  const n = parseInt(exp, 10);
  const sign = n < 0 ? "-" : "+";
  const digits = String(Math.abs(n)).padStart(2, "0");
  const m = mantissa.endsWith(".0") ? mantissa.slice(0, -2) : mantissa;
  return `${m}e${sign}${digits}`;
}

function writeString(value: string): string {
  return JSON.stringify(value);
}

export function canonicalJson(value: unknown): string {
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") return canonicalNumber(value);
  if (typeof value === "string") return writeString(value);
  if (Array.isArray(value)) return `[${value.map(canonicalJson).join(",")}]`;
  const entries = Object.entries(value as Record<string, unknown>);
  return `{${entries.map(([k, v]) => `${writeString(k)}:${canonicalJson(v)}`).join(",")}}`;
}

function sortToken(value: Scalar): [number, number, string] {
  if (value === null) return [0, 0, ""];
  if (typeof value === "number") return [1, value, ""];
  return [2, 0, value];
}

export function normalizeOneOf(values: Scalar[]): Scalar[] {
  const unique: Scalar[] = [];
  for (const v of values) {
    if (!unique.some((u) => u === v)) unique.push(v);
  }
  return unique.sort((a, b) => {
    const [ta, na, sa] = sortToken(a);
    const [tb, nb, sb] = sortToken(b);
    if (ta !== tb) return ta - tb;
    if (na !== nb) return na - nb;
    return sa < sb ? -1 : sa > sb ? 1 : 0;
  });
}

function refJson(ref: FieldRef): Record<string, unknown> {
  return ref.aggregation === "none" ? { fid: ref.fid } : { fid: ref.fid, aggregation: ref.aggregation };
}

function filterJson(rule: FilterRule): Record<string, unknown> {
  if (rule.one_of !== undefined) return { fid: rule.fid, one_of: normalizeOneOf(rule.one_of) };
  return { fid: rule.fid, range: rule.range };
}

/** Schema-ordered plain document for a spec (the serializer's input). */
export function specDocument(spec: Spec): Record<string, unknown> {
  const channels: Record<string, unknown> = {};
  for (const ch of CHANNELS) {
    const refs = spec.channels[ch];
    if (refs && refs.length) channels[ch] = refs.map(refJson);
  }
  const doc: Record<string, unknown> = {
    version: spec.version,
    name: spec.name,
    mark: spec.mark,
    aggregated: spec.aggregated,
    channels,
    computed: spec.computed.map((c) =>
      c.kind === "bin"
        ? { out_fid: c.out_fid, source_fid: c.source_fid, kind: c.kind, k: c.k }
        : { out_fid: c.out_fid, source_fid: c.source_fid, kind: c.kind },
    ),
    filters: spec.filters.map(filterJson),
  };
  if (spec.sort !== null) doc.sort = { fid: spec.sort.fid, direction: spec.sort.direction };
  doc.stack = spec.stack;
  const style: Record<string, unknown> = {};
  for (const key of Object.keys(spec.config.style).sort()) style[key] = spec.config.style[key];
  doc.config = {
    coord: spec.config.coord,
    layout: spec.config.layout === null ? "auto" : { w: spec.config.layout.w, h: spec.config.layout.h },
    palette: spec.config.palette,
    style,
  };
  return doc;
}

export function serializeSpec(spec: Spec): string {
  return canonicalJson(specDocument(spec));
}

export function emptySpec(name = "Chart 1"): Spec {
  return {
    version: 1,
    name,
    mark: "auto",
    aggregated: true,
    channels: {},
    computed: [],
    filters: [],
    sort: null,
    stack: "none",
    config: { coord: "generic", layout: null, palette: "default", style: {} },
  };
}

const AGGS = new Set([
  "none", "sum", "mean", "count", "min", "max", "median", "variance", "stddev", "count_distinct",
]);
const MARK_SET = new Set([
  "auto", "bar", "line", "area", "point", "circle", "tick", "rect", "arc", "text", "table",
]);

class ParseFailure extends Error {
  constructor(public path: string, reason: string) {
    super(`${path}: ${reason}`);
  }
}

function expect(cond: boolean, path: string, reason: string): asserts cond {
  if (!cond) throw new ParseFailure(path, reason);
}

const ISO_DATE = /^(\d{4})-(\d{2})-(\d{2})(T(\d{2}):(\d{2}):(\d{2})Z?)?$/;

export function isoToMillis(text: string): number | null {
  const m = ISO_DATE.exec(text);
  if (!m) return null;
  const millis = Date.UTC(
    Number(m[1]), Number(m[2]) - 1, Number(m[3]),
    Number(m[5] ?? 0), Number(m[6] ?? 0), Number(m[7] ?? 0),
  );
  // Date.UTC silently rolls over bad days/months; verify the roundtrip
  const check = new Date(millis);
  if (check.getUTCFullYear() !== Number(m[1]) || check.getUTCMonth() + 1 !== Number(m[2]) || check.getUTCDate() !== Number(m[3])) {
    return null;
  }
  return millis;
}

function parseScalar(value: unknown, path: string): Scalar {
  if (value === null || typeof value === "string") return value;
  if (typeof value === "boolean") return value ? "true" : "false";
  expect(typeof value === "number" && Number.isFinite(value), path, "values must be scalars");
  return value;
}

function parseRangeEndpoint(value: unknown, path: string): number {
  if (typeof value === "string") {
    const millis = isoToMillis(value);
    expect(millis !== null, path, "range endpoints must be numbers or ISO-8601 dates");
    return millis;
  }
  expect(typeof value === "number" && Number.isFinite(value), path, "range endpoints must be numbers");
  return value;
}

/** Structural parse + normalization, mirroring the engine's reader. */
export function parseSpec(text: string): Spec {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new ParseFailure("$", `invalid JSON: ${(err as Error).message}`);
  }
  expect(typeof doc === "object" && doc !== null && !Array.isArray(doc), "$", "spec must be an object");
  const record = doc as Record<string, unknown>;
  const allowed = new Set([
    "version", "name", "mark", "aggregated", "channels", "computed", "filters", "sort", "stack", "config",
  ]);
  for (const key of Object.keys(record)) expect(allowed.has(key), key, "unknown key");
  expect(record.version === 1, "version", "unsupported version");
  expect(typeof record.name === "string", "name", "name must be a string");
  expect(typeof record.mark === "string" && MARK_SET.has(record.mark), "mark", "unknown mark");
  expect(typeof record.aggregated === "boolean", "aggregated", "must be a boolean");

  const channels: Spec["channels"] = {};
  const channelsDoc = record.channels;
  expect(typeof channelsDoc === "object" && channelsDoc !== null, "channels", "must be an object");
  for (const [ch, refsDoc] of Object.entries(channelsDoc as Record<string, unknown>)) {
    expect((CHANNELS as string[]).includes(ch), `channels.${ch}`, "unknown channel");
    expect(Array.isArray(refsDoc), `channels.${ch}`, "must be an array");
    const refs: FieldRef[] = refsDoc.map((r, i) => {
      expect(typeof r === "object" && r !== null, `channels.${ch}[${i}]`, "must be an object");
      const rec = r as Record<string, unknown>;
      expect(typeof rec.fid === "string" && rec.fid.length > 0, `channels.${ch}[${i}].fid`, "bad fid");
      const agg = (rec.aggregation ?? "none") as string;
      expect(AGGS.has(agg), `channels.${ch}[${i}].aggregation`, "unknown aggregation");
      return { fid: rec.fid, aggregation: agg as FieldRef["aggregation"] };
    });
    if (["color", "size", "shape", "opacity"].includes(ch)) {
      expect(refs.length <= 1, `channels.${ch}`, "channel holds at most one field");
    }
    if (refs.length) channels[ch as Channel] = refs;
  }

  expect(Array.isArray(record.computed), "computed", "must be an array");
  const computed = (record.computed as unknown[]).map((c, i) => {
    const rec = c as Record<string, unknown>;
    expect(typeof rec.out_fid === "string" && typeof rec.source_fid === "string", `computed[${i}]`, "bad fids");
    expect(rec.kind === "log2" || rec.kind === "log10" || rec.kind === "bin", `computed[${i}].kind`, "unknown kind");
    if (rec.kind === "bin") {
      expect(typeof rec.k === "number" && Number.isInteger(rec.k) && rec.k > 0, `computed[${i}].k`, "bad k");
      return { out_fid: rec.out_fid, source_fid: rec.source_fid, kind: "bin" as const, k: rec.k };
    }
    return { out_fid: rec.out_fid, source_fid: rec.source_fid, kind: rec.kind as "log2" | "log10" };
  });

  expect(Array.isArray(record.filters), "filters", "must be an array");
  const filters = (record.filters as unknown[]).map((f, i) => {
    const rec = f as Record<string, unknown>;
    expect(typeof rec.fid === "string" && rec.fid.length > 0, `filters[${i}].fid`, "bad fid");
    const hasOneOf = "one_of" in rec;
    const hasRange = "range" in rec;
    expect(hasOneOf !== hasRange, `filters[${i}]`, "exactly one of one_of/range");
    if (hasOneOf) {
      expect(Array.isArray(rec.one_of) && rec.one_of.length > 0, `filters[${i}].one_of`, "must be non-empty");
      const values = (rec.one_of as unknown[]).map((v, j) => parseScalar(v, `filters[${i}].one_of[${j}]`));
      return { fid: rec.fid, one_of: normalizeOneOf(values) };
    }
    expect(Array.isArray(rec.range) && rec.range.length === 2, `filters[${i}].range`, "must be [lo, hi]");
    const lo = parseRangeEndpoint((rec.range as unknown[])[0], `filters[${i}].range[0]`);
    const hi = parseRangeEndpoint((rec.range as unknown[])[1], `filters[${i}].range[1]`);
    expect(lo <= hi, `filters[${i}].range`, "lo must be <= hi");
    return { fid: rec.fid, range: [lo, hi] as [number, number] };
  });

  let sort: Spec["sort"] = null;
  if (record.sort !== undefined && record.sort !== null) {
    const rec = record.sort as Record<string, unknown>;
    expect(typeof rec.fid === "string", "sort.fid", "bad fid");
    expect(rec.direction === "asc" || rec.direction === "desc", "sort.direction", "bad direction");
    sort = { fid: rec.fid, direction: rec.direction };
  }

  expect(record.stack === "stack" || record.stack === "normalize" || record.stack === "none", "stack", "bad stack");

  const configDoc = record.config as Record<string, unknown>;
  expect(typeof configDoc === "object" && configDoc !== null, "config", "must be an object");
  const coord = (configDoc.coord ?? "generic") as string;
  expect(coord === "generic" || coord === "geographic", "config.coord", "bad coord");
  let layout: Spec["config"]["layout"] = null;
  if (configDoc.layout !== undefined && configDoc.layout !== "auto") {
    const rec = configDoc.layout as Record<string, unknown>;
    expect(
      typeof rec === "object" && rec !== null && typeof rec.w === "number" && typeof rec.h === "number",
      "config.layout", 'must be "auto" or {w, h}',
    );
    layout = { w: rec.w as number, h: rec.h as number };
  }
  const palette = (configDoc.palette ?? "default") as string;
  expect(typeof palette === "string", "config.palette", "must be a string");
  const style = (configDoc.style ?? {}) as Record<string, unknown>;
  expect(typeof style === "object" && style !== null && !Array.isArray(style), "config.style", "must be an object");

  return {
    version: 1,
    name: record.name,
    mark: record.mark as Spec["mark"],
    aggregated: record.aggregated,
    channels,
    computed,
    filters,
    sort,
    stack: record.stack,
    config: { coord: coord as "generic" | "geographic", layout, palette, style },
  };
}
