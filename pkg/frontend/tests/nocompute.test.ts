// @vitest-environment happy-dom
/** Network-interception test: every number the UI shows originates from a
 * /query-or-/render response, never from client-side aggregation. The
 * stubbed responses carry sentinel values that cannot be derived from the
 * raw preview rows the UI also receives. */

import { beforeEach, describe, expect, it, vi } from "vitest";

import { App } from "../src/app.js";
import { Client } from "../src/api.js";
import type { FieldMeta } from "../src/types.js";
import { fixtureJson, repoSpecText } from "./helpers.js";

const FIELDS = fixtureJson<FieldMeta[]>("fields");

const SENTINEL_A = 999_983; // primes, absent from the preview rows
const SENTINEL_B = 999_979;

const PAGE = `
<header><button id="export-btn"></button><label><input type="file" id="import-input"></label></header>
<div id="tab-bar"></div>
<div id="field-list"></div>
<div id="controls">
  <select id="mark-picker"><option>auto</option><option>table</option><option>line</option></select>
  <input type="checkbox" id="aggregated-toggle">
  <select id="stack-picker"><option>none</option><option>stack</option><option>normalize</option></select>
  <input id="palette-input">
</div>
<div id="shelves"></div><div id="filter-editor"></div><div id="violations"></div>
<div id="chart"></div><div id="data-tab"></div>
`;

interface Call {
  url: string;
  body: string | null;
}

function stubFetch(calls: Call[]): typeof fetch {
  return vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, body: (init?.body as string) ?? null });
    const json = (payload: unknown) =>
      new Response(JSON.stringify(payload), { status: 200, headers: { "content-type": "application/json" } });
    if (url.endsWith("/api/datasets")) {
      return json({ datasets: [{ id: "ds_1", name: "superstore", row_count: 2 }] });
    }
    if (url.endsWith("/api/datasets/ds_1")) {
      return json({ id: "ds_1", name: "superstore", fields: FIELDS });
    }
    if (url.includes("/rows")) {
      // raw preview data: deliberately tiny values
      return json({
        fields: [{ fid: "region", kind: "utf8" }, { fid: "sales", kind: "float64" }],
        rows: [["North Asia", 1], ["Oceania", 2]],
      });
    }
    if (url.endsWith("/query")) {
      return json({
        fields: [
          { fid: "region", kind: "utf8" },
          { fid: "sales_sum", kind: "float64" },
        ],
        rows: [["North Asia", SENTINEL_A], ["Oceania", SENTINEL_B]],
        workflow: { steps: [] },
      });
    }
    if (url.endsWith("/render")) {
      return json({
        kind: "pivot",
        pivot: {
          col_tree: [
            { value: "North Asia", depth: 1, leaf_span: 1, children: [] },
            { value: "Oceania", depth: 1, leaf_span: 1, children: [] },
          ],
          row_tree: [],
          measures: ["sales_sum"],
          cells: [
            { col: ["North Asia"], row: [], values: [SENTINEL_A] },
            { col: ["Oceania"], row: [], values: [SENTINEL_B] },
            { col: [], row: [], values: [SENTINEL_A + SENTINEL_B] },
          ],
        },
      });
    }
    return new Response("{}", { status: 404 });
  }) as unknown as typeof fetch;
}

describe("zero client-side aggregation", () => {
  let calls: Call[];

  beforeEach(() => {
    document.body.innerHTML = PAGE;
    calls = [];
    vi.stubGlobal("fetch", stubFetch(calls));
  });

  it("renders only numbers delivered by the API", async () => {
    const app = new App(document, new Client(""));
    await app.start();
    await vi.waitFor(() => {
      if (!document.getElementById("chart")!.innerHTML.includes("pivot")) throw new Error("not rendered");
    });
    const chartHtml = document.getElementById("chart")!.innerHTML;
    expect(chartHtml).toContain(String(SENTINEL_A));
    expect(chartHtml).toContain(String(SENTINEL_B));

    // every number in the rendered table exists in some response payload,
    // i.e. nothing was computed client-side
    const shown = [...chartHtml.matchAll(/<td>([-\d.]+)<\/td>/g)].map((m) => Number(m[1]));
    expect(shown.length).toBeGreaterThan(0);
    const delivered = new Set([SENTINEL_A, SENTINEL_B, SENTINEL_A + SENTINEL_B]);
    for (const value of shown) {
      expect(delivered.has(value)).toBe(true);
    }
    // ... and the raw preview values (1, 2) were never aggregated into view
    expect(shown).not.toContain(1);
    expect(shown).not.toContain(3);
  });

  it("sends canonical spec bytes to the API", async () => {
    const app = new App(document, new Client(""));
    await app.start();
    await vi.waitFor(() => {
      if (!calls.some((c) => c.url.endsWith("/render"))) throw new Error("no render call");
    });
    const render = calls.find((c) => c.url.endsWith("/render"))!;
    expect(render.body).toBe(repoSpecText("empty"));
  });

  it("abortable latest-wins query channel per tab", async () => {
    const { parseSpec } = await import("../src/serialize.js");
    const client = new Client("");
    const spec = parseSpec(repoSpecText("empty"));
    const first = client.render(0, "ds_1", spec);
    const second = client.render(0, "ds_1", spec);
    const settled = await Promise.allSettled([first, second]);
    expect(settled[1].status).toBe("fulfilled");
  });
});
