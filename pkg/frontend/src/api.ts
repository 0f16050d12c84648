/** HTTP client for the engine. At most one in-flight query per tab;
 * newer requests cancel older ones (latest wins). */

import { serializeSpec, specDocument } from "./serialize.js";
import type {
  ApiError,
  FieldMeta,
  PivotQueryResponse,
  QueryResponse,
  RenderResponse,
  Spec,
  ViewTable,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(public payload: ApiError, public status: number) {
    super(payload.message);
  }
}

async function parseResponse<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let payload: ApiError;
    try {
      payload = (await resp.json()) as ApiError;
    } catch {
      payload = { code: "http_error", message: resp.statusText, details: [] };
    }
    throw new ApiFailure(payload, resp.status);
  }
  return (await resp.json()) as T;
}

export class Client {
  private inflight = new Map<number, AbortController>();

  constructor(private base: string = "") {}

  async datasets(): Promise<{ id: string; name: string; row_count: number }[]> {
    const resp = await fetch(`${this.base}/api/datasets`);
    return (await parseResponse<{ datasets: { id: string; name: string; row_count: number }[] }>(resp)).datasets;
  }

  async datasetInfo(id: string): Promise<{ id: string; name: string; fields: FieldMeta[] }> {
    return parseResponse(await fetch(`${this.base}/api/datasets/${id}`));
  }

  async rows(id: string, limit = 100): Promise<ViewTable> {
    return parseResponse(await fetch(`${this.base}/api/datasets/${id}/rows?limit=${limit}`));
  }

  async upload(name: string, file: File): Promise<{ id: string; fields: FieldMeta[] }> {
    const form = new FormData();
    form.append("file", file);
    const resp = await fetch(`${this.base}/api/datasets?name=${encodeURIComponent(name)}`, {
      method: "POST",
      body: form,
    });
    return parseResponse(resp);
  }

  /** Latest-wins per tab: aborts the previous request for the same tab. */
  private tabFetch(tab: number, url: string, spec: Spec): Promise<Response> {
    this.inflight.get(tab)?.abort();
    const controller = new AbortController();
    this.inflight.set(tab, controller);
    return fetch(url, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: serializeSpec(spec),
      signal: controller.signal,
    });
  }

  async query(tab: number, datasetId: string, spec: Spec): Promise<QueryResponse | PivotQueryResponse> {
    const resp = await this.tabFetch(tab, `${this.base}/api/datasets/${datasetId}/query`, spec);
    return parseResponse(resp);
  }

  async render(tab: number, datasetId: string, spec: Spec): Promise<RenderResponse> {
    const resp = await this.tabFetch(tab, `${this.base}/api/datasets/${datasetId}/render`, spec);
    return parseResponse(resp);
  }

  async saveSpec(name: string, spec: Spec): Promise<void> {
    await parseResponse(
      await fetch(`${this.base}/api/specs/${encodeURIComponent(name)}`, {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: serializeSpec(spec),
      }),
    );
  }

  async compileSql(spec: Spec, datasetId: string, table: string, dialect: string): Promise<{ sql: string }> {
    return parseResponse(
      await fetch(`${this.base}/api/compile/sql`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ spec: specDocument(spec), dataset_id: datasetId, table, dialect }),
      }),
    );
  }
}
