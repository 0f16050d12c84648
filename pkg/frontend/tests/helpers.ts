import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

/** Canonical spec fixtures shared with the engine's test suite. */
export function repoSpecText(name: string): string {
  return readFileSync(join(here, "..", "..", "fixtures", "specs", `${name}.json`), "utf-8");
}

/** Frozen HTTP responses captured from the real server. */
export function fixtureJson<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", `${name}.json`), "utf-8")) as T;
}
