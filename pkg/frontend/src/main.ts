import { App } from "./app.js";
import { Client } from "./api.js";

declare global {
  interface Window {
    vegaEmbed?: (el: HTMLElement, spec: unknown, opts?: unknown) => Promise<unknown>;
  }
}

const embed = window.vegaEmbed
  ? (el: HTMLElement, spec: unknown) => window.vegaEmbed!(el, spec, { actions: false })
  : null;

const app = new App(document, new Client(""), embed);
void app.start();
