import type { ModelInfo } from "./api.js";
import type { QueryState } from "./state.js";

export interface Handlers {
  onInput(query: string): void;
  onModel(id: string): void;
  onCopy(code: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function buildControls(root: HTMLElement, handlers: Handlers): HTMLElement {
  const doc = root.ownerDocument;
  const controls = el(doc, "div", "controls");
  const input = el(doc, "input", "query");
  input.type = "search";
  input.placeholder = "e.g. merge two dictionaries";
  input.addEventListener("input", () => handlers.onInput(input.value));
  controls.appendChild(input);
  const select = el(doc, "select", "model");
  select.addEventListener("change", () => handlers.onModel(select.value));
  controls.appendChild(select);
  root.appendChild(controls);
  return controls;
}

function updateControls(
  controls: HTMLElement,
  state: QueryState,
  models: ModelInfo[],
): void {
  const doc = controls.ownerDocument;
  const input = controls.querySelector("input.query") as HTMLInputElement;
  // never clobber text the user is mid-way through typing
  if (doc.activeElement !== input && input.value !== state.query)
    input.value = state.query;

  const select = controls.querySelector("select.model") as HTMLSelectElement;
  select.textContent = "";
  if (models.length === 0) {
    const opt = el(doc, "option", undefined, "models unavailable");
    opt.disabled = true;
    select.appendChild(opt);
  }
  for (const m of models) {
    const opt = el(doc, "option", undefined, m.kind);
    opt.value = m.id;
    opt.selected = m.id === state.model;
    select.appendChild(opt);
  }
  select.disabled = models.length === 0;
}

function renderStatus(doc: Document, state: QueryState): HTMLElement | null {
  if (state.loading) return el(doc, "div", "status spinner", "searching…");
  if (state.error) return el(doc, "div", "status error", state.error);
  if (state.results === null)
    return el(doc, "div", "status hint", "describe the code you need");
  if (state.results.length === 0)
    return el(doc, "div", "status empty", "no matches");
  return null;
}

function renderRow(
  doc: Document,
  hit: { rank: number; score: number; code: string },
  handlers: Handlers,
): HTMLLIElement {
  const row = el(doc, "li", "row");
  row.appendChild(el(doc, "span", "rank", `#${hit.rank}`));
  row.appendChild(el(doc, "code", "snippet", hit.code));
  row.appendChild(el(doc, "span", "score", hit.score.toFixed(3)));
  const copy = el(doc, "button", "copy", "copy");
  copy.addEventListener("click", (ev) => {
    ev.stopPropagation(); // copying must not toggle the row
    handlers.onCopy(hit.code);
  });
  row.appendChild(copy);
  row.addEventListener("click", () => row.classList.toggle("expanded"));
  return row;
}

/**
 * View of (state, models) under `root`. The controls are built once (so
 * focus and in-progress typing survive re-renders) and updated in place; the
 * output region below them is rebuilt from state on every call. Results
 * render strictly in the order the API returned them. Handlers bind on the
 * first call for a given root.
 */
export function render(
  root: HTMLElement,
  state: QueryState,
  models: ModelInfo[],
  handlers: Handlers,
): void {
  const doc = root.ownerDocument;
  const controls =
    (root.querySelector(":scope > .controls") as HTMLElement | null) ??
    buildControls(root, handlers);
  updateControls(controls, state, models);

  root.querySelector(":scope > .output")?.remove();
  const output = el(doc, "div", "output");
  const status = renderStatus(doc, state);
  if (status) {
    output.appendChild(status); // spinner/error/hint replaces the list
  } else {
    const list = el(doc, "ol", "results");
    for (const hit of state.results ?? [])
      list.appendChild(renderRow(doc, hit, handlers));
    output.appendChild(list);
  }
  root.appendChild(output);
}
