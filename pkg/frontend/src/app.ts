/** DOM bootstrap: renders the store into the explorer page.
 *
 * Panels follow the analyst workflow: a search bar with a suggestion
 * dropdown, the pattern graph (selection circled in red, node size scales
 * with rank), the sortable actor list with a description panel, the
 * document list, and the usage timeline.
 */

import { ApiClient } from "./api.js";
import { layoutGraph } from "./force.js";
import { ExplorerStore, type ExplorerState } from "./store.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function renderGraph(state: ExplorerState, svg: SVGSVGElement,
                     store: ExplorerStore): void {
  svg.replaceChildren();
  const width = svg.clientWidth || 640;
  const height = svg.clientHeight || 420;
  const points = layoutGraph(state.graphNodes, state.graphEdges,
                             { width, height });
  const at = new Map(points.map((p) => [p.id, p]));

  for (const edge of state.graphEdges) {
    const a = at.get(edge.source);
    const b = at.get(edge.target);
    if (!a || !b) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("class", "edge");
    svg.appendChild(line);
  }

  for (const node of state.graphNodes) {
    const p = at.get(node.id);
    if (!p) continue;
    const g = document.createElementNS(SVG_NS, "g");
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(p.x));
    circle.setAttribute("cy", String(p.y));
    const radius = node.kind === "keyword" ? 4 + 18 * node.weight
                                           : 8 + 6 * node.weight;
    circle.setAttribute("r", String(Math.min(24, radius)));
    circle.setAttribute("class",
      node.highlighted ? "node selected" : `node ${node.kind}`);
    g.appendChild(circle);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(p.x + 6));
    label.setAttribute("y", String(p.y - 6));
    label.textContent = node.label;
    g.appendChild(label);
    g.addEventListener("click", () => void store.selectGraphNode(node.id));
    svg.appendChild(g);
  }
}

function render(state: ExplorerState, store: ExplorerStore): void {
  const dropdown = el("suggestions");
  dropdown.replaceChildren();
  for (const suggestion of state.suggestions) {
    const item = document.createElement("li");
    item.textContent = `${suggestion.name} (${suggestion.id})`;
    item.addEventListener("click", () => {
      void store.selectPattern(suggestion.id);
      location.hash = `#pattern=${encodeURIComponent(suggestion.id)}`;
    });
    dropdown.appendChild(item);
  }

  el("selection").textContent = state.selectedPattern
    ? `${state.patternName} — build ${state.buildId}`
    : "no pattern selected";

  renderGraph(state, el("graph") as unknown as SVGSVGElement, store);

  const actorList = el("actors");
  actorList.replaceChildren();
  for (const actor of state.actors) {
    const row = document.createElement("li");
    row.textContent =
      `${actor.actor} — ${actor.score.toFixed(2)} (${actor.supporting_docs.length} docs)`;
    row.addEventListener("click", () => store.selectActor(actor.actor));
    actorList.appendChild(row);
  }
  el("description").textContent = state.selectedActor
    ? `${state.selectedActor}: ${state.actorDescription}`
    : "";

  const docList = el("documents");
  docList.replaceChildren();
  for (const doc of state.documents) {
    const row = document.createElement("li");
    row.textContent =
      `${doc.doc_id} (${doc.source || "unknown"}, ${doc.date ?? "undated"})`;
    docList.appendChild(row);
  }

  const timeline = el("timeline");
  timeline.replaceChildren();
  const max = Math.max(1, ...state.timeline.map(([, c]) => c));
  for (const [period, count] of state.timeline) {
    const bar = document.createElement("div");
    bar.className = "bar";
    bar.style.height = `${4 + (56 * count) / max}px`;
    bar.title = `${period}: ${count}`;
    timeline.appendChild(bar);
  }

  el("banner").textContent = state.error ?? "";
  el("stale").style.display = state.staleBuild ? "block" : "none";
}

export function start(baseUrl: string): ExplorerStore {
  const api = new ApiClient(baseUrl);
  const store = new ExplorerStore(api);
  store.subscribe((state) => render(state, store));

  const search = el("search") as HTMLInputElement;
  search.addEventListener("input", () => void store.updateQuery(search.value));
  el("sort-toggle").addEventListener("click", () => store.toggleSort());
  el("refresh").addEventListener("click", () => void store.refresh());
  (el("granularity") as HTMLSelectElement).addEventListener("change", (ev) => {
    const value = (ev.target as HTMLSelectElement).value as "year" | "month";
    void store.setGranularity(value);
  });

  void store.updateQuery("");
  if (location.hash) void store.applyUrlHash(location.hash);
  return store;
}
