/** Single client-side store driving every explorer panel.
 *
 * All state lives here; the DOM layer only renders it and forwards user
 * events.  Every displayed element derives from service responses that
 * carried the same build_id — a mixed-build burst is never applied and
 * instead raises the refresh prompt.  Selections carry a generation
 * counter so a response that arrives after the user moved on is dropped.
 */

import { ApiClient } from "./api.js";
import type {
  ActorEntry,
  DocumentEntry,
  Suggestion,
  TimelinePoint,
} from "./types.js";

export type SortOrder = "asc" | "desc";
export type Granularity = "year" | "month";

export interface ViewNode {
  id: string;
  label: string;
  kind: "pattern" | "keyword" | "related";
  weight: number;
  /** The selected pattern's node is drawn with the red circle. */
  highlighted: boolean;
}

export interface ViewEdge {
  source: string;
  target: string;
  weight: number;
}

export interface ExplorerState {
  query: string;
  suggestions: Suggestion[];
  selectedPattern: string | null;
  patternName: string | null;
  graphNodes: ViewNode[];
  graphEdges: ViewEdge[];
  actors: ActorEntry[];
  sortOrder: SortOrder;
  selectedActor: string | null;
  actorDescription: string | null;
  documents: DocumentEntry[];
  documentsOffset: number;
  documentsTotal: number;
  timeline: TimelinePoint[];
  granularity: Granularity;
  buildId: number | null;
  loading: boolean;
  error: string | null;
  staleBuild: boolean;
}

function emptyState(): ExplorerState {
  return {
    query: "",
    suggestions: [],
    selectedPattern: null,
    patternName: null,
    graphNodes: [],
    graphEdges: [],
    actors: [],
    sortOrder: "desc",
    selectedActor: null,
    actorDescription: null,
    documents: [],
    documentsOffset: 0,
    documentsTotal: 0,
    timeline: [],
    granularity: "year",
    buildId: null,
    loading: false,
    error: null,
    staleBuild: false,
  };
}

export type Listener = (state: ExplorerState) => void;

export class ExplorerStore {
  state: ExplorerState = emptyState();

  private generation = 0;
  private listeners: Listener[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly actorDescriptions: Record<string, string> = {},
  ) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(changes: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...changes };
    this.emit();
  }

  /** Search-as-you-type: refresh the suggestion dropdown. */
  async updateQuery(query: string): Promise<void> {
    const generation = ++this.generation;
    this.patch({ query });
    try {
      const response = await this.api.suggest(query);
      if (generation !== this.generation) return; // superseded
      this.patch({ suggestions: response.suggestions, error: null });
    } catch (err) {
      if (generation !== this.generation) return;
      this.patch({ error: String(err) }); // state otherwise preserved
    }
  }

  /** Select a pattern (from the dropdown or a graph node): loads the
   * graph view, actor list, document list, and timeline together. */
  async selectPattern(patternId: string): Promise<void> {
    const generation = ++this.generation;
    this.patch({ loading: true });
    try {
      const [graph, actors, documents, timeline] = await Promise.all([
        this.api.patternGraph(patternId),
        this.api.patternActors(patternId),
        this.api.patternDocuments(patternId, 0),
        this.api.patternTimeline(patternId, this.state.granularity),
      ]);
      if (generation !== this.generation) return; // user moved on
      const buildIds = new Set([
        graph.build_id, actors.build_id, documents.build_id, timeline.build_id,
      ]);
      if (buildIds.size !== 1) {
        // A reindex landed mid-burst: do not mix builds, ask to refresh.
        this.patch({ loading: false, staleBuild: true });
        return;
      }
      const buildId = graph.build_id;
      const nodes: ViewNode[] = [
        {
          id: patternId,
          label: patternId,
          kind: "pattern",
          weight: graph.pattern.rank,
          highlighted: true,
        },
        ...graph.nodes.map((n) => ({
          id: `kw:${n.term}`,
          label: n.term,
          kind: "keyword" as const,
          weight: n.weight,
          highlighted: false,
        })),
        ...graph.related.map((r) => ({
          id: r.pattern_id,
          label: r.name,
          kind: "related" as const,
          weight: r.similarity,
          highlighted: false,
        })),
      ];
      const edges: ViewEdge[] = [
        ...graph.nodes.map((n) => ({
          source: patternId, target: `kw:${n.term}`, weight: n.weight,
        })),
        ...graph.related.map((r) => ({
          source: patternId, target: r.pattern_id, weight: r.similarity,
        })),
      ];
      const suggestion = this.state.suggestions.find((s) => s.id === patternId);
      this.patch({
        selectedPattern: patternId,
        patternName: suggestion?.name ?? patternId,
        graphNodes: nodes,
        graphEdges: edges,
        actors: this.state.sortOrder === "desc"
          ? actors.actors
          : [...actors.actors].reverse(),
        documents: documents.documents,
        documentsOffset: 0,
        documentsTotal: documents.total,
        timeline: timeline.periods,
        buildId,
        selectedActor: null,
        actorDescription: null,
        loading: false,
        error: null,
        staleBuild: this.state.buildId !== null && this.state.buildId !== buildId
          ? false // newer consistent data replaces the old build entirely
          : this.state.staleBuild,
      });
    } catch (err) {
      if (generation !== this.generation) return;
      this.patch({ loading: false, error: String(err) });
    }
  }

  /** A graph node click re-roots the exploration on that pattern. */
  async selectGraphNode(nodeId: string): Promise<void> {
    const node = this.state.graphNodes.find((n) => n.id === nodeId);
    if (!node || node.kind === "keyword") return;
    if (node.id === this.state.selectedPattern) return;
    await this.selectPattern(node.id);
  }

  /** Reorder the actor list in place; never refetches. */
  toggleSort(): void {
    this.patch({
      sortOrder: this.state.sortOrder === "desc" ? "asc" : "desc",
      actors: [...this.state.actors].reverse(),
    });
  }

  /** Show the description panel for one actor. */
  selectActor(actor: string): void {
    this.patch({
      selectedActor: actor,
      actorDescription:
        this.actorDescriptions[actor] ?? "no description available",
    });
  }

  /** Timeline hover: the per-period count under the cursor. */
  hoverTimeline(period: string): TimelinePoint | null {
    return this.state.timeline.find(([p]) => p === period) ?? null;
  }

  async setGranularity(granularity: Granularity): Promise<void> {
    this.patch({ granularity });
    const pattern = this.state.selectedPattern;
    if (!pattern) return;
    const generation = ++this.generation;
    try {
      const timeline = await this.api.patternTimeline(pattern, granularity);
      if (generation !== this.generation) return;
      if (this.state.buildId !== null && timeline.build_id !== this.state.buildId) {
        this.patch({ staleBuild: true });
        return;
      }
      this.patch({ timeline: timeline.periods });
    } catch (err) {
      if (generation !== this.generation) return;
      this.patch({ error: String(err) });
    }
  }

  async loadDocumentsPage(offset: number): Promise<void> {
    const pattern = this.state.selectedPattern;
    if (!pattern) return;
    const generation = ++this.generation;
    try {
      const response = await this.api.patternDocuments(pattern, offset);
      if (generation !== this.generation) return;
      if (this.state.buildId !== null && response.build_id !== this.state.buildId) {
        this.patch({ staleBuild: true });
        return;
      }
      this.patch({
        documents: response.documents,
        documentsOffset: offset,
        documentsTotal: response.total,
      });
    } catch (err) {
      if (generation !== this.generation) return;
      this.patch({ error: String(err) });
    }
  }

  /** Full refresh after a stale build was detected. */
  async refresh(): Promise<void> {
    const pattern = this.state.selectedPattern;
    this.patch({ staleBuild: false, buildId: null });
    if (this.state.query) await this.updateQuery(this.state.query);
    if (pattern) await this.selectPattern(pattern);
  }

  /** Shareable-link support: the selected pattern rides in the hash. */
  toUrlHash(): string {
    return this.state.selectedPattern
      ? `#pattern=${encodeURIComponent(this.state.selectedPattern)}`
      : "";
  }

  async applyUrlHash(hash: string): Promise<void> {
    const match = /#pattern=([^&]+)/.exec(hash);
    if (match) await this.selectPattern(decodeURIComponent(match[1]));
  }
}
