/** Payload shapes of the CAPE JSON API. */

export interface Suggestion {
  id: string;
  name: string;
  rank: number;
}

export interface SuggestResponse {
  build_id: number;
  suggestions: Suggestion[];
}

export interface KeywordNode {
  term: string;
  weight: number;
}

export interface RelatedPattern {
  pattern_id: string;
  name: string;
  similarity: number;
}

export interface GraphResponse {
  build_id: number;
  pattern: { id: string; medoid: string; rank: number };
  nodes: KeywordNode[];
  related: RelatedPattern[];
}

export interface ActorEntry {
  actor: string;
  score: number;
  supporting_docs: string[];
}

export interface ActorsResponse {
  build_id: number;
  total: number;
  actors: ActorEntry[];
}

export interface DocumentEntry {
  doc_id: string;
  score: number;
  source: string;
  date: string | null;
  actor: string | null;
}

export interface DocumentsResponse {
  build_id: number;
  total: number;
  documents: DocumentEntry[];
}

export type TimelinePoint = [period: string, count: number];

export interface TimelineResponse {
  build_id: number;
  ttp_id: string;
  granularity: string;
  periods: TimelinePoint[];
  excluded_undated: number;
}

export interface ApiError {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
