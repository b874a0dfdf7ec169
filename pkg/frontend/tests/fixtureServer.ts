/** In-process HTTP fixture implementing the CAPE read API shapes. */

import { createServer, type Server } from "node:http";
import type { AddressInfo } from "node:net";

export interface FixturePattern {
  id: string;
  name: string;
  rank: number;
  medoid: string;
  keywords: { term: string; weight: number }[];
  related: { pattern_id: string; name: string; similarity: number }[];
  actors: { actor: string; score: number; supporting_docs: string[] }[];
  documents: {
    doc_id: string; score: number; source: string;
    date: string | null; actor: string | null;
  }[];
  timeline: [string, number][];
}

export const FIXTURE_PATTERNS: FixturePattern[] = [
  {
    id: "T9001",
    name: "Malware",
    rank: 1.4,
    medoid: "malware",
    keywords: [
      { term: "malware", weight: 0.4 },
      { term: "payload", weight: 0.3 },
      { term: "implant", weight: 0.2 },
    ],
    related: [
      { pattern_id: "T9002", name: "Malicious File", similarity: 0.35 },
    ],
    actors: [
      { actor: "actor01", score: 0.9, supporting_docs: ["d1", "d2"] },
      { actor: "actor02", score: 0.4, supporting_docs: ["d3"] },
      { actor: "actor03", score: 0.0, supporting_docs: [] },
    ],
    documents: [
      { doc_id: "d1", score: 0.8, source: "blog", date: "2019-02-01", actor: "actor01" },
      { doc_id: "d2", score: 0.7, source: "vendor", date: "2020-05-09", actor: "actor01" },
      { doc_id: "d3", score: 0.5, source: "cert", date: "2021-01-15", actor: "actor02" },
    ],
    timeline: [["2019", 1], ["2020", 1], ["2021", 1]],
  },
  {
    id: "T9002",
    name: "Malicious File",
    rank: 1.1,
    medoid: "attachment",
    keywords: [
      { term: "attachment", weight: 0.5 },
      { term: "lure", weight: 0.25 },
    ],
    related: [
      { pattern_id: "T9001", name: "Malware", similarity: 0.35 },
    ],
    actors: [
      { actor: "actor02", score: 0.8, supporting_docs: ["d4"] },
      { actor: "actor01", score: 0.2, supporting_docs: ["d5"] },
    ],
    documents: [
      { doc_id: "d4", score: 0.9, source: "forum", date: "2018-09-30", actor: "actor02" },
      { doc_id: "d5", score: 0.3, source: "blog", date: "2022-03-03", actor: "actor01" },
    ],
    timeline: [["2018", 1], ["2019", 0], ["2020", 0], ["2021", 0], ["2022", 1]],
  },
  {
    id: "C003",
    name: "beaconing",
    rank: 0.6,
    medoid: "beaconing",
    keywords: [{ term: "beaconing", weight: 0.6 }],
    related: [],
    actors: [{ actor: "actor03", score: 0.5, supporting_docs: ["d6"] }],
    documents: [
      { doc_id: "d6", score: 0.4, source: "vendor", date: null, actor: "actor03" },
    ],
    timeline: [],
  },
];

export class FixtureServer {
  buildId = 1;
  private server: Server | null = null;

  /** Swap the advertised build id mid-flight to simulate a reindex. */
  setBuildId(value: number): void {
    this.buildId = value;
  }

  private pattern(id: string): FixturePattern | undefined {
    return FIXTURE_PATTERNS.find((p) => p.id === id);
  }

  private respond(body: unknown, status = 200): [number, string] {
    return [status, JSON.stringify(body)];
  }

  private route(url: URL): [number, string] {
    if (url.pathname === "/suggest") {
      const q = (url.searchParams.get("q") ?? "").toLowerCase();
      const suggestions = FIXTURE_PATTERNS
        .filter((p) => p.name.toLowerCase().includes(q) ||
                       p.id.toLowerCase().includes(q))
        .sort((a, b) => b.rank - a.rank || a.name.localeCompare(b.name))
        .slice(0, 10)
        .map((p) => ({ id: p.id, name: p.name, rank: p.rank }));
      return this.respond({ build_id: this.buildId, suggestions });
    }

    const match = /^\/patterns\/([^/]+)\/(graph|actors|documents|timeline)$/
      .exec(url.pathname);
    if (match) {
      const pattern = this.pattern(decodeURIComponent(match[1]));
      if (!pattern) {
        return this.respond({
          code: "unknown_pattern",
          message: `unknown pattern id: ${match[1]}`,
          details: { pattern_id: match[1] },
        }, 404);
      }
      switch (match[2]) {
        case "graph":
          return this.respond({
            build_id: this.buildId,
            pattern: { id: pattern.id, medoid: pattern.medoid, rank: pattern.rank },
            nodes: pattern.keywords,
            related: pattern.related,
          });
        case "actors": {
          const sort = url.searchParams.get("sort") ?? "desc";
          const actors = sort === "asc"
            ? [...pattern.actors].reverse()
            : pattern.actors;
          return this.respond({
            build_id: this.buildId,
            total: actors.length,
            actors,
          });
        }
        case "documents": {
          const offset = Number(url.searchParams.get("offset") ?? "0");
          const limit = Number(url.searchParams.get("limit") ?? "50");
          return this.respond({
            build_id: this.buildId,
            total: pattern.documents.length,
            documents: pattern.documents.slice(offset, offset + limit),
          });
        }
        case "timeline":
          return this.respond({
            build_id: this.buildId,
            ttp_id: pattern.id,
            granularity: url.searchParams.get("granularity") ?? "year",
            periods: pattern.timeline,
            excluded_undated: pattern.id === "C003" ? 1 : 0,
          });
      }
    }
    return this.respond({ code: "not_found", message: "no such route",
                          details: {} }, 404);
  }

  async start(): Promise<string> {
    this.server = createServer((req, res) => {
      const url = new URL(req.url ?? "/", "http://localhost");
      const [status, body] = this.route(url);
      res.writeHead(status, { "content-type": "application/json" });
      res.end(body);
    });
    await new Promise<void>((resolve) =>
      this.server!.listen(0, "127.0.0.1", resolve));
    const address = this.server!.address() as AddressInfo;
    return `http://127.0.0.1:${address.port}`;
  }

  async stop(): Promise<void> {
    if (!this.server) return;
    await new Promise<void>((resolve, reject) =>
      this.server!.close((err) => (err ? reject(err) : resolve())));
    this.server = null;
  }
}
