/** Scripted analyst walkthrough against the fixture service.
 *
 * The five tasks: enter a pattern in the search bar, confirm the selected
 * pattern is the red-highlighted node, inspect the retrieved documents,
 * inspect the actor list, and repeat the flow for another pattern.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ExplorerStore } from "../src/store.js";
import { FIXTURE_PATTERNS, FixtureServer } from "./fixtureServer.js";

const server = new FixtureServer();
let baseUrl = "";

beforeAll(async () => {
  baseUrl = await server.start();
});

afterAll(async () => {
  await server.stop();
});

function freshStore(): ExplorerStore {
  return new ExplorerStore(new ApiClient(baseUrl), {
    actor01: "State-aligned intrusion set active since 2018.",
  });
}

describe("five-task walkthrough", () => {
  it("runs end to end with all panels populated within 2s", async () => {
    const started = Date.now();
    const store = freshStore();

    // Task 1: the analyst types into the search bar.
    await store.updateQuery("mal");
    expect(store.state.suggestions.map((s) => s.name)).toEqual(
      ["Malware", "Malicious File"],
    );

    // Task 2: select the suggestion; the chosen pattern must be the
    // red-highlighted graph node.
    await store.selectPattern("T9001");
    expect(store.state.selectedPattern).toBe("T9001");
    const highlighted = store.state.graphNodes.filter((n) => n.highlighted);
    expect(highlighted).toHaveLength(1);
    expect(highlighted[0].id).toBe("T9001");
    expect(highlighted[0].kind).toBe("pattern");

    // Task 3: examine the document list retrieved by the system.
    const fixture = FIXTURE_PATTERNS[0];
    expect(store.state.documents.map((d) => d.doc_id)).toEqual(
      fixture.documents.map((d) => d.doc_id),
    );

    // Task 4: the displayed actor ordering matches the service response.
    expect(store.state.actors.map((a) => a.actor)).toEqual(
      fixture.actors.map((a) => a.actor),
    );
    const scores = store.state.actors.map((a) => a.score);
    expect([...scores].sort((a, b) => b - a)).toEqual(scores);

    // The timeline panel populated too.
    expect(store.state.timeline).toEqual(fixture.timeline);
    expect(store.state.buildId).toBe(server.buildId);

    // Task 5: repeat the flow for a second pattern.
    await store.updateQuery("malicious");
    expect(store.state.suggestions[0].id).toBe("T9002");
    await store.selectPattern("T9002");
    expect(store.state.selectedPattern).toBe("T9002");
    expect(store.state.documents.map((d) => d.doc_id)).toEqual(["d4", "d5"]);
    expect(
      store.state.graphNodes.find((n) => n.highlighted)?.id,
    ).toBe("T9002");

    expect(Date.now() - started).toBeLessThan(2000);
  });

  it("re-roots the exploration when a related graph node is clicked", async () => {
    const store = freshStore();
    await store.selectPattern("T9001");
    await store.selectGraphNode("T9002");
    expect(store.state.selectedPattern).toBe("T9002");
    expect(store.state.graphNodes.find((n) => n.highlighted)?.id).toBe("T9002");
  });

  it("keyword node clicks do not change the selection", async () => {
    const store = freshStore();
    await store.selectPattern("T9001");
    await store.selectGraphNode("kw:malware");
    expect(store.state.selectedPattern).toBe("T9001");
  });

  it("encodes the selection into a shareable url hash", async () => {
    const store = freshStore();
    await store.selectPattern("T9001");
    expect(store.toUrlHash()).toBe("#pattern=T9001");
    const other = freshStore();
    await other.applyUrlHash("#pattern=T9002");
    expect(other.state.selectedPattern).toBe("T9002");
  });
});
