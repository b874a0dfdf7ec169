/** Small deterministic force-directed layout for the pattern graph.
 *
 * Repulsion between every node pair, spring attraction along edges, and a
 * weak centering pull.  Initial positions are seeded from a hash of the
 * node id, so the same graph always lays out the same way.
 */

import type { ViewEdge, ViewNode } from "./store.js";

export interface LayoutPoint {
  id: string;
  x: number;
  y: number;
}

export interface LayoutOptions {
  width: number;
  height: number;
  iterations?: number;
  repulsion?: number;
  springLength?: number;
  springStrength?: number;
}

function hash01(text: string, salt: number): number {
  let h = 2166136261 ^ salt;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return ((h >>> 0) % 100_000) / 100_000;
}

export function layoutGraph(
  nodes: ViewNode[],
  edges: ViewEdge[],
  options: LayoutOptions,
): LayoutPoint[] {
  const {
    width,
    height,
    iterations = 200,
    repulsion = 0.01 * width * height,
    springLength = Math.min(width, height) / 6,
    springStrength = 0.05,
  } = options;

  const xs = nodes.map((n) => width * (0.2 + 0.6 * hash01(n.id, 1)));
  const ys = nodes.map((n) => height * (0.2 + 0.6 * hash01(n.id, 2)));
  const index = new Map(nodes.map((n, i) => [n.id, i]));

  for (let step = 0; step < iterations; step++) {
    const fx = new Array(nodes.length).fill(0);
    const fy = new Array(nodes.length).fill(0);

    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const dx = xs[i] - xs[j];
        const dy = ys[i] - ys[j];
        const d2 = dx * dx + dy * dy + 1e-6;
        const push = repulsion / d2;
        const d = Math.sqrt(d2);
        fx[i] += (dx / d) * push;
        fy[i] += (dy / d) * push;
        fx[j] -= (dx / d) * push;
        fy[j] -= (dy / d) * push;
      }
    }

    for (const edge of edges) {
      const i = index.get(edge.source);
      const j = index.get(edge.target);
      if (i === undefined || j === undefined) continue;
      const dx = xs[j] - xs[i];
      const dy = ys[j] - ys[i];
      const d = Math.sqrt(dx * dx + dy * dy) + 1e-6;
      const pull = springStrength * (d - springLength);
      fx[i] += (dx / d) * pull;
      fy[i] += (dy / d) * pull;
      fx[j] -= (dx / d) * pull;
      fy[j] -= (dy / d) * pull;
    }

    const damping = 1 - step / iterations;
    for (let i = 0; i < nodes.length; i++) {
      fx[i] += (width / 2 - xs[i]) * 0.002;
      fy[i] += (height / 2 - ys[i]) * 0.002;
      xs[i] = Math.min(width, Math.max(0, xs[i] + fx[i] * damping));
      ys[i] = Math.min(height, Math.max(0, ys[i] + fy[i] * damping));
    }
  }

  return nodes.map((n, i) => ({ id: n.id, x: xs[i], y: ys[i] }));
}
