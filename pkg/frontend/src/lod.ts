// Screen-space-error driven node selection.
//
// A node is a candidate once its parent is selected, so parents are always
// loaded before children no matter what the budget does. Candidates are
// taken best-first by projected sample spacing in pixels; refinement stops
// where the parent's sample is already denser than the screen.

import { cameraPosition, CameraState } from './camera';
import { distanceToBox } from './geometry';
import { childrenOf, Manifest, NodeEntry, spacingOf } from './manifest';

export const DEFAULT_BUDGET = 2_000_000;

export interface LodOptions {
  budget?: number;
  viewportHeight?: number;
  /** stop refining once a node's projected spacing is below this (px) */
  refineCutoffPx?: number;
  /** currently loaded codes; the result diffs against it */
  loaded?: Iterable<string>;
}

export interface LodResult {
  selected: string[];
  load: string[];
  unload: string[];
  pointCount: number;
}

interface Candidate {
  node: NodeEntry;
  priority: number;
}

class MaxHeap {
  private items: Candidate[] = [];

  get size(): number {
    return this.items.length;
  }

  private less(a: Candidate, b: Candidate): boolean {
    if (a.priority !== b.priority) return a.priority < b.priority;
    return a.node.code > b.node.code; // deterministic tie-break
  }

  push(item: Candidate): void {
    const items = this.items;
    items.push(item);
    let i = items.length - 1;
    while (i > 0) {
      const parent = (i - 1) >> 1;
      if (!this.less(items[parent], items[i])) break;
      [items[parent], items[i]] = [items[i], items[parent]];
      i = parent;
    }
  }

  pop(): Candidate {
    const items = this.items;
    const top = items[0];
    const last = items.pop()!;
    if (items.length > 0) {
      items[0] = last;
      let i = 0;
      for (;;) {
        let best = i;
        const l = 2 * i + 1;
        const r = 2 * i + 2;
        if (l < items.length && this.less(items[best], items[l])) best = l;
        if (r < items.length && this.less(items[best], items[r])) best = r;
        if (best === i) break;
        [items[best], items[i]] = [items[i], items[best]];
        i = best;
      }
    }
    return top;
  }
}

export function updateLod(
  camera: CameraState,
  manifest: Manifest,
  opts: LodOptions = {},
): LodResult {
  const budget = opts.budget ?? DEFAULT_BUDGET;
  const viewportHeight = opts.viewportHeight ?? 1080;
  const cutoff = opts.refineCutoffPx ?? 1.0;
  const eye = cameraPosition(camera);
  const pxPerRadian = viewportHeight / (2 * Math.tan(camera.fov / 2));

  const projectedSpacing = (node: NodeEntry): number => {
    const dist = Math.max(distanceToBox(eye, node.aabb), 1e-6);
    return (spacingOf(manifest, node.code) / dist) * pxPerRadian;
  };

  const root = manifest.nodes.get('r');
  const selected: string[] = [];
  let used = 0;
  if (root) {
    // the coarsest sample always survives: a viewer with any budget at all
    // shows the overview rather than nothing
    selected.push('r');
    used = root.count;
    const heap = new MaxHeap();
    if (projectedSpacing(root) > cutoff) {
      for (const child of childrenOf(manifest, 'r')) {
        heap.push({ node: child, priority: projectedSpacing(child) });
      }
    }
    while (heap.size > 0) {
      const { node } = heap.pop();
      if (used + node.count > budget) break; // best remaining does not fit
      selected.push(node.code);
      used += node.count;
      if (projectedSpacing(node) > cutoff) {
        for (const child of childrenOf(manifest, node.code)) {
          heap.push({ node: child, priority: projectedSpacing(child) });
        }
      }
    }
  }

  const loadedSet = new Set(opts.loaded ?? []);
  const selectedSet = new Set(selected);
  const load = selected.filter((c) => !loadedSet.has(c));
  const unload = [...loadedSet].filter((c) => !selectedSet.has(c)).sort();
  return { selected: [...selected].sort(), load, unload, pointCount: used };
}
