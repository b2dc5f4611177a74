// Typed view of manifest.json as the tile server publishes it.

import { Aabb } from './geometry';

export interface NodeEntry {
  code: string;
  count: number;
  aabb: Aabb;
  overflow?: boolean;
}

export interface Manifest {
  version: string;
  aabb: Aabb; // cubified root
  rootSpacing: number;
  totalPoints: number;
  entwineMode: boolean;
  nodes: Map<string, NodeEntry>;
}

const CODE_RE = /^r[0-7]*$/;

export function levelOf(code: string): number {
  return code.length - 1;
}

export function parentOf(code: string): string {
  if (code === 'r') throw new Error('root has no parent');
  return code.slice(0, -1);
}

export function spacingOf(manifest: Manifest, code: string): number {
  return manifest.rootSpacing / 2 ** levelOf(code);
}

function parseBox(obj: any): Aabb {
  const min = obj.min.map(Number);
  const max = obj.max.map(Number);
  if (min.length !== 3 || max.length !== 3) {
    throw new Error('aabb needs 3 components per corner');
  }
  return { min, max };
}

export function parseManifest(source: string | object): Manifest {
  const obj: any = typeof source === 'string' ? JSON.parse(source) : source;
  if (obj.version !== '1') {
    throw new Error(`unsupported manifest version ${JSON.stringify(obj.version)}`);
  }
  const nodes = new Map<string, NodeEntry>();
  for (const entry of obj.nodes) {
    if (!CODE_RE.test(entry.code)) {
      throw new Error(`invalid node code ${JSON.stringify(entry.code)}`);
    }
    nodes.set(entry.code, {
      code: entry.code,
      count: Number(entry.count),
      aabb: parseBox(entry.aabb),
      overflow: Boolean(entry.overflow),
    });
  }
  return {
    version: obj.version,
    aabb: parseBox(obj.aabb),
    rootSpacing: Number(obj.rootSpacing),
    totalPoints: Number(obj.totalPoints),
    entwineMode: Boolean(obj.entwineMode),
    nodes,
  };
}

/** Children of a node that actually exist in this tile set. */
export function childrenOf(manifest: Manifest, code: string): NodeEntry[] {
  const out: NodeEntry[] = [];
  for (let d = 0; d < 8; d++) {
    const child = manifest.nodes.get(code + d);
    if (child) out.push(child);
  }
  return out;
}
