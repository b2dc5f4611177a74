// Shared fixtures: a seeded RNG, procedurally generated manifests, a tiny
// tile encoder mirroring the on-disk codec, and a harness that runs the
// real backend CLI/server as subprocesses.

import { spawn, ChildProcess, execFileSync } from 'node:child_process';
import { mkdtempSync, rmSync, writeFileSync, mkdirSync } from 'node:fs';
import { tmpdir } from 'node:os';
import * as path from 'node:path';

import { Aabb, childBox, Vec3 } from '../src/geometry';
import { Manifest, NodeEntry } from '../src/manifest';
import { RECORD_SIZE } from '../src/tiles';

/** Deterministic 32-bit LCG, enough randomness for pose sampling. */
export function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
}

export interface SyntheticOptions {
  depth?: number;
  childProb?: number;
  seed?: number;
  rootCount?: number;
  totalPoints?: number;
}

/** Procedural octree manifest with plausible counts, no tile bytes. */
export function syntheticManifest(opts: SyntheticOptions = {}): Manifest {
  const depth = opts.depth ?? 4;
  const childProb = opts.childProb ?? 0.55;
  const rand = lcg(opts.seed ?? 1);
  const root: Aabb = { min: [0, 0, 0], max: [100, 100, 100] };
  const nodes = new Map<string, NodeEntry>();
  const grow = (code: string, box: Aabb) => {
    const count =
      code === 'r'
        ? opts.rootCount ?? 20000
        : 1000 + Math.floor(rand() * 19000);
    nodes.set(code, { code, count, aabb: box });
    if (code.length - 1 >= depth) return;
    for (let d = 0; d < 8; d++) {
      if (rand() < childProb) grow(code + d, childBox(box, d));
    }
  };
  grow('r', root);
  let total = 0;
  for (const n of nodes.values()) total += n.count;
  return {
    version: '1',
    aabb: root,
    rootSpacing: Math.sqrt(3) * 100 / 250,
    totalPoints: opts.totalPoints ?? total,
    entwineMode: false,
    nodes,
  };
}

/** Pack point records exactly like the tile files on disk. */
export function encodeRecords(
  points: { pos: Vec3; rgb?: [number, number, number]; intensity?: number; cls?: number }[],
  box: Aabb,
): ArrayBuffer {
  const buf = new ArrayBuffer(points.length * RECORD_SIZE);
  const view = new DataView(buf);
  points.forEach((p, i) => {
    const base = i * RECORD_SIZE;
    view.setFloat32(base, p.pos[0] - box.min[0], true);
    view.setFloat32(base + 4, p.pos[1] - box.min[1], true);
    view.setFloat32(base + 8, p.pos[2] - box.min[2], true);
    const [r, g, b] = p.rgb ?? [0, 0, 0];
    view.setUint8(base + 12, r);
    view.setUint8(base + 13, g);
    view.setUint8(base + 14, b);
    view.setUint16(base + 15, p.intensity ?? 0, true);
    view.setUint8(base + 17, p.cls ?? 0);
  });
  return buf;
}

// ---------------------------------------------------------------- backend

export interface Backend {
  dir: string;
  tilesDir: string;
  proc: ChildProcess;
  collabPort: number;
  httpPort: number;
  projectId: string;
  baseUrl: string;
  stop(): Promise<void>;
}

/** Random-ish cloud written as xyz text; a slab at z=0 gives planes. */
export function writeXyz(file: string, n: number, seed = 9): void {
  const rand = lcg(seed);
  const lines: string[] = [];
  for (let i = 0; i < n; i++) {
    const x = (rand() * 40).toFixed(4);
    const y = (rand() * 40).toFixed(4);
    const z = i % 3 === 0 ? (rand() * 0.01).toFixed(4) : (rand() * 15).toFixed(4);
    lines.push(`${x} ${y} ${z}`);
  }
  writeFileSync(file, lines.join('\n') + '\n');
}

/**
 * Build a tile set with the real converter and serve it with the real
 * server on ephemeral ports. Everything the viewer touches afterwards goes
 * through the public interfaces: files, HTTP, and the TCP protocol.
 */
export async function startBackend(points = 30000): Promise<Backend> {
  const dir = mkdtempSync(path.join(tmpdir(), 'viewer-e2e-'));
  const dataDir = path.join(dir, 'data');
  mkdirSync(dataDir);
  const xyz = path.join(dir, 'cloud.xyz');
  writeXyz(xyz, points);
  execFileSync('cloudatelier', ['convert', xyz, '-o', dataDir], {
    stdio: 'pipe',
  });
  const projectId = 'e2e';
  const config = {
    projectId,
    dataDir,
    users: [
      { name: 'ana', token: 't-ana', role: 'curator' },
      { name: 'bo', token: 't-bo', role: 'contributor' },
      { name: 'vi', token: 't-vi', role: 'viewer' },
    ],
  };
  const configPath = path.join(dir, 'project.json');
  writeFileSync(configPath, JSON.stringify(config));

  const proc = spawn(
    'cloudatelier',
    ['serve', configPath, '--http', '0', '--collab', '0'],
    { stdio: ['ignore', 'pipe', 'pipe'] },
  );
  const ports = await new Promise<{ collab: number; http: number }>(
    (resolve, reject) => {
      let err = '';
      const timer = setTimeout(
        () => reject(new Error(`server never came up:\n${err}`)),
        30_000,
      );
      proc.stderr!.on('data', (chunk: Buffer) => {
        err += chunk.toString('utf8');
        const m = err.match(/collab port (\d+), tile port (\d+)/);
        if (m) {
          clearTimeout(timer);
          resolve({ collab: Number(m[1]), http: Number(m[2]) });
        }
      });
      proc.on('exit', (code) => {
        clearTimeout(timer);
        reject(new Error(`server exited with ${code}:\n${err}`));
      });
    },
  );
  return {
    dir,
    tilesDir: dataDir,
    proc,
    collabPort: ports.collab,
    httpPort: ports.http,
    projectId,
    baseUrl: `http://127.0.0.1:${ports.http}/projects/${projectId}`,
    stop: () =>
      new Promise<void>((resolve) => {
        proc.once('exit', () => {
          rmSync(dir, { recursive: true, force: true });
          resolve();
        });
        proc.kill('SIGTERM');
      }),
  };
}

/** Run a measurement through the backend's own evaluator. */
export function serverEvaluate(kind: string, positions: number[][]): number[] {
  const program = [
    'import json, sys',
    'from cloudatelier.measure import evaluate, new_series',
    'obj = json.loads(sys.argv[1])',
    's = new_series(obj["kind"], obj["positions"])',
    'print(json.dumps(list(evaluate(s).values)))',
  ].join('\n');
  const out = execFileSync(
    'python3',
    ['-c', program, JSON.stringify({ kind, positions })],
    { encoding: 'utf8' },
  );
  return JSON.parse(out);
}
