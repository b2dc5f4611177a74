// Tile fetching against the static HTTP endpoint, with retry/backoff and a
// code-keyed cache. The fetch function is injectable so tests can serve
// bytes from disk or memory.

import { Manifest, parseManifest } from './manifest';
import { decodeTile, PointBuffer, RECORD_SIZE } from './tiles';

export type FetchBytes = (url: string) => Promise<ArrayBuffer>;

export interface LoaderOptions {
  fetchBytes?: FetchBytes;
  maxRetries?: number;
  backoffMs?: number;
}

const defaultFetch: FetchBytes = async (url) => {
  const res = await fetch(url);
  if (!res.ok) throw new Error(`GET ${url}: ${res.status}`);
  return res.arrayBuffer();
};

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export class TileLoader {
  readonly baseUrl: string;
  manifest: Manifest | null = null;
  readonly tiles = new Map<string, PointBuffer>();
  private inflight = new Map<string, Promise<PointBuffer>>();
  private fetchBytes: FetchBytes;
  private maxRetries: number;
  private backoffMs: number;

  /** baseUrl is the project root, e.g. http://host:port/projects/site1 */
  constructor(baseUrl: string, opts: LoaderOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchBytes = opts.fetchBytes ?? defaultFetch;
    this.maxRetries = opts.maxRetries ?? 4;
    this.backoffMs = opts.backoffMs ?? 250;
  }

  private async fetchWithRetry(url: string): Promise<ArrayBuffer> {
    let wait = this.backoffMs;
    for (let attempt = 0; ; attempt++) {
      try {
        return await this.fetchBytes(url);
      } catch (err) {
        if (attempt >= this.maxRetries) throw err;
        await sleep(wait);
        wait *= 2;
      }
    }
  }

  async loadManifest(): Promise<Manifest> {
    const buf = await this.fetchWithRetry(`${this.baseUrl}/manifest.json`);
    this.manifest = parseManifest(new TextDecoder().decode(buf));
    return this.manifest;
  }

  async loadNode(code: string): Promise<PointBuffer> {
    const have = this.tiles.get(code);
    if (have) return have;
    const pending = this.inflight.get(code);
    if (pending) return pending;
    if (!this.manifest) throw new Error('manifest not loaded');
    const node = this.manifest.nodes.get(code);
    if (!node) throw new Error(`node ${code} not in manifest`);
    const job = (async () => {
      const buf = await this.fetchWithRetry(
        `${this.baseUrl}/nodes/${code}.bin`,
      );
      if (buf.byteLength !== node.count * RECORD_SIZE) {
        throw new Error(
          `node ${code}: ${buf.byteLength} bytes but manifest says ` +
            `${node.count} records`,
        );
      }
      const decoded = decodeTile(buf, node.aabb);
      this.tiles.set(code, decoded);
      this.inflight.delete(code);
      return decoded;
    })();
    this.inflight.set(code, job);
    return job;
  }

  unloadNode(code: string): void {
    this.tiles.delete(code);
  }

  get loadedCodes(): Set<string> {
    return new Set(this.tiles.keys());
  }

  get loadedPointCount(): number {
    let total = 0;
    for (const buf of this.tiles.values()) total += buf.count;
    return total;
  }
}
