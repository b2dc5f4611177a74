// Live collaboration client: newline-delimited JSON envelopes over a byte
// stream, a local replica that applies broadcast events strictly in server
// sequence order, and promise-based op submission.

import { WireSeries } from './measure';

export type Role = 'viewer' | 'contributor' | 'curator';

export type OpAction =
  | 'createLayer'
  | 'createSeries'
  | 'updateSeries'
  | 'deleteSeries'
  | 'deleteLayer'
  | 'commitLayer'
  | 'importLayer';

export interface RejectionInfo {
  code: string;
  detail: string;
  current?: any;
}

export interface WireOp {
  opId: [string, number];
  action: OpAction;
  target: { layer: string; series: string | null };
  payload: any;
  author?: string;
  baseVersion?: number;
}

export interface WireDocument {
  schema?: string;
  id: string;
  name: string;
  baseVersion: number;
  planeRefs: string[];
  series: WireSeries[];
  [key: string]: any;
}

export interface LayerState {
  owner: string;
  doc: WireDocument;
}

export type AckResult = { status: 'accepted'; seq: number };
export type RejectResult = { status: 'rejected'; error: RejectionInfo };
export type OpResult = AckResult | RejectResult;

/**
 * Byte-stream adapter. Over TCP this is a net.Socket; in a browser the
 * same interface wraps a WebSocket carrying one envelope per message.
 */
export interface LineTransport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

function emptyDocument(id: string, name: string): WireDocument {
  return {
    schema: 'measure/1',
    id,
    name,
    baseVersion: 0,
    planeRefs: [],
    series: [],
  };
}

/** JSON with object keys sorted at every level, for state comparison. */
export function canonicalJson(value: any): string {
  if (Array.isArray(value)) {
    return '[' + value.map(canonicalJson).join(',') + ']';
  }
  if (value !== null && typeof value === 'object') {
    const keys = Object.keys(value).sort();
    return (
      '{' +
      keys
        .map((k) => JSON.stringify(k) + ':' + canonicalJson(value[k]))
        .join(',') +
      '}'
    );
  }
  return JSON.stringify(value);
}

/**
 * Client-side state mirror. Events must be applied in sequence order;
 * out-of-order arrivals wait in a hold-back buffer until the gap closes.
 */
export class ReplicaStore {
  seq = 0;
  projectId = '';
  live = new Map<string, LayerState>();
  baseline: { owner: string; seq: number; doc: WireDocument }[] = [];
  layerTombstones = new Set<string>();
  seriesTombstones = new Map<string, Set<string>>();
  private pending = new Map<number, { seq: number; op: WireOp }>();

  constructor(snapshot?: any) {
    if (!snapshot) return;
    this.projectId = snapshot.projectId ?? '';
    this.seq = snapshot.seq ?? 0;
    for (const entry of snapshot.baseline ?? []) {
      this.baseline.push({ owner: entry.owner, seq: entry.seq, doc: entry.doc });
    }
    for (const [lid, entry] of Object.entries<any>(snapshot.live ?? {})) {
      this.live.set(lid, { owner: entry.owner, doc: entry.doc });
    }
    for (const lid of snapshot.layerTombstones ?? []) {
      this.layerTombstones.add(lid);
    }
    for (const [lid, ids] of Object.entries<any>(
      snapshot.seriesTombstones ?? {},
    )) {
      this.seriesTombstones.set(lid, new Set(ids));
    }
  }

  ingest(event: { seq: number; op: WireOp }): number {
    if (event.seq <= this.seq) return 0; // covered by the snapshot
    this.pending.set(event.seq, event);
    let applied = 0;
    while (this.pending.has(this.seq + 1)) {
      const next = this.pending.get(this.seq + 1)!;
      this.pending.delete(next.seq);
      this.seq = next.seq;
      this.execute(next.op);
      applied += 1;
    }
    return applied;
  }

  private execute(op: WireOp): void {
    const author = op.author ?? '';
    switch (op.action) {
      case 'createLayer': {
        const name = typeof op.payload?.name === 'string' ? op.payload.name : '';
        this.live.set(op.target.layer, {
          owner: author,
          doc: emptyDocument(op.target.layer, name),
        });
        return;
      }
      case 'importLayer':
        this.live.set(op.target.layer, { owner: author, doc: op.payload });
        return;
      case 'deleteLayer':
        this.live.delete(op.target.layer);
        this.layerTombstones.add(op.target.layer);
        this.seriesTombstones.delete(op.target.layer);
        return;
      case 'commitLayer': {
        const layer = this.live.get(op.target.layer)!;
        this.live.delete(op.target.layer);
        this.baseline.push({ owner: layer.owner, seq: this.seq, doc: layer.doc });
        return;
      }
    }
    const layer = this.live.get(op.target.layer)!;
    const sid = op.target.series!;
    if (op.action === 'createSeries') {
      layer.doc = { ...layer.doc, series: [...layer.doc.series, op.payload] };
    } else if (op.action === 'updateSeries') {
      layer.doc = {
        ...layer.doc,
        series: layer.doc.series.map((s) => (s.id === sid ? op.payload : s)),
      };
    } else if (op.action === 'deleteSeries') {
      layer.doc = {
        ...layer.doc,
        series: layer.doc.series.filter((s) => s.id !== sid),
      };
      let stones = this.seriesTombstones.get(op.target.layer);
      if (!stones) {
        stones = new Set();
        this.seriesTombstones.set(op.target.layer, stones);
      }
      stones.add(sid);
    }
    this.live.set(op.target.layer, layer);
  }

  findSeries(layerId: string, seriesId: string): WireSeries | undefined {
    return this.live
      .get(layerId)
      ?.doc.series.find((s) => s.id === seriesId);
  }

  /** Canonical digest of the replicated state, for replica comparison. */
  stateDigest(): string {
    const tombs: Record<string, string[]> = {};
    for (const [lid, ids] of this.seriesTombstones) {
      if (ids.size > 0) tombs[lid] = [...ids].sort();
    }
    return canonicalJson({
      projectId: this.projectId,
      seq: this.seq,
      baseline: this.baseline,
      live: Object.fromEntries([...this.live.entries()]),
      layerTombstones: [...this.layerTombstones].sort(),
      seriesTombstones: tombs,
    });
  }
}

export class ProtocolError extends Error {}

let nextClientId = 0;

export class ViewerCollabClient {
  readonly projectId: string;
  readonly clientId: string;
  user = '';
  role: Role = 'viewer';
  replica!: ReplicaStore;
  private transport: LineTransport;
  private clientSeq = 0;
  private waiters: {
    resolve: (r: OpResult) => void;
    reject: (e: Error) => void;
  }[] = [];
  private eventListeners: ((event: { seq: number; op: WireOp }) => void)[] = [];
  private closed = false;

  private constructor(
    transport: LineTransport,
    projectId: string,
    clientId?: string,
  ) {
    this.transport = transport;
    this.projectId = projectId;
    this.clientId = clientId ?? `viewer-${Date.now()}-${nextClientId++}`;
  }

  static connect(
    transport: LineTransport,
    projectId: string,
    token: string,
    clientId?: string,
  ): Promise<ViewerCollabClient> {
    const client = new ViewerCollabClient(transport, projectId, clientId);
    return new Promise((resolve, reject) => {
      let welcomed = false;
      transport.onLine((line) => {
        const msg = JSON.parse(line);
        if (!welcomed) {
          if (msg.type === 'error') {
            const err = msg.error ?? {};
            reject(new ProtocolError(`${err.code}: ${err.detail}`));
            transport.close();
            return;
          }
          if (msg.type !== 'welcome') {
            reject(new ProtocolError(`expected welcome, got ${msg.type}`));
            transport.close();
            return;
          }
          welcomed = true;
          client.user = msg.user ?? '';
          client.role = msg.role ?? 'viewer';
          client.replica = new ReplicaStore(msg.snapshot);
          resolve(client);
          return;
        }
        client.dispatch(msg);
      });
      transport.onClose(() => {
        client.closed = true;
        const pending = client.waiters.splice(0);
        for (const w of pending) {
          w.reject(new ProtocolError('connection closed'));
        }
        if (!welcomed) reject(new ProtocolError('connection closed'));
      });
      transport.send(
        JSON.stringify({ type: 'hello', projectId, token }),
      );
    });
  }

  private dispatch(msg: any): void {
    switch (msg.type) {
      case 'event': {
        const event = { seq: msg.seq, op: msg.op };
        this.replica.ingest(event);
        for (const cb of this.eventListeners) cb(event);
        return;
      }
      case 'ack': {
        const waiter = this.waiters.shift();
        waiter?.resolve({ status: 'accepted', seq: msg.seq });
        return;
      }
      case 'error': {
        const waiter = this.waiters.shift();
        waiter?.resolve({ status: 'rejected', error: msg.error ?? {} });
        return;
      }
      case 'bye':
        return;
      default:
        throw new ProtocolError(`unexpected message ${msg.type}`);
    }
  }

  onEvent(cb: (event: { seq: number; op: WireOp }) => void): void {
    this.eventListeners.push(cb);
  }

  nextClientSeq(): number {
    this.clientSeq += 1;
    return this.clientSeq;
  }

  sendOp(
    action: OpAction,
    layerId: string,
    seriesId: string | null = null,
    payload: any = null,
    baseVersion?: number,
  ): Promise<OpResult> {
    if (this.closed) {
      return Promise.reject(new ProtocolError('connection closed'));
    }
    const op: WireOp = {
      opId: [this.clientId, this.nextClientSeq()],
      action,
      target: { layer: layerId, series: seriesId },
      payload,
    };
    if (baseVersion !== undefined) op.baseVersion = baseVersion;
    return new Promise<OpResult>((resolve, reject) => {
      this.waiters.push({ resolve, reject });
      this.transport.send(
        JSON.stringify({ type: 'op', projectId: this.projectId, op }),
      );
    });
  }

  /** Resolve once the replica has applied events up to the given seq. */
  waitForSeq(seq: number, timeoutMs = 10_000): Promise<void> {
    if (this.replica.seq >= seq) return Promise.resolve();
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => {
        reject(
          new ProtocolError(
            `replica at ${this.replica.seq}, wanted ${seq}`,
          ),
        );
      }, timeoutMs);
      this.onEvent(() => {
        if (this.replica.seq >= seq) {
          clearTimeout(timer);
          resolve();
        }
      });
    });
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    try {
      this.transport.send(
        JSON.stringify({ type: 'bye', projectId: this.projectId }),
      );
    } catch {
      // already gone
    }
    this.transport.close();
  }
}
