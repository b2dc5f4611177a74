// Measurement tool flow: arm a tool, click points (each click snaps to the
// loaded cloud), watch the live readout, and the finished series goes to
// the server as a create op. Conflicts rebase once, then surface a banner
// instead of silently retrying forever.

import { randomUUID } from 'node:crypto';

import { cameraPosition, CameraState } from './camera';
import { OpResult, ViewerCollabClient } from './collab';
import { distance, Vec3 } from './geometry';
import { Manifest } from './manifest';
import {
  evaluateSeries,
  pixelRadiusToWorld,
  SeriesKind,
  snapToLoaded,
  SnapResult,
  WireSeries,
} from './measure';
import { PointBuffer } from './tiles';

export interface Notice {
  severity: 'info' | 'conflict' | 'error';
  message: string;
}

interface ToolParams {
  label?: string;
  profileWidth?: number;
  boxExtent?: [number, number, number];
  yaw?: number;
}

// clicks needed before the tool completes on its own; null = explicit finish
const AUTO_COMPLETE: Record<SeriesKind, number | null> = {
  distance: 2,
  height: 2,
  angle: 3,
  annotation: 1,
  volume: 1,
  area: null,
  polygon: null,
  profile: null,
};

const MIN_VERTICES: Record<SeriesKind, number> = {
  distance: 2,
  height: 2,
  angle: 3,
  annotation: 1,
  volume: 1,
  area: 3,
  polygon: 3,
  profile: 2,
};

export const SNAP_RADIUS_PX = 8;

export class MeasureInteraction {
  readonly notices: Notice[] = [];
  armedTool: SeriesKind | null = null;
  draft: SnapResult[] = [];
  private params: ToolParams = {};
  private client: ViewerCollabClient;
  private layerId: string;
  private viewportHeight: number;

  constructor(
    client: ViewerCollabClient,
    layerId: string,
    viewportHeight = 1080,
  ) {
    this.client = client;
    this.layerId = layerId;
    this.viewportHeight = viewportHeight;
  }

  arm(kind: SeriesKind, params: ToolParams = {}): void {
    this.armedTool = kind;
    this.params = params;
    this.draft = [];
  }

  escape(): void {
    // cancel: nothing was sent, nothing will be
    this.armedTool = null;
    this.draft = [];
  }

  /**
   * A click in world space. The pick position snaps to the nearest loaded
   * point within an 8 px disc at the pick depth. Returns a submit promise
   * when the click completed the tool, null while the draft is still open.
   */
  click(
    rawPoint: Vec3,
    camera: CameraState,
    manifest: Manifest,
    tiles: Map<string, PointBuffer>,
  ): Promise<OpResult> | null {
    if (!this.armedTool) throw new Error('no tool armed');
    const depth = distance(cameraPosition(camera), rawPoint);
    const radius = pixelRadiusToWorld(
      SNAP_RADIUS_PX,
      depth,
      camera.fov,
      this.viewportHeight,
    );
    this.draft.push(snapToLoaded(rawPoint, radius, manifest, tiles));
    const needed = AUTO_COMPLETE[this.armedTool];
    if (needed !== null && this.draft.length >= needed) {
      return this.finish();
    }
    return null;
  }

  /** Live scalar for the open draft (running length, partial angle, ...). */
  readout(): number[] {
    if (!this.armedTool || this.draft.length === 0) return [];
    try {
      return evaluateSeries(this.buildSeries()).values;
    } catch {
      return [];
    }
  }

  buildSeries(): WireSeries {
    if (!this.armedTool) throw new Error('no tool armed');
    const series: WireSeries = {
      id: randomUUID(),
      kind: this.armedTool,
      label: this.params.label ?? '',
      color: [255, 255, 0],
      version: 1,
      author: this.client.user,
      vertices: this.draft.map((v) => ({
        position: [...v.position],
        snapped: v.snapped,
        ...(v.snapNode ? { snapNode: v.snapNode } : {}),
      })),
    };
    if (this.armedTool === 'profile') {
      series.profileWidth = this.params.profileWidth ?? 1.0;
    }
    if (this.armedTool === 'volume') {
      series.boxExtent = this.params.boxExtent ?? [1, 1, 1];
      series.yaw = this.params.yaw ?? 0;
    }
    return series;
  }

  async finish(): Promise<OpResult> {
    if (!this.armedTool) throw new Error('no tool armed');
    if (this.draft.length < MIN_VERTICES[this.armedTool]) {
      throw new Error(
        `${this.armedTool} needs ${MIN_VERTICES[this.armedTool]} vertices, ` +
          `draft has ${this.draft.length}`,
      );
    }
    const series = this.buildSeries();
    this.armedTool = null;
    this.draft = [];
    const result = await this.client.sendOp(
      'createSeries',
      this.layerId,
      series.id,
      series,
    );
    if (result.status === 'rejected') {
      this.notices.push({
        severity: 'error',
        message: `${result.error.code}: ${result.error.detail}`,
      });
    }
    return result;
  }

  /**
   * Edit an existing series with optimistic versioning. On StaleVersion the
   * edit is rebased onto the server's current object and retried once; a
   * second conflict surfaces a banner with the winning version.
   */
  async updateWithRebase(
    seriesId: string,
    edit: (current: WireSeries) => WireSeries,
  ): Promise<OpResult> {
    const stored = this.client.replica.findSeries(this.layerId, seriesId);
    if (!stored) throw new Error(`no series ${seriesId}`);
    const attempt = (base: WireSeries): Promise<OpResult> => {
      const next = { ...edit({ ...base }), id: seriesId, version: base.version + 1 };
      return this.client.sendOp(
        'updateSeries',
        this.layerId,
        seriesId,
        next,
        base.version,
      );
    };
    let result = await attempt(stored);
    if (result.status === 'rejected' && result.error.code === 'StaleVersion') {
      const current = result.error.current as WireSeries | undefined;
      if (current) {
        result = await attempt(current);
        if (
          result.status === 'rejected' &&
          result.error.code === 'StaleVersion'
        ) {
          const winner = result.error.current as WireSeries | undefined;
          this.notices.push({
            severity: 'conflict',
            message:
              `series ${seriesId} changed again while rebasing; ` +
              `server is at version ${winner?.version}`,
          });
        }
      }
    }
    return result;
  }
}
