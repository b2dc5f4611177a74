// Client-side measurement math. The formulas (and their operation order)
// mirror the server's evaluator so the readout in the Properties panel is
// the same number the server would report, not an approximation.

import { Aabb, Vec3 } from './geometry';
import { Manifest } from './manifest';
import { PointBuffer } from './tiles';

export type SeriesKind =
  | 'distance'
  | 'height'
  | 'angle'
  | 'area'
  | 'volume'
  | 'profile'
  | 'polygon'
  | 'annotation';

// Wire shapes: extra fields are kept as-is so unknown vendor data survives.
export interface WireVertex {
  position: number[];
  snapped: boolean;
  snapNode?: string;
  [key: string]: any;
}

export interface WireSeries {
  id: string;
  kind: SeriesKind;
  label: string;
  color: number[];
  version: number;
  author: string;
  vertices: WireVertex[];
  profileWidth?: number;
  boxExtent?: number[];
  yaw?: number;
  [key: string]: any;
}

export interface Evaluation {
  kind: SeriesKind;
  values: number[];
  segments: number[];
}

// sqrt of an explicit left-to-right sum of squares, matching the server's
// vector norm exactly in IEEE terms (Math.hypot rounds differently)
function norm3(dx: number, dy: number, dz: number): number {
  return Math.sqrt(dx * dx + dy * dy + dz * dz);
}

export function polylineLength(points: number[][]): {
  total: number;
  segments: number[];
} {
  const segments: number[] = [];
  for (let i = 1; i < points.length; i++) {
    segments.push(
      norm3(
        points[i][0] - points[i - 1][0],
        points[i][1] - points[i - 1][1],
        points[i][2] - points[i - 1][2],
      ),
    );
  }
  let total = 0;
  for (const s of segments) total += s;
  return { total, segments };
}

function sub3(a: number[], b: number[]): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function triangleAngles(
  a: number[],
  b: number[],
  c: number[],
): [number, number, number] {
  const ab = sub3(b, a);
  const bc = sub3(c, b);
  const ca = sub3(a, c);
  const lab = norm3(ab[0], ab[1], ab[2]);
  const lbc = norm3(bc[0], bc[1], bc[2]);
  const lca = norm3(ca[0], ca[1], ca[2]);
  const deg = 180 / Math.PI;
  const angle = (u: Vec3, v: Vec3, lu: number, lv: number) => {
    const cosine = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (lu * lv);
    return Math.acos(Math.min(Math.max(cosine, -1), 1)) * deg;
  };
  const neg = (v: Vec3): Vec3 => [-v[0], -v[1], -v[2]];
  return [
    angle(ab, neg(ca), lab, lca),
    angle(neg(ab), bc, lab, lbc),
    angle(neg(bc), ca, lbc, lca),
  ];
}

/** Half the magnitude of the cyclic cross-product sum. */
export function newellArea(points: number[][]): number {
  let sx = 0;
  let sy = 0;
  let sz = 0;
  const n = points.length;
  for (let i = 0; i < n; i++) {
    const p = points[i];
    const q = points[(i + 1) % n];
    sx += p[1] * q[2] - p[2] * q[1];
    sy += p[2] * q[0] - p[0] * q[2];
    sz += p[0] * q[1] - p[1] * q[0];
  }
  return norm3(sx, sy, sz) / 2;
}

export function evaluateSeries(series: WireSeries): Evaluation {
  const pts = series.vertices.map((v) => v.position);
  switch (series.kind) {
    case 'distance': {
      const { total, segments } = polylineLength(pts);
      return { kind: series.kind, values: [total], segments };
    }
    case 'height':
      return {
        kind: series.kind,
        values: [Math.abs(pts[1][2] - pts[0][2])],
        segments: [],
      };
    case 'angle':
      return {
        kind: series.kind,
        values: triangleAngles(pts[0], pts[1], pts[2]),
        segments: [],
      };
    case 'area':
      return { kind: series.kind, values: [newellArea(pts)], segments: [] };
    case 'volume': {
      const [ex, ey, ez] = series.boxExtent ?? [0, 0, 0];
      if (!(ex > 0 && ey > 0 && ez > 0)) {
        throw new Error('Volume box extent must be positive');
      }
      return { kind: series.kind, values: [ex * ey * ez], segments: [] };
    }
    default:
      // profile needs index data; polygons and annotations have no scalar
      return { kind: series.kind, values: [], segments: [] };
  }
}

export interface SnapResult {
  position: Vec3;
  snapped: boolean;
  snapNode?: string;
}

function boxGap(p: Vec3, box: Aabb): number {
  let d2 = 0;
  for (let i = 0; i < 3; i++) {
    const gap = Math.max(box.min[i] - p[i], p[i] - box.max[i], 0);
    d2 += gap * gap;
  }
  return Math.sqrt(d2);
}

/**
 * Nearest loaded point within radius, else the raw position. Tie-break is
 * (distance, node code, in-node index): the server's snapping order, so a
 * click resolves to the same stored point on every client.
 */
export function snapToLoaded(
  query: Vec3,
  radius: number,
  manifest: Manifest,
  tiles: Map<string, PointBuffer>,
): SnapResult {
  if (!(radius > 0)) throw new Error('radius must be > 0');
  let best: { d: number; code: string; index: number; pos: Vec3 } | null = null;
  for (const code of [...tiles.keys()].sort()) {
    const node = manifest.nodes.get(code);
    const buf = tiles.get(code)!;
    if (!node || boxGap(query, node.aabb) > radius) continue;
    for (let i = 0; i < buf.count; i++) {
      const x = buf.positions[i * 3];
      const y = buf.positions[i * 3 + 1];
      const z = buf.positions[i * 3 + 2];
      const d = norm3(x - query[0], y - query[1], z - query[2]);
      if (d <= radius && (best === null || d < best.d)) {
        best = { d, code, index: i, pos: [x, y, z] };
      }
    }
  }
  if (best === null) {
    return { position: [...query] as Vec3, snapped: false };
  }
  return { position: best.pos, snapped: true, snapNode: best.code };
}

/** World-space radius of a pixel disc at a given depth. */
export function pixelRadiusToWorld(
  px: number,
  depth: number,
  fov: number,
  viewportHeight: number,
): number {
  return (px * 2 * Math.tan(fov / 2) * depth) / viewportHeight;
}

export interface ProfileSample {
  mileage: number;
  elevation: number;
  lateral: number;
}

/**
 * Corridor profile over the loaded tiles: every point within width/2
 * (horizontally) of the polyline, sorted by mileage. Mirrors the server's
 * projection: ties between segments go to the earlier segment, lateral is
 * signed positive to the left of travel.
 */
export function profileFromLoaded(
  polylineXY: [number, number][],
  width: number,
  manifest: Manifest,
  tiles: Map<string, PointBuffer>,
): ProfileSample[] {
  if (!(width > 0)) throw new Error('width must be > 0');
  if (polylineXY.length < 2) {
    throw new Error('profile polyline needs at least 2 vertices');
  }
  const half = width / 2;
  const segLen: number[] = [];
  const cum: number[] = [0];
  for (let k = 1; k < polylineXY.length; k++) {
    const len = Math.hypot(
      polylineXY[k][0] - polylineXY[k - 1][0],
      polylineXY[k][1] - polylineXY[k - 1][1],
    );
    segLen.push(len);
    cum.push(cum[k - 1] + len);
  }
  if (cum[cum.length - 1] === 0) {
    throw new Error('profile polyline has zero horizontal length');
  }

  const out: ProfileSample[] = [];
  for (const code of [...tiles.keys()].sort()) {
    const buf = tiles.get(code)!;
    for (let i = 0; i < buf.count; i++) {
      const px = buf.positions[i * 3];
      const py = buf.positions[i * 3 + 1];
      let bestD2 = Infinity;
      let mileage = 0;
      let lateral = 0;
      for (let k = 0; k < segLen.length; k++) {
        const length = segLen[k];
        if (length === 0) continue;
        const [ax, ay] = polylineXY[k];
        const dx = polylineXY[k + 1][0] - ax;
        const dy = polylineXY[k + 1][1] - ay;
        let t = ((px - ax) * dx + (py - ay) * dy) / (length * length);
        t = Math.min(Math.max(t, 0), 1);
        const fx = ax + t * dx;
        const fy = ay + t * dy;
        const d2 = (px - fx) ** 2 + (py - fy) ** 2;
        if (d2 < bestD2) {
          bestD2 = d2;
          mileage = cum[k] + t * length;
          lateral = (dx * (py - ay) - dy * (px - ax)) / length;
        }
      }
      if (Math.sqrt(bestD2) <= half) {
        out.push({ mileage, elevation: buf.positions[i * 3 + 2], lateral });
      }
    }
  }
  return out.sort((a, b) => a.mileage - b.mileage);
}
