// Node binary decoding. Records are 18 bytes little-endian:
// f32 x,y,z (offsets from the node box min corner), u8 r,g,b,
// u16 intensity, u8 classification.

import { Aabb } from './geometry';

export const RECORD_SIZE = 18;

export interface PointBuffer {
  count: number;
  /** absolute positions, xyz interleaved */
  positions: Float64Array;
  rgb: Uint8Array;
  intensity: Uint16Array;
  classification: Uint8Array;
}

export function decodeTile(data: ArrayBuffer, box: Aabb): PointBuffer {
  if (data.byteLength % RECORD_SIZE !== 0) {
    throw new Error(`tile length ${data.byteLength} is not a record multiple`);
  }
  const count = data.byteLength / RECORD_SIZE;
  const view = new DataView(data);
  const positions = new Float64Array(count * 3);
  const rgb = new Uint8Array(count * 3);
  const intensity = new Uint16Array(count);
  const classification = new Uint8Array(count);
  for (let i = 0; i < count; i++) {
    const base = i * RECORD_SIZE;
    positions[i * 3] = view.getFloat32(base, true) + box.min[0];
    positions[i * 3 + 1] = view.getFloat32(base + 4, true) + box.min[1];
    positions[i * 3 + 2] = view.getFloat32(base + 8, true) + box.min[2];
    rgb[i * 3] = view.getUint8(base + 12);
    rgb[i * 3 + 1] = view.getUint8(base + 13);
    rgb[i * 3 + 2] = view.getUint8(base + 14);
    intensity[i] = view.getUint16(base + 15, true);
    classification[i] = view.getUint8(base + 17);
  }
  return { count, positions, rgb, intensity, classification };
}

/**
 * Point sprite size in pixels for a node: the projected sample spacing,
 * so coarser nodes draw fatter points and the screen stays visually
 * dense while children stream in.
 */
export function spriteSizePx(
  spacing: number,
  distanceToCamera: number,
  fov: number,
  viewportHeight: number,
): number {
  const f = viewportHeight / (2 * Math.tan(fov / 2));
  return (spacing / Math.max(distanceToCamera, 1e-9)) * f;
}
