// Small vector/box helpers shared by the camera, LOD and measurement code.

export type Vec3 = [number, number, number];

export interface Aabb {
  min: Vec3;
  max: Vec3;
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function length(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function distance(a: Vec3, b: Vec3): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

export function boxCenter(box: Aabb): Vec3 {
  return [
    (box.min[0] + box.max[0]) / 2,
    (box.min[1] + box.max[1]) / 2,
    (box.min[2] + box.max[2]) / 2,
  ];
}

export function boxExtent(box: Aabb): Vec3 {
  return sub(box.max, box.min);
}

export function boxDiagonal(box: Aabb): number {
  return length(boxExtent(box));
}

/** Euclidean distance from a point to the box (0 inside). */
export function distanceToBox(p: Vec3, box: Aabb): number {
  let d2 = 0;
  for (let i = 0; i < 3; i++) {
    const below = box.min[i] - p[i];
    const above = p[i] - box.max[i];
    const gap = Math.max(below, above, 0);
    d2 += gap * gap;
  }
  return Math.sqrt(d2);
}

/**
 * Child octant of a box. Digit bit layout matches the tile convention:
 * bit 2 selects the upper x half, bit 1 the y half, bit 0 the z half.
 */
export function childBox(box: Aabb, digit: number): Aabb {
  const lo: number[] = [];
  const hi: number[] = [];
  for (let axis = 0; axis < 3; axis++) {
    const mid = (box.min[axis] + box.max[axis]) / 2;
    if ((digit >> (2 - axis)) & 1) {
      lo.push(mid);
      hi.push(box.max[axis]);
    } else {
      lo.push(box.min[axis]);
      hi.push(mid);
    }
  }
  return { min: lo as Vec3, max: hi as Vec3 };
}

export function nodeBoxFromRoot(root: Aabb, code: string): Aabb {
  let box = root;
  for (const ch of code.slice(1)) {
    box = childBox(box, Number(ch));
  }
  return box;
}
