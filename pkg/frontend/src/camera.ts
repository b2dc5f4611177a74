// Orbit camera model. Pure state in, pure state out: the render loop owns
// nothing here, which is what makes the zoom/orbit contracts testable.

import { Aabb, Vec3, add, boxDiagonal, cross, scale } from './geometry';

export interface CameraState {
  pivot: Vec3;
  distance: number;
  yaw: number; // radians, 0 looks along +y
  pitch: number; // radians, positive looks down from above
  fov: number; // vertical, radians
}

const PITCH_EPS = 1e-4;
export const PITCH_LIMIT = Math.PI / 2 - PITCH_EPS;

// Zoom sensitivity depends on the input device and on nothing else.
// In particular it must never depend on how many points are loaded or how
// large the dataset is; a wheel notch means the same thing everywhere.
export const WHEEL_ZOOM_K = 0.2;
export const TOUCH_ZOOM_K = 1.0; // pinch deltas are already normalized spans

export function clampCamera(c: CameraState, bounds?: Aabb): CameraState {
  let distance = Math.max(c.distance, 1e-9);
  if (bounds) {
    const [near, far] = zoomRange(bounds);
    distance = Math.min(Math.max(distance, near), far);
  }
  const pitch = Math.min(Math.max(c.pitch, -PITCH_LIMIT), PITCH_LIMIT);
  return { ...c, distance, pitch };
}

/** Distance clamp derived from the root box alone. */
export function zoomRange(bounds: Aabb): [number, number] {
  const diag = Math.max(boxDiagonal(bounds), 1e-9);
  return [diag * 1e-4, diag * 8];
}

/**
 * Multiplicative zoom: distance scales by exp(-k * delta). Equal deltas
 * compose to equal factors, zoom in and zoom out cancel, and the factor
 * is identical for a thousand-point scan and a billion-point one.
 */
export function zoom(
  camera: CameraState,
  delta: number,
  touch: boolean,
  bounds?: Aabb,
): CameraState {
  const k = touch ? TOUCH_ZOOM_K : WHEEL_ZOOM_K;
  const next = camera.distance * Math.exp(-k * delta);
  return clampCamera({ ...camera, distance: next }, bounds);
}

export function orbit(
  camera: CameraState,
  dYaw: number,
  dPitch: number,
): CameraState {
  return clampCamera({
    ...camera,
    yaw: camera.yaw + dYaw,
    pitch: camera.pitch + dPitch,
  });
}

/** Unit vector from pivot toward the camera. z is up. */
export function viewOffset(camera: CameraState): Vec3 {
  const cp = Math.cos(camera.pitch);
  return [
    cp * Math.sin(camera.yaw),
    -cp * Math.cos(camera.yaw),
    Math.sin(camera.pitch),
  ];
}

export function cameraPosition(camera: CameraState): Vec3 {
  return add(camera.pivot, scale(viewOffset(camera), camera.distance));
}

/** Screen-plane pan; drag distances are in fractions of viewport height. */
export function pan(camera: CameraState, dx: number, dy: number): CameraState {
  const worldPerUnit = 2 * camera.distance * Math.tan(camera.fov / 2);
  const toCamera = viewOffset(camera);
  const worldUp: Vec3 = [0, 0, 1];
  const right = cross(worldUp, toCamera);
  const rlen = Math.hypot(right[0], right[1], right[2]) || 1;
  const r: Vec3 = [right[0] / rlen, right[1] / rlen, right[2] / rlen];
  const up = cross(toCamera, r);
  const pivot = add(
    camera.pivot,
    add(scale(r, -dx * worldPerUnit), scale(up, dy * worldPerUnit)),
  );
  return { ...camera, pivot };
}

export interface PointOfInterest {
  id: string;
  label: string;
  target: CameraState;
}

/**
 * Activating a POI is a pure assignment of its stored CameraState;
 * activating it twice lands on the identical camera.
 */
export function applyPointOfInterest(poi: PointOfInterest): CameraState {
  return { ...poi.target, pivot: [...poi.target.pivot] as Vec3 };
}

export const POI_FLIGHT_MS = 800;

/**
 * Fixed-duration smooth transition toward a POI. Returns the camera for a
 * time offset in ms; at or past the duration it is exactly the target.
 */
export function poiFlight(
  from: CameraState,
  poi: PointOfInterest,
  durationMs: number = POI_FLIGHT_MS,
): (elapsedMs: number) => CameraState {
  const target = applyPointOfInterest(poi);
  return (elapsedMs: number) => {
    const t = Math.min(Math.max(elapsedMs / durationMs, 0), 1);
    if (t >= 1) return applyPointOfInterest(poi);
    const s = t * t * (3 - 2 * t); // smoothstep
    const mix = (a: number, b: number) => a + (b - a) * s;
    return {
      pivot: [
        mix(from.pivot[0], target.pivot[0]),
        mix(from.pivot[1], target.pivot[1]),
        mix(from.pivot[2], target.pivot[2]),
      ],
      // log-space blend keeps the zoom speed perceptually constant
      distance: Math.exp(mix(Math.log(from.distance), Math.log(target.distance))),
      yaw: mix(from.yaw, target.yaw),
      pitch: mix(from.pitch, target.pitch),
      fov: mix(from.fov, target.fov),
    };
  };
}
