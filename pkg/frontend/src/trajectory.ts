// Drawn-path handling: canvas pixels -> world meters -> the server's
// trajectory file format, resampled to the 5 FPS segmentation the
// tokenizer expects.

export interface CanvasPoint {
  x: number;
  y: number;
}

export const TRAJ_FPS = 5;
export const WALK_SPEED = 1.2; // m/s assumed along the drawn path

export function pathToMeters(points: CanvasPoint[], pxPerMeter: number): Array<[number, number]> {
  if (points.length === 0) return [];
  const ox = points[0].x;
  const oy = points[0].y;
  // canvas y grows downward; world y grows left of travel
  return points.map((p) => [(p.x - ox) / pxPerMeter, (oy - p.y) / pxPerMeter]);
}

export function resampleByArcLength(path: Array<[number, number]>, step: number): Array<[number, number]> {
  if (path.length < 2) return path.slice();
  const out: Array<[number, number]> = [path[0]];
  let carried = 0;
  for (let i = 1; i < path.length; i++) {
    let [ax, ay] = path[i - 1];
    const [bx, by] = path[i];
    let seg = Math.hypot(bx - ax, by - ay);
    while (carried + seg >= step) {
      const need = step - carried;
      const u = need / seg;
      const nx = ax + u * (bx - ax);
      const ny = ay + u * (by - ay);
      out.push([nx, ny]);
      ax = nx;
      ay = ny;
      seg -= need;
      carried = 0;
    }
    carried += seg;
  }
  return out;
}

export function trajectoryBody(points: CanvasPoint[], pxPerMeter = 50): string {
  const meters = pathToMeters(points, pxPerMeter);
  const sampled = resampleByArcLength(meters, WALK_SPEED / TRAJ_FPS);
  if (sampled.length < 2) throw new Error("draw a longer path (need at least 2 samples at 5 FPS)");
  const lines = [`UATRAJ 1 ${TRAJ_FPS.toFixed(1)} ${sampled.length}`];
  for (const [x, y] of sampled) {
    lines.push(`${x} ${y} 0.0 1.0 0.0 0.0 0.0`);
  }
  return lines.join("\n") + "\n";
}
