// Quaternion helpers, (w, x, y, z) Hamilton convention, matching the server.
export function quatMul(a, b) {
    const [aw, ax, ay, az] = a;
    const [bw, bx, by, bz] = b;
    return [
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ];
}
export function quatRotate(q, v) {
    const [, qx, qy, qz] = q;
    const w = q[0];
    const tx = 2 * (qy * v[2] - qz * v[1]);
    const ty = 2 * (qz * v[0] - qx * v[2]);
    const tz = 2 * (qx * v[1] - qy * v[0]);
    return [
        v[0] + w * tx + qy * tz - qz * ty,
        v[1] + w * ty + qz * tx - qx * tz,
        v[2] + w * tz + qx * ty - qy * tx,
    ];
}
export function quatFromAxisAngle(axis, angle) {
    const h = angle / 2;
    const s = Math.sin(h);
    return [Math.cos(h), axis[0] * s, axis[1] * s, axis[2] * s];
}
