// Kinematic model parsing (the server's structured text format) and forward
// kinematics over a 36-value wire frame, producing link positions plus the
// parent-child bone list the renderer draws.
import { quatFromAxisAngle, quatMul, quatRotate } from "./rotations.js";
export function parseModel(text) {
    const lines = text
        .split("\n")
        .map((l) => l.trim())
        .filter((l) => l.length > 0 && !l.startsWith("#"));
    const header = lines[0].split(/\s+/);
    if (header[0] !== "UAMODEL" || header[1] !== "1")
        throw new Error("bad model header");
    const n = parseInt(header[2], 10);
    const links = [];
    for (const line of lines.slice(1, 1 + n)) {
        const p = line.split(/\s+/);
        if (p.length !== 10)
            throw new Error(`bad link line: ${line}`);
        links.push({
            name: p[0],
            parent: parseInt(p[1], 10),
            offset: [parseFloat(p[2]), parseFloat(p[3]), parseFloat(p[4])],
            axis: [parseFloat(p[5]), parseFloat(p[6]), parseFloat(p[7])],
            dof: p[8] === "-" ? null : parseInt(p[8], 10),
        });
    }
    const bones = [];
    links.forEach((link, i) => {
        if (link.parent >= 0)
            bones.push([link.parent, i]);
    });
    return { links, bones };
}
// wire frame: px py pz qw qx qy qz then 29 joint angles
export function framePositions(model, frame) {
    const rootPos = [frame[0], frame[1], frame[2]];
    const rootQuat = [frame[3], frame[4], frame[5], frame[6]];
    const dof = frame.slice(7);
    const pos = new Array(model.links.length);
    const quat = new Array(model.links.length);
    pos[0] = rootPos;
    quat[0] = rootQuat;
    model.links.forEach((link, i) => {
        if (i === 0)
            return;
        const pq = quat[link.parent];
        const off = quatRotate(pq, link.offset);
        pos[i] = [pos[link.parent][0] + off[0], pos[link.parent][1] + off[1], pos[link.parent][2] + off[2]];
        quat[i] = link.dof === null ? pq : quatMul(pq, quatFromAxisAngle(link.axis, dof[link.dof]));
    });
    return pos;
}
