// Skeleton drawing: side (x/z) and top (x/y) orthographic projections.
// Typed against a minimal 2D-context interface so tests can record calls.
import { framePositions } from "./skeleton.js";
function project(p, view, vp, center) {
    const s = vp.pxPerMeter;
    if (view === "side") {
        return [vp.width / 2 + (p[0] - center[0]) * s, vp.height * 0.9 - p[2] * s];
    }
    return [vp.width / 2 + (p[0] - center[0]) * s, vp.height / 2 - (p[1] - center[1]) * s];
}
export function drawSkeleton(ctx, model, frame, view, vp, held) {
    const pos = framePositions(model, frame);
    const center = [pos[0][0], pos[0][1], 0];
    ctx.clearRect(0, 0, vp.width, vp.height);
    ctx.globalAlpha = held ? 0.35 : 1.0; // held frames render dimmed
    ctx.lineWidth = 2;
    ctx.strokeStyle = "#4fd1c5";
    for (const [a, b] of model.bones) {
        const [ax, ay] = project(pos[a], view, vp, center);
        const [bx, by] = project(pos[b], view, vp, center);
        ctx.beginPath();
        ctx.moveTo(ax, ay);
        ctx.lineTo(bx, by);
        ctx.stroke();
    }
    ctx.fillStyle = "#f6e05e";
    for (const p of pos) {
        const [x, y] = project(p, view, vp, center);
        ctx.beginPath();
        ctx.arc(x, y, 2.5, 0, 2 * Math.PI);
        ctx.fill();
    }
    if (view === "side") {
        // ground line
        ctx.strokeStyle = "#555";
        ctx.lineWidth = 1;
        ctx.beginPath();
        ctx.moveTo(0, vp.height * 0.9);
        ctx.lineTo(vp.width, vp.height * 0.9);
        ctx.stroke();
    }
    ctx.globalAlpha = 1.0;
}
