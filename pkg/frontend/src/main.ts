// Browser glue: the only module touching the DOM. Wires the WebSocket,
// the instruction composer (text box, drawing canvas, feature-file picker),
// the 20 ms playback clock, skeleton views, and the latency panel.

import { ConsoleCore, TIMING_FIELDS } from "./console.js";
import { drawSkeleton, Viewport } from "./render.js";
import { KinematicModel, parseModel } from "./skeleton.js";
import { CanvasPoint, trajectoryBody } from "./trajectory.js";

const TICK_MS = 20;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let core: ConsoleCore | null = null;
let model: KinematicModel | null = null;
let reconnects = 0;
let pathPoints: CanvasPoint[] = [];
let musicBody: string | null = null;

function now(): number {
  return performance.now();
}

function connect(): void {
  const url = `${location.origin.replace(/^http/, "ws")}/ws`;
  const ws = new WebSocket(url);
  const session = reconnects === 0 ? "console" : `console-r${reconnects}`;
  reconnects += 1;
  const c = new ConsoleCore({ send: (t) => ws.send(t) }, now, session);
  core = c;
  c.connection = "connecting";
  ws.onopen = () => c.handleOpen();
  ws.onmessage = (ev) => c.handleMessage(String(ev.data));
  ws.onclose = () => {
    c.handleClose();
    setTimeout(connect, 1000); // reconnect with a fresh session
  };
  ws.onerror = () => ws.close();
}

function setupComposer(): void {
  el<HTMLButtonElement>("send-text").onclick = () => {
    core?.sendInstruction({ text: el<HTMLInputElement>("text-input").value });
  };
  el<HTMLButtonElement>("send-path").onclick = () => {
    try {
      core?.sendInstruction({ trajectory: trajectoryBody(pathPoints) });
    } catch (e) {
      core?.log.push(String(e));
    }
  };
  el<HTMLButtonElement>("clear-path").onclick = () => {
    pathPoints = [];
  };
  el<HTMLButtonElement>("send-music").onclick = () => {
    if (musicBody) core?.sendInstruction({ music: musicBody });
  };
  el<HTMLButtonElement>("stop").onclick = () => core?.stop();
  el<HTMLInputElement>("music-file").onchange = async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) {
      musicBody = await file.text();
      el<HTMLSpanElement>("music-name").textContent = file.name;
    }
  };

  const canvas = el<HTMLCanvasElement>("path-canvas");
  let drawing = false;
  canvas.onpointerdown = (ev) => {
    drawing = true;
    pathPoints = [{ x: ev.offsetX, y: ev.offsetY }];
  };
  canvas.onpointermove = (ev) => {
    if (drawing) pathPoints.push({ x: ev.offsetX, y: ev.offsetY });
  };
  canvas.onpointerup = () => {
    drawing = false;
  };
}

function drawPathCanvas(): void {
  const canvas = el<HTMLCanvasElement>("path-canvas");
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#f687b3";
  ctx.lineWidth = 2;
  if (pathPoints.length > 1) {
    ctx.beginPath();
    ctx.moveTo(pathPoints[0].x, pathPoints[0].y);
    for (const p of pathPoints.slice(1)) ctx.lineTo(p.x, p.y);
    ctx.stroke();
  }
}

function updatePanel(): void {
  if (!core) return;
  el<HTMLSpanElement>("status").textContent =
    `${core.connection} | session ${core.session} | frames ${core.framesReceived} | buffered ${core.cache.buffered()}` +
    (core.generating ? " | generating" : "");
  for (const field of TIMING_FIELDS) {
    const v = core.timing[field];
    el<HTMLSpanElement>(`t-${field}`).textContent = v === null ? "—" : v.toFixed(1);
  }
  el<HTMLPreElement>("log").textContent = core.log.slice(-12).join("\n");
}

function startPlayback(): void {
  const side = el<HTMLCanvasElement>("side-view");
  const top = el<HTMLCanvasElement>("top-view");
  const sideCtx = side.getContext("2d")!;
  const topCtx = top.getContext("2d")!;
  const vpSide: Viewport = { width: side.width, height: side.height, pxPerMeter: 140 };
  const vpTop: Viewport = { width: top.width, height: top.height, pxPerMeter: 140 };
  let nextTick = performance.now();
  const loop = () => {
    const t = performance.now();
    while (t >= nextTick) {
      nextTick += TICK_MS;
      const res = core?.tick();
      if (res && res.frame && model) {
        drawSkeleton(sideCtx, model, res.frame, "side", vpSide, res.held);
        drawSkeleton(topCtx, model, res.frame, "top", vpTop, res.held);
      }
    }
    drawPathCanvas();
    updatePanel();
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

async function boot(): Promise<void> {
  const text = await (await fetch("g1_29dof.model")).text();
  model = parseModel(text);
  setupComposer();
  connect();
  startPlayback();
}

boot().catch((e) => {
  document.body.textContent = `console failed to start: ${e}`;
});
