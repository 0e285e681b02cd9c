import init, { Detector, dt_1d, gp_curve } from "./pkg/partforest_web.js";

const $ = (id) => document.getElementById(id);
const status = (msg) => { $("status").textContent = msg; };

function partColor(name) {
  if (name.startsWith("left")) return "#e02020";
  if (name.startsWith("right")) return "#2050e0";
  return "#20a040";
}

// ---- detection ----

let detector = null;

function drawPose(ctx, rec, parents, truth) {
  ctx.strokeStyle = "#999";
  for (let i = 0; i + 1 < truth.length; i += 2) {
    const [x, y] = [truth[i], truth[i + 1]];
    ctx.beginPath();
    ctx.moveTo(x - 3, y - 3); ctx.lineTo(x + 3, y + 3);
    ctx.moveTo(x - 3, y + 3); ctx.lineTo(x + 3, y - 3);
    ctx.stroke();
  }
  ctx.lineWidth = 2;
  rec.parts.forEach((p, i) => {
    const q = parents[i];
    if (q < 0) return;
    ctx.strokeStyle = partColor(p.name);
    ctx.beginPath();
    ctx.moveTo(rec.parts[q].x_px, rec.parts[q].y_px);
    ctx.lineTo(p.x_px, p.y_px);
    ctx.stroke();
  });
  for (const p of rec.parts) {
    ctx.fillStyle = partColor(p.name);
    ctx.beginPath();
    ctx.arc(p.x_px, p.y_px, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.lineWidth = 1;
}

function detect() {
  if (!detector) return;
  const view = detector.detect(Number($("phase").value), BigInt($("fseed").value || 0));
  const info = JSON.parse(view.info());
  const img = new ImageData(new Uint8ClampedArray(view.rgba()), info.width, info.height);
  for (const [id, rec] of [["base", info.baseline], ["enh", info.enhanced]]) {
    const c = $(id);
    c.width = info.width;
    c.height = info.height;
    const ctx = c.getContext("2d");
    ctx.putImageData(img, 0, 0);
    drawPose(ctx, rec, info.parents, info.truth);
  }
  const fmt = (r) => `S_MC ${r.s_mc === null ? "-" : r.s_mc.toFixed(3)}  root ${r.root_score.toFixed(3)}` +
    (r.flags.length ? `  [${r.flags.join(", ")}]` : "");
  $("scores").textContent = `baseline  ${fmt(info.baseline)}\nenhanced  ${fmt(info.enhanced)}`;
}

$("train").onclick = () => {
  status("training...");
  // let the status paint before the blocking call
  setTimeout(() => {
    try {
      const t0 = performance.now();
      detector?.free();
      detector = new Detector(Number($("ntrain").value), 200, $("actor").value, 7n);
      status(`trained in ${((performance.now() - t0) / 1000).toFixed(1)} s`);
      $("phase").disabled = false;
      detect();
    } catch (e) {
      detector = null;
      status(`training failed: ${e.message ?? e}`);
    }
  }, 20);
};
$("phase").oninput = detect;
$("fseed").onchange = detect;

// ---- distance transform ----

const DT_N = 64;
const FLOOR = -20;
const dtSrc = new Float64Array(DT_N).fill(FLOOR);
dtSrc[16] = 0;
dtSrc[40] = -4;

function drawDt() {
  const c = $("dt");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  let out;
  try {
    out = dt_1d(dtSrc, Number($("lin").value), Number($("quad").value), Number($("shift").value));
  } catch (e) {
    status(`distance transform: ${e.message ?? e}`);
    return;
  }
  const vals = out.slice(0, DT_N);
  const arg = out.slice(DT_N);
  const lo = FLOOR - 2;
  const hi = Math.max(2, ...vals, ...dtSrc) + 1;
  const sx = (i) => 10 + (i * (c.width - 20)) / (DT_N - 1);
  const sy = (v) => 10 + ((hi - Math.max(v, lo)) * (c.height - 40)) / (hi - lo);
  ctx.fillStyle = "#aaa";
  dtSrc.forEach((v, i) => ctx.fillRect(sx(i) - 2, sy(v), 4, c.height - 30 - sy(v)));
  ctx.strokeStyle = "#000";
  ctx.beginPath();
  vals.forEach((v, i) => (i ? ctx.lineTo(sx(i), sy(v)) : ctx.moveTo(sx(i), sy(v))));
  ctx.stroke();
  ctx.strokeStyle = "#c33";
  arg.forEach((a, i) => {
    ctx.beginPath();
    ctx.moveTo(sx(i), c.height - 22);
    ctx.lineTo(sx(a), c.height - 6);
    ctx.stroke();
  });
}

$("dt").onclick = (ev) => {
  const c = $("dt");
  const r = c.getBoundingClientRect();
  const i = Math.round(((ev.clientX - r.left - 10) * (DT_N - 1)) / (c.width - 20));
  if (i < 0 || i >= DT_N) return;
  dtSrc[i] = dtSrc[i] > FLOOR ? FLOOR : -((r.bottom - ev.clientY) / c.height) * 8;
  drawDt();
};
for (const id of ["lin", "quad", "shift"]) $(id).oninput = drawDt;

// ---- Gaussian process ----

const gpX = [0.15, 0.3, 0.5, 0.7];
const gpY = [0.2, 0.6, -0.3, 0.4];
const X_RANGE = [0, 1];
const Y_RANGE = [-1.5, 1.5];

function drawGp() {
  const c = $("gp");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const sx = (x) => ((x - X_RANGE[0]) / (X_RANGE[1] - X_RANGE[0])) * c.width;
  const sy = (y) => ((Y_RANGE[1] - y) / (Y_RANGE[1] - Y_RANGE[0])) * c.height;
  ctx.strokeStyle = "#ddd";
  ctx.beginPath(); ctx.moveTo(0, sy(0)); ctx.lineTo(c.width, sy(0)); ctx.stroke();
  if (gpX.length >= 2) {
    const grid = Array.from({ length: 161 }, (_, k) => X_RANGE[0] + (k / 160) * (X_RANGE[1] - X_RANGE[0]));
    try {
      const out = gp_curve(Float64Array.from(gpX), Float64Array.from(gpY), Float64Array.from(grid));
      const n = grid.length;
      const mean = out.slice(0, n);
      const sd = out.slice(n, 2 * n).map((v) => Math.sqrt(Math.max(v, 0)));
      const [lsv, lls, lnv] = out.slice(2 * n);
      ctx.fillStyle = "rgba(40,90,200,0.18)";
      ctx.beginPath();
      grid.forEach((x, k) => (k ? ctx.lineTo(sx(x), sy(mean[k] + 2 * sd[k])) : ctx.moveTo(sx(x), sy(mean[k] + 2 * sd[k]))));
      for (let k = n - 1; k >= 0; k--) ctx.lineTo(sx(grid[k]), sy(mean[k] - 2 * sd[k]));
      ctx.fill();
      ctx.strokeStyle = "#2050c0";
      ctx.lineWidth = 2;
      ctx.beginPath();
      grid.forEach((x, k) => (k ? ctx.lineTo(sx(x), sy(mean[k])) : ctx.moveTo(sx(x), sy(mean[k]))));
      ctx.stroke();
      ctx.lineWidth = 1;
      $("gphyp").textContent =
        `length scale ${Math.exp(lls).toFixed(3)}, signal variance ${Math.exp(lsv).toFixed(3)}, noise variance ${Math.exp(lnv).toExponential(2)}`;
    } catch (e) {
      $("gphyp").textContent = `fit failed: ${e.message ?? e}`;
    }
  } else {
    $("gphyp").textContent = "add at least two points";
  }
  ctx.fillStyle = "#000";
  gpX.forEach((x, i) => {
    ctx.beginPath();
    ctx.arc(sx(x), sy(gpY[i]), 4, 0, 2 * Math.PI);
    ctx.fill();
  });
}

$("gp").onclick = (ev) => {
  const c = $("gp");
  const r = c.getBoundingClientRect();
  gpX.push(X_RANGE[0] + ((ev.clientX - r.left) / r.width) * (X_RANGE[1] - X_RANGE[0]));
  gpY.push(Y_RANGE[1] - ((ev.clientY - r.top) / r.height) * (Y_RANGE[1] - Y_RANGE[0]));
  drawGp();
};
$("gpclear").onclick = () => {
  gpX.length = 0;
  gpY.length = 0;
  drawGp();
};

await init();
status("ready. Train a detector to start (60 frames takes a few seconds).");
drawDt();
drawGp();
