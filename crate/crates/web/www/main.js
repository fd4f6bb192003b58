import init, { derivation_stages, envelope_curve, slice_profile } from "./pkg/dentlab_web.js";

const $ = (id) => document.getElementById(id);
const palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

function frame(ctx, xs, ys, pad = 24) {
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const w = ctx.canvas.width - 2 * pad, h = ctx.canvas.height - 2 * pad;
  const sx = (x) => pad + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * w;
  const sy = (y) => pad + h - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * h;
  return { sx, sy };
}

function run(fn, out) {
  try {
    return JSON.parse(fn());
  } catch (e) {
    $(out).textContent = String(e.message ?? e);
    return null;
  }
}

function derivation() {
  const eps = parseFloat($("d-eps").value);
  $("d-eps-v").textContent = eps.toFixed(2);
  const r = run(() => derivation_stages($("d-shape").value, parseInt($("d-n").value), 1n, eps, $("d-cluster").checked), "d-out");
  if (!r) return;
  const ctx = $("d-canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const { sx, sy } = frame(ctx, r.points.map((p) => p[0]), r.points.map((p) => p[1]));
  r.points.forEach((p, i) => {
    const s = r.stage[i];
    ctx.fillStyle = s == null ? "#000" : palette[(s - 1) % palette.length];
    ctx.beginPath();
    ctx.arc(sx(p[0]), sy(p[1]), 5, 0, 2 * Math.PI);
    ctx.fill();
  });
  const counts = {};
  r.stage.forEach((s) => { if (s != null) counts[s] = (counts[s] ?? 0) + 1; });
  const lines = Object.entries(counts).map(([k, c]) => `stage ${k}: ${c} removed`);
  lines.push(r.dz != null ? `Dz = ${r.dz}` : `stalled at stage ${r.stalled_at}`);
  $("d-out").textContent = lines.join("\n");
}

function envelope() {
  const n = parseInt($("e-n").value);
  $("e-n-v").textContent = n;
  const r = run(() => envelope_curve($("e-kind").value, n, 801), "e-out");
  if (!r) return;
  const ctx = $("e-canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const { sx, sy } = frame(ctx, r.x, r.f.concat(r.fn));
  const curve = (ys, color) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    r.x.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
    ctx.stroke();
  };
  curve(r.f, "#999");
  curve(r.fn, "#d62728");
  $("e-out").textContent = `grey: f\nred: f_n\nsup |f - f_n| = ${r.sup_error.toExponential(3)}`;
}

function profile() {
  const angle = parseFloat($("s-angle").value);
  const r = run(() => slice_profile($("s-shape").value, 120, 3n, angle), "s-out");
  if (!r) return;
  const u = [Math.cos(angle), Math.sin(angle)];
  const vals = r.points.map((p) => p[0] * u[0] + p[1] * u[1]);
  const top = Math.max(...vals);
  const t = r.profile.samples[Math.floor(r.profile.samples.length / 2)].t;
  const c = $("s-cloud").getContext("2d");
  c.clearRect(0, 0, c.canvas.width, c.canvas.height);
  const f = frame(c, r.points.map((p) => p[0]), r.points.map((p) => p[1]));
  r.points.forEach((p, i) => {
    c.fillStyle = vals[i] > top - t ? "#d62728" : "#888";
    c.beginPath();
    c.arc(f.sx(p[0]), f.sy(p[1]), 3.5, 0, 2 * Math.PI);
    c.fill();
  });
  const ctx = $("s-plot").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const ts = r.profile.samples.map((s) => Math.log2(s.t));
  const os = r.profile.samples.map((s) => s.oscillation);
  const g = frame(ctx, ts, os.concat([0]));
  ctx.strokeStyle = "#1f77b4";
  ctx.beginPath();
  ts.forEach((x, i) => (i ? ctx.lineTo(g.sx(x), g.sy(os[i])) : ctx.moveTo(g.sx(x), g.sy(os[i]))));
  ctx.stroke();
  const v = r.profile.verdict;
  $("s-out").textContent = `oscillation against log2 t; red points: slice at t = ${t.toPrecision(3)}\nverdict: ${v.kind}${v.floor != null ? ` (floor ${v.floor.toFixed(3)})` : ""}`;
}

await init();
for (const id of ["d-shape", "d-n", "d-eps", "d-cluster"]) $(id).addEventListener("input", derivation);
for (const id of ["e-kind", "e-n"]) $(id).addEventListener("input", envelope);
for (const id of ["s-shape", "s-angle"]) $(id).addEventListener("input", profile);
derivation();
envelope();
profile();
