import init, { construct, compare_baselines, loss_curve } from "./pkg/conflictfree_web.js";

const COLORS = { optimal: "#1b7837", order: "#2166ac", renorm: "#e08214", uniform: "#8c510a" };

const $ = (id) => document.getElementById(id);

function parseWeights(text) {
  return Float64Array.from(text.split(/[\s,]+/).filter(Boolean).map(Number));
}

function call(fn, ...args) {
  try {
    return { ok: JSON.parse(fn(...args)) };
  } catch (e) {
    const msg = typeof e === "string" ? JSON.parse(e).message : String(e);
    return { err: msg };
  }
}

function drawHeatmap(canvas, rows) {
  const ctx = canvas.getContext("2d");
  const n = rows.length;
  const cell = canvas.width / n;
  const max = Math.max(...rows.flat(), 1e-12);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = `${Math.max(9, Math.min(14, cell / 4))}px monospace`;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  rows.forEach((row, i) => row.forEach((p, j) => {
    const shade = Math.round(255 * (1 - p / max));
    ctx.fillStyle = i === j ? "#eee" : `rgb(${shade}, ${shade}, 255)`;
    ctx.fillRect(j * cell, i * cell, cell, cell);
    if (n <= 8) {
      ctx.fillStyle = p / max > 0.6 ? "#fff" : "#000";
      ctx.fillText(p.toFixed(4), (j + 0.5) * cell, (i + 0.5) * cell);
    }
  }));
}

function runConstruct() {
  const r = call(construct, parseWeights($("pref-a").value), parseWeights($("pref-b").value));
  const out = $("construct-summary");
  if (r.err) {
    out.className = "error";
    out.textContent = r.err;
    return;
  }
  out.className = "";
  const v = r.ok;
  const pop = v.popularity.map((s) => s.toFixed(3)).join(", ");
  out.textContent = `branch ${v.branch}, loss ${v.loss.toExponential(3)}, popularity [${pop}]`;
  drawHeatmap($("heatmap"), v.rows);
}

function runCompare() {
  const r = call(compare_baselines, parseWeights($("pref-a").value), parseWeights($("pref-b").value));
  const box = $("compare");
  if (r.err) {
    box.innerHTML = `<p class="error"></p>`;
    box.firstChild.textContent = r.err;
    return;
  }
  const rows = r.ok.map((m) => `<tr><td style="text-align:left">${m.method}</td><td>${
    m.error ? m.error : m.loss.toExponential(4)}</td></tr>`);
  box.innerHTML = `<table><tr><th>method</th><th>loss</th></tr>${rows.join("")}</table>`;
}

function runCurve() {
  const r = call(loss_curve, $("family").value, Number($("n-max").value));
  const canvas = $("chart");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (r.err) {
    ctx.fillStyle = "#b00";
    ctx.fillText(r.err, 10, 20);
    return;
  }
  const { n, series } = r.ok;
  // Exact zeros cannot sit on a log axis; they are drawn at the floor.
  const floor = 1e-16;
  const all = Object.values(series).flat().filter((x) => x !== null && x > floor);
  const lo = Math.log10(Math.max(floor, Math.min(...all)));
  const hi = Math.log10(Math.max(...all));
  const pad = { l: 50, r: 10, t: 10, b: 30 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  const x = (k) => pad.l + (w * (n[k] - n[0])) / Math.max(1, n[n.length - 1] - n[0]);
  const y = (v) => pad.t + (h * (hi - Math.log10(Math.max(v, floor)))) / Math.max(1e-9, hi - lo);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w, h);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e += Math.max(1, Math.ceil((hi - lo) / 8))) {
    ctx.fillText(`1e${e}`, 4, y(10 ** e) + 4);
  }
  ctx.fillText(`N = ${n[0]}`, pad.l, canvas.height - 8);
  ctx.fillText(`N = ${n[n.length - 1]}`, pad.l + w - 40, canvas.height - 8);

  for (const [method, values] of Object.entries(series)) {
    ctx.strokeStyle = COLORS[method];
    ctx.beginPath();
    values.forEach((v, k) => {
      if (v === null) return;
      k === 0 ? ctx.moveTo(x(k), y(v)) : ctx.lineTo(x(k), y(v));
    });
    ctx.stroke();
  }
  $("legend").innerHTML = Object.keys(series)
    .map((m) => `<span><i style="background:${COLORS[m]}"></i>${m}</span>`)
    .join("");
}

await init();
$("run-construct").onclick = runConstruct;
$("run-compare").onclick = runCompare;
$("run-curve").onclick = runCurve;
runConstruct();
runCompare();
runCurve();
