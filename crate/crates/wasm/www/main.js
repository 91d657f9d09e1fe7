import init, { binomial_explorer, uniform_intervals, mixture_sample, mixture_tau_set } from "./pkg/repro_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x === null || x === undefined ? "none" : x.toFixed(4));
const pair = (p) => (p ? `[${fmt(p[0])}, ${fmt(p[1])}]` : "empty");

function report(out, fn) {
  try {
    out.classList.remove("err");
    fn();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(40, 10, w - 50, h - 40);
}

// Binomial: acceptance band of counts per theta, observed count as a horizontal line.
function drawBinomial() {
  const r = Number($("b-r").value);
  const slider = $("b-y");
  slider.max = r;
  const y = Math.min(Number(slider.value), r);
  $("b-yv").textContent = y;
  report($("b-out"), () => {
    const v = JSON.parse(binomial_explorer(r, y, Number($("b-alpha").value)));
    const c = $("b-plot");
    const ctx = c.getContext("2d");
    const [w, h] = [c.width, c.height];
    axes(ctx, w, h);
    const sx = (t) => 40 + t * (w - 50);
    const sy = (k) => h - 30 - (k / r) * (h - 40);
    ctx.fillStyle = "rgba(70, 120, 200, 0.35)";
    v.theta.forEach((t, i) => ctx.fillRect(sx(t) - 2, sy(v.upper[i] + 0.5), 4, sy(v.lower[i] - 0.5) - sy(v.upper[i] + 0.5)));
    ctx.strokeStyle = "#c33";
    ctx.beginPath();
    ctx.moveTo(sx(0), sy(y));
    ctx.lineTo(sx(1), sy(y));
    ctx.stroke();
    ctx.fillStyle = "rgba(200, 50, 50, 0.6)";
    v.runs.forEach(([a, b]) => ctx.fillRect(sx(a), h - 28, sx(b) - sx(a), 8));
    ctx.fillStyle = "#333";
    ctx.fillText("theta", w - 40, h - 5);
    ctx.fillText("0", 30, h - 28);
    ctx.fillText(String(r), 20, 18);
    $("b-out").textContent = `confidence set: ${v.runs.map((p) => pair(p)).join(" and ")}`;
  });
}

// Uniform: intervals stacked as horizontal bars, data as ticks.
function drawUniform() {
  report($("u-out"), () => {
    const y = $("u-data").value.split(/[\s,]+/).filter((s) => s.length).map(Number);
    const v = JSON.parse(uniform_intervals(new Float64Array(y), Number($("u-alpha").value)));
    const rows = [
      ["feasible", v.feasible, "#aaa"],
      ["test", v.test, "#7a7"],
      ["Irwin-Hall", v.irwin_hall, "#47c"],
      ["order statistic", v.order_stat, "#c74"],
      ["likelihood ratio", v.lrt, "#a4a"],
    ];
    const ends = rows.flatMap(([, p]) => (p ? p : [])).concat(y);
    const lo = Math.min(...ends) - 0.1;
    const hi = Math.max(...ends) + 0.1;
    const c = $("u-plot");
    const ctx = c.getContext("2d");
    const [w, h] = [c.width, c.height];
    ctx.clearRect(0, 0, w, h);
    const sx = (x) => 130 + ((x - lo) / (hi - lo)) * (w - 150);
    rows.forEach(([name, p, color], i) => {
      const top = 10 + i * 30;
      ctx.fillStyle = "#333";
      ctx.fillText(name, 5, top + 12);
      if (p) {
        ctx.fillStyle = color;
        ctx.fillRect(sx(p[0]), top, Math.max(1, sx(p[1]) - sx(p[0])), 16);
      }
    });
    ctx.strokeStyle = "#000";
    y.forEach((x) => {
      ctx.beginPath();
      ctx.moveTo(sx(x), h - 30);
      ctx.lineTo(sx(x), h - 15);
      ctx.stroke();
    });
    $("u-out").textContent = rows.map(([name, p]) => `${name}: ${pair(p)}`).join("\n") + `\nq: ${fmt(v.q)}`;
  });
}

let mixtureData = [];

// Mixture: histogram of the sample.
function drawHistogram() {
  const c = $("m-plot");
  const ctx = c.getContext("2d");
  const [w, h] = [c.width, c.height];
  axes(ctx, w, h);
  if (!mixtureData.length) return;
  const lo = Math.min(...mixtureData);
  const hi = Math.max(...mixtureData);
  const bins = 40;
  const counts = new Array(bins).fill(0);
  mixtureData.forEach((x) => counts[Math.min(bins - 1, Math.floor(((x - lo) / (hi - lo || 1)) * bins))]++);
  const top = Math.max(...counts);
  const bw = (w - 50) / bins;
  ctx.fillStyle = "#47c";
  counts.forEach((k, i) => {
    const bh = (k / top) * (h - 40);
    ctx.fillRect(40 + i * bw, h - 30 - bh, bw - 1, bh);
  });
  ctx.fillStyle = "#333";
  ctx.fillText(fmt(lo), 40, h - 15);
  ctx.fillText(fmt(hi), w - 60, h - 15);
}

function sampleMixture() {
  report($("m-out"), () => {
    mixtureData = JSON.parse(mixture_sample(Number($("m-tau").value), Number($("m-n").value), BigInt($("m-seed").value)));
    drawHistogram();
    $("m-out").textContent = `drew ${mixtureData.length} points`;
  });
}

function runMixture() {
  $("m-out").textContent = "running...";
  // Let the text paint before the blocking call.
  setTimeout(() => {
    report($("m-out"), () => {
      const t0 = performance.now();
      const v = JSON.parse(
        mixture_tau_set(
          new Float64Array(mixtureData),
          0.95,
          Number($("m-lambda").value),
          6,
          Number($("m-v").value),
          Number($("m-vc").value),
          BigInt($("m-seed").value),
        ),
      );
      const levels = Object.entries(v.levels).map(([k, l]) => `  order ${k}: ${l.toFixed(3)}`).join("\n");
      $("m-out").textContent =
        `order set: {${v.set.join(", ")}}\nBIC estimate: ${v.w}\nsmallest level per order:\n${levels}\n` +
        `${((performance.now() - t0) / 1000).toFixed(1)} s`;
    });
  }, 20);
}

await init();
$("status").textContent = "";
["b-r", "b-y", "b-alpha"].forEach((id) => $(id).addEventListener("input", drawBinomial));
$("u-run").addEventListener("click", drawUniform);
$("m-sample").addEventListener("click", sampleMixture);
$("m-run").addEventListener("click", runMixture);
drawBinomial();
drawUniform();
sampleMixture();
