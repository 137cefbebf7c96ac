import init, { loss_curves, eval_logits, train_blobs } from "./pkg/lace_demo.js";

const COLORS = { cross_entropy: "#1f77b4", adaptive: "#d62728", k: "#2ca02c" };

function plot(canvas, xs, series, yMax) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 8, w - pad - 8, h - pad - 8);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  const xMax = xs[xs.length - 1];
  const px = (x) => pad + (x / xMax) * (w - pad - 8);
  const py = (y) => h - pad - (Math.min(y, yMax) / yMax) * (h - pad - 16);
  for (let i = 0; i <= 4; i++) {
    const y = (yMax * i) / 4;
    ctx.fillText(y.toFixed(2), 2, py(y) + 4);
    ctx.fillText(((xMax * i) / 4).toFixed(xMax > 5 ? 0 : 2), px((xMax * i) / 4) - 8, h - pad + 16);
  }
  for (const [name, ys] of Object.entries(series)) {
    ctx.strokeStyle = COLORS[name];
    ctx.lineWidth = 2;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y))));
    ctx.stroke();
  }
}

function drawCurves() {
  const c = JSON.parse(loss_curves(400));
  plot(document.getElementById("curves"), c.q, {
    cross_entropy: c.cross_entropy,
    adaptive: c.adaptive,
    k: c.scale_factor,
  }, 3);
}

function evaluate() {
  const out = document.getElementById("eval-out");
  try {
    const e = JSON.parse(eval_logits(document.getElementById("logits").value, Number(document.getElementById("cls").value)));
    const fmt = (v) => v.map((x) => x.toFixed(4)).join(", ");
    out.textContent = [
      `q               [${fmt(e.probs)}]`,
      `cross entropy   ${e.cross_entropy.toFixed(6)}   grad [${fmt(e.cross_entropy_grad)}]`,
      `adaptive        ${e.adaptive.toFixed(6)}   grad [${fmt(e.adaptive_grad)}]`,
      `k(q_c)          ${e.scale_factor.toFixed(6)}`,
    ].join("\n");
  } catch (err) {
    out.textContent = String(err);
  }
}

function race() {
  const out = document.getElementById("race-out");
  const n = (id) => Number(document.getElementById(id).value);
  try {
    const runs = JSON.parse(train_blobs(n("classes"), n("spread"), n("epochs"), BigInt(n("seed"))));
    const epochs = runs[0].test_top1_acc.map((_, i) => i + 1);
    const series = {};
    for (const r of runs) series[r.loss] = r.test_top1_acc;
    plot(document.getElementById("race"), epochs, series, 1);
    out.textContent = runs
      .map((r) => `${r.loss.padEnd(14)} final accuracy ${(100 * r.test_top1_acc.at(-1)).toFixed(1)}%, train loss ${r.train_loss.at(-1).toFixed(4)}`)
      .join("\n");
  } catch (err) {
    out.textContent = String(err);
  }
}

await init();
drawCurves();
evaluate();
race();
document.getElementById("eval").onclick = evaluate;
document.getElementById("train").onclick = race;
