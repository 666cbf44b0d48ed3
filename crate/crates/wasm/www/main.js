import init, { bonding_curve, buy_quote, weight_sweep } from "./pkg/proofware_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plot(canvas, series, xLabel, yLabel) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 48;
  ctx.clearRect(0, 0, width, height);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (width - 2 * pad);
  const sy = (y) => height - pad + ((y0 - y) / (y1 - y0)) * (height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, height - pad);
  ctx.lineTo(width - pad / 2, height - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText(xLabel, width / 2, height - 12);
  ctx.fillText(yLabel, 4, 14);
  ctx.fillText(x0.toFixed(1), pad, height - pad + 16);
  ctx.fillText(x1.toFixed(1), width - pad - 24, height - pad + 16);
  ctx.fillText(y0.toFixed(3), 2, height - pad);
  ctx.fillText(y1.toFixed(3), 2, pad);

  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.x.forEach((x, j) => (j ? ctx.lineTo(sx(x), sy(s.y[j])) : ctx.moveTo(sx(x), sy(s.y[j]))));
    ctx.stroke();
  });
}

function drawCurve() {
  $("c-weight-out").value = $("c-weight").value;
  try {
    const pts = bonding_curve(num("c-supply"), num("c-price"), num("c-weight"), num("c-deposit"), 200);
    const x = [], y = [];
    for (let i = 0; i < pts.length; i += 2) { x.push(pts[i]); y.push(pts[i + 1]); }
    plot($("c-canvas"), [{ x, y }], "supply", "price");
    $("c-error").textContent = "";
  } catch (e) {
    $("c-error").textContent = String(e);
  }
}

function quote() {
  try {
    const q = JSON.parse(buy_quote(num("q-supply"), num("q-price"), num("q-weight"), num("q-deposit")));
    $("q-out").textContent = Object.entries(q).map(([k, v]) => `${k.padEnd(14)} ${v.toFixed(6)}`).join("\n");
    $("q-out").classList.remove("error");
  } catch (e) {
    $("q-out").textContent = String(e);
    $("q-out").classList.add("error");
  }
}

function sweep() {
  try {
    const weights = new Float64Array($("s-weights").value.split(",").map(Number));
    const result = JSON.parse(weight_sweep(num("s-seed"), num("s-bots"), num("s-hours"), weights));
    const series = result.rounds.map((r) => ({ x: result.hours, y: r.prices }));
    plot($("s-canvas"), series, "hour", "price");
    $("s-legend").innerHTML = result.rounds
      .map((r, i) => `<span style="color:${COLORS[i % COLORS.length]}">W=${r.weight}: ${r.prices.at(-1).toFixed(4)}</span>`)
      .join("");
    $("s-error").textContent = "";
  } catch (e) {
    $("s-error").textContent = String(e);
  }
}

await init();
for (const id of ["c-supply", "c-price", "c-weight", "c-deposit"]) $(id).addEventListener("input", drawCurve);
$("q-run").addEventListener("click", quote);
$("s-run").addEventListener("click", sweep);
drawCurve();
quote();
sweep();
