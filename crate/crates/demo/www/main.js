import init, { changeLabels, GridImage, scoreSweep } from "./pkg/mapmerge_demo.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c"];

function params() {
  const v = (id) => parseFloat($(id).value);
  for (const id of ["angle", "dx", "dy"]) $(id + "-v").textContent = $(id).value;
  return [v("angle"), v("dx"), v("dy")];
}

function drawLabels(view) {
  const c = $("labels");
  const ctx = c.getContext("2d");
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, c.width, c.height);
  // World window [-8, 12] x [-10, 10] meters.
  const s = c.width / 20;
  const px = (x, y) => [(x + 8) * s, (10 - y) * s];
  ctx.fillStyle = "#bbb";
  for (const [x, y] of view.other) {
    const [u, w] = px(x, y);
    ctx.fillRect(u, w, 1.5, 1.5);
  }
  for (const [x, y, l] of view.current) {
    const [u, w] = px(x, y);
    ctx.fillStyle = COLORS[l];
    ctx.fillRect(u - 1, w - 1, 3, 3);
  }
  $("change-score").textContent = `${view.score.toFixed(3)} (${view.change} change, ${view.agree} agree)`;
}

function drawGrid(img) {
  const off = new OffscreenCanvas(img.width, img.height);
  off.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(img.rgba()), img.width, img.height), 0, 0);
  const c = $("grid");
  const ctx = c.getContext("2d");
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, c.width, c.height);
  const k = Math.min(c.width / img.width, c.height / img.height);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, img.width * k, img.height * k);
  $("grid-score").textContent = `${img.r.toFixed(3)} (${img.contradictions} of ${img.overlap} shared cells contradict)`;
  img.free();
}

function update() {
  const [a, dx, dy] = params();
  drawLabels(JSON.parse(changeLabels(a, dx, dy)));
  drawGrid(new GridImage(a, dx, dy));
}

function plot(points) {
  const c = $("plot");
  const ctx = c.getContext("2d");
  const pad = 40, w = c.width - 2 * pad - 100, h = c.height - 2 * pad;
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.strokeStyle = "#000";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#000";
  ctx.fillText("0°", pad - 5, pad + h + 15);
  ctx.fillText("180°", pad + w - 12, pad + h + 15);
  ctx.fillText("1", pad - 15, pad + 4);
  ctx.fillText("0", pad - 15, pad + h + 4);
  const series = [["change", "#d62728"], ["gridmap", "#1f77b4"], ["histogram", "#9467bd"]];
  series.forEach(([key, color], i) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    points.forEach((p, j) => {
      const x = pad + (p.angle_deg / 180) * w, y = pad + (1 - p[key]) * h;
      j ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(key, pad + w + 10, pad + 15 + 18 * i);
  });
}

await init();
for (const id of ["angle", "dx", "dy"]) $(id).addEventListener("change", update);
$("sweep").addEventListener("click", () => {
  $("sweep-status").textContent = "running…";
  setTimeout(() => {
    plot(JSON.parse(scoreSweep(180, 10)));
    $("sweep-status").textContent = "";
  }, 10);
});
update();
