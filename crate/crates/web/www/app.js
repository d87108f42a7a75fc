import init, { profile, nucleusSummary, energyCurve } from "./pkg/densitylab_web.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, xs, ys, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const fin = ys.filter(Number.isFinite);
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  let ymin = Math.min(...fin), ymax = Math.max(...fin);
  if (ymax === ymin) { ymax += 1; ymin -= 1; }
  const sx = (x) => pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad);
  const sy = (y) => h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(ymax.toPrecision(4), 2, pad + 4);
  ctx.fillText(ymin.toPrecision(4), 2, h - pad);
  ctx.fillText(xmin.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(xmax.toPrecision(3), w - pad - 30, h - pad + 14);

  ctx.strokeStyle = "#1f5fbf";
  ctx.beginPath();
  let started = false;
  xs.forEach((x, i) => {
    if (!Number.isFinite(ys[i])) return;
    started ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]));
    started = true;
  });
  ctx.stroke();

  if (opts.mark) {
    ctx.fillStyle = "#c33";
    ctx.beginPath();
    ctx.arc(sx(opts.mark[0]), sy(opts.mark[1]), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function guarded(out, f) {
  try { f(); } catch (e) { $(out).textContent = "error: " + e; }
}

function profileInputs() {
  return [$("model").value, parseFloat($("z").value), parseInt($("points").value, 10)];
}

function runProfile() {
  guarded("profile-out", () => {
    const p = JSON.parse(profile(...profileInputs()));
    const key = $("series").value;
    // the tail is flat on a mapped grid, so plot only the inner 10/Z
    const cut = p.r.findIndex((r) => r > 10 / p.z);
    const n = cut < 0 ? p.r.length : cut;
    plot($("profile-plot"), p.r.slice(0, n), p[key].slice(0, n));
    $("profile-out").textContent =
      `E = ${p.energy}\nnorm = ${p.norm.toFixed(6)}\n${key}(0) = ${p[key][0]}`;
  });
}

function runSummary() {
  guarded("profile-out", () => {
    const s = JSON.parse(nucleusSummary(...profileInputs()));
    $("profile-out").textContent = [
      `cusp slope       ${s.cusp_measured.toFixed(8)}  expected ${s.cusp_expected.toFixed(8)}  ${s.cusp_pass ? "pass" : "fail"}`,
      `rho~''(0)        ${s.curvature_measured.toFixed(6)}  expected ${s.curvature_expected.toFixed(6)}  ${s.curvature_pass ? "pass" : "fail"}`,
      `trial offset     ${s.trial_offset.toExponential(3)}`,
    ].join("\n");
  });
}

function runEnergy() {
  guarded("energy-out", () => {
    const z = parseFloat($("ez").value);
    const c = JSON.parse(energyCurve(z, parseFloat($("lo").value), parseFloat($("hi").value), 200));
    plot($("energy-plot"), c.alpha, c.energy, { mark: [c.alpha_star, c.energy_star] });
    $("energy-out").textContent =
      `alpha* = ${c.alpha_star.toFixed(9)}\nE*     = ${c.energy_star.toFixed(9)}\nepsilon = ${c.epsilon.toFixed(9)}`;
  });
}

await init();
$("run-profile").onclick = runProfile;
$("run-summary").onclick = runSummary;
$("run-energy").onclick = runEnergy;
$("series").onchange = runProfile;
runProfile();
runEnergy();
