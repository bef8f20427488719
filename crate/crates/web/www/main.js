import init, { coherence_band, distributions, jarzynski } from "./pkg/qfluct_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function call(f, ...args) {
  const out = JSON.parse(f(...args));
  if (out.error) throw new Error(out.error);
  return out;
}

function axes(ctx, w, h, pad, xr, yr) {
  const x = (v) => pad + ((v - xr[0]) / (xr[1] - xr[0])) * (w - 2 * pad);
  const y = (v) => h - pad - ((v - yr[0]) / (yr[1] - yr[0])) * (h - 2 * pad);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, y(0));
  ctx.lineTo(w - pad, y(0));
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.stroke();
  ctx.fillText(yr[1].toFixed(2), 2, y(yr[1]) + 4);
  ctx.fillText(yr[0].toFixed(2), 2, y(yr[0]) + 4);
  ctx.fillText(xr[0].toFixed(1), x(xr[0]), h - 4);
  ctx.fillText(xr[1].toFixed(1), x(xr[1]) - 20, h - 4);
  return { x, y };
}

function line(ctx, xs, ys, sx, sy, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  xs.forEach((t, i) => (i ? ctx.lineTo(sx(t), sy(ys[i])) : ctx.moveTo(sx(t), sy(ys[i]))));
  ctx.stroke();
  ctx.lineWidth = 1;
}

function drawBand() {
  $("band-status").textContent = "computing...";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const b = call(coherence_band, num("band-count"), num("band-seed"), num("band-tf"), 250, $("band-drive").checked);
      const canvas = $("band-canvas");
      const ctx = canvas.getContext("2d");
      const lo = Math.min(...b.lower, 0), hi = Math.max(...b.upper, 0);
      const { x, y } = axes(ctx, canvas.width, canvas.height, 36, [0, b.times.at(-1)], [lo, hi]);
      ctx.fillStyle = "#cdd9e0";
      ctx.beginPath();
      b.times.forEach((t, i) => (i ? ctx.lineTo(x(t), y(b.upper[i])) : ctx.moveTo(x(t), y(b.upper[i]))));
      for (let i = b.times.length - 1; i >= 0; i--) ctx.lineTo(x(b.times[i]), y(b.lower[i]));
      ctx.fill();
      line(ctx, b.times, b.max_cl1.values, x, y, "#c33");
      line(ctx, b.times, b.min_cl1.values, x, y, "#36c");
      $("band-status").textContent =
        `C_L1 range ${b.min_cl1.coherence.toFixed(3)} to ${b.max_cl1.coherence.toFixed(3)}, ${((performance.now() - t0) / 1000).toFixed(1)} s`;
    } catch (e) {
      $("band-status").textContent = e.message;
    }
  }, 10);
}

const COLORS = { epm: "#c33", tpm: "#36c", mll: "#393" };

function drawDistributions() {
  const t = num("dist-t");
  $("dist-t-value").textContent = t.toFixed(1);
  try {
    const d = call(distributions, num("dist-seed"), t, $("dist-drive").checked);
    const canvas = $("dist-canvas");
    const ctx = canvas.getContext("2d");
    const { x, y } = axes(ctx, canvas.width, canvas.height, 36, [-3.5, 3.5], [0, 1]);
    ["epm", "tpm", "mll"].forEach((p, k) => {
      ctx.fillStyle = COLORS[p];
      for (const a of d[p].atoms) {
        const left = x(a.delta_e) - 9 + 6 * k;
        ctx.fillRect(left, y(a.p), 5, y(0) - y(a.p));
      }
    });
    const lines = ["epm", "tpm", "mll"].map((p) => `${p.toUpperCase()}  H = ${d[p].entropy.toFixed(4)} nats`);
    $("dist-info").textContent =
      `state: C_L1 = ${d.coherence_l1.toFixed(3)}, purity = ${d.purity.toFixed(3)}\n` + lines.join("\n") +
      "\nbars: EPM red, TPM blue, MLL green; horizontal axis ΔE";
  } catch (e) {
    $("dist-info").textContent = e.message;
  }
}

function evaluateJarzynski() {
  try {
    const r = call(jarzynski, num("jarz-beta"), num("jarz-strength"), num("jarz-seed"), num("jarz-t"), $("jarz-drive").checked);
    $("jarz-info").textContent = [
      `<exp(-β(ΔE - ΔF))>_EPM         = ${r.lhs.toPrecision(10)}`,
      `d Tr(ρ_f^th Φ[ρ^th])          = ${r.rhs_thermal.toPrecision(10)}`,
      `d Tr(ρ_f^th Φ[χ])             = ${r.rhs_coherence.toPrecision(10)}`,
      `unitality residual ‖Φ[I] - I‖ = ${r.unitality_residual.toExponential(3)}`,
      `G(iβ)/G_TPM(iβ) measured      = ${r.ratio_measured.toPrecision(10)}`,
      `G(iβ)/G_TPM(iβ) predicted     = ${r.ratio_general.toPrecision(10)}`,
      `initial C_L1                  = ${r.coherence_l1.toFixed(4)}`,
    ].join("\n");
  } catch (e) {
    $("jarz-info").textContent = e.message;
  }
}

await init();
$("band-run").addEventListener("click", drawBand);
for (const id of ["dist-seed", "dist-t", "dist-drive"]) $(id).addEventListener("input", drawDistributions);
$("jarz-run").addEventListener("click", evaluateJarzynski);
drawDistributions();
evaluateJarzynski();
