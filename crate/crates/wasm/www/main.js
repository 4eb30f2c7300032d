import init, { separation_demo, enhancement_demo, loudness_demo } from "./pkg/voxsep_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function clear(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

// Draw `series` (arrays of numbers) into the box [x0, y0, w, h] with a shared vertical range.
function lines(ctx, box, series, range, colors) {
  const [x0, y0, w, h] = box;
  const [lo, hi] = range;
  series.forEach((s, k) => {
    ctx.strokeStyle = colors[k % colors.length];
    ctx.beginPath();
    s.forEach((v, i) => {
      const x = x0 + (i / Math.max(1, s.length - 1)) * w;
      const y = y0 + h - ((v - lo) / (hi - lo || 1)) * h;
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.stroke();
  });
}

function bands(ctx, box, env, color) {
  const [x0, y0, w, h] = box;
  ctx.fillStyle = color;
  env.forEach(([lo, hi], i) => {
    const x = x0 + (i / env.length) * w;
    const top = y0 + h / 2 - hi * h / 2;
    const bottom = y0 + h / 2 - lo * h / 2;
    ctx.fillRect(x, top, Math.max(1, w / env.length), Math.max(1, bottom - top));
  });
}

function label(ctx, text, x, y) {
  ctx.fillStyle = "#555";
  ctx.font = "12px system-ui";
  ctx.fillText(text, x, y);
}

function guard(statsId, fn) {
  try {
    fn();
    $(statsId).classList.remove("error");
  } catch (e) {
    $(statsId).textContent = String(e.message ?? e);
    $(statsId).classList.add("error");
  }
}

function runSeparation() {
  const snrRaw = Number($("sep-snr").value);
  const snr = snrRaw > 40 ? Infinity : snrRaw;
  $("sep-snr-v").textContent = snr === Infinity ? "clean" : `${snr} dB`;
  guard("sep-stats", () => {
    const v = JSON.parse(separation_demo(Number($("sep-n").value), snr, Number($("sep-seed").value)));
    const c = $("sep-plot");
    const ctx = clear(c);
    const w = c.width / 3 - 10, h = c.height - 20;
    [["sources", v.sources], ["sensors", v.mixtures], ["estimates", v.estimates]].forEach(([name, rows], col) => {
      const rowH = h / rows.length;
      rows.forEach((s, k) => lines(ctx, [col * (w + 15), 18 + k * rowH, w, rowH - 4], [s], [-1, 1], [COLORS[k]]));
      label(ctx, name, col * (w + 15), 12);
    });
    const fmt = (a, d) => a.map((x) => x.toFixed(d)).join("  ");
    $("sep-stats").textContent =
      `|r|      ${fmt(v.correlation, 4)}\nSI-SDR   ${fmt(v.si_sdr_db, 1)} dB\n` +
      `excerpt  ${(v.window_s * 1000).toFixed(0)} ms at ${v.sample_rate} Hz, converged: ${v.converged}`;
  });
}

function runEnhancement() {
  const snr = Number($("enh-snr").value), alpha = Number($("enh-alpha").value), beta = Number($("enh-beta").value);
  $("enh-snr-v").textContent = `${snr} dB`;
  $("enh-alpha-v").textContent = alpha.toFixed(1);
  $("enh-beta-v").textContent = beta.toFixed(3);
  guard("enh-stats", () => {
    const v = JSON.parse(enhancement_demo(snr, alpha, beta, 7));
    const c = $("enh-plot");
    const ctx = clear(c);
    const h = (c.height - 30) / 2;
    const peak = Math.max(...v.noisy.map(([lo, hi]) => Math.max(-lo, hi)), 1e-9);
    const scale = (env) => env.map(([lo, hi]) => [lo / peak, hi / peak]);
    bands(ctx, [0, 15, c.width, h], scale(v.noisy), "#bbb");
    bands(ctx, [0, 15, c.width, h], scale(v.clean), "#1f77b4");
    bands(ctx, [0, 25 + h, c.width, h], scale(v.enhanced), "#2ca02c");
    ctx.fillStyle = "rgba(255,127,14,0.35)";
    v.pauses.forEach((p, i) => {
      if (p) ctx.fillRect((i * v.pause_hop_s / v.duration_s) * c.width, c.height - 5, 2, 5);
    });
    label(ctx, "noisy (grey) and clean (blue)", 4, 12);
    label(ctx, "enhanced", 4, 22 + h);
    $("enh-stats").textContent =
      `segmental SNR ${v.seg_snr_before_db.toFixed(2)} dB -> ${v.seg_snr_after_db.toFixed(2)} dB` +
      (v.fallback ? "\nno pause passed the threshold; quietest frames used" : "");
  });
}

function runLoudness() {
  const spl = Number($("loud-spl").value);
  $("loud-spl-v").textContent = `${spl} dB SPL`;
  guard("loud-stats", () => {
    const v = JSON.parse(loudness_demo($("loud-kind").value, spl));
    const c = $("loud-plot");
    const ctx = clear(c);
    const top = Math.max(...v.specific_sone_per_bark, 1e-6);
    lines(ctx, [30, 10, c.width - 40, c.height - 30], [v.specific_sone_per_bark], [0, top * 1.05], ["#9467bd"]);
    label(ctx, `N'(z), peak ${top.toFixed(3)} sone/Bark`, 34, 20);
    for (let z = 0; z <= 24; z += 4) label(ctx, `${z}`, 30 + (z / 24) * (c.width - 40), c.height - 6);
    const s = v.sharpness_acum === null ? "n/a" : `${v.sharpness_acum.toFixed(3)} acum`;
    $("loud-stats").textContent =
      `loudness ${v.total_sone.toFixed(3)} sone (${v.phon.toFixed(1)} phon), sharpness ${s}`;
  });
}

await init();
$("sep-run").addEventListener("click", runSeparation);
["sep-n", "sep-snr"].forEach((id) => $(id).addEventListener("change", runSeparation));
["enh-snr", "enh-alpha", "enh-beta"].forEach((id) => $(id).addEventListener("input", runEnhancement));
["loud-kind", "loud-spl"].forEach((id) => $(id).addEventListener("input", runLoudness));
runSeparation();
runEnhancement();
runLoudness();
