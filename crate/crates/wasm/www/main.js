import init, {
  evolve_populations,
  efficiency_landscape,
  resonance_report,
} from "./pkg/datrans_wasm.js";

const ids = [
  "e_d", "e_a", "n_d", "n_a", "v", "g_d", "g_a",
  "lambda", "beta", "bath_eta", "omega_c", "initial_kind", "t_max",
];

function values() {
  const v = {};
  for (const id of ids) v[id] = Number(document.getElementById(id).value);
  return v;
}

function colors() {
  const dark = matchMedia("(prefers-color-scheme: dark)").matches;
  return {
    axis: dark ? "#9aa0a6" : "#555",
    grid: dark ? "#33373d" : "#e3e3e3",
    text: dark ? "#d0d4d9" : "#333",
    series: ["#1e88e5", "#e53935", "#43a047", "#8e24aa", "#fb8c00"],
  };
}

// minimal polyline plot with axes and a legend
function plot(canvas, series, opts) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const c = colors();
  ctx.clearRect(0, 0, W, H);
  const m = { l: 52, r: 12, t: 10, b: 28 };

  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (const s of series) {
    for (const [x, y] of s.pts) {
      if (x < xmin) xmin = x;
      if (x > xmax) xmax = x;
      if (y < ymin) ymin = y;
      if (y > ymax) ymax = y;
    }
  }
  if (!isFinite(xmin) || xmax === xmin) { xmin = 0; xmax = 1; }
  if (!isFinite(ymin) || ymax === ymin) { ymin = 0; ymax = 1; }
  if (opts && opts.y0) ymin = Math.min(ymin, 0);
  if (opts && opts.y1) ymax = Math.max(ymax, 1);
  const pad = (ymax - ymin) * 0.06;
  ymin -= pad; ymax += pad;

  const sx = x => m.l + (x - xmin) / (xmax - xmin) * (W - m.l - m.r);
  const sy = y => H - m.b - (y - ymin) / (ymax - ymin) * (H - m.t - m.b);

  ctx.strokeStyle = c.grid;
  ctx.fillStyle = c.text;
  ctx.font = "11px system-ui";
  ctx.lineWidth = 1;
  const xticks = 6, yticks = 4;
  for (let i = 0; i <= xticks; i++) {
    const x = xmin + (xmax - xmin) * i / xticks;
    ctx.beginPath(); ctx.moveTo(sx(x), m.t); ctx.lineTo(sx(x), H - m.b); ctx.stroke();
    ctx.textAlign = "center";
    ctx.fillText(x.toPrecision(3), sx(x), H - m.b + 14);
  }
  for (let i = 0; i <= yticks; i++) {
    const y = ymin + (ymax - ymin) * i / yticks;
    ctx.beginPath(); ctx.moveTo(m.l, sy(y)); ctx.lineTo(W - m.r, sy(y)); ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(y.toPrecision(3), m.l - 4, sy(y) + 4);
  }
  ctx.strokeStyle = c.axis;
  ctx.strokeRect(m.l, m.t, W - m.l - m.r, H - m.t - m.b);

  series.forEach((s, k) => {
    ctx.strokeStyle = c.series[k % c.series.length];
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    s.pts.forEach(([x, y], i) => {
      if (i === 0) ctx.moveTo(sx(x), sy(y)); else ctx.lineTo(sx(x), sy(y));
    });
    ctx.stroke();
    ctx.fillStyle = c.series[k % c.series.length];
    ctx.textAlign = "left";
    ctx.fillText(s.label, m.l + 8 + k * 120, m.t + 14);
  });
  if (opts && opts.xlabel) {
    ctx.fillStyle = c.text;
    ctx.textAlign = "center";
    ctx.fillText(opts.xlabel, (m.l + W - m.r) / 2, H - 4);
  }
}

function scatter(canvas, points, opts) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const c = colors();
  ctx.clearRect(0, 0, W, H);
  const m = { l: 52, r: 12, t: 10, b: 28 };
  let xmin = Infinity, xmax = -Infinity, ymax = 1e-300;
  for (const p of points) {
    if (p.re < xmin) xmin = p.re;
    if (p.re > xmax) xmax = p.re;
    if (p.im > ymax) ymax = p.im;
  }
  if (!isFinite(xmin)) { xmin = -1; xmax = 1; }
  const span = Math.max(xmax - xmin, 1e-9);
  xmin -= span * 0.08; xmax += span * 0.08;
  ymax *= 1.15;
  const sx = x => m.l + (x - xmin) / (xmax - xmin) * (W - m.l - m.r);
  const sy = y => H - m.b - (y / ymax) * (H - m.t - m.b);

  ctx.strokeStyle = c.grid;
  ctx.fillStyle = c.text;
  ctx.font = "11px system-ui";
  for (let i = 0; i <= 6; i++) {
    const x = xmin + (xmax - xmin) * i / 6;
    ctx.beginPath(); ctx.moveTo(sx(x), m.t); ctx.lineTo(sx(x), H - m.b); ctx.stroke();
    ctx.textAlign = "center";
    ctx.fillText(x.toPrecision(3), sx(x), H - m.b + 14);
  }
  for (let i = 0; i <= 4; i++) {
    const y = ymax * i / 4;
    ctx.beginPath(); ctx.moveTo(m.l, sy(y)); ctx.lineTo(W - m.r, sy(y)); ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(y.toExponential(1), m.l - 4, sy(y) + 4);
  }
  ctx.strokeStyle = c.axis;
  ctx.strokeRect(m.l, m.t, W - m.l - m.r, H - m.t - m.b);
  ctx.textAlign = "center";
  ctx.fillText(opts.xlabel, (m.l + W - m.r) / 2, H - 4);

  const sectorColor = c.series;
  for (const p of points) {
    ctx.fillStyle = sectorColor[(p.sector - 1) % sectorColor.length];
    ctx.beginPath();
    ctx.arc(sx(p.re), sy(p.im), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
  points.slice(0, 4).forEach((_, k) => {
    ctx.fillStyle = sectorColor[k];
    ctx.textAlign = "left";
    ctx.fillText("sector " + (k + 1), m.l + 8 + k * 90, m.t + 14);
  });
}

function refresh() {
  const p = values();
  for (const id of ids) {
    const el = document.getElementById(id);
    const out = el.closest("label").querySelector("output");
    if (out) out.textContent = el.value;
  }
  const warn = document.getElementById("warning");
  warn.textContent = "";
  try {
    const rows = evolve_populations(
      p.e_d, p.e_a, p.n_d, p.n_a, p.v, p.g_d, p.g_a,
      p.lambda, p.beta, p.bath_eta, p.omega_c, p.initial_kind, p.t_max, 400,
    );
    const pd = [], pa = [], coh = [];
    for (let i = 0; i < rows.length; i += 4) {
      pd.push([rows[i], rows[i + 1]]);
      pa.push([rows[i], rows[i + 2]]);
      coh.push([rows[i], rows[i + 3]]);
    }
    plot(document.getElementById("populations"), [
      { label: "p_D(t)", pts: pd },
      { label: "p_A(t)", pts: pa },
      { label: "|<phi1|rho|phi2>|", pts: coh },
    ], { xlabel: "t", y0: true, y1: true });

    const veff = p.v * Math.sqrt(p.n_d * p.n_a);
    const land = efficiency_landscape(veff, p.n_d, p.beta, 10, 200);
    const inc = [], cohl = [], pamax = [];
    for (let i = 0; i < land.length; i += 5) {
      inc.push([land[i], land[i + 2]]);
      cohl.push([land[i], land[i + 3]]);
      pamax.push([land[i], land[i + 4]]);
    }
    plot(document.getElementById("landscape"), [
      { label: "p_D inf (incoherent)", pts: inc },
      { label: "p_D inf (coherent)", pts: cohl },
      { label: "p_A max", pts: pamax },
    ], { xlabel: "eta", y0: true, y1: true });

    const rep = JSON.parse(resonance_report(
      p.e_d, p.e_a, p.n_d, p.n_a, p.v, p.g_d, p.g_a,
      p.lambda, p.beta, p.bath_eta, p.omega_c,
    ));
    scatter(document.getElementById("resonances"), rep.entries,
      { xlabel: "Re eps (frequency)" });

    const tbl = document.getElementById("restable");
    let html = "<tr><th>sector</th><th>index</th><th>Re eps</th><th>Im eps</th><th>mult</th></tr>";
    for (const e of rep.entries) {
      html += `<tr><td>${e.sector}</td><td>${e.index}</td>` +
        `<td>${e.re.toPrecision(6)}</td><td>${e.im.toExponential(3)}</td>` +
        `<td>${e.multiplicity}</td></tr>`;
    }
    tbl.innerHTML = html;

    document.getElementById("derived").textContent =
      `v_eff = ${rep.v_eff.toPrecision(4)}, e1 = ${rep.e1.toPrecision(4)}, ` +
      `e2 = ${rep.e2.toPrecision(4)}, alpha = ${rep.alpha.toPrecision(4)}, ` +
      `slowest decay = ${rep.min_positive_decay.toExponential(3)}`;
    if (rep.regime_warning) warn.textContent = rep.regime_warning;
  } catch (e) {
    warn.textContent = String(e);
  }
}

async function main() {
  await init();
  for (const id of ids) {
    document.getElementById(id).addEventListener("input", refresh);
  }
  matchMedia("(prefers-color-scheme: dark)").addEventListener("change", refresh);
  refresh();
}

main();
