import init, { playoutVariants, markovFold, lstmFold } from "./pkg/procbench_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const status = $("status");
const out = $("out");

function cell(text, numeric) {
  const td = document.createElement("td");
  td.textContent = text;
  if (numeric) td.className = "n";
  return td;
}

function table(header, rows) {
  const t = document.createElement("table");
  const head = t.insertRow();
  for (const h of header) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const r of rows) {
    const tr = t.insertRow();
    r.forEach((v) => tr.appendChild(cell(v, typeof v === "number")));
  }
  return t;
}

function showPlayout(r) {
  out.replaceChildren();
  const p = document.createElement("p");
  p.textContent = `${r.traces} traces, ${r.distinct} distinct variants (${r.enumerated} enumerated for this model)`;
  out.append(p, table(["count", "variant"], r.variants.map((v) => [v.count, v.trace])));
}

function showFold(r) {
  out.replaceChildren();
  const m = r.metrics;
  const p = document.createElement("p");
  p.textContent = `${r.predictor}: ${r.train_traces} training traces, ${r.test_traces} test traces` +
    (r.epochs ? `, ${r.epochs} epochs` : "") + `, ${r.truncated} simulated traces truncated`;
  const metrics = table(["fitness", "precision", "generalisation"],
    [[m.fitness, m.precision, m.generalisation].map((x) => Number(x.toFixed(4)))]);
  const held = table(["held-out variant"], r.test_variants.map((v) => [v]));
  out.append(p, metrics, held);
}

// Runs after a paint so the status line shows while the wasm call blocks.
function run(label, call, show) {
  status.className = "";
  status.textContent = `${label}...`;
  setTimeout(() => {
    const t0 = performance.now();
    try {
      show(JSON.parse(call()));
      status.textContent = `${label} done in ${((performance.now() - t0) / 1000).toFixed(2)} s`;
    } catch (e) {
      status.className = "err";
      status.textContent = String(e);
    }
  }, 20);
}

await init();
status.textContent = "ready";

$("btn-playout").onclick = () =>
  run("play-out", () => playoutVariants(num("model"), num("traces"), num("seed")), showPlayout);
$("btn-markov").onclick = () =>
  run("markov fold", () => markovFold(num("model"), num("traces"), num("order"), num("seed")), showFold);
$("btn-lstm").onclick = () =>
  run("lstm fold", () => lstmFold(num("model"), num("traces"), num("hidden"), num("epochs"), num("seed")), showFold);
