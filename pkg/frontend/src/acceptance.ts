/**
 * Desk-scale acceptance run: generate 50k samples, train within the time
 * budget, then check held-out fidelity, physicality, and the in-range vs
 * out-of-range coupling ordering. Prints one PASS/FAIL line per check.
 */

import { jacobiEigh } from "./complex.js";
import { DESK_TRAINING, D_OUT } from "./config.js";
import { generateDataset } from "./dataset.js";
import { evaluateOn, median } from "./evaluate.js";
import { predictDensities } from "./predict.js";
import { trainNetwork } from "./train.js";

function embedSym(rho: { d: number; re: Float64Array; im: Float64Array }): Float64Array {
  const d = rho.d;
  const n = 2 * d;
  const out = new Float64Array(n * n);
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      out[i * n + j] = rho.re[i * d + j];
      out[(i + d) * n + (j + d)] = rho.re[i * d + j];
      out[i * n + (j + d)] = -rho.im[i * d + j];
      out[(i + d) * n + j] = rho.im[i * d + j];
    }
  }
  return out;
}

function report(name: string, ok: boolean, detail: string): void {
  console.log(`ACCEPTANCE 11 [${name}]: ${ok ? "PASS" : "FAIL"} (${detail})`);
  if (!ok) process.exitCode = 1;
}

const t0 = Date.now();
console.log("generating 50,000 training samples ...");
const dataset = generateDataset(DESK_TRAINING, 0);
console.log(`generated in ${((Date.now() - t0) / 1000).toFixed(0)}s`);

const budget = 30 * 60; // seconds of training allowed by the criterion
const tTrain = Date.now();
const result = await trainNetwork(dataset, DESK_TRAINING, {
  maxSeconds: budget - 120,
  verbose: true,
});
const trainSeconds = (Date.now() - tTrain) / 1000;
console.log(`trained ${result.epochs} epochs in ${trainSeconds.toFixed(0)}s on ${result.backend}`);

// held-out states of dimension <= 5 (fresh seed, never trained on)
const pool = generateDataset({ ...DESK_TRAINING, nSamples: 1400 }, 777);
const keep: number[] = [];
for (let i = 0; i < pool.nSamples && keep.length < 500; i++) {
  if (pool.dims[i] <= 5) keep.push(i);
}
const heldOut = {
  inputs: new Float32Array(keep.length * (pool.inputs.length / pool.nSamples)),
  targets: new Float32Array(keep.length * (pool.targets.length / pool.nSamples)),
  dims: new Uint8Array(keep.length),
  gs: new Float64Array(keep.length),
  nSamples: keep.length,
};
const inWidth = pool.inputs.length / pool.nSamples;
const outWidth = pool.targets.length / pool.nSamples;
keep.forEach((src, dst) => {
  heldOut.inputs.set(pool.inputs.subarray(src * inWidth, (src + 1) * inWidth), dst * inWidth);
  heldOut.targets.set(pool.targets.subarray(src * outWidth, (src + 1) * outWidth), dst * outWidth);
  heldOut.dims[dst] = pool.dims[src];
  heldOut.gs[dst] = pool.gs[src];
});
const ev = evaluateOn(result.model, heldOut);
const med = median(ev.fidelities);
report(
  "held-out fidelity",
  med >= 0.9 && trainSeconds <= budget && heldOut.nSamples === 500,
  `median ${med.toFixed(4)} over ${heldOut.nSamples} states of dim <= 5, ` +
    `training ${trainSeconds.toFixed(0)}s`,
);

// physicality of every prediction
const predictions = predictDensities(result.model, heldOut.inputs);
let physical = true;
for (const rho of predictions) {
  let tr = 0;
  for (let i = 0; i < D_OUT; i++) tr += rho.re[i * D_OUT + i];
  const { values } = jacobiEigh(embedSym(rho), 2 * D_OUT);
  const minEig = Math.min(...values);
  if (Math.abs(tr - 1) > 1e-10 || minEig < -1e-10) physical = false;
}
report("physicality of predictions", physical, `${predictions.length} states checked`);

// coupling strengths 50% beyond the trained band reconstruct worse
const inRange = evaluateOn(result.model, generateDataset({ ...DESK_TRAINING, nSamples: 400 }, 778));
const outG = DESK_TRAINING.gRange[1] * 1.5;
const outRange = evaluateOn(
  result.model,
  generateDataset({ ...DESK_TRAINING, nSamples: 400, gRange: [outG, outG] }, 779),
);
const medIn = median(inRange.fidelities);
const medOut = median(outRange.fidelities);
report(
  "out-of-range coupling degrades fidelity",
  medOut < medIn,
  `in-range median ${medIn.toFixed(4)}, g = ${outG.toFixed(2)} median ${medOut.toFixed(4)}`,
);
