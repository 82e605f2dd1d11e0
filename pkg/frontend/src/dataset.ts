/**
 * Training-set generation.
 *
 * Each sample: a random physical density matrix on a random subset of the
 * output window, its simulated spectrogram on the detection window (each
 * phase block normalised to sum to one), the sweep coupling magnitude
 * appended as the final input feature, and the flattened (re, im) density
 * entries as the regression target. Fully deterministic given the seed.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { CMatrix } from "./complex.js";
import {
  D_IN,
  D_OUT,
  IN_WINDOW,
  INPUT_SIZE,
  N_PHASES,
  OUT_WINDOW,
  OUTPUT_SIZE,
  TrainingConfig,
} from "./config.js";
import { Rng } from "./rng.js";
import { spectrogramProbabilities, uniformPhases } from "./simulate.js";
import { randomEmbeddedState } from "./states.js";

export interface Dataset {
  inputs: Float32Array; // nSamples x INPUT_SIZE
  targets: Float32Array; // nSamples x OUTPUT_SIZE
  dims: Uint8Array; // state dimension per sample
  gs: Float64Array; // coupling magnitude per sample
  nSamples: number;
}

export function flattenDensity(rho: CMatrix, out: Float32Array, offset: number): void {
  const n = rho.d * rho.d;
  for (let k = 0; k < n; k++) {
    out[offset + 2 * k] = rho.re[k];
    out[offset + 2 * k + 1] = rho.im[k];
  }
}

export function unflattenDensity(flat: ArrayLike<number>, offset: number, d: number): CMatrix {
  const re = new Float64Array(d * d);
  const im = new Float64Array(d * d);
  for (let k = 0; k < d * d; k++) {
    re[k] = flat[offset + 2 * k];
    im[k] = flat[offset + 2 * k + 1];
  }
  return { d, re, im };
}

export function makeSample(
  rng: Rng,
  gRange: [number, number],
  inputs: Float32Array,
  targets: Float32Array,
  index: number,
): { dim: number; g: number } {
  const { rho, dim } = randomEmbeddedState(D_OUT, D_OUT, rng);
  const g = gRange[0] + rng.uniform() * (gRange[1] - gRange[0]);
  const probs = spectrogramProbabilities(
    rho,
    OUT_WINDOW,
    g,
    uniformPhases(N_PHASES),
    IN_WINDOW,
  );
  const base = index * INPUT_SIZE;
  for (let f = 0; f < N_PHASES; f++) {
    let rowSum = 0;
    for (let n = 0; n < D_IN; n++) rowSum += probs[f * D_IN + n];
    for (let n = 0; n < D_IN; n++) {
      inputs[base + f * D_IN + n] = probs[f * D_IN + n] / rowSum;
    }
  }
  inputs[base + INPUT_SIZE - 1] = g;
  flattenDensity(rho, targets, index * OUTPUT_SIZE);
  return { dim, g };
}

export function generateDataset(config: TrainingConfig, seed: number): Dataset {
  const rng = new Rng(seed);
  const inputs = new Float32Array(config.nSamples * INPUT_SIZE);
  const targets = new Float32Array(config.nSamples * OUTPUT_SIZE);
  const dims = new Uint8Array(config.nSamples);
  const gs = new Float64Array(config.nSamples);
  for (let i = 0; i < config.nSamples; i++) {
    const { dim, g } = makeSample(rng, config.gRange, inputs, targets, i);
    dims[i] = dim;
    gs[i] = g;
  }
  return { inputs, targets, dims, gs, nSamples: config.nSamples };
}

export function writeDataset(ds: Dataset, config: TrainingConfig, seed: number, dir: string): void {
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(path.join(dir, "inputs.bin"), Buffer.from(ds.inputs.buffer, 0, ds.inputs.byteLength));
  fs.writeFileSync(path.join(dir, "targets.bin"), Buffer.from(ds.targets.buffer, 0, ds.targets.byteLength));
  fs.writeFileSync(path.join(dir, "dims.bin"), Buffer.from(ds.dims.buffer, 0, ds.dims.byteLength));
  fs.writeFileSync(path.join(dir, "gs.bin"), Buffer.from(ds.gs.buffer, 0, ds.gs.byteLength));
  const manifest = {
    format: "fetomo/1",
    kind: "dataset",
    n_samples: ds.nSamples,
    seed,
    input_size: INPUT_SIZE,
    output_size: OUTPUT_SIZE,
    phases: N_PHASES,
    in_window: [IN_WINDOW.nMin, IN_WINDOW.nMax],
    out_window: [OUT_WINDOW.nMin, OUT_WINDOW.nMax],
    g_range: config.gRange,
  };
  fs.writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(manifest, null, 1) + "\n");
}

function readExact(file: string): ArrayBuffer {
  const buf = fs.readFileSync(file);
  return buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
}

export function readDataset(dir: string): Dataset {
  const manifest = JSON.parse(fs.readFileSync(path.join(dir, "manifest.json"), "utf-8"));
  const n: number = manifest.n_samples;
  const inputs = new Float32Array(readExact(path.join(dir, "inputs.bin")));
  const targets = new Float32Array(readExact(path.join(dir, "targets.bin")));
  const dims = new Uint8Array(readExact(path.join(dir, "dims.bin")));
  const gs = new Float64Array(readExact(path.join(dir, "gs.bin")));
  if (inputs.length !== n * INPUT_SIZE || targets.length !== n * OUTPUT_SIZE) {
    throw new Error(`${dir}: dataset payload does not match the manifest`);
  }
  return { inputs, targets, dims, gs, nSamples: n };
}
