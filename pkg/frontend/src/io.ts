/**
 * Interop with the Python toolkit's file formats (format tag "fetomo/1").
 * The file contract is the boundary between the two components.
 */

import * as fs from "node:fs";

import { CMatrix, czeros } from "./complex.js";
import { D_IN, D_OUT, IN_WINDOW, INPUT_SIZE, N_PHASES, OUT_WINDOW } from "./config.js";
import { Window } from "./ladder.js";

export interface SpectrogramFile {
  gAbs: number;
  phases: number[];
  window: Window;
  counts: number[][];
}

export function readSpectrogramFile(path: string): SpectrogramFile {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (doc.format !== "fetomo/1") throw new Error(`${path}: unsupported format ${doc.format}`);
  for (const key of ["g_abs", "phases", "n_min", "n_max", "counts"]) {
    if (!(key in doc)) throw new Error(`${path}: missing key '${key}'`);
  }
  return {
    gAbs: doc.g_abs,
    phases: doc.phases,
    window: { nMin: doc.n_min, nMax: doc.n_max },
    counts: doc.counts,
  };
}

/** Flatten a spectrogram file into one network input row (normalised rows ++ g). */
export function spectrogramToInput(file: SpectrogramFile): Float32Array {
  if (file.window.nMin !== IN_WINDOW.nMin || file.window.nMax !== IN_WINDOW.nMax) {
    throw new Error(
      `spectrogram window [${file.window.nMin}, ${file.window.nMax}] does not match ` +
        `the network's [${IN_WINDOW.nMin}, ${IN_WINDOW.nMax}]`,
    );
  }
  if (file.phases.length !== N_PHASES) {
    throw new Error(`need ${N_PHASES} phases, got ${file.phases.length}`);
  }
  const input = new Float32Array(INPUT_SIZE);
  for (let f = 0; f < N_PHASES; f++) {
    const row = file.counts[f];
    if (row.length !== D_IN) throw new Error(`row ${f} has ${row.length} energies, need ${D_IN}`);
    let sum = 0;
    for (const v of row) sum += v;
    if (!(sum > 0)) throw new Error(`row ${f} has no counts`);
    for (let n = 0; n < D_IN; n++) input[f * D_IN + n] = row[n] / sum;
  }
  input[INPUT_SIZE - 1] = file.gAbs;
  return input;
}

export function writeDensityFile(rho: CMatrix, path: string): void {
  const d = rho.d;
  const re: number[][] = [];
  const im: number[][] = [];
  for (let i = 0; i < d; i++) {
    re.push(Array.from(rho.re.subarray(i * d, (i + 1) * d), (v) => v + 0));
    im.push(Array.from(rho.im.subarray(i * d, (i + 1) * d), (v) => v + 0));
  }
  const doc = {
    format: "fetomo/1",
    n_min: OUT_WINDOW.nMin,
    n_max: OUT_WINDOW.nMax,
    re,
    im,
  };
  fs.writeFileSync(path, JSON.stringify(doc, null, 1) + "\n");
}

export function readDensityFile(path: string): CMatrix {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (doc.format !== "fetomo/1") throw new Error(`${path}: unsupported format ${doc.format}`);
  const d = doc.n_max - doc.n_min + 1;
  const out = czeros(d);
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      out.re[i * d + j] = doc.re[i][j];
      out.im[i * d + j] = doc.im[i][j];
    }
  }
  return out;
}

export { D_OUT };
