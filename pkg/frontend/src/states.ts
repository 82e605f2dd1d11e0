/**
 * Random training states: a physical density matrix on a random subset of
 * the output window's energy levels, zero-padded to the full window.
 */

import { CMatrix, czeros, hermitize, trace } from "./complex.js";
import { Rng } from "./rng.js";

/** rho = A A^dagger / Tr with complex standard-normal A of size k x k. */
export function ginibreDensity(k: number, rng: Rng): CMatrix {
  const are = new Float64Array(k * k);
  const aim = new Float64Array(k * k);
  for (let i = 0; i < k * k; i++) {
    are[i] = rng.normal();
    aim[i] = rng.normal();
  }
  const rho = czeros(k);
  for (let i = 0; i < k; i++) {
    for (let j = 0; j < k; j++) {
      let re = 0;
      let im = 0;
      for (let m = 0; m < k; m++) {
        const ar = are[i * k + m];
        const ai = aim[i * k + m];
        const br = are[j * k + m];
        const bi = aim[j * k + m];
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
      }
      rho.re[i * k + j] = re;
      rho.im[i * k + j] = im;
    }
  }
  const t = trace(rho);
  for (let i = 0; i < k * k; i++) {
    rho.re[i] /= t;
    rho.im[i] /= t;
  }
  return hermitize(rho);
}

/** Scatter a k x k density onto the listed offsets of a d x d window. */
export function embedSubset(small: CMatrix, offsets: number[], d: number): CMatrix {
  const out = czeros(d);
  const k = small.d;
  for (let i = 0; i < k; i++) {
    for (let j = 0; j < k; j++) {
      out.re[offsets[i] * d + offsets[j]] = small.re[i * k + j];
      out.im[offsets[i] * d + offsets[j]] = small.im[i * k + j];
    }
  }
  return out;
}

/** A random state of dimension <= dMax embedded in the d-level window. */
export function randomEmbeddedState(
  d: number,
  dMax: number,
  rng: Rng,
): { rho: CMatrix; dim: number } {
  const dim = 1 + rng.integer(dMax);
  const offsets = rng.subset(d, dim);
  const rho = embedSubset(ginibreDensity(dim, rng), offsets, d);
  return { rho, dim };
}
