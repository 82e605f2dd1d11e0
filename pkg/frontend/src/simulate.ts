/**
 * Forward model: expected detection probabilities of a phase-swept
 * interaction applied to a density matrix. Mirrors the Python simulate
 * command bin for bin (verified against golden cases in the tests).
 */

import { CMatrix } from "./complex.js";
import { dimension, sweepAmplitudes, Window } from "./ladder.js";

export function uniformPhases(count: number): Float64Array {
  const out = new Float64Array(count);
  for (let i = 0; i < count; i++) out[i] = (2 * Math.PI * i) / count;
  return out;
}

/**
 * Probabilities p(phi, N) = <N| U_phi rho U_phi^dagger |N> as a row-major
 * (phases x detection-window) array. The state lives on stateWindow, a
 * sub-window of the detection window.
 */
export function spectrogramProbabilities(
  rho: CMatrix,
  stateWindow: Window,
  gAbs: number,
  phases: Float64Array,
  detection: Window,
): Float64Array {
  const d = dimension(stateWindow);
  if (rho.d !== d) throw new Error("state dimension does not match its window");
  const nOut = dimension(detection);
  const out = new Float64Array(phases.length * nOut);
  for (let f = 0; f < phases.length; f++) {
    const amps = sweepAmplitudes(gAbs, phases[f], detection, stateWindow);
    for (let n = 0; n < nOut; n++) {
      // v rho v^dagger with v the amplitude row
      let p = 0;
      for (let a = 0; a < d; a++) {
        const var_ = amps.re[n * d + a];
        const vai = amps.im[n * d + a];
        for (let b = 0; b < d; b++) {
          const rr = rho.re[a * d + b];
          const ri = rho.im[a * d + b];
          const vbr = amps.re[n * d + b];
          const vbi = amps.im[n * d + b];
          // Re( v_a rho_ab conj(v_b) )
          p +=
            var_ * (rr * vbr + ri * vbi) -
            vai * (ri * vbr - rr * vbi);
        }
      }
      out[f * nOut + n] = Math.max(p, 0);
    }
  }
  return out;
}
