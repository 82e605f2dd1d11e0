/**
 * One-shot reconstruction: network output reshaped to (re, im) and clipped
 * to the nearest physical state.
 */

import * as tf from "@tensorflow/tfjs";

import { CMatrix, projectPhysical } from "./complex.js";
import { D_OUT, INPUT_SIZE, OUTPUT_SIZE } from "./config.js";
import { unflattenDensity } from "./dataset.js";

/** Batched prediction; each row of `inputs` is a flattened spectrogram ++ g. */
export function predictDensities(model: tf.LayersModel, inputs: Float32Array): CMatrix[] {
  const n = inputs.length / INPUT_SIZE;
  const xs = tf.tensor2d(inputs, [n, INPUT_SIZE]);
  const raw = model.predict(xs, { batchSize: 256 }) as tf.Tensor;
  const flat = raw.dataSync();
  xs.dispose();
  raw.dispose();
  const out: CMatrix[] = [];
  for (let i = 0; i < n; i++) {
    const guess = unflattenDensity(flat, i * OUTPUT_SIZE, D_OUT);
    out.push(projectPhysical(guess));
  }
  return out;
}
