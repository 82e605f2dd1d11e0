/**
 * Network topology: a deep feedforward recogniser with batch normalisation
 * before each ReLU and residual feed-forward between the hidden layers,
 * gated multiplicatively by a parallel autoencoder whose sigmoid output
 * switches recogniser channels on and off.
 */

import * as tf from "@tensorflow/tfjs";

import {
  BOTTLENECK,
  HIDDEN_LAYERS,
  HIDDEN_WIDTH,
  INPUT_SIZE,
  OUTPUT_SIZE,
} from "./config.js";

export function buildModel(): tf.LayersModel {
  const input = tf.input({ shape: [INPUT_SIZE] });

  let h = tf.layers.dense({ units: HIDDEN_WIDTH, name: "ff_dense_1" }).apply(input) as tf.SymbolicTensor;
  h = tf.layers.batchNormalization({ name: "ff_bn_1" }).apply(h) as tf.SymbolicTensor;
  h = tf.layers.activation({ activation: "relu", name: "ff_relu_1" }).apply(h) as tf.SymbolicTensor;
  for (let k = 2; k <= HIDDEN_LAYERS; k++) {
    let d = tf.layers.dense({ units: HIDDEN_WIDTH, name: `ff_dense_${k}` }).apply(h) as tf.SymbolicTensor;
    d = tf.layers.batchNormalization({ name: `ff_bn_${k}` }).apply(d) as tf.SymbolicTensor;
    // residual feed-forward: previous output added onto this layer's output
    d = tf.layers.add({ name: `ff_skip_${k}` }).apply([d, h]) as tf.SymbolicTensor;
    h = tf.layers.activation({ activation: "relu", name: `ff_relu_${k}` }).apply(d) as tf.SymbolicTensor;
  }
  const recogniser = tf.layers
    .dense({ units: OUTPUT_SIZE, name: "ff_out" })
    .apply(h) as tf.SymbolicTensor;

  let enc = tf.layers
    .dense({ units: 256, activation: "relu", name: "ae_encode" })
    .apply(input) as tf.SymbolicTensor;
  enc = tf.layers
    .dense({ units: BOTTLENECK, activation: "relu", name: "ae_bottleneck" })
    .apply(enc) as tf.SymbolicTensor;
  let dec = tf.layers
    .dense({ units: 256, activation: "relu", name: "ae_decode" })
    .apply(enc) as tf.SymbolicTensor;
  const gate = tf.layers
    .dense({ units: OUTPUT_SIZE, activation: "sigmoid", name: "ae_gate" })
    .apply(dec) as tf.SymbolicTensor;

  const output = tf.layers
    .multiply({ name: "gated_out" })
    .apply([recogniser, gate]) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: output });
}

export async function useBestBackend(): Promise<string> {
  try {
    const wasm = await import("@tensorflow/tfjs-backend-wasm");
    wasm.setWasmPaths(
      new URL("../node_modules/@tensorflow/tfjs-backend-wasm/dist/", import.meta.url).pathname,
    );
    await tf.setBackend("wasm");
  } catch {
    await tf.setBackend("cpu");
  }
  await tf.ready();
  return tf.getBackend();
}
