/**
 * Held-out evaluation: reconstruction fidelity of fresh random states,
 * grouped by state dimension and by coupling strength.
 */

import * as tf from "@tensorflow/tfjs";

import { fidelity } from "./complex.js";
import { INPUT_SIZE, OUTPUT_SIZE, TrainingConfig } from "./config.js";
import { Dataset, generateDataset, unflattenDensity } from "./dataset.js";
import { D_OUT } from "./config.js";
import { predictDensities } from "./predict.js";

export interface Evaluation {
  fidelities: number[];
  dims: number[];
  gs: number[];
}

export function evaluateOn(model: tf.LayersModel, dataset: Dataset): Evaluation {
  const predictions = predictDensities(model, dataset.inputs);
  const fidelities: number[] = [];
  for (let i = 0; i < dataset.nSamples; i++) {
    const truth = unflattenDensity(dataset.targets, i * OUTPUT_SIZE, D_OUT);
    fidelities.push(fidelity(predictions[i], truth));
  }
  return {
    fidelities,
    dims: Array.from(dataset.dims),
    gs: Array.from(dataset.gs),
  };
}

export function heldOutEvaluation(
  model: tf.LayersModel,
  config: TrainingConfig,
  nSamples: number,
  seed: number,
): Evaluation {
  const fresh = generateDataset({ ...config, nSamples }, seed);
  return evaluateOn(model, fresh);
}

export function median(values: number[]): number {
  if (values.length === 0) throw new Error("median of empty list");
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
}

export function medianWhere(ev: Evaluation, keep: (dim: number, g: number) => boolean): number {
  const vals = ev.fidelities.filter((_, i) => keep(ev.dims[i], ev.gs[i]));
  return median(vals);
}
