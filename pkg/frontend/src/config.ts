/** Desk-scale defaults for the reconstructor and its training set. */

import { Window } from "./ladder.js";

/** Detection window of the spectrogram inputs (21 energies). */
export const IN_WINDOW: Window = { nMin: -10, nMax: 10 };

/** Window of the reconstructed density matrices (8 energies). */
export const OUT_WINDOW: Window = { nMin: -4, nMax: 3 };

export const D_IN = 21;
export const D_OUT = 8;
export const N_PHASES = 50;
export const INPUT_SIZE = N_PHASES * D_IN + 1; // spectrogram ++ coupling magnitude
export const OUTPUT_SIZE = 2 * D_OUT * D_OUT; // re ++ im, interleaved per entry
export const BOTTLENECK = 2 * D_OUT;
export const HIDDEN_WIDTH = 512;
export const HIDDEN_LAYERS = 4;

export interface TrainingConfig {
  nSamples: number;
  gRange: [number, number];
  batchSize: number;
  learningRate: number;
  maxEpochs: number;
  validationFraction: number;
  patience: number;
}

export const DESK_TRAINING: TrainingConfig = {
  nSamples: 50_000,
  gRange: [0.8, 1.5],
  batchSize: 32,
  learningRate: 1e-4,
  maxEpochs: 14,
  validationFraction: 0.01,
  patience: 2,
};
