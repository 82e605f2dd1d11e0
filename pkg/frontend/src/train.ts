/**
 * Training loop: Adam on mean squared error, batch 32, a held-out
 * validation slice, and early stopping once validation loss stops
 * improving for the configured patience. Checkpoints go to the framework's
 * native topology/weights files plus a JSON manifest.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { INPUT_SIZE, OUTPUT_SIZE, TrainingConfig } from "./config.js";
import { Dataset } from "./dataset.js";
import { buildModel, useBestBackend } from "./model.js";

export interface TrainResult {
  model: tf.LayersModel;
  trainLoss: number[];
  valLoss: number[];
  epochs: number;
  backend: string;
}

export async function trainNetwork(
  dataset: Dataset,
  config: TrainingConfig,
  options: { maxSeconds?: number; verbose?: boolean } = {},
): Promise<TrainResult> {
  const backend = await useBestBackend();
  const model = buildModel();
  model.compile({
    optimizer: tf.train.adam(config.learningRate),
    loss: "meanSquaredError",
  });

  const n = dataset.nSamples;
  const nVal = Math.max(1, Math.round(n * config.validationFraction));
  const nTrain = n - nVal;
  const xsTrain = tf.tensor2d(dataset.inputs.subarray(0, nTrain * INPUT_SIZE), [nTrain, INPUT_SIZE]);
  const ysTrain = tf.tensor2d(dataset.targets.subarray(0, nTrain * OUTPUT_SIZE), [nTrain, OUTPUT_SIZE]);
  const xsVal = tf.tensor2d(dataset.inputs.subarray(nTrain * INPUT_SIZE), [nVal, INPUT_SIZE]);
  const ysVal = tf.tensor2d(dataset.targets.subarray(nTrain * OUTPUT_SIZE), [nVal, OUTPUT_SIZE]);

  const trainLoss: number[] = [];
  const valLoss: number[] = [];
  const started = Date.now();
  let bestVal = Infinity;
  let sinceBest = 0;
  let epochs = 0;
  for (let epoch = 1; epoch <= config.maxEpochs; epoch++) {
    const history = await model.fit(xsTrain, ysTrain, {
      epochs: 1,
      batchSize: config.batchSize,
      shuffle: true,
      verbose: 0,
    });
    const tl = history.history.loss[0] as number;
    if (!Number.isFinite(tl)) {
      throw new Error(`training diverged at epoch ${epoch}: loss ${tl}`);
    }
    const vl = (model.evaluate(xsVal, ysVal, { batchSize: 256 }) as tf.Scalar).dataSync()[0];
    trainLoss.push(tl);
    valLoss.push(vl);
    epochs = epoch;
    if (options.verbose) {
      const dt = ((Date.now() - started) / 1000).toFixed(0);
      console.log(`epoch ${epoch}: train ${tl.toExponential(3)} val ${vl.toExponential(3)} (${dt}s)`);
    }
    if (vl < bestVal - 1e-12) {
      bestVal = vl;
      sinceBest = 0;
    } else {
      sinceBest += 1;
      if (sinceBest >= 2) break; // early stop: no validation improvement
    }
    if (options.maxSeconds && (Date.now() - started) / 1000 > options.maxSeconds) break;
  }
  xsTrain.dispose();
  ysTrain.dispose();
  xsVal.dispose();
  ysVal.dispose();
  return { model, trainLoss, valLoss, epochs, backend };
}

export async function saveModel(
  result: TrainResult,
  config: TrainingConfig,
  datasetSeed: number,
  dir: string,
): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await result.model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify(
          {
            modelTopology: artifacts.modelTopology,
            weightSpecs: artifacts.weightSpecs,
          },
          null,
          1,
        ),
      );
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(artifacts.weightData as ArrayBuffer));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
    }),
  );
  const manifest = {
    format: "fetomo/1",
    kind: "model",
    input_size: INPUT_SIZE,
    output_size: OUTPUT_SIZE,
    dataset_seed: datasetSeed,
    epochs: result.epochs,
    train_loss: result.trainLoss,
    val_loss: result.valLoss,
    backend: result.backend,
    config,
  };
  fs.writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(manifest, null, 1) + "\n");
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  const doc = JSON.parse(fs.readFileSync(path.join(dir, "model.json"), "utf-8"));
  const weights = fs.readFileSync(path.join(dir, "weights.bin"));
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: doc.modelTopology,
      weightSpecs: doc.weightSpecs,
      weightData: weights.buffer.slice(weights.byteOffset, weights.byteOffset + weights.byteLength),
    }),
  );
}
