/** Command surface: gen-data, train, predict, evaluate. */

import * as fs from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DESK_TRAINING } from "./config.js";
import { generateDataset, readDataset, writeDataset } from "./dataset.js";
import { evaluateOn, heldOutEvaluation, median, medianWhere } from "./evaluate.js";
import { readSpectrogramFile, spectrogramToInput, writeDensityFile } from "./io.js";
import { useBestBackend } from "./model.js";
import { predictDensities } from "./predict.js";
import { loadModel, saveModel, trainNetwork } from "./train.js";

await yargs(hideBin(process.argv))
  .command(
    "gen-data",
    "generate a training set",
    (y) =>
      y
        .option("samples", { type: "number", default: DESK_TRAINING.nSamples })
        .option("seed", { type: "number", default: 0 })
        .option("g-lo", { type: "number", default: DESK_TRAINING.gRange[0] })
        .option("g-hi", { type: "number", default: DESK_TRAINING.gRange[1] })
        .option("out", { type: "string", demandOption: true }),
    (argv) => {
      const config = {
        ...DESK_TRAINING,
        nSamples: argv.samples,
        gRange: [argv.gLo, argv.gHi] as [number, number],
      };
      const t0 = Date.now();
      const ds = generateDataset(config, argv.seed);
      writeDataset(ds, config, argv.seed, argv.out);
      console.log(
        `wrote ${ds.nSamples} samples to ${argv.out} in ${((Date.now() - t0) / 1000).toFixed(1)}s`,
      );
    },
  )
  .command(
    "train",
    "train the reconstructor on a generated dataset",
    (y) =>
      y
        .option("data", { type: "string", demandOption: true })
        .option("out", { type: "string", demandOption: true })
        .option("max-epochs", { type: "number", default: DESK_TRAINING.maxEpochs })
        .option("max-seconds", { type: "number" })
        .option("seed", { type: "number", default: 0, describe: "dataset seed for the manifest" }),
    async (argv) => {
      const dataset = readDataset(argv.data);
      const config = { ...DESK_TRAINING, maxEpochs: argv.maxEpochs, nSamples: dataset.nSamples };
      const result = await trainNetwork(dataset, config, {
        maxSeconds: argv.maxSeconds,
        verbose: true,
      });
      await saveModel(result, config, argv.seed, argv.out);
      console.log(`saved model after ${result.epochs} epochs (backend ${result.backend})`);
    },
  )
  .command(
    "predict",
    "reconstruct a density matrix from a spectrogram file",
    (y) =>
      y
        .option("model", { type: "string", demandOption: true })
        .option("spectrogram", { type: "string", demandOption: true })
        .option("out", { type: "string", demandOption: true }),
    async (argv) => {
      await useBestBackend();
      const model = await loadModel(argv.model);
      const input = spectrogramToInput(readSpectrogramFile(argv.spectrogram));
      const [rho] = predictDensities(model, input);
      writeDensityFile(rho, argv.out);
      console.log(`wrote ${argv.out}`);
    },
  )
  .command(
    "evaluate",
    "held-out fidelity of a trained model",
    (y) =>
      y
        .option("model", { type: "string", demandOption: true })
        .option("samples", { type: "number", default: 1000 })
        .option("seed", { type: "number", default: 9000 })
        .option("out", { type: "string" }),
    async (argv) => {
      await useBestBackend();
      const model = await loadModel(argv.model);
      const ev = heldOutEvaluation(model, DESK_TRAINING, argv.samples, argv.seed);
      const summary = {
        n: ev.fidelities.length,
        median: median(ev.fidelities),
        median_dim_le_5: medianWhere(ev, (dim) => dim <= 5),
        by_dimension: Object.fromEntries(
          Array.from(new Set(ev.dims)).sort((a, b) => a - b).map((d) => [
            d,
            median(ev.fidelities.filter((_, i) => ev.dims[i] === d)),
          ]),
        ),
      };
      console.log(JSON.stringify(summary, null, 1));
      if (argv.out) fs.writeFileSync(argv.out, JSON.stringify(summary, null, 1) + "\n");
    },
  )
  .demandCommand(1)
  .strict()
  .parseAsync();
