import * as fs from "fs";
import * as path from "path";

import { makeBlobs } from "./blobs.js";
import { writeMatrixCsv, writePairsCsv } from "./csv.js";
import { ACTIVATIONS, Activation, Mlp } from "./mlp.js";
import { Rng } from "./rng.js";

export interface ExtractionConfig {
  dataset: "blobs";
  classes: number;
  features: number;
  perClass: number;
  noise: number;
  /** Hidden layer widths; the last one is the exported layer h. */
  hidden: number[];
  activation: Activation;
  epochs: number;
  learningRate: number;
  batchSize: number;
  seed: number;
  out: string;
}

export const DEFAULTS = {
  dataset: "blobs" as const,
  classes: 8,
  features: 20,
  perClass: 100,
  noise: 0.3,
  hidden: [64, 16],
  activation: "tanh" as Activation,
  epochs: 50,
  learningRate: 0.5,
  batchSize: 32,
  seed: 7,
};

export interface ExtractionResult {
  trainAccuracy: number;
  testAccuracy: number;
  finalLoss: number;
  objectCount: number;
  viewDir: string;
}

export function validateConfig(cfg: ExtractionConfig): void {
  if (cfg.dataset !== "blobs") throw new Error(`unknown dataset ${cfg.dataset}`);
  if (!ACTIVATIONS.includes(cfg.activation)) {
    throw new Error(`activation must be one of ${ACTIVATIONS.join(", ")}; got ${cfg.activation}`);
  }
  if (cfg.hidden.length < 1) throw new Error("at least one hidden layer is required");
  if (cfg.hidden.some((h) => !Number.isInteger(h) || h < 1)) {
    throw new Error(`hidden sizes must be positive integers, got ${cfg.hidden.join(",")}`);
  }
  if (cfg.hidden[cfg.hidden.length - 1] < 2) {
    throw new Error("the final hidden layer must have at least 2 neurons");
  }
  if (cfg.epochs < 1) throw new Error("epochs must be at least 1");
  if (!(cfg.learningRate > 0)) throw new Error("learning rate must be positive");
  if (cfg.batchSize < 1) throw new Error("batch size must be at least 1");
}

export function parseHidden(spec: string): number[] {
  const parts = spec.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
  const sizes = parts.map((s) => Number(s));
  if (sizes.length === 0 || sizes.some((h) => !Number.isInteger(h))) {
    throw new Error(`--hidden expects comma-separated integers, got "${spec}"`);
  }
  return sizes;
}

/**
 * Trains the classifier and dumps its view of the test split: last hidden
 * layer activations per object, output-head weight rows per class, and the
 * model's own argmax predictions. The output head carries no bias, so no
 * bias.csv is written and dot-product logits reconstruct predictions exactly.
 */
export function trainAndExtract(cfg: ExtractionConfig): ExtractionResult {
  validateConfig(cfg);
  const rng = new Rng(cfg.seed);
  const data = makeBlobs(
    { classes: cfg.classes, features: cfg.features, perClass: cfg.perClass, noise: cfg.noise },
    rng,
  );
  const sizes = [cfg.features, ...cfg.hidden, cfg.classes];
  const mlp = new Mlp(sizes, cfg.activation, rng);

  let loss = NaN;
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    loss = mlp.trainEpoch(data.trainX, data.trainY, cfg.learningRate, cfg.batchSize, rng);
    if (!Number.isFinite(loss)) {
      throw new Error(`training diverged at epoch ${epoch + 1}: loss=${loss}`);
    }
  }

  const classIds = Array.from({ length: cfg.classes }, (_, c) => `c${c}`);
  const objectIds = data.testX.map((_, i) => `g${i}`);
  const activations = data.testX.map((x) => mlp.hidden(x));
  const head = mlp.weights[mlp.weights.length - 1]; // one row per class over h neurons
  const predictions: [string, string][] = data.testX.map((x, i) => [
    objectIds[i],
    classIds[mlp.predict(x)],
  ]);

  fs.mkdirSync(cfg.out, { recursive: true });
  writeMatrixCsv(path.join(cfg.out, "objects.csv"), objectIds, activations);
  writeMatrixCsv(path.join(cfg.out, "classes.csv"), classIds, head);
  writePairsCsv(path.join(cfg.out, "predictions.csv"), ["id", "class"], predictions);
  const manifest = {
    activation: cfg.activation,
    bias: null,
    classes: "classes.csv",
    neuron_count: cfg.hidden[cfg.hidden.length - 1],
    objects: "objects.csv",
    predictions: "predictions.csv",
    source_model: `${cfg.dataset}-mlp-${sizes.join("x")}-seed${cfg.seed}`,
  };
  fs.writeFileSync(path.join(cfg.out, "view.json"), JSON.stringify(manifest, null, 2) + "\n");

  return {
    trainAccuracy: mlp.accuracy(data.trainX, data.trainY),
    testAccuracy: mlp.accuracy(data.testX, data.testY),
    finalLoss: loss,
    objectCount: objectIds.length,
    viewDir: cfg.out,
  };
}
