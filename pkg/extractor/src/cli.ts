#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { ACTIVATIONS, Activation } from "./mlp.js";
import { DEFAULTS, ExtractionConfig, parseHidden, trainAndExtract } from "./extract.js";

export function run(argv: string[]): number {
  const args = yargs(argv)
    .scriptName("extract")
    .usage("$0 --dataset blobs --classes 8 --features 20 --hidden 64,16 --out viewdir/")
    .option("dataset", { type: "string", choices: ["blobs"], default: DEFAULTS.dataset })
    .option("classes", { type: "number", default: DEFAULTS.classes })
    .option("features", { type: "number", default: DEFAULTS.features })
    .option("per-class", { type: "number", default: DEFAULTS.perClass })
    .option("noise", { type: "number", default: DEFAULTS.noise })
    .option("hidden", { type: "string", default: DEFAULTS.hidden.join(",") })
    .option("activation", {
      type: "string",
      choices: ACTIVATIONS as unknown as string[],
      default: DEFAULTS.activation,
    })
    .option("epochs", { type: "number", default: DEFAULTS.epochs })
    .option("lr", { type: "number", default: DEFAULTS.learningRate })
    .option("batch", { type: "number", default: DEFAULTS.batchSize })
    .option("seed", { type: "number", default: DEFAULTS.seed })
    .option("out", { type: "string", demandOption: true, describe: "view output directory" })
    .strict()
    .help()
    .parseSync();

  const cfg: ExtractionConfig = {
    dataset: "blobs",
    classes: args.classes,
    features: args.features,
    perClass: args["per-class"],
    noise: args.noise,
    hidden: parseHidden(args.hidden),
    activation: args.activation as Activation,
    epochs: args.epochs,
    learningRate: args.lr,
    batchSize: args.batch,
    seed: args.seed,
    out: args.out,
  };
  const result = trainAndExtract(cfg);
  console.log(
    `trained ${cfg.activation} mlp [${cfg.hidden.join(",")}] on ${cfg.classes}-class blobs: ` +
      `train acc ${result.trainAccuracy.toFixed(3)}, test acc ${result.testAccuracy.toFixed(3)}, ` +
      `final loss ${result.finalLoss.toFixed(4)}`,
  );
  console.log(`wrote ${result.objectCount} objects to ${result.viewDir}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  try {
    process.exit(run(hideBin(process.argv)));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  }
}
