import { Rng } from "./rng.js";

export interface BlobSpec {
  classes: number;
  features: number;
  perClass: number;
  /** Per-coordinate standard deviation around each class center. */
  noise: number;
}

export interface Dataset {
  trainX: number[][];
  trainY: number[];
  testX: number[][];
  testY: number[];
}

/**
 * Isotropic Gaussian blobs, one standard-normal center per class, with a
 * stratified train/test split. Everything is drawn from the given rng, so
 * the same seed reproduces the same dataset.
 */
export function makeBlobs(spec: BlobSpec, rng: Rng, testShare = 0.25): Dataset {
  if (spec.classes < 2) throw new Error(`need at least 2 classes, got ${spec.classes}`);
  if (spec.features < 1) throw new Error(`need at least 1 feature, got ${spec.features}`);
  if (spec.perClass < 2) throw new Error(`need at least 2 samples per class, got ${spec.perClass}`);
  if (!(spec.noise > 0)) throw new Error(`noise must be positive, got ${spec.noise}`);

  const centers: number[][] = [];
  for (let c = 0; c < spec.classes; c++) {
    centers.push(Array.from({ length: spec.features }, () => rng.gaussian()));
  }

  const data: Dataset = { trainX: [], trainY: [], testX: [], testY: [] };
  const testCount = Math.max(1, Math.round(spec.perClass * testShare));
  for (let c = 0; c < spec.classes; c++) {
    const points: number[][] = [];
    for (let i = 0; i < spec.perClass; i++) {
      points.push(centers[c].map((m) => m + spec.noise * rng.gaussian()));
    }
    rng.shuffle(points);
    points.forEach((x, i) => {
      if (i < testCount) {
        data.testX.push(x);
        data.testY.push(c);
      } else {
        data.trainX.push(x);
        data.trainY.push(c);
      }
    });
  }
  return data;
}
