import { Rng } from "./rng.js";

export const ACTIVATIONS = ["tanh", "relu", "linear", "swish"] as const;
export type Activation = (typeof ACTIVATIONS)[number];

function applyActivation(kind: Activation, z: number): number {
  switch (kind) {
    case "tanh":
      return Math.tanh(z);
    case "relu":
      return z > 0 ? z : 0;
    case "linear":
      return z;
    case "swish":
      return z / (1 + Math.exp(-z));
  }
}

// derivative expressed through pre-activation z and output a, avoiding recompute
function activationGrad(kind: Activation, z: number, a: number): number {
  switch (kind) {
    case "tanh":
      return 1 - a * a;
    case "relu":
      return z > 0 ? 1 : 0;
    case "linear":
      return 1;
    case "swish": {
      const s = 1 / (1 + Math.exp(-z));
      return s + a * (1 - s);
    }
  }
}

/**
 * Plain fully connected classifier: hidden layers with bias and a shared
 * activation, then a linear output head without bias, trained with softmax
 * cross-entropy and minibatch SGD. Small enough that nested loops beat any
 * framework at this scale, and every source of randomness is the caller's rng.
 */
export class Mlp {
  /** weights[l][out][in]; the last layer is the output head. */
  readonly weights: number[][][];
  /** biases[l][out]; null for the bias-free output head. */
  readonly biases: (number[] | null)[];
  readonly sizes: number[];
  readonly activation: Activation;

  constructor(sizes: number[], activation: Activation, rng: Rng) {
    if (sizes.length < 3) throw new Error("need input, at least one hidden layer, and output");
    this.sizes = [...sizes];
    this.activation = activation;
    this.weights = [];
    this.biases = [];
    for (let l = 0; l < sizes.length - 1; l++) {
      const fanIn = sizes[l];
      const fanOut = sizes[l + 1];
      const limit = Math.sqrt(6 / (fanIn + fanOut)); // Glorot uniform
      const w: number[][] = [];
      for (let o = 0; o < fanOut; o++) {
        w.push(Array.from({ length: fanIn }, () => rng.uniform(-limit, limit)));
      }
      this.weights.push(w);
      const isOutput = l === sizes.length - 2;
      this.biases.push(isOutput ? null : new Array(fanOut).fill(0));
    }
  }

  /** Post-activation values of every layer, input included. */
  forward(x: number[]): { activations: number[][]; preacts: number[][] } {
    const activations: number[][] = [x];
    const preacts: number[][] = [];
    let current = x;
    for (let l = 0; l < this.weights.length; l++) {
      const w = this.weights[l];
      const b = this.biases[l];
      const z: number[] = new Array(w.length);
      for (let o = 0; o < w.length; o++) {
        let sum = b ? b[o] : 0;
        const row = w[o];
        for (let i = 0; i < row.length; i++) sum += row[i] * current[i];
        z[o] = sum;
      }
      preacts.push(z);
      const isOutput = l === this.weights.length - 1;
      current = isOutput ? z : z.map((v) => applyActivation(this.activation, v));
      activations.push(current);
    }
    return { activations, preacts };
  }

  logits(x: number[]): number[] {
    const { activations } = this.forward(x);
    return activations[activations.length - 1];
  }

  /** Activation vector at the last hidden layer (the output head's input). */
  hidden(x: number[]): number[] {
    const { activations } = this.forward(x);
    return activations[this.weights.length - 1];
  }

  /** First index attaining the maximal logit. */
  predict(x: number[]): number {
    const out = this.logits(x);
    let best = 0;
    for (let c = 1; c < out.length; c++) if (out[c] > out[best]) best = c;
    return best;
  }

  /** One pass over the data in a seeded shuffle order; returns the mean loss. */
  trainEpoch(
    xs: number[][],
    ys: number[],
    learningRate: number,
    batchSize: number,
    rng: Rng,
  ): number {
    const order = xs.map((_, i) => i);
    rng.shuffle(order);
    let totalLoss = 0;
    for (let start = 0; start < order.length; start += batchSize) {
      const batch = order.slice(start, start + batchSize);
      const gradW = this.weights.map((w) => w.map((row) => new Array(row.length).fill(0)));
      const gradB = this.biases.map((b) => (b ? new Array(b.length).fill(0) : null));
      for (const idx of batch) {
        totalLoss += this.backprop(xs[idx], ys[idx], gradW, gradB);
      }
      const step = learningRate / batch.length;
      for (let l = 0; l < this.weights.length; l++) {
        for (let o = 0; o < this.weights[l].length; o++) {
          const row = this.weights[l][o];
          const grow = gradW[l][o];
          for (let i = 0; i < row.length; i++) row[i] -= step * grow[i];
          const b = this.biases[l];
          const gb = gradB[l];
          if (b && gb) b[o] -= step * gb[o];
        }
      }
    }
    return totalLoss / xs.length;
  }

  /** Accumulates gradients for one sample; returns its cross-entropy loss. */
  private backprop(
    x: number[],
    y: number,
    gradW: number[][][],
    gradB: (number[] | null)[],
  ): number {
    const { activations, preacts } = this.forward(x);
    const logits = activations[activations.length - 1];
    const maxLogit = Math.max(...logits);
    const exps = logits.map((v) => Math.exp(v - maxLogit));
    const total = exps.reduce((a, b) => a + b, 0);
    const probs = exps.map((e) => e / total);
    const loss = -Math.log(probs[y]);

    // softmax cross-entropy: output delta is probs minus the one-hot target
    let delta = probs.map((p, c) => (c === y ? p - 1 : p));
    for (let l = this.weights.length - 1; l >= 0; l--) {
      const input = activations[l];
      for (let o = 0; o < delta.length; o++) {
        const grow = gradW[l][o];
        const d = delta[o];
        for (let i = 0; i < input.length; i++) grow[i] += d * input[i];
        const gb = gradB[l];
        if (gb) gb[o] += d;
      }
      if (l === 0) break;
      const next: number[] = new Array(this.sizes[l]).fill(0);
      for (let o = 0; o < delta.length; o++) {
        const row = this.weights[l][o];
        const d = delta[o];
        for (let i = 0; i < row.length; i++) next[i] += d * row[i];
      }
      const z = preacts[l - 1];
      const a = activations[l];
      for (let i = 0; i < next.length; i++) {
        next[i] *= activationGrad(this.activation, z[i], a[i]);
      }
      delta = next;
    }
    return loss;
  }

  accuracy(xs: number[][], ys: number[]): number {
    let hits = 0;
    for (let i = 0; i < xs.length; i++) if (this.predict(xs[i]) === ys[i]) hits++;
    return hits / xs.length;
  }

  /** Mean softmax cross-entropy without touching any parameter. */
  meanLoss(xs: number[][], ys: number[]): number {
    let total = 0;
    for (let i = 0; i < xs.length; i++) {
      const logits = this.logits(xs[i]);
      const maxLogit = Math.max(...logits);
      const exps = logits.map((v) => Math.exp(v - maxLogit));
      const sum = exps.reduce((a, b) => a + b, 0);
      total += -Math.log(exps[ys[i]] / sum);
    }
    return total / xs.length;
  }
}
