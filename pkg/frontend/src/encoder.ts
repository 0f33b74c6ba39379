// Deterministic character n-gram hashing encoder.
//
// Model ids are opaque strings owned by this adapter; the downstream
// toolkit never interprets them. The "hashgram-<dim>" family buckets
// character trigrams with a signed hash and L2-normalizes, so the same
// text always lands on the same vector with no network or model files.

export interface SentenceEncoder {
  modelId: string;
  dim: number;
  encode(texts: string[]): Float64Array[];
}

const MODEL_PATTERN = /^hashgram-(\d+)$/;
const MIN_DIM = 8;
const MAX_DIM = 4096;

export function resolveModel(modelId: string): SentenceEncoder {
  const match = MODEL_PATTERN.exec(modelId);
  if (!match) {
    throw new Error(`model ${JSON.stringify(modelId)} not available (expected hashgram-<dim>)`);
  }
  const dim = Number(match[1]);
  if (!Number.isInteger(dim) || dim < MIN_DIM || dim > MAX_DIM) {
    throw new Error(`model ${JSON.stringify(modelId)}: dim must be between ${MIN_DIM} and ${MAX_DIM}`);
  }
  return new HashGramEncoder(modelId, dim);
}

export function fnv1a(text: string, seed = 0x811c9dc5): number {
  let hash = seed >>> 0;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

function canonicalize(text: string): string {
  return text.normalize('NFC').toLowerCase().replace(/\s+/g, ' ').trim();
}

class HashGramEncoder implements SentenceEncoder {
  constructor(public modelId: string, public dim: number) {}

  encode(texts: string[]): Float64Array[] {
    return texts.map((text) => this.encodeOne(text));
  }

  private encodeOne(text: string): Float64Array {
    const vec = new Float64Array(this.dim);
    const padded = ` ${canonicalize(text)} `;
    if (padded.length < 3) return vec; // empty text stays a zero row
    for (let i = 0; i + 3 <= padded.length; i++) {
      const hash = fnv1a(padded.slice(i, i + 3));
      const bucket = hash % this.dim;
      const sign = (hash >>> 16) & 1 ? 1 : -1;
      vec[bucket] += sign;
    }
    let norm = 0;
    for (let i = 0; i < this.dim; i++) norm += vec[i] * vec[i];
    norm = Math.sqrt(norm);
    if (norm > 0) {
      for (let i = 0; i < this.dim; i++) vec[i] /= norm;
    }
    return vec;
  }
}

// Linear scoring head derived from the model id, so a fixed (model, task)
// pair always produces the same labels. Weights come from a seeded PRNG,
// not training; this is plumbing for the wire format, not a real classifier.
export function headWeights(modelId: string, task: string, dim: number): Float64Array {
  let state = fnv1a(`${modelId}:${task}`);
  const next = () => {
    // mulberry32
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  const weights = new Float64Array(dim);
  for (let i = 0; i < dim; i++) weights[i] = next() * 2 - 1;
  return weights;
}

export function scoreToConfidence(score: number): number {
  return 1 / (1 + Math.exp(-4 * Math.abs(score)));
}
