#!/usr/bin/env node
import { parseArgs } from 'util';

import { readDocumentsJsonl } from './documents';
import { SentenceEncoder, headWeights, resolveModel, scoreToConfidence } from './encoder';
import { writeDemb } from './demb';
import { PredictionRow, TASK_CLASSES, writePredictionsCsv } from './predictions';

const USAGE = 'usage: embed-export --in docs.jsonl --model <id> --out <path> [--predict sentiment|hate]';

export interface ExportJob {
  inPath: string;
  modelId: string;
  batchSize: number;
  outPath: string;
  task: 'embeddings' | 'sentiment' | 'hate';
}

function encodeAll(encoder: SentenceEncoder, texts: string[], batchSize: number): Float64Array[] {
  const rows: Float64Array[] = [];
  for (let start = 0; start < texts.length; start += batchSize) {
    rows.push(...encoder.encode(texts.slice(start, start + batchSize)));
  }
  return rows;
}

export function exportEmbeddings(job: ExportJob): number {
  const encoder = resolveModel(job.modelId);
  const docs = readDocumentsJsonl(job.inPath);
  const rows = encodeAll(encoder, docs.map((d) => d.text), job.batchSize);
  writeDemb(job.outPath, docs.map((d) => d.id), rows, encoder.dim);
  return docs.length;
}

export function exportPredictions(job: ExportJob): number {
  const encoder = resolveModel(job.modelId);
  const docs = readDocumentsJsonl(job.inPath);
  const rows = encodeAll(encoder, docs.map((d) => d.text), job.batchSize);
  const classes = TASK_CLASSES[job.task];
  const weights = headWeights(job.modelId, job.task, encoder.dim);
  const predictions: PredictionRow[] = docs.map((doc, i) => {
    let score = 0;
    for (let c = 0; c < encoder.dim; c++) score += weights[c] * rows[i][c];
    return {
      docId: doc.id,
      label: score >= 0 ? classes[0] : classes[1],
      confidence: scoreToConfidence(score),
    };
  });
  writePredictionsCsv(job.outPath, job.task, predictions);
  return docs.length;
}

export function run(argv: string[]): number {
  let values: Record<string, string | boolean | undefined>;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        in: { type: 'string' },
        model: { type: 'string' },
        out: { type: 'string' },
        predict: { type: 'string' },
        help: { type: 'boolean' },
      },
      strict: true,
      allowPositionals: false,
    }));
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n${USAGE}\n`);
    return 2;
  }
  if (values.help) {
    process.stdout.write(`${USAGE}\n`);
    return 0;
  }
  for (const flag of ['in', 'model', 'out'] as const) {
    if (typeof values[flag] !== 'string' || values[flag] === '') {
      process.stderr.write(`error: --${flag} is required\n${USAGE}\n`);
      return 2;
    }
  }
  const predict = values.predict as string | undefined;
  if (predict !== undefined && !(predict in TASK_CLASSES)) {
    process.stderr.write(`error: --predict must be one of: ${Object.keys(TASK_CLASSES).join(', ')}\n`);
    return 2;
  }
  const job: ExportJob = {
    inPath: values.in as string,
    modelId: values.model as string,
    outPath: values.out as string,
    batchSize: 64,
    task: (predict as 'sentiment' | 'hate' | undefined) ?? 'embeddings',
  };
  try {
    if (job.task === 'embeddings') {
      const count = exportEmbeddings(job);
      console.log(`wrote ${count} embedding row(s) to ${job.outPath}`);
    } else {
      const count = exportPredictions(job);
      console.log(`wrote ${count} ${job.task} prediction(s) to ${job.outPath}`);
    }
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
