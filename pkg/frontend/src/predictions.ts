import { atomicWrite } from './demb';

export const TASK_CLASSES: Record<string, string[]> = {
  sentiment: ['positive', 'negative'],
  hate: ['hate', 'non-hate'],
};

export interface PredictionRow {
  docId: string;
  label: string;
  confidence: number;
}

// Matches the toolkit's CSV dialect: comma separated, "\n" line ends,
// quotes only when a cell needs them.
function csvCell(cell: string): string {
  if (/[",\n\r]/.test(cell)) {
    return `"${cell.replace(/"/g, '""')}"`;
  }
  return cell;
}

export function writePredictionsCsv(outPath: string, task: string, rows: PredictionRow[]): void {
  const classes = TASK_CLASSES[task];
  if (!classes) {
    throw new Error(`unknown task ${JSON.stringify(task)}`);
  }
  const lines = ['doc_id,label,confidence'];
  for (const row of rows) {
    if (!classes.includes(row.label)) {
      throw new Error(
        `label ${JSON.stringify(row.label)} not valid for task ${JSON.stringify(task)} (expected one of ${classes.join(', ')})`
      );
    }
    if (!Number.isFinite(row.confidence) || row.confidence < 0 || row.confidence > 1) {
      throw new Error(`confidence ${row.confidence} for doc ${JSON.stringify(row.docId)} outside [0, 1]`);
    }
    lines.push([csvCell(row.docId), csvCell(row.label), String(row.confidence)].join(','));
  }
  atomicWrite(outPath, lines.join('\n') + '\n');
}
