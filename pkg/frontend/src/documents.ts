import * as fs from 'fs';

export interface InputDocument {
  id: string;
  text: string;
}

// Reads the toolkit's document JSONL: one object per line, "id" and "text"
// required, extra fields ignored. Bad lines are collected and reported
// together so one pass surfaces every problem.
export function readDocumentsJsonl(path: string): InputDocument[] {
  const raw = fs.readFileSync(path, 'utf-8');
  const docs: InputDocument[] = [];
  const problems: string[] = [];
  const seen = new Set<string>();
  const lines = raw.split('\n');
  lines.forEach((line, index) => {
    if (line.trim() === '') return;
    const lineNo = index + 1;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      problems.push(`line ${lineNo}: not valid JSON`);
      return;
    }
    if (typeof parsed !== 'object' || parsed === null || Array.isArray(parsed)) {
      problems.push(`line ${lineNo}: expected an object`);
      return;
    }
    const record = parsed as Record<string, unknown>;
    const id = record.id;
    const text = record.text;
    if (typeof id !== 'string' || id === '') {
      problems.push(`line ${lineNo}: missing or empty "id"`);
      return;
    }
    if (typeof text !== 'string') {
      problems.push(`line ${lineNo}: missing "text"`);
      return;
    }
    if (seen.has(id)) {
      problems.push(`line ${lineNo}: duplicate id ${JSON.stringify(id)}`);
      return;
    }
    seen.add(id);
    docs.push({ id, text });
  });
  if (problems.length > 0) {
    const shown = problems.slice(0, 10).join('; ');
    throw new Error(`${path}: ${problems.length} malformed row(s): ${shown}`);
  }
  return docs;
}
