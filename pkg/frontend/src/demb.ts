import * as fs from 'fs';
import * as path from 'path';

// DEMB layout, all little-endian:
//   "DEMB" | version u8 | count u32 | dim u32 | count*dim float32 rows
//   | per row: id byte length u32 + UTF-8 id bytes.

const MAGIC = Buffer.from('DEMB', 'ascii');
const VERSION = 1;
const HEADER_BYTES = 13;

export function writeDemb(outPath: string, docIds: string[], rows: Float64Array[], dim: number): void {
  if (rows.length !== docIds.length) {
    throw new Error(`${docIds.length} doc ids for ${rows.length} rows`);
  }
  if (dim < 1) {
    throw new Error('embedding dim must be positive');
  }
  const badIds = docIds.filter((_, i) => !rows[i].every(Number.isFinite));
  if (badIds.length > 0) {
    throw new Error(`encoding produced non-finite values for doc ids: ${badIds.join(', ')}`);
  }
  const header = Buffer.alloc(HEADER_BYTES);
  MAGIC.copy(header, 0);
  header.writeUInt8(VERSION, 4);
  header.writeUInt32LE(rows.length, 5);
  header.writeUInt32LE(dim, 9);

  const values = Buffer.alloc(rows.length * dim * 4);
  rows.forEach((row, r) => {
    if (row.length !== dim) {
      throw new Error(`row ${r} has ${row.length} values, expected ${dim}`);
    }
    for (let c = 0; c < dim; c++) {
      values.writeFloatLE(row[c], (r * dim + c) * 4);
    }
  });

  const idParts: Buffer[] = [];
  for (const docId of docIds) {
    const encoded = Buffer.from(docId, 'utf-8');
    const length = Buffer.alloc(4);
    length.writeUInt32LE(encoded.length, 0);
    idParts.push(length, encoded);
  }
  atomicWrite(outPath, Buffer.concat([header, values, ...idParts]));
}

export interface DembFile {
  count: number;
  dim: number;
  docIds: string[];
  rows: Float64Array[];
}

export function readDemb(inPath: string): DembFile {
  const buf = fs.readFileSync(inPath);
  if (buf.length < 4 || !buf.subarray(0, 4).equals(MAGIC)) {
    throw new Error(`${inPath}: bad magic, not an embedding file`);
  }
  if (buf.length < HEADER_BYTES) {
    throw new Error(`${inPath}: truncated payload`);
  }
  const version = buf.readUInt8(4);
  if (version !== VERSION) {
    throw new Error(`${inPath}: unsupported version ${version}`);
  }
  const count = buf.readUInt32LE(5);
  const dim = buf.readUInt32LE(9);
  let offset = HEADER_BYTES;
  if (buf.length < offset + count * dim * 4) {
    throw new Error(`${inPath}: truncated payload`);
  }
  const rows: Float64Array[] = [];
  for (let r = 0; r < count; r++) {
    const row = new Float64Array(dim);
    for (let c = 0; c < dim; c++) {
      row[c] = buf.readFloatLE(offset + (r * dim + c) * 4);
    }
    rows.push(row);
  }
  offset += count * dim * 4;
  const docIds: string[] = [];
  for (let r = 0; r < count; r++) {
    if (buf.length < offset + 4) throw new Error(`${inPath}: truncated payload`);
    const idLen = buf.readUInt32LE(offset);
    offset += 4;
    if (buf.length < offset + idLen) throw new Error(`${inPath}: truncated payload`);
    docIds.push(buf.subarray(offset, offset + idLen).toString('utf-8'));
    offset += idLen;
  }
  if (offset !== buf.length) {
    throw new Error(`${inPath}: ${buf.length - offset} trailing bytes after payload`);
  }
  return { count, dim, docIds, rows };
}

export function atomicWrite(outPath: string, data: Buffer | string): void {
  const dir = path.dirname(outPath);
  fs.mkdirSync(dir, { recursive: true });
  const tmp = path.join(dir, `.${path.basename(outPath)}.tmp-${process.pid}`);
  fs.writeFileSync(tmp, data);
  fs.renameSync(tmp, outPath);
}
