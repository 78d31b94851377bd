/**
 * Molecule library: a JSONL file (optionally gzipped) of molecules with
 * precomputed fingerprints and property scores, plus the nearest-neighbor
 * decode that maps an arbitrary query fingerprint to its closest library
 * molecule. Decoding is deterministic: ties resolve to the lowest index.
 */

import { gunzipSync } from "node:zlib";
import { readFileSync } from "node:fs";

import { PackedMatrix, packedFromHex } from "./fingerprint.js";

export interface LibraryEntry {
  smiles: string;
  fp: string; // canonical hex
  qed: number;
  sa: number; // native 1..10
  logp: number;
}

export interface LibraryHeader {
  format: "chem-oracle-library";
  version: 1;
  fp_len: number;
  size: number;
  seed?: number;
}

export class MoleculeLibrary {
  readonly header: LibraryHeader;
  readonly entries: LibraryEntry[];
  readonly fingerprints: Uint8Array[];
  private readonly index: PackedMatrix;

  constructor(header: LibraryHeader, entries: LibraryEntry[]) {
    if (entries.length === 0) {
      throw new Error("library is empty");
    }
    if (entries.length !== header.size) {
      throw new Error(`header size ${header.size} != entry count ${entries.length}`);
    }
    this.header = header;
    this.entries = entries;
    this.fingerprints = entries.map((e) => packedFromHex(e.fp, header.fp_len));
    this.index = new PackedMatrix(this.fingerprints);
  }

  get fpLenBits(): number {
    return this.header.fp_len;
  }

  get size(): number {
    return this.entries.length;
  }

  /** Index of the library molecule nearest to the query (tanimoto). */
  decode(query: Uint8Array): number {
    return this.index.nearestIndex(query);
  }

  static load(path: string): MoleculeLibrary {
    let raw = readFileSync(path);
    if (path.endsWith(".gz")) {
      raw = gunzipSync(raw);
    }
    const lines = raw.toString("utf-8").split("\n").filter((l) => l.trim() !== "");
    if (lines.length === 0) {
      throw new Error(`${path}: empty library file`);
    }
    const header = JSON.parse(lines[0]!) as LibraryHeader;
    if (header.format !== "chem-oracle-library" || header.version !== 1) {
      throw new Error(`${path}: not a v1 chem-oracle-library file`);
    }
    const entries: LibraryEntry[] = [];
    for (const line of lines.slice(1)) {
      const entry = JSON.parse(line) as LibraryEntry;
      if (
        typeof entry.smiles !== "string" ||
        typeof entry.fp !== "string" ||
        typeof entry.qed !== "number" ||
        typeof entry.sa !== "number"
      ) {
        throw new Error(`${path}: malformed library entry ${line.slice(0, 80)}`);
      }
      entries.push(entry);
    }
    return new MoleculeLibrary(header, entries);
  }
}

export function serializeLibrary(header: LibraryHeader, entries: LibraryEntry[]): string {
  const lines = [JSON.stringify(header)];
  for (const entry of entries) {
    lines.push(JSON.stringify(entry));
  }
  return lines.join("\n") + "\n";
}
