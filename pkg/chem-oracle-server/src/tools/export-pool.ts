/**
 * CLI: export library fingerprints as an fpopt seed-pool file
 * (header `#fp_len=<L>`, one canonical hex fingerprint per line).
 *
 *   node dist/tools/export-pool.js <library> <out-pool> [count]
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import process from "node:process";

import { MoleculeLibrary } from "../library.js";

function main(argv: string[]): void {
  const [libraryPath, outPath, countArg] = argv;
  if (!libraryPath || !outPath) {
    throw new Error("usage: export-pool.js <library> <out-pool> [count]");
  }
  const library = MoleculeLibrary.load(libraryPath);
  const count = Math.min(countArg ? Number(countArg) : library.size, library.size);
  // evenly strided sample keeps the pool spread across the library
  const lines = [`#fp_len=${library.fpLenBits}`];
  for (let i = 0; i < count; i++) {
    const index = Math.floor((i * library.size) / count);
    lines.push(library.entries[index]!.fp);
  }
  mkdirSync(dirname(outPath), { recursive: true });
  writeFileSync(outPath, lines.join("\n") + "\n");
  console.error(`wrote ${count} fingerprints to ${outPath}`);
}

main(process.argv.slice(2));
