/**
 * CLI: build a molecule library file.
 *
 *   node dist/tools/build-library.js --count 10000 --seed 7 \
 *       --fp-len 4096 --out data/library-10k.jsonl.gz
 */

import { writeFileSync } from "node:fs";
import process from "node:process";
import { gzipSync } from "node:zlib";

import { buildLibrary } from "../builder.js";
import { serializeLibrary } from "../library.js";

async function main(argv: string[]): Promise<void> {
  let count = 10_000;
  let seed = 7;
  let fpLen = 4096;
  let workers: number | undefined;
  let out = "data/library-10k.jsonl.gz";
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--count":
        count = Number(argv[++i]);
        break;
      case "--seed":
        seed = Number(argv[++i]);
        break;
      case "--fp-len":
        fpLen = Number(argv[++i]);
        break;
      case "--workers":
        workers = Number(argv[++i]);
        break;
      case "--out":
        out = argv[++i] ?? out;
        break;
      default:
        throw new Error(`unknown flag ${argv[i]}`);
    }
  }
  const started = Date.now();
  const library = await buildLibrary({
    count,
    seed,
    fpLenBits: fpLen,
    workers,
    onProgress: (n) => console.error(`built ${n}/${count} molecules`),
  });
  const text = serializeLibrary(library.header, library.entries);
  const payload = out.endsWith(".gz") ? gzipSync(Buffer.from(text), { level: 9 }) : text;
  writeFileSync(out, payload);
  const seconds = ((Date.now() - started) / 1000).toFixed(1);
  console.error(`wrote ${library.size} molecules to ${out} in ${seconds}s`);
}

main(process.argv.slice(2)).catch((exc) => {
  console.error(`build-library: ${exc instanceof Error ? exc.message : exc}`);
  process.exit(1);
});
