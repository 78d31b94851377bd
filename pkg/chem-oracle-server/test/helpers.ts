import { existsSync, mkdirSync, renameSync, writeFileSync } from "node:fs";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { buildLibrary } from "../src/builder.js";
import { MoleculeLibrary, serializeLibrary } from "../src/library.js";

export const TEST_FP_LEN = 512;
export const TEST_LIB_SIZE = 120;
const TEST_LIB_SEED = 11;

const CACHE_DIR = resolve(fileURLToPath(new URL(".cache", import.meta.url)));
const CACHE_PATH = join(CACHE_DIR, `small-library-s${TEST_LIB_SEED}.jsonl`);

let cached: Promise<MoleculeLibrary> | null = null;

/**
 * One small deterministic library shared across the suite. Built on first
 * use and cached on disk; the build is seeded, so a concurrent rebuild
 * produces byte-identical content and the atomic rename cannot corrupt it.
 */
export function testLibrary(): Promise<MoleculeLibrary> {
  if (cached === null) {
    cached = (async () => {
      if (existsSync(CACHE_PATH)) {
        return MoleculeLibrary.load(CACHE_PATH);
      }
      const library = await buildLibrary({
        count: TEST_LIB_SIZE,
        seed: TEST_LIB_SEED,
        fpLenBits: TEST_FP_LEN,
      });
      mkdirSync(CACHE_DIR, { recursive: true });
      const scratch = CACHE_PATH + `.${process.pid}`;
      writeFileSync(scratch, serializeLibrary(library.header, library.entries));
      renameSync(scratch, CACHE_PATH);
      return library;
    })();
  }
  return cached;
}
