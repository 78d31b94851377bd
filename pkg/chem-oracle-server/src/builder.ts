/**
 * Library construction: generate unique valid molecules, compute
 * fingerprints and property scores, then the synthetic-accessibility pass
 * (which needs library-wide bit frequencies).
 *
 * Candidate scoring (dominated by logP atom typing) fans out to worker
 * threads, but candidates are accepted strictly in generation order, so the
 * result is fully determined by (seed, count, fp_len) regardless of worker
 * count.
 */

import { existsSync } from "node:fs";
import { dirname, join, sep } from "node:path";
import { fileURLToPath } from "node:url";
import { Worker } from "node:worker_threads";
import os from "node:os";

import { packedFromHex } from "./fingerprint.js";
import { generateSmilesCandidate } from "./generator.js";
import { LibraryEntry, LibraryHeader, MoleculeLibrary } from "./library.js";
import { mulberry32 } from "./rng.js";
import type { ScoredCandidate, ScoreTask } from "./score-worker.js";
import { bitDocumentFrequency, fragmentCommonness, nativeSaFromRaw } from "./sascore.js";

export interface BuildOptions {
  count: number;
  seed: number;
  fpLenBits: number;
  minHeavyAtoms?: number;
  maxHeavyAtoms?: number;
  workers?: number;
  onProgress?: (accepted: number) => void;
}

const CHUNK_PER_WORKER = 64;

interface AcceptedCandidate {
  smiles: string;
  fpHex: string;
  qed: number;
  logp: number;
  complexity: number;
}

class WorkerPool {
  private readonly workers: Worker[];

  constructor(size: number, config: object) {
    // workers always run the compiled module, even when this module is
    // being executed from src/ by a TS-aware test runner
    const here = fileURLToPath(import.meta.url);
    const workerPath = here.includes(`${sep}dist${sep}`)
      ? join(dirname(here), "score-worker.js")
      : join(dirname(here), "..", "dist", "score-worker.js")
    if (!existsSync(workerPath)) {
      throw new Error(`${workerPath} missing; run "npm run build" first`);
    }
    this.workers = Array.from(
      { length: size },
      () => new Worker(workerPath, { workerData: config }),
    );
  }

  /** Score one chunk, sliced across workers; results return id-ordered. */
  async score(ids: number[], smiles: string[]): Promise<ScoredCandidate[]> {
    const slices = this.workers.map((worker, w) => {
      const task: ScoreTask = {
        ids: ids.filter((_, i) => i % this.workers.length === w),
        smiles: smiles.filter((_, i) => i % this.workers.length === w),
      };
      if (task.ids.length === 0) {
        return Promise.resolve([] as ScoredCandidate[]);
      }
      return new Promise<ScoredCandidate[]>((resolve, reject) => {
        const onError = (exc: Error) => reject(exc);
        worker.once("error", onError);
        worker.once("message", (results: ScoredCandidate[]) => {
          worker.removeListener("error", onError);
          resolve(results);
        });
        worker.postMessage(task);
      });
    });
    const results = (await Promise.all(slices)).flat();
    return results.sort((a, b) => a.id - b.id);
  }

  async close(): Promise<void> {
    await Promise.all(this.workers.map((w) => w.terminate()));
  }
}

export async function buildLibrary(options: BuildOptions): Promise<MoleculeLibrary> {
  const {
    count,
    seed,
    fpLenBits,
    minHeavyAtoms = 8,
    maxHeavyAtoms = 30,  // the logP implementation degrades past 30 heavy atoms
    workers = Math.min(8, os.availableParallelism()),
    onProgress,
  } = options;
  if (count < 1) {
    throw new Error(`count must be >= 1, got ${count}`);
  }
  const rng = mulberry32(seed);
  const pool = new WorkerPool(Math.max(1, workers), {
    fpLenBits,
    minHeavyAtoms,
    maxHeavyAtoms,
  });
  const seenSmiles = new Set<string>();
  const seenFp = new Set<string>();
  const accepted: AcceptedCandidate[] = [];
  const chunkSize = Math.max(1, workers) * CHUNK_PER_WORKER;
  const maxAttempts = count * 200;
  let attempts = 0;
  try {
    while (accepted.length < count) {
      if (attempts > maxAttempts) {
        throw new Error(
          `generator stalled: ${accepted.length}/${count} molecules after ${attempts} attempts`,
        );
      }
      const ids: number[] = [];
      const smiles: string[] = [];
      for (let i = 0; i < chunkSize; i++) {
        ids.push(attempts++);
        smiles.push(generateSmilesCandidate(rng));
      }
      const scored = await pool.score(ids, smiles);
      for (const result of scored) {
        // generation order: acceptance is independent of worker scheduling
        if (accepted.length >= count || !result.ok) {
          continue;
        }
        if (seenSmiles.has(result.canonical!) || seenFp.has(result.fpHex!)) {
          continue;
        }
        seenSmiles.add(result.canonical!);
        seenFp.add(result.fpHex!);
        accepted.push({
          smiles: result.canonical!,
          fpHex: result.fpHex!,
          qed: result.qed!,
          logp: result.logp!,
          complexity: result.complexity!,
        });
        if (onProgress && accepted.length % 1000 === 0) {
          onProgress(accepted.length);
        }
      }
    }
  } finally {
    await pool.close();
  }

  const fps = accepted.map((a) => packedFromHex(a.fpHex, fpLenBits));
  const df = bitDocumentFrequency(fps, fpLenBits);
  const entries: LibraryEntry[] = accepted.map((a, i) => ({
    smiles: a.smiles,
    fp: a.fpHex,
    qed: a.qed,
    sa: nativeSaFromRaw(fragmentCommonness(fps[i]!, df, accepted.length) - a.complexity),
    logp: a.logp,
  }));
  const header: LibraryHeader = {
    format: "chem-oracle-library",
    version: 1,
    fp_len: fpLenBits,
    size: entries.length,
    seed,
  };
  return new MoleculeLibrary(header, entries);
}
