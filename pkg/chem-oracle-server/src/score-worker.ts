/**
 * Worker-thread scorer for library builds: validates one SMILES candidate
 * and computes the expensive per-molecule quantities (canonical form,
 * fingerprint, drug-likeness, logP, complexity penalty).
 */

import { parentPort, workerData } from "node:worker_threads";

import { Descriptors } from "openchem";

import { canonicalSmiles, moleculeFingerprint, parseMolecule } from "./chem.js";
import { hexFromPacked, popcount } from "./fingerprint.js";
import { qed } from "./qed.js";
import { complexityPenalty } from "./sascore.js";

export interface ScoreTask {
  ids: number[];
  smiles: string[];
}

export interface ScoredCandidate {
  id: number;
  ok: boolean;
  canonical?: string;
  fpHex?: string;
  qed?: number;
  logp?: number;
  complexity?: number;
}

interface WorkerConfig {
  fpLenBits: number;
  minHeavyAtoms: number;
  maxHeavyAtoms: number;
}

export function scoreCandidate(raw: string, config: WorkerConfig): Omit<ScoredCandidate, "id"> {
  const parsed = parseMolecule(raw);
  if (
    parsed === null ||
    parsed.atoms.length < config.minHeavyAtoms ||
    parsed.atoms.length > config.maxHeavyAtoms
  ) {
    return { ok: false };
  }
  // Everything shipped is computed on the reparsed canonical form, and the
  // canonical form must be a fixed point of parse + write: that makes every
  // cached score recomputable from the library file alone. Candidates whose
  // canonical SMILES is unstable under reparsing are rejected.
  const canonical = canonicalSmiles(parsed);
  const mol = parseMolecule(canonical);
  if (mol === null || canonicalSmiles(mol) !== canonical) {
    return { ok: false };
  }
  const fp = moleculeFingerprint(mol, config.fpLenBits);
  if (popcount(fp) === 0) {
    return { ok: false };
  }
  return {
    ok: true,
    canonical,
    fpHex: hexFromPacked(fp),
    qed: qed(mol),
    logp: Descriptors.logP(mol),
    complexity: complexityPenalty(mol),
  };
}

if (parentPort) {
  const config = workerData as WorkerConfig;
  parentPort.on("message", (task: ScoreTask) => {
    const results: ScoredCandidate[] = task.ids.map((id, i) => ({
      id,
      ...scoreCandidate(task.smiles[i]!, config),
    }));
    parentPort!.postMessage(results);
  });
}
