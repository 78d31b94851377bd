/**
 * Synthetic-accessibility heuristic on the native 1 (easy) .. 10 (hard) scale.
 *
 * The score combines a fragment-commonness term, measured as the mean log
 * document frequency of the molecule's fingerprint bits across the served
 * library, with structural complexity penalties (size, stereo centers,
 * spiro atoms, bridgeheads, macrocycles). It is a self-contained stand-in
 * for fragment-database scorers: deterministic given the library, and
 * recomputable from the shipped fingerprints alone.
 */

import {
  getNumAtomStereoCenters,
  getNumBridgeheadAtoms,
  getNumSpiroAtoms,
  getRingInfo,
} from "openchem";
import type { Molecule } from "openchem";

import { getBit } from "./fingerprint.js";

export const SA_NATIVE_MIN = 1;
export const SA_NATIVE_MAX = 10;

// Raw-score anchors for the linear map onto the native scale; fixed so that
// scores are comparable across libraries of similar size.
const RAW_EASY = 3.0;
const RAW_HARD = -7.0;

/** Per-bit document frequency over a fingerprint collection. */
export function bitDocumentFrequency(fps: Uint8Array[], fpLenBits: number): Int32Array {
  const df = new Int32Array(fpLenBits);
  for (const fp of fps) {
    for (let i = 0; i < fpLenBits; i++) {
      if (getBit(fp, i)) {
        df[i] = df[i]! + 1;
      }
    }
  }
  return df;
}

export function fragmentCommonness(fp: Uint8Array, df: Int32Array, librarySize: number): number {
  let logSum = 0;
  let bits = 0;
  for (let i = 0; i < df.length; i++) {
    if (getBit(fp, i)) {
      logSum += Math.log10((df[i]! + 1) / (librarySize + 1));
      bits += 1;
    }
  }
  if (bits === 0) {
    return -4; // empty fingerprint: treat as maximally uncommon
  }
  // mean log10 relative frequency is ~-0.5 for ubiquitous bits, ~-4 for
  // singletons; shift so common chemistry lands near +3
  return logSum / bits + 3.5;
}

export function complexityPenalty(mol: Molecule): number {
  const heavyAtoms = mol.atoms.length;
  const sizePenalty = Math.pow(heavyAtoms, 1.005) - heavyAtoms;
  const stereoPenalty = Math.log10(getNumAtomStereoCenters(mol) + 1);
  const spiroPenalty = Math.log10(getNumSpiroAtoms(mol) + 1);
  const bridgePenalty = Math.log10(getNumBridgeheadAtoms(mol) + 1);
  const rings: number[][] = getRingInfo(mol).sssr ?? [];
  const macroPenalty = rings.some((ring) => ring.length > 8) ? Math.log10(2) : 0;
  return sizePenalty + stereoPenalty + spiroPenalty + bridgePenalty + macroPenalty;
}

/** Map a raw (commonness minus complexity) score onto the native scale. */
export function nativeSaFromRaw(raw: number): number {
  const unit = (RAW_EASY - raw) / (RAW_EASY - RAW_HARD); // 0 easy .. 1 hard
  const native = SA_NATIVE_MIN + unit * (SA_NATIVE_MAX - SA_NATIVE_MIN);
  return Math.min(SA_NATIVE_MAX, Math.max(SA_NATIVE_MIN, native));
}

/** Native-scale synthetic accessibility: 1 = easy, 10 = hard. */
export function syntheticAccessibility(
  mol: Molecule,
  fp: Uint8Array,
  df: Int32Array,
  librarySize: number,
): number {
  return nativeSaFromRaw(
    fragmentCommonness(fp, df, librarySize) - complexityPenalty(mol),
  );
}

/** Native 1..10 -> wire [0, 1]. */
export function saToWire(native: number): number {
  return (native - SA_NATIVE_MIN) / (SA_NATIVE_MAX - SA_NATIVE_MIN);
}

/** Wire [0, 1] -> native 1..10. */
export function saFromWire(wire: number): number {
  return SA_NATIVE_MIN + wire * (SA_NATIVE_MAX - SA_NATIVE_MIN);
}
