/**
 * Thin wrapper around the openchem toolkit: parsing, canonical SMILES, and
 * Morgan fingerprints in this package's canonical packed form.
 */

import {
  computeMorganFingerprint,
  generateSMILES,
  parseSMILES,
} from "openchem";
import type { Molecule } from "openchem";

export const MORGAN_RADIUS = 2;

export function parseMolecule(smiles: string): Molecule | null {
  const result = parseSMILES(smiles);
  if (result.errors.length > 0 || result.molecules.length !== 1) {
    return null;
  }
  return result.molecules[0]!;
}

export function canonicalSmiles(mol: Molecule): string {
  return generateSMILES(mol);
}

/** Packed Morgan fingerprint (radius 2) of fpLenBits bits. */
export function moleculeFingerprint(mol: Molecule, fpLenBits: number): Uint8Array {
  if (fpLenBits <= 0 || fpLenBits % 8 !== 0) {
    throw new Error(`fingerprint length must be a positive multiple of 8, got ${fpLenBits}`);
  }
  return Uint8Array.from(computeMorganFingerprint(mol, MORGAN_RADIUS, fpLenBits));
}
