/**
 * Seeded generator of drug-like SMILES from a small fragment grammar.
 *
 * Ring cores carry substitution slots (`*`); slots are filled with terminal
 * groups or linkers to nested cores. Ring-closure digits are reallocated
 * per nesting level so composed SMILES stay well-formed. Every candidate is
 * still validated by the parser downstream; the grammar only has to be
 * right most of the time.
 */

import { Rng, pick } from "./rng.js";

interface CoreTemplate {
  smiles: string;
  slots: number;
  digits: number;
}

const CORES: readonly CoreTemplate[] = [
  { smiles: "c1ccc(*)cc1", slots: 1, digits: 1 },
  { smiles: "c1ccc(*)c(*)c1", slots: 2, digits: 1 },
  { smiles: "c1cc(*)ccc1*", slots: 2, digits: 1 },
  { smiles: "c1cc(*)ccn1", slots: 1, digits: 1 },
  { smiles: "c1cc(*)cnc1", slots: 1, digits: 1 },
  { smiles: "c1cc(*)co1", slots: 1, digits: 1 },
  { smiles: "c1cc(*)cs1", slots: 1, digits: 1 },
  { smiles: "c1cc(*)c[nH]1", slots: 1, digits: 1 },
  { smiles: "c1nc(*)cs1", slots: 1, digits: 1 },
  { smiles: "c1cnc(*)nc1", slots: 1, digits: 1 },
  { smiles: "C1CCC(*)CC1", slots: 1, digits: 1 },
  { smiles: "C1CCN(*)CC1", slots: 1, digits: 1 },
  { smiles: "C1CCC(*)OC1", slots: 1, digits: 1 },
  { smiles: "C1CN(*)CCN1*", slots: 2, digits: 1 },
  { smiles: "c1ccc2cc(*)ccc2c1", slots: 1, digits: 2 },
  { smiles: "c1ccc2[nH]c(*)cc2c1", slots: 1, digits: 2 },
  { smiles: "c1ccc2oc(*)cc2c1", slots: 1, digits: 2 },
];

const TERMINALS: readonly string[] = [
  "F", "Cl", "Br", "C", "CC", "C(C)C", "C(C)(C)C",
  "O", "OC", "OCC", "N", "NC", "N(C)C",
  "C#N", "C(F)(F)F", "C=O", "C(=O)C", "C(=O)O", "C(=O)OC",
  "C(=O)N", "C(=O)NC", "NC(=O)C", "NC(C)=O",
  "S(=O)(=O)N", "S(=O)(=O)C", "SC", "OC(F)F", "CO", "CN", "CCO",
];

// Each linker ends where the nested core attaches.
const LINKERS: readonly string[] = [
  "", "C", "CC", "O", "OC", "N", "NC",
  "C(=O)", "C(=O)N", "NC(=O)", "S(=O)(=O)", "C=C", "OCC", "CNC(=O)",
];

const MAX_DEPTH = 2;

function renumberRings(smiles: string, digitBase: number): string {
  // single pass: templates only use ring-closure digits 1 and 2, and a
  // sequential replace would merge them (1->2 followed by 2->3)
  let out = "";
  for (const ch of smiles) {
    if (ch === "1") {
      out += String(digitBase + 1);
    } else if (ch === "2") {
      out += String(digitBase + 2);
    } else {
      out += ch;
    }
  }
  return out;
}

function generateCore(rng: Rng, depth: number, digitBase: number): string {
  const core = pick(rng, CORES);
  let smiles = renumberRings(core.smiles, digitBase);
  for (let slot = 0; slot < core.slots; slot++) {
    smiles = smiles.replace("*", generateBranch(rng, depth, digitBase + core.digits));
  }
  return smiles;
}

function generateBranch(rng: Rng, depth: number, digitBase: number): string {
  const roll = rng();
  if (roll < 0.3 && depth < MAX_DEPTH && digitBase <= 6) {
    return pick(rng, LINKERS) + generateCore(rng, depth + 1, digitBase);
  }
  return pick(rng, TERMINALS);
}

/** One raw SMILES candidate; validity is the caller's problem. */
export function generateSmilesCandidate(rng: Rng): string {
  return generateCore(rng, 0, 0);
}
