/**
 * Drug-likeness score in [0, 1] from eight physicochemical descriptors.
 *
 * Each descriptor is mapped through an asymmetric double sigmoid
 * ("desirability" curve) with published coefficients, normalized by the
 * curve's maximum, and the score is the weighted geometric mean of the
 * desirabilities. Structural-alert counting uses the SMARTS subset below
 * (patterns the bundled matcher supports), so absolute values are this
 * server's own scale rather than a reference implementation's.
 */

import { Descriptors, matchSMARTS, parseSMARTS } from "openchem";
import type { Molecule } from "openchem";

interface AdsCoefficients {
  a: number;
  b: number;
  c: number;
  d: number;
  e: number;
  f: number;
  dmax: number;
}

// Desirability-curve coefficients per descriptor.
const ADS: Record<string, AdsCoefficients> = {
  MW: { a: 2.817065973, b: 392.5754953, c: 290.7489764, d: 2.419764353, e: 49.22325677, f: 65.37051707, dmax: 104.9805561 },
  ALOGP: { a: 3.172690585, b: 137.8624751, c: 2.534937431, d: 4.581497897, e: 0.822739154, f: 0.576295591, dmax: 131.3186604 },
  HBA: { a: 2.948620388, b: 160.4605972, c: 3.615294657, d: 4.435986202, e: 0.290141953, f: 1.300669958, dmax: 148.7763046 },
  HBD: { a: 1.618662227, b: 1010.051101, c: 0.985094388, d: 0.000000001, e: 0.713820843, f: 0.920922555, dmax: 258.1632616 },
  PSA: { a: 1.876861559, b: 125.2232657, c: 62.90773554, d: 87.83366614, e: 12.01999824, f: 28.51324732, dmax: 104.5686167 },
  ROTB: { a: 0.01, b: 272.4121427, c: 2.55837997, d: 1.565547684, e: 1.271567166, f: 2.758063707, dmax: 105.4420403 },
  AROM: { a: 3.21778897, b: 957.7374108, c: 2.274627939, d: 0.000000001, e: 1.317690384, f: 0.375760881, dmax: 312.337261 },
  ALERTS: { a: 0.01, b: 1199.094025, c: -0.09002883, d: 0.000000001, e: 0.185904477, f: 0.875193782, dmax: 417.725314 },
};

const WEIGHTS: Record<string, number> = {
  MW: 0.66,
  ALOGP: 0.46,
  HBA: 0.05,
  HBD: 0.61,
  PSA: 0.06,
  ROTB: 0.65,
  AROM: 0.48,
  ALERTS: 0.95,
};

// Structural alerts (undesirable reactive / promiscuous substructures).
const ALERT_SMARTS = [
  "[S,C](=[O,S])[F,Br,Cl,I]",
  "C(=O)N(C(=O))OC(=O)",
  "[N!R]=[N!R]",
  "N=[N+]=[N-]",
  "C=[N+]=[N-]",
  "N#N",
  "OOC",
  "[C;!R]=[C;!R][C;!R]=[C;!R]",
  "N[CH2]C#N",
  "C(=O)C(=O)",
  "S(=O)(=O)[F,Cl,Br]",
  "[SH]",
  "[CX4][Cl,Br,I]",
  "C=C=C",
  "[N+](=O)[O-]",
  "C(=O)Cl",
  "[C,c]S(=O)(=O)O[C,c]",
  "N=C=O",
  "N=C=S",
  "[NX3][NX3]",
  "C#C",
  "C1CCCCCCC1",
  "OO",
  "C=C=O",
  "[Si]",
];

const COMPILED_ALERTS = ALERT_SMARTS.flatMap((smarts) => {
  const parsed = parseSMARTS(smarts);
  return parsed.errors.length === 0 && parsed.pattern ? [parsed.pattern] : [];
});

export interface QedProperties {
  MW: number;
  ALOGP: number;
  HBA: number;
  HBD: number;
  PSA: number;
  ROTB: number;
  AROM: number;
  ALERTS: number;
}

export function alertCount(mol: Molecule): number {
  let count = 0;
  for (const pattern of COMPILED_ALERTS) {
    const result = matchSMARTS(pattern, mol);
    if (result.success && result.matches.length > 0) {
      count += 1;
    }
  }
  return count;
}

export function qedProperties(mol: Molecule): QedProperties {
  return {
    MW: Descriptors.mass(mol),
    ALOGP: Descriptors.logP(mol),
    HBA: Descriptors.hbondAcceptors(mol),
    HBD: Descriptors.hbondDonors(mol),
    PSA: Descriptors.tpsa(mol),
    ROTB: Descriptors.rotatableBonds(mol),
    AROM: Descriptors.aromaticRings(mol),
    ALERTS: alertCount(mol),
  };
}

function desirability(x: number, c: AdsCoefficients): number {
  const raw =
    c.a +
    c.b /
      ((1 + Math.exp(-(x - c.c + c.d / 2) / c.e)) *
        (1 + Math.exp((x - c.c - c.d / 2) / c.f)));
  return Math.max(raw / c.dmax, 1e-9);
}

/** Weighted-geometric-mean drug-likeness in [0, 1]. */
export function qed(mol: Molecule): number {
  const props = qedProperties(mol);
  let logSum = 0;
  let weightSum = 0;
  for (const key of Object.keys(ADS)) {
    const d = desirability(props[key as keyof QedProperties], ADS[key]!);
    const w = WEIGHTS[key]!;
    logSum += w * Math.log(Math.min(d, 1.0));
    weightSum += w;
  }
  return Math.exp(logSum / weightSum);
}
