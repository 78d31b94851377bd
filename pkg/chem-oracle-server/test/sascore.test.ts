import { describe, expect, it } from "vitest";

import { parseMolecule } from "../src/chem.js";
import { packedFromHex } from "../src/fingerprint.js";
import {
  SA_NATIVE_MAX,
  SA_NATIVE_MIN,
  bitDocumentFrequency,
  complexityPenalty,
  fragmentCommonness,
  nativeSaFromRaw,
  saFromWire,
  saToWire,
  syntheticAccessibility,
} from "../src/sascore.js";
import { TEST_FP_LEN, testLibrary } from "./helpers.js";

describe("wire mapping", () => {
  it("maps the native range onto [0, 1] and back", () => {
    expect(saToWire(SA_NATIVE_MIN)).toBe(0);
    expect(saToWire(SA_NATIVE_MAX)).toBe(1);
    expect(saFromWire(0.5)).toBeCloseTo(5.5, 12);
    for (const native of [1, 2.851, 7.3, 10]) {
      expect(saFromWire(saToWire(native))).toBeCloseTo(native, 12);
    }
  });
});

describe("complexity penalty", () => {
  it("grows with spiro centers and macrocycles", () => {
    const plain = complexityPenalty(parseMolecule("C1CCCCC1")!);
    const spiro = complexityPenalty(parseMolecule("C1CC2(CC1)CCC1(CCCCC1)CC2")!);
    const macro = complexityPenalty(parseMolecule("C1CCCCCCCCCCC1")!);
    expect(spiro).toBeGreaterThan(plain);
    expect(macro).toBeGreaterThan(plain);
  });

  it("grows with stereo centers", () => {
    const flat = complexityPenalty(parseMolecule("CC(N)C(=O)O")!);
    const chiral = complexityPenalty(parseMolecule("C[C@H](N)C(=O)O")!);
    expect(chiral).toBeGreaterThan(flat);
  });
});

describe("raw-score mapping", () => {
  it("clamps to the native range", () => {
    expect(nativeSaFromRaw(1e9)).toBe(SA_NATIVE_MIN);
    expect(nativeSaFromRaw(-1e9)).toBe(SA_NATIVE_MAX);
  });

  it("is monotone: harder raw scores give higher sa", () => {
    expect(nativeSaFromRaw(-3)).toBeGreaterThan(nativeSaFromRaw(0));
  });
});

describe("library synthetic accessibility", () => {
  it("every cached value sits inside the native range", async () => {
    const library = await testLibrary();
    for (const entry of library.entries) {
      expect(entry.sa).toBeGreaterThanOrEqual(SA_NATIVE_MIN);
      expect(entry.sa).toBeLessThanOrEqual(SA_NATIVE_MAX);
    }
  });

  it("is recomputable from the shipped fingerprints alone", async () => {
    const library = await testLibrary();
    const fps = library.entries.map((e) => packedFromHex(e.fp, TEST_FP_LEN));
    const df = bitDocumentFrequency(fps, TEST_FP_LEN);
    library.entries.forEach((entry, i) => {
      const mol = parseMolecule(entry.smiles)!;
      const recomputed = syntheticAccessibility(mol, fps[i]!, df, library.size);
      expect(recomputed).toBe(entry.sa);
    });
  });

  it("commonness rewards frequent substructures", async () => {
    const library = await testLibrary();
    const fps = library.entries.map((e) => packedFromHex(e.fp, TEST_FP_LEN));
    const df = bitDocumentFrequency(fps, TEST_FP_LEN);
    // a fingerprint made of the most common bits beats one of the rarest
    const order = Array.from(df.keys()).sort((a, b) => df[b]! - df[a]!);
    const common = new Uint8Array(TEST_FP_LEN / 8);
    const rare = new Uint8Array(TEST_FP_LEN / 8);
    for (const i of order.slice(0, 16)) common[i >> 3] |= 1 << (7 - (i & 7));
    for (const i of order.slice(-16)) rare[i >> 3] |= 1 << (7 - (i & 7));
    expect(fragmentCommonness(common, df, library.size)).toBeGreaterThan(
      fragmentCommonness(rare, df, library.size),
    );
  });
});
