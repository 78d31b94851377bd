import { describe, expect, it } from "vitest";

import { parseMolecule } from "../src/chem.js";
import { alertCount, qed, qedProperties } from "../src/qed.js";

const ASPIRIN = "CC(=O)OC1=CC=CC=C1C(=O)O";
const IBUPROFEN = "CC(C)CC1=CC=C(C=C1)C(C)C(=O)O";
const GREASY_CHAIN = "CCCCCCCCCCCCCCCCCCCCCCCCCC";
const NITRO_AZIDE = "O=[N+]([O-])c1ccc(N=[N+]=[N-])cc1";

describe("descriptor extraction", () => {
  it("reproduces frozen aspirin descriptors", () => {
    const props = qedProperties(parseMolecule(ASPIRIN)!);
    // anchors computed once with the bundled toolkit; drift means the
    // dependency changed its chemistry
    expect(props.MW).toBeCloseTo(180.159, 3);
    expect(props.ALOGP).toBeCloseTo(1.3101, 4);
    expect(props.PSA).toBeCloseTo(63.6, 1);
    expect(props.HBD).toBe(1);
    expect(props.HBA).toBe(3);
    expect(props.ROTB).toBe(2);
    expect(props.AROM).toBe(1);
    expect(props.ALERTS).toBe(0);
  });
});

describe("alert counting", () => {
  it("clean drugs carry no alerts", () => {
    expect(alertCount(parseMolecule(ASPIRIN)!)).toBe(0);
    expect(alertCount(parseMolecule(IBUPROFEN)!)).toBe(0);
  });

  it("reactive groups are flagged", () => {
    expect(alertCount(parseMolecule(NITRO_AZIDE)!)).toBeGreaterThanOrEqual(2);
    expect(alertCount(parseMolecule("CCOO")!)).toBeGreaterThanOrEqual(1); // peroxide
  });
});

describe("qed score", () => {
  it("stays inside [0, 1]", () => {
    for (const smiles of [ASPIRIN, IBUPROFEN, GREASY_CHAIN, NITRO_AZIDE, "C1CCCCC1"]) {
      const value = qed(parseMolecule(smiles)!);
      expect(value).toBeGreaterThan(0);
      expect(value).toBeLessThanOrEqual(1);
    }
  });

  it("ranks drug-like molecules above a greasy chain", () => {
    const drug = qed(parseMolecule(IBUPROFEN)!);
    const grease = qed(parseMolecule(GREASY_CHAIN)!);
    expect(drug).toBeGreaterThan(0.6);
    expect(grease).toBeLessThan(0.3);
  });

  it("is deterministic", () => {
    const a = qed(parseMolecule(ASPIRIN)!);
    const b = qed(parseMolecule(ASPIRIN)!);
    expect(a).toBe(b);
  });
});
