import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { gzipSync } from "node:zlib";

import { describe, expect, it } from "vitest";

import { packedFromHex } from "../src/fingerprint.js";
import { MoleculeLibrary, serializeLibrary } from "../src/library.js";
import { TEST_FP_LEN, TEST_LIB_SIZE, testLibrary } from "./helpers.js";

describe("library build", () => {
  it("reaches the requested size with unique molecules", async () => {
    const library = await testLibrary();
    expect(library.size).toBe(TEST_LIB_SIZE);
    expect(new Set(library.entries.map((e) => e.smiles)).size).toBe(TEST_LIB_SIZE);
    expect(new Set(library.entries.map((e) => e.fp)).size).toBe(TEST_LIB_SIZE);
  });

  it("scores live in their documented ranges", async () => {
    const library = await testLibrary();
    for (const entry of library.entries) {
      expect(entry.qed).toBeGreaterThan(0);
      expect(entry.qed).toBeLessThanOrEqual(1);
      expect(entry.sa).toBeGreaterThanOrEqual(1);
      expect(entry.sa).toBeLessThanOrEqual(10);
    }
  });
});

describe("decode", () => {
  it("every library fingerprint is its own nearest neighbor", async () => {
    const library = await testLibrary();
    library.fingerprints.forEach((fp, i) => {
      expect(library.decode(fp)).toBe(i);
    });
  });

  it("is deterministic across a save/load cycle", async () => {
    const library = await testLibrary();
    const dir = mkdtempSync(join(tmpdir(), "chemlib-"));
    const path = join(dir, "lib.jsonl");
    writeFileSync(path, serializeLibrary(library.header, library.entries));
    const reloaded = MoleculeLibrary.load(path);
    const query = packedFromHex(library.entries[3]!.fp, TEST_FP_LEN);
    expect(reloaded.decode(query)).toBe(library.decode(query));
    expect(reloaded.entries).toEqual(library.entries);
  });

  it("round-trips through gzip", async () => {
    const library = await testLibrary();
    const dir = mkdtempSync(join(tmpdir(), "chemlib-"));
    const path = join(dir, "lib.jsonl.gz");
    writeFileSync(path, gzipSync(serializeLibrary(library.header, library.entries)));
    const reloaded = MoleculeLibrary.load(path);
    expect(reloaded.size).toBe(library.size);
    expect(reloaded.entries[0]).toEqual(library.entries[0]);
  });
});

describe("format validation", () => {
  it("rejects files without the library header", () => {
    const dir = mkdtempSync(join(tmpdir(), "chemlib-"));
    const path = join(dir, "bad.jsonl");
    writeFileSync(path, JSON.stringify({ hello: 1 }) + "\n");
    expect(() => MoleculeLibrary.load(path)).toThrow(/chem-oracle-library/);
  });

  it("rejects malformed entries", () => {
    const dir = mkdtempSync(join(tmpdir(), "chemlib-"));
    const path = join(dir, "bad2.jsonl");
    const header = {
      format: "chem-oracle-library",
      version: 1,
      fp_len: 64,
      size: 1,
    };
    writeFileSync(path, JSON.stringify(header) + "\n" + JSON.stringify({ smiles: "C" }) + "\n");
    expect(() => MoleculeLibrary.load(path)).toThrow(/malformed/);
  });

  it("rejects header/entry count mismatches", () => {
    const dir = mkdtempSync(join(tmpdir(), "chemlib-"));
    const path = join(dir, "bad3.jsonl");
    const header = {
      format: "chem-oracle-library",
      version: 1,
      fp_len: 64,
      size: 2,
    };
    const entry = { smiles: "CCO", fp: "0".repeat(16), qed: 0.5, sa: 2, logp: 0 };
    writeFileSync(path, JSON.stringify(header) + "\n" + JSON.stringify(entry) + "\n");
    expect(() => MoleculeLibrary.load(path)).toThrow(/size/);
  });
});
