/**
 * Packed binary fingerprints and their canonical hex wire form.
 *
 * Bit i of a fingerprint is bit (7 - i % 8) of byte floor(i / 8), i.e.
 * big-endian within each byte, bytes in position order. That makes the
 * canonical hex serialization (bit i = bit (3 - i % 4) of hex digit
 * floor(i / 4)) a plain hex dump of the packed bytes.
 */

const POPCOUNT_TABLE = new Uint8Array(256);
for (let i = 0; i < 256; i++) {
  POPCOUNT_TABLE[i] = (i & 1) + POPCOUNT_TABLE[i >> 1];
}

export function fpLengthBits(fp: Uint8Array): number {
  return fp.length * 8;
}

export function hexFromPacked(fp: Uint8Array): string {
  return Buffer.from(fp).toString("hex");
}

export function packedFromHex(hex: string, fpLenBits: number): Uint8Array {
  const expectedDigits = fpLenBits / 4;
  if (hex.length !== expectedDigits) {
    throw new Error(
      `fingerprint must be ${expectedDigits} hex digits, got ${hex.length}`,
    );
  }
  if (!/^[0-9a-fA-F]*$/.test(hex)) {
    throw new Error("fingerprint contains non-hex characters");
  }
  return Uint8Array.from(Buffer.from(hex, "hex"));
}

export function popcount(fp: Uint8Array): number {
  let total = 0;
  for (let i = 0; i < fp.length; i++) {
    total += POPCOUNT_TABLE[fp[i]!]!;
  }
  return total;
}

export function getBit(fp: Uint8Array, i: number): number {
  return (fp[i >> 3]! >> (7 - (i & 7))) & 1;
}

/** Tanimoto (Jaccard) similarity of two equal-length packed fingerprints. */
export function tanimotoPacked(a: Uint8Array, b: Uint8Array): number {
  if (a.length !== b.length) {
    throw new Error(`fingerprint byte-length mismatch: ${a.length} != ${b.length}`);
  }
  let inter = 0;
  let union = 0;
  for (let i = 0; i < a.length; i++) {
    inter += POPCOUNT_TABLE[a[i]! & b[i]!]!;
    union += POPCOUNT_TABLE[a[i]! | b[i]!]!;
  }
  return union === 0 ? 0 : inter / union;
}

function popcount32(x: number): number {
  x -= (x >>> 1) & 0x55555555;
  x = (x & 0x33333333) + ((x >>> 2) & 0x33333333);
  x = (x + (x >>> 4)) & 0x0f0f0f0f;
  return (x * 0x01010101) >>> 24;
}

/**
 * Flat word matrix of packed fingerprints for fast nearest-neighbor scans.
 * Similarity ties resolve to the lowest row index, so decoding is
 * deterministic across process restarts. Row byte-length must be a
 * multiple of 4 (true for all lengths the server accepts).
 */
export class PackedMatrix {
  readonly rowBytes: number;
  readonly rows: number;
  private readonly rowWords: number;
  private readonly words: Uint32Array;
  private readonly rowPopcounts: Int32Array;
  private readonly scratch: Uint32Array;

  constructor(fps: Uint8Array[]) {
    if (fps.length === 0) {
      throw new Error("cannot index an empty fingerprint list");
    }
    this.rowBytes = fps[0]!.length;
    if (this.rowBytes % 4 !== 0) {
      throw new Error(`fingerprint byte-length must be a multiple of 4, got ${this.rowBytes}`);
    }
    this.rows = fps.length;
    this.rowWords = this.rowBytes / 4;
    this.words = new Uint32Array(this.rows * this.rowWords);
    this.rowPopcounts = new Int32Array(this.rows);
    this.scratch = new Uint32Array(this.rowWords);
    const bytes = new Uint8Array(this.words.buffer);
    fps.forEach((fp, r) => {
      if (fp.length !== this.rowBytes) {
        throw new Error("all fingerprints must share one length");
      }
      bytes.set(fp, r * this.rowBytes);
      this.rowPopcounts[r] = popcount(fp);
    });
  }

  nearestIndex(query: Uint8Array): number {
    if (query.length !== this.rowBytes) {
      throw new Error(`query byte-length ${query.length} != ${this.rowBytes}`);
    }
    const q = this.scratch;
    new Uint8Array(q.buffer).set(query);
    const qPop = popcount(query);
    const words = this.words;
    const rowWords = this.rowWords;
    let bestIndex = 0;
    let bestSim = -1;
    for (let r = 0; r < this.rows; r++) {
      const offset = r * rowWords;
      let inter = 0;
      for (let w = 0; w < rowWords; w++) {
        inter += popcount32(words[offset + w]! & q[w]!);
      }
      const union = qPop + this.rowPopcounts[r]! - inter;
      const sim = union === 0 ? 0 : inter / union;
      if (sim > bestSim) {
        bestSim = sim;
        bestIndex = r;
      }
    }
    return bestIndex;
  }
}
