/**
 * Reference oracle server: answers the wire protocol from a molecule
 * library with precomputed scores. Every query fingerprint is decoded to
 * its nearest library molecule (tanimoto, ties to the lowest index) and
 * scored from that molecule's cached properties, so any bitstring maps to a
 * real molecule.
 *
 *   node dist/server.js --library data/library-10k.jsonl.gz \
 *       --oracle qed --fp-len 4096 --stdio
 *
 * Oracles: `qed` (drug-likeness of the decoded molecule) and `similarity`
 * (tanimoto similarity of the decoded molecule to a target library
 * molecule, `--target-index N`). The `sa` aux scorer is always advertised;
 * its wire scores are the native 1..10 value rescaled to [0, 1].
 */

import net from "node:net";
import process from "node:process";

import { tanimotoPacked, packedFromHex } from "./fingerprint.js";
import { MoleculeLibrary } from "./library.js";
import {
  PROTOCOL_VERSION,
  Reply,
  Request,
  createLineSplitter,
  encodeReply,
  errorReply,
  parseRequest,
} from "./protocol.js";
import { saToWire } from "./sascore.js";

export type OracleName = "qed" | "similarity";

export interface ServerOptions {
  library: MoleculeLibrary;
  oracle: OracleName;
  fpLenBits: number;
  targetIndex?: number;
}

export class OracleServer {
  private readonly library: MoleculeLibrary;
  private readonly oracle: OracleName;
  private readonly fpLenBits: number;
  private readonly targetIndex: number;
  private helloSeen = false;

  constructor(options: ServerOptions) {
    if (options.fpLenBits !== options.library.fpLenBits) {
      throw new Error(
        `--fp-len ${options.fpLenBits} does not match library fp_len ${options.library.fpLenBits}`,
      );
    }
    this.library = options.library;
    this.oracle = options.oracle;
    this.fpLenBits = options.fpLenBits;
    this.targetIndex = options.targetIndex ?? 0;
    if (this.targetIndex < 0 || this.targetIndex >= this.library.size) {
      throw new Error(`--target-index ${this.targetIndex} outside library`);
    }
  }

  get oracleName(): string {
    return this.oracle === "qed" ? "qed" : `similarity-to-${this.targetIndex}`;
  }

  private mainScore(decoded: number): number {
    if (this.oracle === "qed") {
      return this.library.entries[decoded]!.qed;
    }
    return tanimotoPacked(
      this.library.fingerprints[decoded]!,
      this.library.fingerprints[this.targetIndex]!,
    );
  }

  /** One request in, one reply out; null ends the session. */
  handle(request: Request): Reply | null {
    if (request.type === "hello") {
      if (request.version !== PROTOCOL_VERSION) {
        return errorReply(`unsupported protocol version ${request.version}`);
      }
      this.helloSeen = true;
      return {
        type: "hello_ack",
        oracle: this.oracleName,
        fp_len: this.fpLenBits,
        aux: ["sa"],
      };
    }
    if (request.type === "shutdown") {
      return null;
    }
    if (!this.helloSeen) {
      return errorReply("eval before hello");
    }
    const scorer = request.scorer ?? "main";
    if (scorer !== "main" && scorer !== "sa") {
      return errorReply(`unknown scorer ${JSON.stringify(request.scorer)}`);
    }
    if (!Array.isArray(request.fps)) {
      return errorReply("eval.fps must be a list");
    }
    const scores: number[] = [];
    for (const hex of request.fps) {
      if (typeof hex !== "string") {
        return errorReply("eval.fps entries must be hex strings");
      }
      let packed: Uint8Array;
      try {
        packed = packedFromHex(hex, this.fpLenBits);
      } catch (exc) {
        return errorReply(String(exc instanceof Error ? exc.message : exc));
      }
      const decoded = this.library.decode(packed);
      scores.push(
        scorer === "sa"
          ? saToWire(this.library.entries[decoded]!.sa)
          : this.mainScore(decoded),
      );
    }
    return { type: "result", id: request.id, scores };
  }

  handleLine(line: string): string | null {
    if (line.trim() === "") {
      return "";
    }
    const request = parseRequest(line);
    if ("message" in request && request.type === "error") {
      return encodeReply(request);
    }
    const reply = this.handle(request as Request);
    return reply === null ? null : encodeReply(reply);
  }
}

function serveStdio(server: OracleServer): void {
  const splitter = createLineSplitter((line) => {
    const reply = server.handleLine(line);
    if (reply === null) {
      process.exit(0);
    }
    if (reply !== "") {
      process.stdout.write(reply);
    }
  });
  process.stdin.on("data", splitter);
  process.stdin.on("end", () => process.exit(0));
}

function serveSocket(server: OracleServer, path: string): void {
  const listener = net.createServer((conn) => {
    const splitter = createLineSplitter((line) => {
      const reply = server.handleLine(line);
      if (reply === null) {
        conn.end();
        listener.close();
        return;
      }
      if (reply !== "") {
        conn.write(reply);
      }
    });
    conn.on("data", splitter);
  });
  listener.listen(path);
}

interface CliArgs {
  library: string;
  oracle: OracleName;
  fpLen: number;
  targetIndex: number;
  socket: string | null;
}

function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = {
    library: "",
    oracle: "qed",
    fpLen: 4096,
    targetIndex: 0,
    socket: null,
  };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i]!;
    switch (flag) {
      case "--library":
        args.library = argv[++i] ?? "";
        break;
      case "--oracle": {
        const value = argv[++i];
        if (value !== "qed" && value !== "similarity") {
          throw new Error(`--oracle must be qed or similarity, got ${value}`);
        }
        args.oracle = value;
        break;
      }
      case "--fp-len":
        args.fpLen = Number(argv[++i]);
        break;
      case "--target-index":
        args.targetIndex = Number(argv[++i]);
        break;
      case "--socket":
        args.socket = argv[++i] ?? null;
        break;
      case "--stdio":
        args.socket = null;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.library) {
    throw new Error("--library is required");
  }
  if (!Number.isInteger(args.fpLen) || args.fpLen <= 0 || args.fpLen % 8 !== 0) {
    throw new Error(`--fp-len must be a positive multiple of 8, got ${args.fpLen}`);
  }
  return args;
}

export function main(argv: string[]): void {
  const args = parseArgs(argv);
  // Library loading happens before the first reply, so the client's
  // handshake timeout covers model/data startup.
  const library = MoleculeLibrary.load(args.library);
  const server = new OracleServer({
    library,
    oracle: args.oracle,
    fpLenBits: args.fpLen,
    targetIndex: args.targetIndex,
  });
  if (args.socket) {
    serveSocket(server, args.socket);
  } else {
    serveStdio(server);
  }
}

const isMain = process.argv[1]?.endsWith("server.js") ?? false;
if (isMain) {
  try {
    main(process.argv.slice(2));
  } catch (exc) {
    console.error(`chem-oracle-server: ${exc instanceof Error ? exc.message : exc}`);
    process.exit(1);
  }
}
