/**
 * Wire protocol types and line framing (see ../PROTOCOL.md in the repo
 * root for the normative description). Messages are single JSON objects,
 * UTF-8, newline-terminated; requests and responses strictly alternate.
 */

export const PROTOCOL_VERSION = 1;
export const MAX_LINE_BYTES = 16 * 1024 * 1024;

export interface HelloRequest {
  type: "hello";
  version: number;
}

export interface EvalRequest {
  type: "eval";
  id: number;
  fps: string[];
  scorer?: string;
}

export interface ShutdownRequest {
  type: "shutdown";
}

export type Request = HelloRequest | EvalRequest | ShutdownRequest;

export interface HelloAck {
  type: "hello_ack";
  oracle: string;
  fp_len: number;
  aux: string[];
}

export interface EvalResult {
  type: "result";
  id: number;
  scores: number[];
}

export interface ErrorReply {
  type: "error";
  message: string;
}

export type Reply = HelloAck | EvalResult | ErrorReply;

export function errorReply(message: string): ErrorReply {
  return { type: "error", message };
}

export function encodeReply(reply: Reply): string {
  return JSON.stringify(reply) + "\n";
}

export function parseRequest(line: string): Request | ErrorReply {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    return errorReply(`malformed request ${line.slice(0, 200)}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    return errorReply("request is not a JSON object");
  }
  const type = (parsed as { type?: unknown }).type;
  if (type !== "hello" && type !== "eval" && type !== "shutdown") {
    return errorReply(`unknown message type ${JSON.stringify(type)}`);
  }
  return parsed as Request;
}

/**
 * Incremental newline splitter with a line-length cap. Feed raw chunks;
 * complete lines are passed to the callback without their terminator.
 */
export function createLineSplitter(
  onLine: (line: string) => void,
  maxBytes: number = MAX_LINE_BYTES,
): (chunk: Buffer) => void {
  let pending: Buffer<ArrayBufferLike> = Buffer.alloc(0);
  return (chunk: Buffer) => {
    pending = pending.length === 0 ? chunk : Buffer.concat([pending, chunk]);
    let newline;
    while ((newline = pending.indexOf(0x0a)) >= 0) {
      const line = pending.subarray(0, newline).toString("utf-8");
      pending = pending.subarray(newline + 1);
      onLine(line);
    }
    if (pending.length > maxBytes) {
      throw new Error(`request line exceeds ${maxBytes} bytes`);
    }
  };
}
