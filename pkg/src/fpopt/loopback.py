"""Reference oracle server for the JSON-lines protocol.

Scores are a deterministic hash of the fingerprint hex, so any client can
recompute the expected value locally. Useful for protocol conformance
checks, `fpopt oracle-check`, and as a minimal template for real servers.

Run over stdio:    python -m fpopt.loopback --fp-len 256 --aux sa
Run over a socket: python -m fpopt.loopback --fp-len 256 --socket /tmp/o.sock
"""

from __future__ import annotations

import argparse
import hashlib
import json
import socket
import sys
from typing import BinaryIO

PROTOCOL_VERSION = 1


def loopback_score(fp_hex: str, scorer: str = "main") -> float:
    """Deterministic score in [0, 1): first 8 bytes of sha256 over 2^64."""
    digest = hashlib.sha256(f"{scorer}:{fp_hex}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


class LoopbackServer:
    def __init__(self, fp_len: int, name: str = "loopback", aux: tuple[str, ...] = ()):
        if fp_len <= 0 or fp_len % 4 != 0:
            raise ValueError("fp-len must be a positive multiple of 4")
        self.fp_len = fp_len
        self.name = name
        self.aux = tuple(aux)

    def _error(self, message: str) -> dict:
        return {"type": "error", "message": message}

    def handle(self, message: dict) -> dict | None:
        """Reply for one request; None means shut down."""
        kind = message.get("type")
        if kind == "hello":
            if message.get("version") != PROTOCOL_VERSION:
                return self._error(f"unsupported protocol version {message.get('version')!r}")
            return {
                "type": "hello_ack",
                "oracle": self.name,
                "fp_len": self.fp_len,
                "aux": list(self.aux),
            }
        if kind == "eval":
            fps = message.get("fps")
            scorer = message.get("scorer", "main")
            if scorer != "main" and scorer not in self.aux:
                return self._error(f"unknown scorer {scorer!r}")
            if not isinstance(fps, list):
                return self._error("eval.fps must be a list")
            expected_digits = self.fp_len // 4
            for fp_hex in fps:
                if not isinstance(fp_hex, str) or len(fp_hex) != expected_digits:
                    return self._error(
                        f"fingerprint must be {expected_digits} hex digits, got {fp_hex!r}"
                    )
            return {
                "type": "result",
                "id": message.get("id"),
                "scores": [loopback_score(fp_hex, scorer) for fp_hex in fps],
            }
        if kind == "shutdown":
            return None
        return self._error(f"unknown message type {kind!r}")

    def serve_streams(self, reader: BinaryIO, writer: BinaryIO) -> None:
        for raw in reader:
            line = raw.strip()
            if not line:
                continue
            try:
                message = json.loads(line)
                if not isinstance(message, dict):
                    raise ValueError("not an object")
            except (ValueError, json.JSONDecodeError):
                reply: dict | None = self._error(f"malformed request {line[:200]!r}")
            else:
                reply = self.handle(message)
            if reply is None:
                return
            writer.write(json.dumps(reply, separators=(",", ":")).encode() + b"\n")
            writer.flush()

    def serve_socket(self, path: str) -> None:
        server = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        server.bind(path)
        server.listen(1)
        try:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("rb")
                writer = conn.makefile("wb")
                self.serve_streams(reader, writer)
        finally:
            server.close()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fp-len", type=int, required=True)
    parser.add_argument("--name", default="loopback")
    parser.add_argument("--aux", action="append", default=[], help="advertise an aux scorer")
    parser.add_argument("--socket", default=None, help="serve on a unix socket instead of stdio")
    args = parser.parse_args(argv)
    server = LoopbackServer(args.fp_len, name=args.name, aux=tuple(args.aux))
    if args.socket:
        server.serve_socket(args.socket)
    else:
        server.serve_streams(sys.stdin.buffer, sys.stdout.buffer)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
