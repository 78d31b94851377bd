"""Deliberately misbehaving oracle server for client fuzz tests.

Each mode violates the wire protocol in one way; the client must fail with a
clean protocol error, never a crash.
"""

from __future__ import annotations

import argparse
import json
import sys


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", required=True)
    parser.add_argument("--fp-len", type=int, default=16)
    args = parser.parse_args()
    mode = args.mode

    out = sys.stdout
    if mode == "silent":
        for _ in sys.stdin:
            pass  # never answer anything
        return 0

    def reply(obj_or_text) -> None:
        if isinstance(obj_or_text, str):
            out.write(obj_or_text + "\n")
        else:
            out.write(json.dumps(obj_or_text) + "\n")
        out.flush()

    for line in sys.stdin:
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            message = {}
        kind = message.get("type")
        if kind == "hello":
            if mode == "garbage-hello":
                reply("this is not json {{{")
            elif mode == "wrong-type":
                reply({"type": "howdy"})
            elif mode == "bad-fp-len":
                reply({"type": "hello_ack", "oracle": "bad", "fp_len": -3, "aux": []})
            elif mode == "version-mismatch":
                reply({
                    "type": "hello_ack", "oracle": "bad", "fp_len": args.fp_len,
                    "aux": [], "version": 99,
                })
            elif mode == "close-early":
                return 0
            else:
                reply({
                    "type": "hello_ack", "oracle": "bad", "fp_len": args.fp_len, "aux": [],
                })
        elif kind == "eval":
            n = len(message.get("fps", []))
            if mode == "wrong-id":
                reply({"type": "result", "id": -1, "scores": [0.5] * n})
            elif mode == "wrong-arity":
                reply({"type": "result", "id": message.get("id"), "scores": [0.5] * (n + 1)})
            elif mode == "out-of-range":
                reply({"type": "result", "id": message.get("id"), "scores": [1.2] * n})
            elif mode == "score-type":
                reply({"type": "result", "id": message.get("id"), "scores": ["high"] * n})
            elif mode == "garbage-eval":
                reply("%%% not json %%%")
            elif mode == "error-reply":
                reply({"type": "error", "message": "synthetic failure"})
            elif mode == "close-mid-eval":
                return 0
            else:
                reply({"type": "result", "id": message.get("id"), "scores": [0.5] * n})
        elif kind == "shutdown":
            return 0
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
