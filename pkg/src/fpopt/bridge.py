"""Client for external oracle processes speaking the JSON-lines protocol.

An endpoint either spawns a subprocess and talks over its stdio or connects
to a local (unix-domain) socket. Messages are single UTF-8 lines:

    -> {"type": "hello", "version": 1}
    <- {"type": "hello_ack", "oracle": <name>, "fp_len": <L>, "aux": [...]}
    -> {"type": "eval", "id": <n>, "fps": [<hex>, ...]}          main scorer
    -> {"type": "eval", "id": <n>, "fps": [...], "scorer": "sa"}  aux scorer
    <- {"type": "result", "id": <n>, "scores": [...]}
    <- {"type": "error", "message": ...}   in place of any reply
    -> {"type": "shutdown"}

Requests and responses strictly alternate; one request is in flight at a
time. Budget and cache semantics stay client-side (BudgetedOracle), so a
repeated fingerprint never crosses the wire twice within a run.

See PROTOCOL.md for the normative server-side description.
"""

from __future__ import annotations

import json
import selectors
import socket
import subprocess
import time
from dataclasses import dataclass
from typing import Sequence

from .fingerprint import Fingerprint
from .oracle import Oracle

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_S = 60.0
DEFAULT_MAX_LINE_BYTES = 16 * 2**20


class ProtocolError(RuntimeError):
    """Any violation of the wire protocol (timeouts, bad replies, bad scores)."""


@dataclass(frozen=True)
class OracleDescriptor:
    oracle: str
    fp_len: int
    aux: tuple[str, ...] = ()


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to reach the server. Exactly one transport is set."""

    spawn: tuple[str, ...] | None = None
    socket_path: str | None = None
    timeout_s: float = DEFAULT_TIMEOUT_S
    max_line_bytes: int = DEFAULT_MAX_LINE_BYTES

    def __post_init__(self) -> None:
        if (self.spawn is None) == (self.socket_path is None):
            raise ValueError("exactly one of spawn / socket_path must be given")
        if self.spawn is not None and len(self.spawn) == 0:
            raise ValueError("spawn command must be non-empty")
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")


class _LineTransport:
    """Newline-framed byte transport with deadline-based reads."""

    def __init__(self, max_line_bytes: int):
        self._buffer = b""
        self._max_line_bytes = max_line_bytes

    def _read_chunk(self, deadline: float) -> bytes:
        raise NotImplementedError

    def send_line(self, data: bytes) -> None:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    def recv_line(self, timeout_s: float) -> bytes:
        deadline = time.monotonic() + timeout_s
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line, self._buffer = self._buffer[:newline], self._buffer[newline + 1 :]
                if len(line) > self._max_line_bytes:
                    raise ProtocolError(
                        f"line exceeds maximum length of {self._max_line_bytes} bytes"
                    )
                return line
            if len(self._buffer) > self._max_line_bytes:
                raise ProtocolError(
                    f"line exceeds maximum length of {self._max_line_bytes} bytes"
                )
            chunk = self._read_chunk(deadline)
            if not chunk:
                raise ProtocolError("connection closed while awaiting a reply")
            self._buffer += chunk


class _SpawnTransport(_LineTransport):
    def __init__(self, argv: Sequence[str], max_line_bytes: int):
        super().__init__(max_line_bytes)
        try:
            self._proc = subprocess.Popen(
                list(argv),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # server logs pass through
            )
        except OSError as exc:
            raise ProtocolError(f"cannot spawn oracle server {argv!r}: {exc}") from exc
        self._selector = selectors.DefaultSelector()
        self._selector.register(self._proc.stdout, selectors.EVENT_READ)

    def _read_chunk(self, deadline: float) -> bytes:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise ProtocolError("timed out awaiting a reply from the oracle server")
        if not self._selector.select(remaining):
            raise ProtocolError("timed out awaiting a reply from the oracle server")
        return self._proc.stdout.read1(65536)

    def send_line(self, data: bytes) -> None:
        try:
            self._proc.stdin.write(data + b"\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"oracle server pipe closed: {exc}") from exc

    def close(self) -> None:
        self._selector.close()
        for stream in (self._proc.stdin, self._proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        try:
            self._proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()


class _SocketTransport(_LineTransport):
    def __init__(self, path: str, max_line_bytes: int):
        super().__init__(max_line_bytes)
        self._sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        try:
            self._sock.connect(path)
        except OSError as exc:
            self._sock.close()
            raise ProtocolError(f"cannot connect to oracle socket {path!r}: {exc}") from exc

    def _read_chunk(self, deadline: float) -> bytes:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise ProtocolError("timed out awaiting a reply from the oracle server")
        self._sock.settimeout(remaining)
        try:
            return self._sock.recv(65536)
        except socket.timeout:
            raise ProtocolError("timed out awaiting a reply from the oracle server") from None
        except OSError as exc:
            raise ProtocolError(f"oracle socket read failed: {exc}") from exc

    def send_line(self, data: bytes) -> None:
        try:
            self._sock.sendall(data + b"\n")
        except OSError as exc:
            raise ProtocolError(f"oracle socket write failed: {exc}") from exc

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class OracleEndpoint:
    """One external oracle connection with strict request/response alternation."""

    def __init__(self, config: EndpointConfig):
        self.config = config
        self.descriptor: OracleDescriptor | None = None
        self._transport: _LineTransport | None = None
        self._closed = False
        self._next_id = 0

    def __enter__(self) -> "OracleEndpoint":
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()

    def _open_transport(self) -> _LineTransport:
        if self.config.spawn is not None:
            return _SpawnTransport(self.config.spawn, self.config.max_line_bytes)
        return _SocketTransport(self.config.socket_path, self.config.max_line_bytes)

    def _send(self, message: dict) -> None:
        assert self._transport is not None
        data = json.dumps(message, separators=(",", ":")).encode()
        if len(data) > self.config.max_line_bytes:
            raise ProtocolError(
                f"request of {len(data)} bytes exceeds the "
                f"{self.config.max_line_bytes}-byte line limit; split the batch"
            )
        self._transport.send_line(data)

    def _recv(self) -> dict:
        assert self._transport is not None
        line = self._transport.recv_line(self.config.timeout_s)
        try:
            reply = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProtocolError(f"malformed reply line {line[:200]!r}: {exc}") from exc
        if not isinstance(reply, dict):
            raise ProtocolError(f"reply is not a JSON object: {line[:200]!r}")
        if reply.get("type") == "error":
            raise ProtocolError(f"server error: {reply.get('message', '(no message)')}")
        return reply

    def handshake(self) -> OracleDescriptor:
        """Open the transport and exchange hello / hello_ack."""
        if self._closed:
            raise ProtocolError("endpoint already shut down")
        if self.descriptor is not None:
            return self.descriptor
        self._transport = self._open_transport()
        self._send({"type": "hello", "version": PROTOCOL_VERSION})
        reply = self._recv()
        if reply.get("type") != "hello_ack":
            raise ProtocolError(f"expected hello_ack, got {reply!r}")
        if "version" in reply and reply["version"] != PROTOCOL_VERSION:
            raise ProtocolError(
                f"protocol version mismatch: server speaks {reply['version']!r}, "
                f"client speaks {PROTOCOL_VERSION}"
            )
        name = reply.get("oracle")
        fp_len = reply.get("fp_len")
        aux = reply.get("aux", [])
        if not isinstance(name, str) or not name:
            raise ProtocolError(f"hello_ack carries no oracle name: {reply!r}")
        if not isinstance(fp_len, int) or fp_len <= 0 or fp_len % 4 != 0:
            raise ProtocolError(f"hello_ack fp_len invalid: {reply!r}")
        if not (isinstance(aux, list) and all(isinstance(a, str) for a in aux)):
            raise ProtocolError(f"hello_ack aux invalid: {reply!r}")
        self.descriptor = OracleDescriptor(name, fp_len, tuple(aux))
        return self.descriptor

    def eval_batch(
        self, fps: Sequence[Fingerprint], scorer: str | None = None
    ) -> list[float]:
        """Score a batch in request order; empty batches send nothing."""
        if self._closed:
            raise ProtocolError("endpoint already shut down")
        if self.descriptor is None:
            raise ProtocolError("eval before handshake")
        if not fps:
            return []
        for fp in fps:
            if fp.length != self.descriptor.fp_len:
                raise ProtocolError(
                    f"fingerprint length {fp.length} != endpoint fp_len {self.descriptor.fp_len}"
                )
        self._next_id += 1
        request: dict = {
            "type": "eval",
            "id": self._next_id,
            "fps": [fp.to_hex() for fp in fps],
        }
        if scorer is not None:
            request["scorer"] = scorer
        self._send(request)
        reply = self._recv()
        if reply.get("type") != "result":
            raise ProtocolError(f"expected result, got {reply!r}")
        if reply.get("id") != self._next_id:
            raise ProtocolError(
                f"result id {reply.get('id')!r} does not match request id {self._next_id}"
            )
        scores = reply.get("scores")
        if not isinstance(scores, list) or len(scores) != len(fps):
            got = len(scores) if isinstance(scores, list) else scores
            raise ProtocolError(f"result arity mismatch: sent {len(fps)} fps, got {got!r}")
        out: list[float] = []
        for i, value in enumerate(scores):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ProtocolError(f"score at index {i} is not a number: {value!r}")
            score = float(value)
            if not (0.0 <= score <= 1.0):
                raise ProtocolError(f"score at index {i} out of range [0, 1]: {score!r}")
            out.append(score)
        return out

    def shutdown(self) -> None:
        """Best-effort shutdown message plus transport teardown; idempotent."""
        if self._closed:
            return
        self._closed = True
        if self._transport is None:
            return  # never opened: nothing to do
        try:
            self._send({"type": "shutdown"})
        except ProtocolError:
            pass
        self._transport.close()
        self._transport = None


class ExternalOracle(Oracle):
    """Oracle adapter over an endpoint. Requests alternate strictly, so the
    adapter is not safe for concurrent evaluate calls."""

    thread_safe = False

    def __init__(self, endpoint: OracleEndpoint, name: str | None = None):
        descriptor = endpoint.handshake()
        self.endpoint = endpoint
        self.name = name or descriptor.oracle
        self.fp_length = descriptor.fp_len
        self.aux = descriptor.aux

    def evaluate(self, fp: Fingerprint) -> float:
        return self.endpoint.eval_batch([fp])[0]

    def evaluate_aux(self, fps: Sequence[Fingerprint], scorer: str) -> list[float]:
        if scorer not in self.aux:
            raise ProtocolError(f"server does not advertise aux scorer {scorer!r}")
        return self.endpoint.eval_batch(fps, scorer=scorer)
