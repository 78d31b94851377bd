from __future__ import annotations

import json
import socket
import threading

import numpy as np
import pytest

from fpopt.bridge import (
    EndpointConfig,
    ExternalOracle,
    OracleEndpoint,
    ProtocolError,
)
from fpopt.fingerprint import Fingerprint, random_fingerprint
from fpopt.loopback import LoopbackServer, loopback_score
from fpopt.oracle import BudgetedOracle

from conftest import badserver_argv, loopback_argv


def spawn_endpoint(argv, timeout=20.0) -> OracleEndpoint:
    return OracleEndpoint(EndpointConfig(spawn=tuple(argv), timeout_s=timeout))


class TestHandshake:
    def test_well_formed_ack(self):
        with spawn_endpoint(loopback_argv(4096)) as ep:
            descriptor = ep.handshake()
            assert descriptor.oracle == "loopback"
            assert descriptor.fp_len == 4096
            assert descriptor.aux == ()

    def test_aux_advertised(self):
        with spawn_endpoint(loopback_argv(64, "--aux", "sa")) as ep:
            assert ep.handshake().aux == ("sa",)

    def test_handshake_is_idempotent(self):
        with spawn_endpoint(loopback_argv(16)) as ep:
            assert ep.handshake() == ep.handshake()

    @pytest.mark.parametrize(
        "mode", ["garbage-hello", "wrong-type", "bad-fp-len", "version-mismatch", "close-early", "silent"],
    )
    def test_malformed_handshakes_fail_cleanly(self, mode):
        timeout = 2.0 if mode == "silent" else 20.0
        with spawn_endpoint(badserver_argv(mode), timeout=timeout) as ep:
            with pytest.raises(ProtocolError):
                ep.handshake()


class TestEvalBatch:
    def test_empty_batch_sends_nothing(self):
        with spawn_endpoint(loopback_argv(16)) as ep:
            ep.handshake()
            assert ep.eval_batch([]) == []

    def test_scores_match_local_recomputation(self, rng):
        with spawn_endpoint(loopback_argv(64)) as ep:
            ep.handshake()
            fps = [random_fingerprint(64, rng) for _ in range(5)]
            scores = ep.eval_batch(fps)
            assert scores == [loopback_score(fp.to_hex()) for fp in fps]

    def test_eval_before_handshake_rejected(self, rng):
        with spawn_endpoint(loopback_argv(16)) as ep:
            with pytest.raises(ProtocolError, match="handshake"):
                ep.eval_batch([random_fingerprint(16, rng)])

    def test_wrong_length_fingerprint_rejected(self, rng):
        with spawn_endpoint(loopback_argv(16)) as ep:
            ep.handshake()
            with pytest.raises(ProtocolError, match="length"):
                ep.eval_batch([random_fingerprint(32, rng)])

    @pytest.mark.parametrize(
        "mode",
        ["wrong-id", "wrong-arity", "out-of-range", "score-type", "garbage-eval",
         "error-reply", "close-mid-eval"],
    )
    def test_bad_replies_fail_cleanly(self, mode, rng):
        with spawn_endpoint(badserver_argv(mode)) as ep:
            ep.handshake()
            with pytest.raises(ProtocolError):
                ep.eval_batch([random_fingerprint(16, rng)])

    def test_aux_scorer_round_trip(self, rng):
        with spawn_endpoint(loopback_argv(32, "--aux", "sa")) as ep:
            ep.handshake()
            fps = [random_fingerprint(32, rng) for _ in range(4)]
            scores = ep.eval_batch(fps, scorer="sa")
            assert scores == [loopback_score(fp.to_hex(), "sa") for fp in fps]


class TestShutdown:
    def test_double_shutdown_is_idempotent(self):
        ep = spawn_endpoint(loopback_argv(16))
        ep.handshake()
        ep.shutdown()
        ep.shutdown()

    def test_shutdown_before_handshake_is_noop(self):
        ep = spawn_endpoint(loopback_argv(16))
        ep.shutdown()

    def test_eval_after_shutdown_errors_immediately(self, rng):
        ep = spawn_endpoint(loopback_argv(16))
        ep.handshake()
        ep.shutdown()
        with pytest.raises(ProtocolError, match="shut down"):
            ep.eval_batch([random_fingerprint(16, rng)])


def _wait_for_socket(path: str, attempts: int = 250) -> None:
    import os
    import time

    for _ in range(attempts):
        if os.path.exists(path):
            return
        time.sleep(0.02)
    raise TimeoutError(f"socket {path} never appeared")


class TestSocketTransport:
    def test_round_trip_over_unix_socket(self, tmp_path, rng):
        path = str(tmp_path / "oracle.sock")
        server = LoopbackServer(32, aux=("sa",))
        thread = threading.Thread(target=server.serve_socket, args=(path,), daemon=True)
        thread.start()
        _wait_for_socket(path)
        with OracleEndpoint(EndpointConfig(socket_path=path, timeout_s=10.0)) as ep:
            descriptor = ep.handshake()
            assert descriptor.fp_len == 32
            fps = [random_fingerprint(32, rng) for _ in range(3)]
            assert ep.eval_batch(fps) == [loopback_score(fp.to_hex()) for fp in fps]
        thread.join(timeout=5)


class _CountingSocketServer:
    """Socket loopback that records every evaluated fingerprint hex."""

    def __init__(self, path: str, fp_len: int):
        self.path = path
        self.fp_len = fp_len
        self.seen: list[str] = []
        self._server = LoopbackServer(fp_len)
        self.thread = threading.Thread(target=self._serve, daemon=True)

    def _serve(self) -> None:
        server = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        server.bind(self.path)
        server.listen(1)
        conn, _ = server.accept()
        with conn:
            reader = conn.makefile("rb")
            writer = conn.makefile("wb")
            for raw in reader:
                message = json.loads(raw)
                if message.get("type") == "eval":
                    self.seen.extend(message["fps"])
                reply = self._server.handle(message)
                if reply is None:
                    break
                writer.write(json.dumps(reply).encode() + b"\n")
                writer.flush()
        server.close()


def test_cache_keeps_repeats_off_the_wire(tmp_path, rng):
    path = str(tmp_path / "counting.sock")
    counting = _CountingSocketServer(path, 32)
    counting.thread.start()
    _wait_for_socket(path)
    with OracleEndpoint(EndpointConfig(socket_path=path, timeout_s=10.0)) as ep:
        oracle = BudgetedOracle(ExternalOracle(ep), budget=100)
        fps = [random_fingerprint(32, rng) for _ in range(10)]
        for _ in range(5):
            for fp in fps:
                oracle.evaluate(fp)
    counting.thread.join(timeout=5)
    hexes = [fp.to_hex() for fp in fps]
    assert sorted(counting.seen) == sorted(set(hexes))
    assert oracle.cache_hits == 40


def test_round_trip_thousand_batches(rng):
    # order-preserving, bit-exact scores across 1000 random batches
    with spawn_endpoint(loopback_argv(16)) as ep:
        ep.handshake()
        for _ in range(1000):
            size = int(rng.integers(0, 9))
            fps = [random_fingerprint(16, rng) for _ in range(size)]
            assert ep.eval_batch(fps) == [loopback_score(fp.to_hex()) for fp in fps]


def test_external_oracle_adapter(rng):
    with spawn_endpoint(loopback_argv(24, "--aux", "sa")) as ep:
        oracle = ExternalOracle(ep)
        assert oracle.fp_length == 24
        x = random_fingerprint(24, rng)
        assert oracle.evaluate(x) == loopback_score(x.to_hex())
        assert oracle.evaluate_aux([x], "sa") == [loopback_score(x.to_hex(), "sa")]
        with pytest.raises(ProtocolError, match="advertise"):
            oracle.evaluate_aux([x], "qed")


def test_endpoint_config_validation():
    with pytest.raises(ValueError):
        EndpointConfig()
    with pytest.raises(ValueError):
        EndpointConfig(spawn=("x",), socket_path="/tmp/x")
    with pytest.raises(ValueError):
        EndpointConfig(spawn=())


def test_line_length_limits_are_enforced(rng):
    # replies longer than the cap are protocol errors, not buffer bloat
    ep = OracleEndpoint(
        EndpointConfig(spawn=tuple(loopback_argv(16)), timeout_s=20, max_line_bytes=40)
    )
    with ep:
        with pytest.raises(ProtocolError, match="exceeds"):
            ep.handshake()
    # oversized requests are refused before anything crosses the wire
    ep = OracleEndpoint(
        EndpointConfig(spawn=tuple(loopback_argv(512)), timeout_s=20, max_line_bytes=256)
    )
    with ep:
        with pytest.raises(ProtocolError, match="split the batch"):
            ep.handshake()  # ack is small
            ep.eval_batch([random_fingerprint(512, rng) for _ in range(8)])
