from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

from fpopt.fingerprint import Fingerprint

TESTS_DIR = Path(__file__).parent


def fp(bits: str) -> Fingerprint:
    """Build a fingerprint from a string like '1100'."""
    return Fingerprint([int(c) for c in bits])


def loopback_argv(fp_len: int, *extra: str) -> list[str]:
    return [sys.executable, "-m", "fpopt.loopback", "--fp-len", str(fp_len), *extra]


def badserver_argv(mode: str, fp_len: int = 16) -> list[str]:
    return [
        sys.executable,
        str(TESTS_DIR / "badserver.py"),
        "--mode",
        mode,
        "--fp-len",
        str(fp_len),
    ]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
