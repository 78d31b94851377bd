"""Fixed-length binary fingerprints and their similarity / diversity measures.

A fingerprint is an immutable vector of 0/1 values. Position 0 maps to the
most significant bit of the first hex digit of the canonical hex form, so
``Fingerprint.from_hex("c", 4)`` has bits 1100.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

import numpy as np

SimilarityFn = Callable[["Fingerprint", "Fingerprint"], float]


class Fingerprint:
    """Immutable bit vector with bit-exact equality and hashing.

    Equality and hashing are defined on the packed byte content, which makes
    fingerprints usable as cache keys. All fingerprints taking part in one
    run must share the same length.
    """

    __slots__ = ("_bits", "_packed", "_hash")

    def __init__(self, bits: Sequence[int] | np.ndarray):
        arr = np.ascontiguousarray(bits, dtype=np.uint8)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("fingerprint bits must be a non-empty 1-D sequence")
        if arr.max(initial=0) > 1:
            raise ValueError("fingerprint bits must be 0 or 1")
        arr.setflags(write=False)
        self._bits = arr
        self._packed = np.packbits(arr).tobytes()
        self._hash = hash((arr.size, self._packed))

    @property
    def bits(self) -> np.ndarray:
        """Read-only uint8 view of the bit values."""
        return self._bits

    @property
    def length(self) -> int:
        return int(self._bits.size)

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self._bits))

    @classmethod
    def zeros(cls, length: int) -> "Fingerprint":
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def from_hex(cls, text: str, length: int) -> "Fingerprint":
        """Parse the canonical hex form (``length`` must be a multiple of 4)."""
        if length % 4 != 0:
            raise ValueError(f"fingerprint length {length} is not a multiple of 4")
        if len(text) != length // 4:
            raise ValueError(
                f"hex string has {len(text)} digits, expected {length // 4} for length {length}"
            )
        padded = text if len(text) % 2 == 0 else text + "0"
        try:
            raw = bytes.fromhex(padded)
        except ValueError as exc:
            raise ValueError(f"invalid hex fingerprint {text!r}") from exc
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:length]
        return cls(bits)

    def to_hex(self) -> str:
        """Canonical hex form: L/4 digits, bit i is bit (3 - i % 4) of digit i // 4."""
        if self.length % 4 != 0:
            raise ValueError(f"fingerprint length {self.length} is not a multiple of 4")
        return self._packed.hex()[: self.length // 4]

    def flip(self, positions: Sequence[int] | np.ndarray) -> "Fingerprint":
        """Return a copy with the given positions flipped."""
        out = self._bits.copy()
        out[np.asarray(positions, dtype=np.intp)] ^= 1
        return Fingerprint(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return self._bits.size == other._bits.size and self._packed == other._packed

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        if self.length % 4 == 0:
            return f"Fingerprint(len={self.length}, hex={self.to_hex()!r})"
        return f"Fingerprint(len={self.length})"


def random_fingerprint(
    length: int, rng: np.random.Generator, density: float = 0.5
) -> Fingerprint:
    """Draw a fingerprint with i.i.d. Bernoulli(density) bits."""
    return Fingerprint((rng.random(length) < density).astype(np.uint8))


def _check_same_length(a: Fingerprint, b: Fingerprint) -> None:
    if a.length != b.length:
        raise ValueError(f"fingerprint length mismatch: {a.length} != {b.length}")


def cosine_similarity(a: Fingerprint, b: Fingerprint) -> float:
    """a.b / (|a|_2 |b|_2) for binary vectors; 0.0 if either operand is all-zero.

    The all-zero convention keeps transiently empty vectors from aborting a
    bit-flip search.
    """
    _check_same_length(a, b)
    na = a.popcount
    nb = b.popcount
    if na == 0 or nb == 0:
        return 0.0
    inter = int(np.count_nonzero(a.bits & b.bits))
    return inter / math.sqrt(na * nb)


def tanimoto_similarity(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; 0.0 when both operands are all-zero."""
    _check_same_length(a, b)
    inter = int(np.count_nonzero(a.bits & b.bits))
    union = a.popcount + b.popcount - inter
    if union == 0:
        return 0.0
    return inter / union


def hamming_distance(a: Fingerprint, b: Fingerprint) -> int:
    """Number of differing positions."""
    _check_same_length(a, b)
    return int(np.count_nonzero(a.bits ^ b.bits))


def diversity(fingerprints: Sequence[Fingerprint], sim: SimilarityFn) -> float:
    """1 minus the mean pairwise similarity over all distinct-index pairs.

    Ordered and unordered averaging coincide because both similarity
    functions are symmetric. Needs at least two entries.
    """
    n = len(fingerprints)
    if n < 2:
        raise ValueError(f"diversity needs at least 2 fingerprints, got {n}")
    total = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            total += sim(fingerprints[i], fingerprints[j])
    return 1.0 - total / (n * (n - 1) / 2)


SIMILARITY_FUNCTIONS: dict[str, SimilarityFn] = {
    "cosine": cosine_similarity,
    "tanimoto": tanimoto_similarity,
}


def similarity_by_name(name: str) -> SimilarityFn:
    try:
        return SIMILARITY_FUNCTIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown similarity {name!r}, expected one of {sorted(SIMILARITY_FUNCTIONS)}"
        ) from None
