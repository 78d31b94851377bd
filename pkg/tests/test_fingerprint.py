from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fpopt.fingerprint import (
    Fingerprint,
    cosine_similarity,
    diversity,
    hamming_distance,
    random_fingerprint,
    similarity_by_name,
    tanimoto_similarity,
)

from conftest import fp

bit_lists = st.lists(st.integers(0, 1), min_size=1, max_size=96)


def paired_bits(draw):
    bits = draw(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=96))
    a, b = zip(*bits)
    return Fingerprint(a), Fingerprint(b)


fp_pairs = st.composite(paired_bits)()


class TestCosine:
    def test_identical(self):
        assert cosine_similarity(fp("1100"), fp("1100")) == 1.0

    def test_disjoint(self):
        assert cosine_similarity(fp("1100"), fp("0011")) == 0.0

    def test_half_overlap(self):
        # dot = 1, norms sqrt(2) * sqrt(2)
        assert cosine_similarity(fp("1100"), fp("1010")) == 0.5

    def test_all_zero_operand_is_zero(self):
        assert cosine_similarity(fp("0000"), fp("1010")) == 0.0
        assert cosine_similarity(fp("0000"), fp("0000")) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            cosine_similarity(fp("1100"), fp("110000"))


class TestTanimoto:
    def test_identical(self):
        assert tanimoto_similarity(fp("1100"), fp("1100")) == 1.0

    def test_disjoint(self):
        assert tanimoto_similarity(fp("1100"), fp("0011")) == 0.0

    def test_one_third(self):
        # intersection 1, union 3
        assert tanimoto_similarity(fp("1100"), fp("1010")) == pytest.approx(1 / 3)

    def test_both_zero_convention(self):
        assert tanimoto_similarity(fp("0000"), fp("0000")) == 0.0


class TestHamming:
    def test_equal(self):
        assert hamming_distance(fp("1100"), fp("1100")) == 0

    def test_complement(self):
        assert hamming_distance(fp("1100"), fp("0011")) == 4

    def test_single_bit(self):
        assert hamming_distance(fp("1100"), fp("1000")) == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hamming_distance(fp("11"), fp("111"))


class TestDiversity:
    def test_identical_pair(self):
        assert diversity([fp("1100"), fp("1100")], cosine_similarity) == 0.0

    def test_disjoint_pair(self):
        assert diversity([fp("1100"), fp("0011")], cosine_similarity) == 1.0

    def test_three_way_half(self):
        # all three pairwise cosine similarities are 0.5
        fps = [fp("1100"), fp("1010"), fp("1001")]
        assert diversity(fps, cosine_similarity) == pytest.approx(0.5)

    def test_mutually_disjoint_supports(self):
        fps = [fp("1000"), fp("0100"), fp("0010"), fp("0001")]
        for sim in (cosine_similarity, tanimoto_similarity):
            assert diversity(fps, sim) == 1.0

    def test_too_small(self):
        with pytest.raises(ValueError):
            diversity([fp("1100")], cosine_similarity)


class TestHexSerialization:
    def test_bit_order(self):
        # position 0 is the most significant bit of the first digit
        assert fp("1100").to_hex() == "c"
        assert fp("0001").to_hex() == "1"
        assert fp("10000000").to_hex() == "80"
        assert Fingerprint.from_hex("c", 4) == fp("1100")

    def test_round_trip_random(self, rng):
        for length in (4, 8, 12, 64, 4096):
            x = random_fingerprint(length, rng)
            assert Fingerprint.from_hex(x.to_hex(), length) == x
            assert len(x.to_hex()) == length // 4

    def test_from_hex_rejects_bad_input(self):
        with pytest.raises(ValueError):
            Fingerprint.from_hex("zz", 8)
        with pytest.raises(ValueError):
            Fingerprint.from_hex("ff", 4)  # wrong digit count
        with pytest.raises(ValueError):
            Fingerprint.from_hex("f", 6)  # length not a multiple of 4


class TestFingerprintType:
    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            Fingerprint([0, 1, 2])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Fingerprint([])

    def test_hash_equals_by_content(self):
        a = Fingerprint([1, 0, 1])
        b = Fingerprint(np.array([1, 0, 1], dtype=np.uint8))
        assert a == b and hash(a) == hash(b)
        assert a != Fingerprint([1, 0, 0])

    def test_bits_are_immutable(self):
        a = fp("1100")
        with pytest.raises(ValueError):
            a.bits[0] = 0

    def test_flip(self):
        assert fp("1100").flip([0, 3]) == fp("0101")


@given(fp_pairs)
def test_similarity_symmetry(pair):
    a, b = pair
    assert cosine_similarity(a, b) == cosine_similarity(b, a)
    assert tanimoto_similarity(a, b) == tanimoto_similarity(b, a)


@given(bit_lists.filter(lambda bits: any(bits)))
def test_self_similarity_is_one(bits):
    a = Fingerprint(bits)
    assert cosine_similarity(a, a) == 1.0
    assert tanimoto_similarity(a, a) == 1.0


@given(fp_pairs)
def test_tanimoto_never_exceeds_cosine(pair):
    a, b = pair
    assert tanimoto_similarity(a, b) <= cosine_similarity(a, b) + 1e-15


def test_hamming_triangle_inequality(rng):
    for _ in range(200):
        length = int(rng.integers(1, 64))
        a, b, c = (random_fingerprint(length, rng) for _ in range(3))
        assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)


def test_similarity_by_name():
    assert similarity_by_name("cosine") is cosine_similarity
    assert similarity_by_name("tanimoto") is tanimoto_similarity
    with pytest.raises(ValueError):
        similarity_by_name("euclid")
