"""Bit packing and Hamming distance tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbe import codes

from oracles import popcount_bits


def random_codes(n, k, seed):
    rng = np.random.default_rng(seed)
    return codes.pack_bits(rng.integers(0, 2, size=(n, k)))


class TestPacking:
    def test_round_trip_bits(self):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, size=(5, 13), dtype=np.uint8)
        packed = codes.pack_bits(bits)
        np.testing.assert_array_equal(packed.bits(), bits)

    def test_lsb_first_layout(self):
        packed = codes.pack_bits([[1, 0, 0, 0, 0, 0, 0, 0, 1]])
        assert packed.packed[0, 0] == 1  # bit 0 -> LSB of byte 0
        assert packed.packed[0, 1] == 1  # bit 8 -> LSB of byte 1

    def test_pad_bits_are_zero(self):
        packed = codes.pack_bits(np.ones((3, 5), dtype=np.uint8))
        assert packed.packed[0, 0] == 0b00011111

    def test_nonzero_pad_rejected(self):
        with pytest.raises(ValueError, match="pad bits"):
            codes.BinaryCodes(n=1, k=5, packed=np.array([[0b00111111]], dtype=np.uint8))

    def test_signs_round_trip(self):
        rng = np.random.default_rng(1)
        signs = rng.choice([-1, 1], size=(4, 11)).astype(np.int8)
        np.testing.assert_array_equal(codes.pack_signs(signs).signs(), signs)


class TestHamming:
    def test_self_distance_zero(self):
        c = random_codes(6, 33, seed=2)
        for i in range(6):
            assert codes.hamming(c, i, i) == 0

    def test_complement_distance_k(self):
        bits = np.random.default_rng(3).integers(0, 2, size=(1, 77))
        both = codes.pack_bits(np.vstack([bits, 1 - bits]))
        assert codes.hamming(both, 0, 1) == 77

    def test_matches_bit_loop_oracle(self):
        c = random_codes(2, 1000, seed=4)
        expected = popcount_bits(c.packed[0], c.packed[1])
        assert codes.hamming(c, 0, 1) == expected

    def test_out_of_range(self):
        c = random_codes(3, 8, seed=5)
        with pytest.raises(IndexError):
            codes.hamming(c, 0, 3)

    def test_matrix_matches_pairs(self):
        a = random_codes(7, 19, seed=6)
        b = random_codes(5, 19, seed=7)
        dist = codes.hamming_matrix(a, b)
        merged = codes.pack_bits(np.vstack([a.bits(), b.bits()]))
        for i in range(7):
            for j in range(5):
                assert dist[i, j] == codes.hamming(merged, i, 7 + j)

    def test_matrix_rejects_mismatched_k(self):
        with pytest.raises(ValueError):
            codes.hamming_matrix(random_codes(2, 8, 0), random_codes(2, 9, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=200), st.integers(min_value=0, max_value=2**31))
def test_hamming_symmetry_and_triangle(k, seed):
    c = random_codes(3, k, seed)
    d01 = codes.hamming(c, 0, 1)
    d02 = codes.hamming(c, 0, 2)
    d12 = codes.hamming(c, 1, 2)
    assert d01 == codes.hamming(c, 1, 0)
    assert d01 <= d02 + d12
    assert d02 <= d01 + d12
    assert d12 <= d01 + d02
