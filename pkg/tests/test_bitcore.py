import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ca_reservoir.automata import Elementary, characteristic_matrix, step_elementary
from ca_reservoir.bitcore import (
    BitVector,
    Gf2Matrix,
    Permutation,
    bv_hamming,
    bv_permute,
    bv_random,
    gf2_matmul,
    gf2_matpow,
    gf2_matvec,
    pack_bits,
    stream,
    unpack_bits,
)
from ca_reservoir.errors import DimensionError, ParameterError

from conftest import make_rng


class TestBitVector:
    def test_string_roundtrip(self):
        v = BitVector.from_string("0110010111")
        assert v.to_string() == "0110010111"
        assert len(v) == 10
        assert v.popcount() == 6

    def test_bytes_roundtrip(self, rng):
        for n in (1, 7, 8, 63, 64, 65, 1000):
            v = bv_random(n, 0.5, rng)
            assert BitVector.from_bytes(v.to_bytes(), n) == v

    def test_padding_is_canonical(self):
        words = np.array([0xFFFF_FFFF_FFFF_FFFF], dtype=np.uint64)
        v = BitVector(5, words)
        assert v.popcount() == 5
        assert v == BitVector.from_string("11111")

    def test_immutable(self):
        v = BitVector.from_string("101")
        with pytest.raises(AttributeError):
            v.length = 4

    def test_indexing(self):
        v = BitVector.from_string("0100000001")
        assert v[0] == 0 and v[1] == 1 and v[9] == 1
        with pytest.raises(IndexError):
            v[10]

    def test_bitwise_ops(self, rng):
        a = bv_random(130, 0.5, rng)
        b = bv_random(130, 0.5, rng)
        assert (a ^ b).to_array().tolist() == (a.to_array() ^ b.to_array()).tolist()
        assert (a & b).popcount() == int((a.to_array() & b.to_array()).sum())
        assert (a | b).popcount() == int((a.to_array() | b.to_array()).sum())
        assert (~a).popcount() == 130 - a.popcount()

    @given(bits=st.lists(st.integers(0, 1), min_size=1, max_size=300))
    @settings(max_examples=60, derandomize=True)
    def test_pack_unpack_roundtrip(self, bits):
        arr = np.array(bits, dtype=np.uint8)
        assert np.array_equal(unpack_bits(pack_bits(arr), len(bits)), arr)


class TestBvRandom:
    def test_probability_zero_gives_all_zero(self, rng):
        assert bv_random(100, 0.0, rng).popcount() == 0

    def test_probability_one_gives_all_one(self, rng):
        assert bv_random(100, 1.0, rng).popcount() == 100

    def test_density_binomial_bound(self):
        # binomial(10000, 0.1): +-5 sigma is within [900, 1100]
        v = bv_random(10000, 0.1, make_rng(1))
        assert 900 <= v.popcount() <= 1100

    def test_invalid_density_rejected(self, rng):
        with pytest.raises(ParameterError):
            bv_random(10, -0.1, rng)
        with pytest.raises(ParameterError):
            bv_random(10, 1.5, rng)


class TestHamming:
    def test_identity(self, rng):
        v = bv_random(64, 0.4, rng)
        assert bv_hamming(v, v) == 0

    def test_complement_case(self):
        assert bv_hamming(BitVector.from_string("0101"), BitVector.from_string("1010")) == 4

    def test_hand_counted(self):
        assert bv_hamming(BitVector.from_string("00100"), BitVector.from_string("01010")) == 3

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            bv_hamming(BitVector.from_string("01"), BitVector.from_string("011"))

    def test_triangle_inequality(self):
        rng = make_rng(2)
        for _ in range(1000):
            n = int(rng.integers(1, 80))
            a, b, c = (bv_random(n, 0.5, rng) for _ in range(3))
            assert bv_hamming(a, c) <= bv_hamming(a, b) + bv_hamming(b, c)


class TestPermutation:
    def test_identity(self, rng):
        v = bv_random(20, 0.5, rng)
        assert bv_permute(v, Permutation.identity(20)) == v

    def test_inverse_roundtrip(self, rng):
        v = bv_random(50, 0.3, rng)
        p = Permutation.random(50, rng)
        assert bv_permute(bv_permute(v, p), p.inverse()) == v

    def test_hand_index_chase(self):
        out = bv_permute(BitVector.from_string("100"), Permutation(np.array([2, 0, 1])))
        assert out.to_string() == "010"

    def test_bijection_checked(self):
        with pytest.raises(ParameterError):
            Permutation(np.array([0, 0, 2]))

    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 200))
    @settings(max_examples=40, derandomize=True)
    def test_popcount_preserved(self, seed, n):
        r = stream(seed, 0)
        v = bv_random(n, 0.5, r)
        p = Permutation.random(n, r)
        assert bv_permute(v, p).popcount() == v.popcount()

    def test_length_mismatch(self, rng):
        with pytest.raises(DimensionError):
            bv_permute(bv_random(5, 0.5, rng), Permutation.identity(6))


class TestGf2:
    def test_matvec_identity(self, rng):
        v = bv_random(17, 0.5, rng)
        assert gf2_matvec(Gf2Matrix.identity(17), v) == v

    def test_matvec_zero(self, rng):
        v = bv_random(9, 0.5, rng)
        assert gf2_matvec(Gf2Matrix.zeros(9, 9), v).popcount() == 0

    def test_matvec_matches_rule90_step(self):
        m = characteristic_matrix(90, 5)
        v = BitVector.from_string("00100")
        assert gf2_matvec(m, v).to_string() == "01010"

    def test_matvec_agrees_with_step_oracle(self):
        rng = make_rng(3)
        m = characteristic_matrix(90, 23)
        rule = Elementary(90, 23)
        for _ in range(100):
            v = bv_random(23, 0.5, rng)
            assert gf2_matvec(m, v) == step_elementary(v, rule)

    def test_matpow_base_cases(self):
        m = characteristic_matrix(150, 6)
        assert gf2_matpow(m, 0) == Gf2Matrix.identity(6)
        assert gf2_matpow(m, 1) == m

    def test_matpow_associativity_oracle(self):
        rng = make_rng(4)
        for _ in range(100):
            n = int(rng.integers(3, 12))
            m = Gf2Matrix.from_array(rng.integers(0, 2, size=(n, n), dtype=np.uint8))
            v = bv_random(n, 0.5, rng)
            assert gf2_matvec(gf2_matpow(m, 2), v) == gf2_matvec(m, gf2_matvec(m, v))

    def test_matpow_additivity_of_exponents(self):
        rng = make_rng(5)
        for _ in range(20):
            n = int(rng.integers(3, 10))
            m = Gf2Matrix.from_array(rng.integers(0, 2, size=(n, n), dtype=np.uint8))
            a = int(rng.integers(0, 17))
            b = int(rng.integers(0, 17))
            assert gf2_matpow(m, a + b) == gf2_matmul(gf2_matpow(m, a), gf2_matpow(m, b))

    def test_dimension_errors(self, rng):
        with pytest.raises(DimensionError):
            gf2_matvec(Gf2Matrix.zeros(3, 4), bv_random(3, 0.5, rng))
        with pytest.raises(DimensionError):
            gf2_matpow(Gf2Matrix.zeros(3, 4), 2)


class TestSeededRng:
    def test_reproducibility_first_10000(self):
        a = stream(99, 7).integers(0, 2**63, size=10000)
        b = stream(99, 7).integers(0, 2**63, size=10000)
        assert np.array_equal(a, b)

    def test_streams_are_independent(self):
        a = stream(99, 0).integers(0, 2**63, size=100)
        b = stream(99, 1).integers(0, 2**63, size=100)
        assert not np.array_equal(a, b)
