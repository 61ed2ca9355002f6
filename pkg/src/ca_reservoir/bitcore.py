"""Bit-packed binary vectors, permutations, GF(2) matrices, and seeded RNG.

Layout convention used everywhere: logical bit ``i`` of a vector lives in
64-bit word ``i // 64`` at bit position ``i % 64`` (little-endian within the
logical index space). Serialized forms are the same bytes in little-endian
word order, truncated to ``ceil(length / 8)`` bytes. Bits at indices at or
past ``length`` are always zero, so word-wise equality and popcounts are
well defined.

Randomness: all randomness in the package flows from Philox 4x64
counter-based generators. ``stream(master_seed, index)`` keys a generator
with the pair ``(master_seed, index)``; distinct indices give independent
streams, and the same pair reproduces the same stream bit-exactly on every
platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError

WORD_BITS = 64


def stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent reproducible generator for (master_seed, index)."""
    key = np.array([np.uint64(master_seed), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 array (last axis = bit index) into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    nwords = (n + WORD_BITS - 1) // WORD_BITS
    by = np.packbits(bits, axis=-1, bitorder="little")
    pad = nwords * 8 - by.shape[-1]
    if pad:
        by = np.concatenate([by, np.zeros(by.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1)
    return by.view("<u8")


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns a uint8 0/1 array of length ``n``."""
    by = np.asarray(words, dtype="<u8").view(np.uint8)
    bits = np.unpackbits(by, axis=-1, bitorder="little")
    return bits[..., :n]


class BitVector:
    """Immutable bit-packed binary vector of fixed length.

    The universal carrier for automaton states, reservoir features, and
    hypervectors. Construct with :meth:`from_array`, :meth:`from_string`,
    or :func:`bv_random`.
    """

    __slots__ = ("length", "words")

    def __init__(self, length: int, words: np.ndarray):
        if length < 0:
            raise ParameterError("length must be nonnegative")
        nwords = (length + WORD_BITS - 1) // WORD_BITS
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (nwords,):
            raise DimensionError(f"expected {nwords} words for length {length}")
        # canonical padding: bits >= length are zero
        if length % WORD_BITS and nwords:
            mask = np.uint64((1 << (length % WORD_BITS)) - 1)
            if words[-1] & ~mask:
                words = words.copy()
                words[-1] &= mask
        words.setflags(write=False)
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "words", words)

    def __setattr__(self, *a):  # length is immutable after construction
        raise AttributeError("BitVector is immutable")

    @classmethod
    def from_array(cls, bits: np.ndarray) -> "BitVector":
        bits = np.asarray(bits)
        if bits.ndim != 1:
            raise DimensionError("expected a 1-D array of bits")
        return cls(bits.shape[0], pack_bits(bits.astype(np.uint8)))

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        """Parse the fixture text form: '0'/'1' characters, index 0 leftmost."""
        if text.strip("01"):
            raise ParameterError("bit string may contain only '0' and '1'")
        return cls.from_array(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, np.zeros((n + WORD_BITS - 1) // WORD_BITS, dtype=np.uint64))

    def to_array(self) -> np.ndarray:
        return unpack_bits(self.words, self.length)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.to_array())

    def to_bytes(self) -> bytes:
        """Packed little-endian bytes, ceil(length/8) of them."""
        return self.words.tobytes()[: (self.length + 7) // 8]

    @classmethod
    def from_bytes(cls, data: bytes, length: int) -> "BitVector":
        nwords = (length + WORD_BITS - 1) // WORD_BITS
        buf = bytearray(nwords * 8)
        buf[: len(data)] = data
        return cls(length, np.frombuffer(bytes(buf), dtype="<u8").astype(np.uint64))

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return int((self.words[i // WORD_BITS] >> np.uint64(i % WORD_BITS)) & np.uint64(1))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and self.length == other.length
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.length, self.words.tobytes()))

    def __repr__(self) -> str:
        if self.length <= 64:
            return f"BitVector('{self.to_string()}')"
        return f"BitVector(length={self.length}, popcount={self.popcount()})"

    def _check_same(self, other: "BitVector"):
        if not isinstance(other, BitVector):
            raise TypeError("expected a BitVector")
        if self.length != other.length:
            raise DimensionError(f"length mismatch: {self.length} vs {other.length}")

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check_same(other)
        return BitVector(self.length, self.words ^ other.words)

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check_same(other)
        return BitVector(self.length, self.words & other.words)

    def __or__(self, other: "BitVector") -> "BitVector":
        self._check_same(other)
        return BitVector(self.length, self.words | other.words)

    def __invert__(self) -> "BitVector":
        return BitVector(self.length, ~self.words)  # padding re-canonicalized by ctor


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection on 0..n-1 with recorded seed provenance."""

    mapping: np.ndarray
    provenance: tuple | None = None

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.mapping, other.mapping)

    def __hash__(self) -> int:
        return hash(self.mapping.tobytes())

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int64)
        n = m.shape[0]
        if m.ndim != 1 or not np.array_equal(np.sort(m), np.arange(n)):
            raise ParameterError("mapping must contain each index 0..n-1 exactly once")
        m.setflags(write=False)
        object.__setattr__(self, "mapping", m)

    def __len__(self) -> int:
        return int(self.mapping.shape[0])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n), provenance=("identity",))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, provenance: tuple | None = None) -> "Permutation":
        # Generator.permutation is the unbiased Fisher-Yates shuffle.
        return cls(rng.permutation(n), provenance=provenance)

    def inverse(self) -> "Permutation":
        return Permutation(np.argsort(self.mapping), provenance=(self.provenance, "inverse"))


def bv_random(n: int, nz: float, rng: np.random.Generator) -> BitVector:
    """Random vector with each bit independently 1 with probability ``nz``."""
    if not 0.0 <= nz <= 1.0:
        raise ParameterError(f"nz must be in [0, 1], got {nz}")
    if n < 1:
        raise ParameterError("n must be >= 1")
    return BitVector.from_array(rng.random(n) < nz)


def bv_hamming(a: BitVector, b: BitVector) -> int:
    """Number of positions where a and b differ."""
    a._check_same(b)
    return int(np.bitwise_count(a.words ^ b.words).sum())


def bv_permute(v: BitVector, p: Permutation) -> BitVector:
    """out[i] = v[p.mapping[i]]; preserves popcount."""
    if v.length != len(p):
        raise DimensionError(f"length mismatch: {v.length} vs {len(p)}")
    return BitVector.from_array(v.to_array()[p.mapping])


def bv_rotate(v: BitVector, k: int) -> BitVector:
    """Cyclic rotation: out[i] = v[(i - k) mod n] (k=+1 shifts content right)."""
    return BitVector.from_array(np.roll(v.to_array(), k))


class Gf2Matrix:
    """Dense binary matrix with bit-packed rows, arithmetic over GF(2)."""

    __slots__ = ("rows", "cols", "row_words")

    def __init__(self, rows: int, cols: int, row_words: np.ndarray):
        nwords = (cols + WORD_BITS - 1) // WORD_BITS
        row_words = np.asarray(row_words, dtype=np.uint64)
        if row_words.shape != (rows, nwords):
            raise DimensionError("row_words shape does not match rows/cols")
        if cols % WORD_BITS and nwords:
            mask = np.uint64((1 << (cols % WORD_BITS)) - 1)
            row_words = row_words.copy()
            row_words[:, -1] &= mask
        row_words.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "row_words", row_words)

    def __setattr__(self, *a):
        raise AttributeError("Gf2Matrix is immutable")

    @classmethod
    def from_array(cls, a: np.ndarray) -> "Gf2Matrix":
        a = np.asarray(a, dtype=np.uint8)
        if a.ndim != 2:
            raise DimensionError("expected a 2-D 0/1 array")
        return cls(a.shape[0], a.shape[1], pack_bits(a))

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Gf2Matrix":
        return cls.from_array(np.zeros((rows, cols), dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        return unpack_bits(self.row_words, self.cols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Gf2Matrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and bool(np.array_equal(self.row_words, other.row_words))
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.row_words.tobytes()))

    def __repr__(self):
        return f"Gf2Matrix({self.rows}x{self.cols})"


def gf2_matvec(m: Gf2Matrix, v: BitVector) -> BitVector:
    """Matrix-vector product over GF(2): out[i] = XOR_j (M[i,j] AND v[j])."""
    if m.cols != v.length:
        raise DimensionError(f"matrix cols {m.cols} != vector length {v.length}")
    parities = np.bitwise_count(m.row_words & v.words).sum(axis=1) & 1
    return BitVector.from_array(parities.astype(np.uint8))


def gf2_matmul(a: Gf2Matrix, b: Gf2Matrix) -> Gf2Matrix:
    """Matrix product over GF(2)."""
    if a.cols != b.rows:
        raise DimensionError(f"inner dimensions differ: {a.cols} vs {b.rows}")
    bt = pack_bits(b.to_array().T)  # columns of b, packed
    # parity of popcount(row_i & col_j); broadcast over word axis
    pops = np.bitwise_count(a.row_words[:, None, :] & bt[None, :, :]).sum(axis=2)
    return Gf2Matrix.from_array((pops & 1).astype(np.uint8))


def gf2_matpow(m: Gf2Matrix, k: int) -> Gf2Matrix:
    """m**k over GF(2) by square-and-multiply; k=0 gives the identity."""
    if m.rows != m.cols:
        raise DimensionError("matrix power requires a square matrix")
    if k < 0:
        raise ParameterError("exponent must be >= 0")
    result = Gf2Matrix.identity(m.rows)
    base = m
    while k:
        if k & 1:
            result = gf2_matmul(result, base)
        k >>= 1
        if k:
            base = gf2_matmul(base, base)
    return result
