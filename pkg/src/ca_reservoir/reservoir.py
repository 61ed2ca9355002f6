"""Input encoding and CA feature expansion.

Feedforward expansion: the input is permuted R ways, each permuted copy is
evolved I steps, and the iterates are concatenated lane by lane. The feature
layout is fixed: for r = 0..R-1, then k = 1..I, the state A_k^{P_r} occupies
the next N bits; when ``include_raw_input`` is set the raw (unpermuted)
input occupies the final N bits. Permutation r is derived from
``stream(master_seed, r)``, so a config is fully determined by
(rule, R, I, master_seed, include_raw_input).

Recurrent expansion treats the concatenated N*R vector as one ring; new
inputs are inserted with normalized addition (ties broken by the caller's
rng stream).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .automata import (
    Elementary,
    GameOfLife,
    RuleSpec,
    evolve_elementary_batch,
    evolve_life_batch,
)
from .bitcore import BitVector, Permutation, bv_permute, stream
from .errors import DimensionError, ParameterError

_HEADER = struct.Struct("<IIII")  # N, R, I, flags


@dataclass(frozen=True)
class ReservoirConfig:
    rule: RuleSpec
    R: int
    I: int
    master_seed: int
    include_raw_input: bool = True
    explicit_permutations: tuple[Permutation, ...] | None = field(
        default=None, repr=False, compare=False
    )
    permutations: tuple[Permutation, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.R < 1 or self.I < 1:
            raise ParameterError("R and I must both be >= 1")
        cells = self.rule.cell_count
        if self.explicit_permutations is not None:
            perms = tuple(self.explicit_permutations)
            if len(perms) != self.R or any(len(p) != cells for p in perms):
                raise DimensionError("need R permutations of the cell count")
        else:
            perms = tuple(
                Permutation.random(
                    cells, stream(self.master_seed, r), provenance=("perm", self.master_seed, r)
                )
                for r in range(self.R)
            )
        object.__setattr__(self, "permutations", perms)

    @property
    def cells(self) -> int:
        return self.rule.cell_count

    @property
    def feature_length(self) -> int:
        return self.cells * self.I * self.R + (self.cells if self.include_raw_input else 0)

    def perm_matrix(self) -> np.ndarray:
        """All permutation mappings stacked, shape (R, cells)."""
        return np.stack([p.mapping for p in self.permutations])


@dataclass(frozen=True)
class SpaceTimeFeature:
    """Concatenated CA evolution of one input under a config."""

    bits: BitVector
    n: int
    r: int
    i: int
    include_raw: bool

    def __post_init__(self):
        expect = self.n * self.i * self.r + (self.n if self.include_raw else 0)
        if self.bits.length != expect:
            raise DimensionError(f"feature length {self.bits.length} != {expect}")

    def lane_iterate(self, r: int, k: int) -> BitVector:
        """Slice A_k^{P_r} (k counted from 1) back out of the feature."""
        if not 0 <= r < self.r or not 1 <= k <= self.i:
            raise ParameterError(f"no slice (r={r}, k={k}) in this feature")
        start = (r * self.i + (k - 1)) * self.n
        return BitVector.from_array(self.bits.to_array()[start : start + self.n])

    def raw_input(self) -> BitVector:
        if not self.include_raw:
            raise ParameterError("feature was built without the raw-input segment")
        return BitVector.from_array(self.bits.to_array()[-self.n :])

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(self.n, self.r, self.i, 1 if self.include_raw else 0)
        return head + self.bits.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "SpaceTimeFeature":
        n, r, i, flags = _HEADER.unpack_from(data)
        include_raw = bool(flags & 1)
        length = n * i * r + (n if include_raw else 0)
        bits = BitVector.from_bytes(data[_HEADER.size :], length)
        return cls(bits=bits, n=n, r=r, i=i, include_raw=include_raw)


def encode_binary(input_bits: BitVector, p: Permutation) -> BitVector:
    """Random mapping of binary input onto the cells: A_0^P."""
    return bv_permute(input_bits, p)


def encode_real(values: np.ndarray, weights: np.ndarray, threshold: float = 0.0) -> BitVector:
    """Binarize a real input: cell i fires iff (W @ values)[i] > threshold."""
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2 or values.ndim != 1 or weights.shape[1] != values.shape[0]:
        raise DimensionError(
            f"projection shape {weights.shape} incompatible with input length {values.shape}"
        )
    return BitVector.from_array((weights @ values > threshold).astype(np.uint8))


def _evolve_lane(permuted: np.ndarray, rule: RuleSpec, iters: int) -> np.ndarray:
    """Iterates (iters, batch, cells) of a batch of permuted initial states."""
    if isinstance(rule, Elementary):
        return evolve_elementary_batch(permuted, rule.rule_number, iters)
    boards = permuted.reshape(permuted.shape[0], rule.rows, rule.cols)
    raw = evolve_life_batch(boards, iters)
    return raw.reshape(iters, permuted.shape[0], rule.cell_count)


def expand_batch(inputs: np.ndarray, cfg: ReservoirConfig) -> np.ndarray:
    """Feedforward features for a batch of inputs, shape (batch, feature_length)."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.uint8))
    if inputs.shape[1] != cfg.cells:
        raise DimensionError(f"input length {inputs.shape[1]} != cell count {cfg.cells}")
    b = inputs.shape[0]
    out = np.empty((b, cfg.feature_length), dtype=np.uint8)
    n, i = cfg.cells, cfg.I
    for r, p in enumerate(cfg.permutations):
        iterates = _evolve_lane(inputs[:, p.mapping], cfg.rule, i)
        lane = np.moveaxis(iterates, 0, 1).reshape(b, i * n)
        out[:, r * i * n : (r + 1) * i * n] = lane
    if cfg.include_raw_input:
        out[:, -n:] = inputs
    return out


def expand_feedforward(input_bits: BitVector, cfg: ReservoirConfig) -> SpaceTimeFeature:
    """Expand one input into its space-time feature vector."""
    feats = expand_batch(input_bits.to_array()[None, :], cfg)
    return SpaceTimeFeature(
        bits=BitVector.from_array(feats[0]),
        n=cfg.cells,
        r=cfg.R,
        i=cfg.I,
        include_raw=cfg.include_raw_input,
    )


def covariance_batch(inputs: np.ndarray, iters: int) -> np.ndarray:
    """C_1..C_I stacked, shape (iters, batch, n): C_k = rot(+k) XOR rot(-k)."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.uint8))
    return np.stack(
        [np.roll(inputs, k, axis=1) ^ np.roll(inputs, -k, axis=1) for k in range(1, iters + 1)]
    )


def covariance_features(a0: BitVector, iters: int) -> BitVector:
    """Local covariance feature [C_1; ...; C_I] of one ring state."""
    if a0.length < 3:
        raise ParameterError("ring length must be >= 3")
    if iters < 1:
        raise ParameterError("iteration count must be >= 1")
    ck = covariance_batch(a0.to_array()[None, :], iters)
    return BitVector.from_array(ck[:, 0, :].reshape(-1))


def normalized_add_arrays(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Elementwise normalized addition: 1+1 -> 1, 0+0 -> 0, ties random."""
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    coins = rng.integers(0, 2, size=a.shape, dtype=np.uint8)
    total = a.astype(np.uint8) + b.astype(np.uint8)
    return np.where(total == 2, 1, np.where(total == 0, 0, coins)).astype(np.uint8)


def normalized_add(a: BitVector, b: BitVector, rng: np.random.Generator) -> BitVector:
    a._check_same(b)
    return BitVector.from_array(normalized_add_arrays(a.to_array(), b.to_array(), rng))


@dataclass
class RecurrentState:
    """Live CA state over all permutation lanes plus an insertion counter."""

    current: BitVector
    step_index: int = 0


def _permute_concat(x: np.ndarray, cfg: ReservoirConfig) -> np.ndarray:
    return np.concatenate([x[p.mapping] for p in cfg.permutations])


def recurrent_init(x0: BitVector, cfg: ReservoirConfig) -> RecurrentState:
    """State X_0^P: the R permuted copies of the first input, concatenated."""
    if x0.length != cfg.cells:
        raise DimensionError(f"input length {x0.length} != cell count {cfg.cells}")
    return RecurrentState(current=BitVector.from_array(_permute_concat(x0.to_array(), cfg)))


def recurrent_step(
    state: RecurrentState,
    x_t: BitVector | None,
    cfg: ReservoirConfig,
    rng: np.random.Generator,
) -> tuple[RecurrentState, BitVector]:
    """Evolve the joint ring I steps, then insert the next input (if any).

    Returns the successor state and the step feature [A_1; ...; A_I] of
    length N*R*I. The N*R vector evolves as one ring, so lanes interact
    across their boundaries.
    """
    if x_t is not None and x_t.length != cfg.cells:
        raise DimensionError(f"input length {x_t.length} != cell count {cfg.cells}")
    if not isinstance(cfg.rule, Elementary):
        ring = cfg.cells * cfg.R
        if cfg.rule.cell_count != ring:
            raise DimensionError(
                "recurrent mode needs the rule geometry to accept the joint N*R vector"
            )
    cur = state.current.to_array()[None, :]
    iterates = _evolve_lane(cur, _recurrent_rule(cfg), cfg.I)
    feature = BitVector.from_array(iterates[:, 0, :].reshape(-1))
    last = iterates[-1, 0]
    if x_t is not None:
        inserted = normalized_add_arrays(last, _permute_concat(x_t.to_array(), cfg), rng)
    else:
        inserted = last
    new_state = RecurrentState(
        current=BitVector.from_array(inserted), step_index=state.step_index + (x_t is not None)
    )
    return new_state, feature


def _recurrent_rule(cfg: ReservoirConfig) -> RuleSpec:
    """The rule applied to the joint N*R ring."""
    if isinstance(cfg.rule, Elementary):
        return Elementary(cfg.rule.rule_number, cfg.cells * cfg.R)
    return cfg.rule
