"""Hyperdimensional symbolic operations over binary vectors.

Vectors may be pure random hypervectors or CA reservoir features; the two
differ only in the recorded origin. The linear-rule symbolic operations
(OR/AND/XOR on reservoir features) need the feature's initial vector, so a
CA-originated hypervector keeps a reference to it and to the config that
produced it.

Grouping ("normalized vector summation") is bitwise majority with seeded
random tie-breaks, the n-operand extension of the two-operand insertion
rule used by the recurrent reservoir.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automata import LINEAR_RULES, Elementary
from .bitcore import BitVector, Permutation, bv_hamming, bv_permute
from .errors import DimensionError, ParameterError, StateError, UnsupportedRuleError
from .reservoir import ReservoirConfig, expand_feedforward


@dataclass(frozen=True)
class CaOrigin:
    """Provenance of a CA-feature hypervector: its config and initial state."""

    cfg: ReservoirConfig
    a0: BitVector


@dataclass(frozen=True)
class Hypervector:
    bits: BitVector
    origin: CaOrigin | None = None

    def __len__(self) -> int:
        return self.bits.length


def random_hypervector(dim: int, rng: np.random.Generator, density: float = 0.5) -> Hypervector:
    return Hypervector(bits=BitVector.from_array(rng.random(dim) < density))


def ca_hypervector(a0: BitVector, cfg: ReservoirConfig) -> Hypervector:
    """Expand an initial vector into its reservoir feature, keeping provenance."""
    feature = expand_feedforward(a0, cfg)
    return Hypervector(bits=feature.bits, origin=CaOrigin(cfg=cfg, a0=a0))


def _bits(v) -> BitVector:
    return v.bits if isinstance(v, Hypervector) else v


def bind_xor(a, b) -> Hypervector:
    """Self-inverse binding; an isometry of Hamming space."""
    return Hypervector(bits=_bits(a) ^ _bits(b))


def bind_permute(a, p: Permutation) -> Hypervector:
    return Hypervector(bits=bv_permute(_bits(a), p))


def bundle(vs, rng: np.random.Generator) -> Hypervector:
    """Bitwise majority; exact ties are broken uniformly at random."""
    if not vs:
        raise ParameterError("cannot bundle an empty list")
    arrays = [_bits(v).to_array() for v in vs]
    n = arrays[0].shape[0]
    if any(a.shape[0] != n for a in arrays):
        raise DimensionError("bundled vectors must share a length")
    total = np.sum(np.stack(arrays).astype(np.int32), axis=0)
    k = len(arrays)
    out = np.where(2 * total > k, 1, 0).astype(np.uint8)
    ties = 2 * total == k
    if ties.any():
        out[ties] = rng.integers(0, 2, size=int(ties.sum()), dtype=np.uint8)
    return Hypervector(bits=BitVector.from_array(out))


def make_triple(a, p, b) -> Hypervector:
    """T_{A,P,B}: XOR of object, predicate, object."""
    return Hypervector(bits=_bits(a) ^ _bits(p) ^ _bits(b))


def substitute(xa, a, b) -> Hypervector:
    """Swap a bound filler: (X xor A) -> (X xor B)."""
    return Hypervector(bits=_bits(xa) ^ _bits(a) ^ _bits(b))


def encode_sequence(items, p: Permutation, rng: np.random.Generator) -> Hypervector:
    """Convoluted-permutation sequence code: S = P(...P(P(P A)+B)+C)+D."""
    if not items:
        raise ParameterError("cannot encode an empty sequence")
    acc = bv_permute(_bits(items[0]), p)
    for item in items[1:]:
        tilted = bv_permute(acc, p)
        acc = _normalized_add_bits(tilted, _bits(item), rng)
    return Hypervector(bits=acc)


def _normalized_add_bits(a: BitVector, b: BitVector, rng) -> BitVector:
    from .reservoir import normalized_add

    return normalized_add(a, b, rng)


def cleanup(memory, query) -> tuple[int, int]:
    """Nearest stored item by Hamming distance.

    ``memory`` is a sequence of vectors; returns (index of winner, margin),
    margin being runner-up distance minus winner distance. Ties go to the
    lowest index.
    """
    if not memory:
        raise ParameterError("cleanup memory is empty")
    q = _bits(query)
    dists = np.array([bv_hamming(_bits(m), q) for m in memory])
    best = int(np.argmin(dists))
    if len(dists) == 1:
        return best, 0
    margin = int(np.partition(dists, 1)[1] - dists[best])
    return best, margin


def infer_grandmother_demo(dim: int, rng: np.random.Generator, n_distractors: int = 99) -> bool:
    """Rule inference round trip: mother + father composed into grandmother.

    Builds six role vectors and placeholder entities, forms the rule
    R = G_xz xor (M_xy + F_yz), applies it to the concrete facts, and
    succeeds iff cleanup over the true composite plus random distractors
    returns the true composite.
    """
    if dim < 1000:
        raise ParameterError("demo needs dim >= 1000 for reliable cleanup")
    m1, m2, f1, f2, g1, g2 = (random_hypervector(dim, rng) for _ in range(6))
    x, y, z = (random_hypervector(dim, rng) for _ in range(3))
    a, b, c = (random_hypervector(dim, rng) for _ in range(3))

    def relation(r1, r2, u, v):
        return bundle([bind_xor(r1, u), bind_xor(r2, v)], rng)

    rule = bind_xor(relation(g1, g2, x, z), bundle([relation(m1, m2, x, y), relation(f1, f2, y, z)], rng))
    inferred = bind_xor(rule, bundle([relation(m1, m2, a, b), relation(f1, f2, b, c)], rng))
    target = relation(g1, g2, a, c)
    memory = [target] + [random_hypervector(dim, rng) for _ in range(n_distractors)]
    winner, _ = cleanup(memory, inferred)
    return winner == 0


def analogy(x, concept1, concept2) -> Hypervector:
    """Map x across two concepts: x xor concept1 xor concept2."""
    return Hypervector(bits=_bits(x) ^ _bits(concept1) ^ _bits(concept2))


def analogy_demo(dim: int, rng: np.random.Generator) -> bool:
    """"What is the automobile of air?" on random categorical atoms.

    Land and air concepts bundle role-filler bindings; the analogy answer
    must clean up to the airplane atom among all atoms.
    """
    names = ["animal", "vehicle", "horse", "automobile", "bird", "airplane"]
    atoms = {n: random_hypervector(dim, rng) for n in names}
    land = bundle(
        [bind_xor(atoms["animal"], atoms["horse"]), bind_xor(atoms["vehicle"], atoms["automobile"])],
        rng,
    )
    air = bundle(
        [bind_xor(atoms["animal"], atoms["bird"]), bind_xor(atoms["vehicle"], atoms["airplane"])],
        rng,
    )
    answer = analogy(atoms["automobile"], land, air)
    memory = [atoms[n] for n in names]
    winner, _ = cleanup(memory, answer)
    return names[winner] == "airplane"


@dataclass(frozen=True, eq=False)
class Conceptor:
    """Sign-sum summary of a class's feature vectors."""

    signs: np.ndarray  # strictly +1/-1, int8
    label: int = 0

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int8)
        if not np.all(np.abs(s) == 1):
            raise ParameterError("conceptor entries must be +1 or -1")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)


def conceptor_build(features, rng: np.random.Generator, label: int = 0) -> Conceptor:
    """Per-position sign of the summed (2F - 1) maps; zero sums get random signs."""
    if not features:
        raise ParameterError("cannot build a conceptor from no features")
    arrays = [_bits(f).to_array().astype(np.int32) for f in features]
    n = arrays[0].shape[0]
    if any(a.shape[0] != n for a in arrays):
        raise DimensionError("conceptor features must share a length")
    total = np.sum(np.stack(arrays) * 2 - 1, axis=0)
    signs = np.sign(total).astype(np.int8)
    ties = signs == 0
    if ties.any():
        signs[ties] = rng.choice(np.array([-1, 1], dtype=np.int8), size=int(ties.sum()))
    return Conceptor(signs=signs, label=label)


def conceptor_classify(conceptors, f) -> int:
    """Label of the conceptor with the largest inner product against f (0/1).

    Ties go to the lowest class position in the list.
    """
    if not conceptors:
        raise ParameterError("no conceptors to classify against")
    fv = _bits(f).to_array().astype(np.int32)
    scores = []
    for c in conceptors:
        if c.signs.shape[0] != fv.shape[0]:
            raise DimensionError("feature and conceptor lengths differ")
        scores.append(int(fv @ c.signs))
    return conceptors[int(np.argmax(scores))].label


def _require_ca_pair(ca: Hypervector, cb: Hypervector) -> tuple[CaOrigin, CaOrigin]:
    if ca.origin is None or cb.origin is None:
        raise StateError("symbolic ops need CA-originated hypervectors with stored initials")
    rule = ca.origin.cfg.rule
    if not (isinstance(rule, Elementary) and rule.rule_number in LINEAR_RULES):
        raise UnsupportedRuleError(f"symbolic OR/AND need a linear rule {LINEAR_RULES}")
    same = (
        ca.origin.cfg.master_seed == cb.origin.cfg.master_seed
        and ca.origin.cfg.R == cb.origin.cfg.R
        and ca.origin.cfg.I == cb.origin.cfg.I
        and ca.origin.cfg.rule == cb.origin.cfg.rule
        and ca.origin.cfg.include_raw_input == cb.origin.cfg.include_raw_input
    )
    if not same:
        raise StateError("symbolic ops need both features from the same config")
    return ca.origin, cb.origin


def symbolic_or(ca: Hypervector, cb: Hypervector) -> Hypervector:
    """C_{A or B} = C_A xor C_{B - A}; exact for additive rules."""
    oa, ob = _require_ca_pair(ca, cb)
    b_minus_a = ob.a0 & ~oa.a0
    delta = expand_feedforward(b_minus_a, oa.cfg)
    union = oa.a0 | ob.a0
    return Hypervector(bits=ca.bits ^ delta.bits, origin=CaOrigin(cfg=oa.cfg, a0=union))


def symbolic_and(ca: Hypervector, cb: Hypervector) -> Hypervector:
    """C_{A and B} = C_A xor C_{A - B}; exact for additive rules."""
    oa, ob = _require_ca_pair(ca, cb)
    a_minus_b = oa.a0 & ~ob.a0
    delta = expand_feedforward(a_minus_b, oa.cfg)
    meet = oa.a0 & ob.a0
    return Hypervector(bits=ca.bits ^ delta.bits, origin=CaOrigin(cfg=oa.cfg, a0=meet))


def symbolic_xor(ca: Hypervector, cb: Hypervector) -> Hypervector:
    """C_{A xor B} = C_A xor C_B; the defining additivity identity."""
    if ca.origin is not None and cb.origin is not None:
        origin = CaOrigin(cfg=ca.origin.cfg, a0=ca.origin.a0 ^ cb.origin.a0)
    else:
        origin = None
    return Hypervector(bits=ca.bits ^ cb.bits, origin=origin)


HV_HEADER = b"CAHV"


def hypervector_to_bytes(v: Hypervector) -> bytes:
    """Serialize bits plus an origin tag (0 random, 1 ca-feature with initial)."""
    import struct

    if v.origin is None:
        head = struct.pack("<4sBQ", HV_HEADER, 0, v.bits.length)
        return head + v.bits.to_bytes()
    cfg = v.origin.cfg
    rule = cfg.rule
    rule_tag = rule.rule_number if isinstance(rule, Elementary) else -1
    geom = rule.n if isinstance(rule, Elementary) else (rule.rows << 16 | rule.cols)
    head = struct.pack(
        "<4sBQqqIIQQ",
        HV_HEADER,
        1,
        v.bits.length,
        rule_tag,
        geom,
        cfg.R,
        cfg.I,
        cfg.master_seed,
        v.origin.a0.length,
    )
    return head + v.bits.to_bytes() + v.origin.a0.to_bytes()


def hypervector_from_bytes(data: bytes) -> Hypervector:
    import struct

    from .automata import GameOfLife

    magic, tag, length = struct.unpack_from("<4sBQ", data)
    if magic != HV_HEADER:
        raise ParameterError("not a serialized hypervector")
    if tag == 0:
        off = struct.calcsize("<4sBQ")
        return Hypervector(bits=BitVector.from_bytes(data[off:], length))
    fmt = "<4sBQqqIIQQ"
    _, _, length, rule_tag, geom, r, i, seed, a0_len = struct.unpack_from(fmt, data)
    off = struct.calcsize(fmt)
    nbytes = (length + 7) // 8
    bits = BitVector.from_bytes(data[off : off + nbytes], length)
    a0 = BitVector.from_bytes(data[off + nbytes :], a0_len)
    if rule_tag >= 0:
        rule = Elementary(int(rule_tag), int(geom))
    else:
        rule = GameOfLife(int(geom) >> 16, int(geom) & 0xFFFF)
    include_raw = length == a0_len * i * r + a0_len
    cfg = ReservoirConfig(rule=rule, R=int(r), I=int(i), master_seed=int(seed), include_raw_input=include_raw)
    return Hypervector(bits=bits, origin=CaOrigin(cfg=cfg, a0=a0))
