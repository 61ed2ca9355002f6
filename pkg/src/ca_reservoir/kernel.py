"""GF(2) kernel machinery for the linear rules.

For rules 90 and 150 the whole feedforward expansion is one binary matrix
M (the R*I stacked blocks M_N^i P_r mod 2). Its integer Gram matrix
M_K = sum of B^T B over blocks, together with the eigenvalue diagonal s of
M_K, supports three scalar features per input pair:

  distance mode, on d0 = a0 XOR b0:   e1 = d0.d0, e2 = d0' M_K d0, e3 = d0' diag(s) d0
  dot mode, on the raw vectors:       f1 = a0.b0, f2 = (a0*s).b0,  f3 = a0' M_K b0

A three-coefficient regression of the true feature-space metric on these
features yields a kernel whose evaluation is linear in N, and whose
support-vector sums collapse into a single precomputed vector Q.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .automata import LINEAR_RULES, Elementary, step_elementary_batch
from .bitcore import BitVector
from .eigen import jacobi_eigvalsh
from .errors import (
    DimensionError,
    ParameterError,
    StateError,
    UnsupportedRuleError,
)
from .readout import blocked_gram
from .reservoir import ReservoirConfig, expand_batch

MODE_DISTANCE = "distance"
MODE_DOT = "dot"


@dataclass
class KernelModel:
    """Learned metric/kernel for one reservoir config."""

    n: int
    mk: np.ndarray  # (n, n) symmetric nonnegative int64
    s: np.ndarray  # (n,) nonnegative float64, descending
    mode: str
    coeffs: np.ndarray | None = None  # (k1, k2, k3)
    diagnostics: dict | None = None

    def require_fitted(self):
        if self.coeffs is None:
            raise StateError("kernel model has no fitted coefficients")

    def to_bytes(self) -> bytes:
        head = struct.pack(
            "<4sHBBI",
            b"CAKM",
            1,
            0 if self.mode == MODE_DISTANCE else 1,
            0 if self.coeffs is None else 1,
            self.n,
        )
        body = self.mk.astype("<i8").tobytes() + self.s.astype("<f8").tobytes()
        if self.coeffs is not None:
            body += np.asarray(self.coeffs, dtype="<f8").tobytes()
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "KernelModel":
        magic, version, mode_id, has_coeffs, n = struct.unpack_from("<4sHBBI", data)
        if magic != b"CAKM" or version != 1:
            raise ParameterError("not a serialized kernel model")
        off = struct.calcsize("<4sHBBI")
        mk = np.frombuffer(data, dtype="<i8", count=n * n, offset=off).reshape(n, n).copy()
        off += 8 * n * n
        s = np.frombuffer(data, dtype="<f8", count=n, offset=off).copy()
        off += 8 * n
        coeffs = None
        if has_coeffs:
            coeffs = np.frombuffer(data, dtype="<f8", count=3, offset=off).copy()
        mode = MODE_DISTANCE if mode_id == 0 else MODE_DOT
        return cls(n=n, mk=mk, s=s, mode=mode, coeffs=coeffs)


def _require_linear(cfg: ReservoirConfig):
    if not (isinstance(cfg.rule, Elementary) and cfg.rule.rule_number in LINEAR_RULES):
        raise UnsupportedRuleError(
            f"kernel construction needs a linear rule {LINEAR_RULES}, got {cfg.rule}"
        )


def build_MK(cfg: ReservoirConfig) -> tuple[np.ndarray, np.ndarray]:
    """Accumulate M_K = sum over (r, i) of B^T B and its eigenvalue diagonal.

    Blocks are never materialized: with G_i the integer Gram of M_N^i, each
    permuted block contributes G_i reindexed by the inverse permutation.
    """
    _require_linear(cfg)
    n = cfg.cells
    rule_number = cfg.rule.rule_number
    # columns of M_N^i, evolved as ring states
    cols = np.eye(n, dtype=np.uint8)
    grams = []
    for _ in range(cfg.I):
        cols = step_elementary_batch(cols, rule_number)
        ci = cols.astype(np.int64)
        grams.append(ci @ ci.T)  # (M^i)^T M^i since rows of `cols` are M^i columns
    mk = np.zeros((n, n), dtype=np.int64)
    for p in cfg.permutations:
        inv = p.inverse().mapping
        ix = np.ix_(inv, inv)
        for g in grams:
            mk += g[ix]
    s = np.clip(jacobi_eigvalsh(mk.astype(np.float64)), 0.0, None)
    return mk, s


def build_model(cfg: ReservoirConfig, mode: str = MODE_DISTANCE) -> KernelModel:
    if mode not in (MODE_DISTANCE, MODE_DOT):
        raise ParameterError(f"unknown mode {mode!r}")
    mk, s = build_MK(cfg)
    return KernelModel(n=cfg.cells, mk=mk, s=s, mode=mode)


def _pair_arrays(a0, b0, n: int) -> tuple[np.ndarray, np.ndarray]:
    a = a0.to_array() if isinstance(a0, BitVector) else np.asarray(a0, dtype=np.uint8)
    b = b0.to_array() if isinstance(b0, BitVector) else np.asarray(b0, dtype=np.uint8)
    if a.shape[-1] != n or b.shape[-1] != n:
        raise DimensionError(f"inputs must have length {n}")
    return a, b


def distance_features(a0, b0, model: KernelModel) -> tuple[float, float, float]:
    """(e1, e2, e3) quadratic forms of d0 = a0 XOR b0."""
    a, b = _pair_arrays(a0, b0, model.n)
    d = (a ^ b).astype(np.float64)
    e1 = float(d @ d)
    e2 = float(d @ model.mk.astype(np.float64) @ d)
    e3 = float((d * model.s) @ d)
    return e1, e2, e3


def dot_features(a0, b0, model: KernelModel) -> tuple[float, float, float]:
    """(f1, f2, f3) bilinear forms of the raw 0/1 vectors."""
    a, b = _pair_arrays(a0, b0, model.n)
    af = a.astype(np.float64)
    bf = b.astype(np.float64)
    f1 = float(af @ bf)
    f2 = float((af * model.s) @ bf)
    f3 = float(af @ model.mk.astype(np.float64) @ bf)
    return f1, f2, f3


def _features_for_pairs(
    left: np.ndarray, right: np.ndarray, model: KernelModel
) -> np.ndarray:
    """Stacked (e|f)1..3 for aligned pair arrays, shape (pairs, 3)."""
    mkf = model.mk.astype(np.float64)
    if model.mode == MODE_DISTANCE:
        d = (left ^ right).astype(np.float64)
        c1 = (d * d).sum(axis=1)
        c2 = ((d @ mkf) * d).sum(axis=1)
        c3 = (d * model.s * d).sum(axis=1)
    else:
        a = left.astype(np.float64)
        b = right.astype(np.float64)
        c1 = (a * b).sum(axis=1)
        c2 = (a * model.s * b).sum(axis=1)
        c3 = ((a @ mkf) * b).sum(axis=1)
    return np.stack([c1, c2, c3], axis=1)


def true_feature_metric(a0, b0, cfg: ReservoirConfig, mode: str = MODE_DISTANCE) -> float:
    """Ground-truth metric from explicitly materialized feature vectors.

    Distance mode is the squared Euclidean (= Hamming) distance between the
    two expansions; dot mode is their inner product. The raw-input segment
    is excluded: the metric measures the evolved volume only.
    """
    cfg_noraw = replace(cfg, include_raw_input=False)
    a, b = _pair_arrays(a0, b0, cfg.cells)
    feats = expand_batch(np.stack([a, b]), cfg_noraw)
    if mode == MODE_DISTANCE:
        return float(np.sum(feats[0] != feats[1]))
    if mode == MODE_DOT:
        return float(np.sum((feats[0] & feats[1]).astype(np.int64)))
    raise ParameterError(f"unknown mode {mode!r}")


def true_metric_matrix(vectors: np.ndarray, cfg: ReservoirConfig, mode: str) -> np.ndarray:
    """All pairwise true metrics for a stack of inputs (Gram-based)."""
    cfg_noraw = replace(cfg, include_raw_input=False)
    feats = expand_batch(vectors, cfg_noraw)
    g = blocked_gram(feats)
    if mode == MODE_DOT:
        return g
    pc = np.diag(g)
    return pc[:, None] + pc[None, :] - 2.0 * g


def fit_metric(
    pairs,
    cfg: ReservoirConfig,
    mode: str = MODE_DISTANCE,
    train_frac: float = 0.8,
    split_rng: np.random.Generator | None = None,
) -> KernelModel:
    """Regress the true feature metric on the three scalar features.

    ``pairs`` is a sequence of (a0, b0); duplicated vectors are expanded only
    once. The fit has no intercept (three coefficients exactly). Train/test
    Pearson correlations land in ``model.diagnostics``; with no held-out
    pairs the test correlation is NaN.
    """
    lefts, rights = [], []
    uniq: dict[bytes, int] = {}
    vecs: list[np.ndarray] = []

    def intern(v) -> int:
        arr = v.to_array() if isinstance(v, BitVector) else np.asarray(v, dtype=np.uint8)
        key = arr.tobytes()
        if key not in uniq:
            uniq[key] = len(vecs)
            vecs.append(arr)
        return uniq[key]

    for a0, b0 in pairs:
        lefts.append(intern(a0))
        rights.append(intern(b0))
    if len(lefts) < 3:
        raise ParameterError("need at least 3 pairs to fit three coefficients")
    vectors = np.stack(vecs)
    li = np.asarray(lefts)
    ri = np.asarray(rights)

    model = build_model(cfg, mode)
    truth = true_metric_matrix(vectors, cfg, mode)[li, ri]
    design = _features_for_pairs(vectors[li], vectors[ri], model)

    n_pairs = len(li)
    if split_rng is None:
        train_idx = np.arange(n_pairs)
        test_idx = np.arange(0)
    else:
        order = split_rng.permutation(n_pairs)
        n_train = int(round(train_frac * n_pairs))
        train_idx, test_idx = order[:n_train], order[n_train:]

    coeffs, collinear = _lstsq_no_intercept(design[train_idx], truth[train_idx])
    diagnostics = {
        "train_pearson": _pearson(design[train_idx] @ coeffs, truth[train_idx]),
        "test_pearson": _pearson(design[test_idx] @ coeffs, truth[test_idx])
        if len(test_idx)
        else float("nan"),
        "collinear": collinear,
        "n_train_pairs": int(len(train_idx)),
        "n_test_pairs": int(len(test_idx)),
    }
    model.coeffs = coeffs
    model.diagnostics = diagnostics
    return model


def _lstsq_no_intercept(design: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, bool]:
    gram = design.T @ design
    rhs = design.T @ target
    collinear = np.linalg.matrix_rank(gram) < gram.shape[0]
    if collinear:
        gram = gram + 1e-10 * np.eye(gram.shape[0])
    return np.linalg.solve(gram, rhs), bool(collinear)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) < 2 or np.std(a) == 0 or np.std(b) == 0:
        return float("nan")
    return float(np.corrcoef(a, b)[0, 1])


def kernel_value(x, y, model: KernelModel) -> float:
    """k1*f1 + k2*f2 + k3*f3 for a dot-mode fitted model."""
    if model.mode != MODE_DOT:
        raise StateError("kernel_value needs a dot-mode model")
    model.require_fitted()
    f = dot_features(x, y, model)
    return float(np.dot(model.coeffs, f))


def kernel_matrix(data, model: KernelModel) -> np.ndarray:
    """Pairwise kernel values; symmetric by construction."""
    if model.mode != MODE_DOT:
        raise StateError("kernel_matrix needs a dot-mode model")
    model.require_fitted()
    x = np.stack([d.to_array() if isinstance(d, BitVector) else np.asarray(d) for d in data])
    return _cross_kernel(x, x, model)


def _cross_kernel(a: np.ndarray, b: np.ndarray, model: KernelModel) -> np.ndarray:
    af = a.astype(np.float64)
    bf = b.astype(np.float64)
    k1, k2, k3 = model.coeffs
    out = k1 * (af @ bf.T)
    out += k2 * ((af * model.s) @ bf.T)
    out += k3 * (af @ model.mk.astype(np.float64) @ bf.T)
    return out


def psd_jitter(k: np.ndarray, start: float = 1e-8) -> tuple[np.ndarray, float]:
    """Escalate diagonal jitter (x10) until the smallest eigenvalue is >= 0.

    The learned kernel carries no positive-semidefiniteness guarantee; this
    is the minimal repair before using it in a ridge system.
    """
    lo = jacobi_eigvalsh(k)[-1]
    if lo >= 0:
        return k, 0.0
    jitter = start
    while jitter < 1e12:
        if lo + jitter >= 0:
            return k + jitter * np.eye(k.shape[0]), jitter
        jitter *= 10.0
    raise StateError("kernel matrix could not be repaired to PSD")


@dataclass
class PrecomputedReadout:
    """Support-vector sums collapsed into one length-N vector."""

    q: np.ndarray


def precompute_Q(supports, alpha, y, model: KernelModel) -> PrecomputedReadout:
    """Q_j = sum_i alpha_i y_i (k1 Y_ij + k2 U_ij + k3 Z_ij).

    U = s .* Y and Z = M_K Y are folded in analytically, so the prediction
    w.X = sum_j X_j Q_j runs in time linear in N.
    """
    if model.mode != MODE_DOT:
        raise StateError("precompute_Q needs a dot-mode model")
    model.require_fitted()
    ymat = np.stack(
        [v.to_array() if isinstance(v, BitVector) else np.asarray(v) for v in supports]
    ).astype(np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    yvals = np.asarray(y, dtype=np.float64)
    if not (len(ymat) == len(alpha) == len(yvals)):
        raise DimensionError("supports, alpha, and y must have equal lengths")
    w = alpha * yvals
    base = ymat.T @ w  # sum_i w_i Y^(i)
    k1, k2, k3 = model.coeffs
    q = k1 * base + k2 * (model.s * base) + k3 * (model.mk.astype(np.float64) @ base)
    return PrecomputedReadout(q=q)


def linear_predict(readout: PrecomputedReadout, x) -> float:
    xv = x.to_array() if isinstance(x, BitVector) else np.asarray(x)
    if xv.shape[-1] != readout.q.shape[0]:
        raise DimensionError("input length does not match the precomputed readout")
    return float(xv.astype(np.float64) @ readout.q)


def kernel_classify(
    train_x,
    train_labels,
    test_x,
    model: KernelModel,
    ridge: float = 1e-3,
) -> tuple[np.ndarray, dict]:
    """One-vs-rest kernel ridge classification on the jittered kernel matrix.

    Ties break toward the lower class index (argmax semantics). Returns the
    predicted labels and a diagnostics dict including the jitter used.
    """
    labels = np.asarray(train_labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ParameterError("need at least two classes")
    xtr = np.stack(
        [v.to_array() if isinstance(v, BitVector) else np.asarray(v) for v in train_x]
    )
    xte = np.stack(
        [v.to_array() if isinstance(v, BitVector) else np.asarray(v) for v in test_x]
    )
    k = _cross_kernel(xtr, xtr, model)
    k = 0.5 * (k + k.T)
    kj, jitter = psd_jitter(k)
    targets = np.where(labels[:, None] == classes[None, :], 1.0, -1.0)
    alphas = np.linalg.solve(kj + ridge * np.eye(len(xtr)), targets)
    scores = _cross_kernel(xte, xtr, model) @ alphas
    pred = classes[np.argmax(scores, axis=1)]
    return pred, {"jitter": jitter, "classes": classes}
