"""Linear readout by ridge-jittered least squares on binary features.

Features enter the regression as reals 0.0/1.0. The default jitter 1e-8
stands in for the exact pseudoinverse; its effect is far below the 0.5
decision threshold used for binary targets. When the feature count exceeds
the sample count the Gram path W = X^T (X X^T + lam I)^-1 Y is used, else
the normal equations (X^T X + lam I)^-1 X^T Y; the two agree to rounding.

The Gram/normal products are accumulated from fixed-size row blocks in
float32 (exact for 0/1 dot products up to 2**24) into float64, which pins
the summation order and keeps results reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .bitcore import BitVector
from .errors import DimensionError, ParameterError

DEFAULT_LAMBDA = 1e-8
_BLOCK_ROWS = 8192


@dataclass
class LinearReadout:
    """Fitted readout; W has shape (targets, feature length)."""

    W: np.ndarray
    lam: float
    rank_deficient: bool = False

    @property
    def n_targets(self) -> int:
        return self.W.shape[0]

    @property
    def n_features(self) -> int:
        return self.W.shape[1]

    def to_bytes(self) -> bytes:
        head = np.array(self.W.shape, dtype="<u4").tobytes()
        return head + np.ascontiguousarray(self.W, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, lam: float = DEFAULT_LAMBDA) -> "LinearReadout":
        t, d = np.frombuffer(data[:8], dtype="<u4")
        w = np.frombuffer(data[8:], dtype="<f8").reshape(int(t), int(d)).copy()
        return cls(W=w, lam=lam)


def _as_float_matrix(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2:
        raise DimensionError("expected a 2-D design matrix")
    return x


def _block_dtype(x: np.ndarray):
    # float32 products of 0/1 features are exact below 2**24; real-valued
    # designs keep float64 precision
    return np.float32 if x.dtype.kind in "uib" else np.float64


def blocked_gram(x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """x @ y.T (or x @ x.T) accumulated in float64 from fixed-size row blocks."""
    y = x if y is None else y
    dt = _block_dtype(x)
    out = np.zeros((x.shape[0], y.shape[0]), dtype=np.float64)
    yt = y.astype(dt, copy=False)
    for lo in range(0, x.shape[0], _BLOCK_ROWS):
        xb = x[lo : lo + _BLOCK_ROWS].astype(dt, copy=False)
        out[lo : lo + _BLOCK_ROWS] = xb @ yt.T
    return out


def blocked_normal(x: np.ndarray) -> np.ndarray:
    """x.T @ x accumulated in float64 from fixed-size row blocks."""
    d = x.shape[1]
    dt = _block_dtype(x)
    out = np.zeros((d, d), dtype=np.float64)
    for lo in range(0, x.shape[0], _BLOCK_ROWS):
        xb = x[lo : lo + _BLOCK_ROWS].astype(dt, copy=False)
        out += (xb.T @ xb).astype(np.float64)
    return out


def _solve_spd(a: np.ndarray, b: np.ndarray, lam: float) -> tuple[np.ndarray, bool]:
    """Solve (a + lam I) z = b, escalating jitter if the factorization fails."""
    n = a.shape[0]
    jitter = lam
    deficient = False
    for _ in range(12):
        m = a.copy()
        m.flat[:: n + 1] += jitter  # diagonal shift without materializing an identity
        try:
            c = cho_factor(m, lower=True, overwrite_a=True, check_finite=False)
            return cho_solve(c, b, check_finite=False), deficient
        except np.linalg.LinAlgError:
            deficient = True
            jitter = max(jitter, 1e-12) * 10.0
    raise np.linalg.LinAlgError("system stayed indefinite under jitter escalation")


def fit(x, y, lam: float = DEFAULT_LAMBDA) -> LinearReadout:
    """Least-squares readout minimizing ||X W^T - Y||^2 + lam ||W||^2."""
    x = _as_float_matrix(x)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != x.shape[0]:
        raise DimensionError(f"sample counts differ: {x.shape[0]} vs {y.shape[0]}")
    if lam < 0:
        raise ParameterError("lambda must be >= 0")
    s, d = x.shape
    if d > s:
        g = blocked_gram(x)
        alpha, deficient = _solve_spd(g, y, lam)
        w = x.astype(np.float64, copy=False).T @ alpha
    else:
        a = blocked_normal(x)
        b = x.astype(np.float64, copy=False).T @ y
        w, deficient = _solve_spd(a, b, lam)
    return LinearReadout(W=np.ascontiguousarray(w.T), lam=lam, rank_deficient=deficient)


def predict(readout: LinearReadout, x) -> np.ndarray:
    x = _as_float_matrix(x)
    if x.shape[1] != readout.n_features:
        raise DimensionError(
            f"feature length {x.shape[1]} != readout width {readout.n_features}"
        )
    return x.astype(np.float64, copy=False) @ readout.W.T


def predict_binary(readout: LinearReadout, x: BitVector) -> BitVector:
    """Threshold the real outputs at 0.5: target bit t = 1 iff (Wx)[t] > 0.5."""
    scores = predict(readout, x.to_array()[None, :])[0]
    return BitVector.from_array((scores > 0.5).astype(np.uint8))


def fit_predict(x_train, y_train, x_eval, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Fit and evaluate without materializing W when features outnumber samples.

    Algebraically identical to ``predict(fit(x_train, y_train, lam), x_eval)``;
    in the Gram branch the predictions are K (G + lam I)^-1 Y with
    K = X_eval X_train^T, so only sample-by-sample matrices are formed.
    """
    x_train = _as_float_matrix(x_train)
    x_eval = _as_float_matrix(x_eval)
    y = np.asarray(y_train, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    s, d = x_train.shape
    if d > s:
        g = blocked_gram(x_train)
        alpha, _ = _solve_spd(g, y, lam)
        k = blocked_gram(x_eval, x_train)
        return k @ alpha
    return predict(fit(x_train, y, lam), x_eval)


@dataclass
class TrialResult:
    """Outcome of one all-bits-exact scoring pass."""

    success: bool
    bit_errors: int
    n_bits: int
    per_sequence_errors: np.ndarray = field(repr=False, default=None)


def score_task(predictions: np.ndarray, targets: np.ndarray) -> TrialResult:
    """All-bits-exact criterion: success iff every evaluated bit matches."""
    p = np.asarray(predictions)
    t = np.asarray(targets)
    if p.shape != t.shape:
        raise DimensionError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ParameterError("nothing to score: empty evaluation set")
    wrong = (p > 0.5) != (t > 0.5)
    axes = tuple(range(1, wrong.ndim))
    per_seq = wrong.sum(axis=axes) if wrong.ndim > 1 else wrong.astype(int)
    errors = int(wrong.sum())
    return TrialResult(
        success=errors == 0,
        bit_errors=errors,
        n_bits=int(p.size),
        per_sequence_errors=np.asarray(per_seq),
    )
