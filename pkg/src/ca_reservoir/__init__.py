"""Cellular-automata reservoir computing toolkit.

Bitwise feature expansion over elementary rules and Game of Life, linear
readouts for the 5-bit/20-bit memory benchmarks, GF(2) kernel and metric
learning for the linear rules, and hyperdimensional symbolic operations on
binary feature vectors.
"""

from .automata import (
    Elementary,
    GameOfLife,
    RuleSpec,
    SpaceTime,
    characteristic_matrix,
    evolve,
    rule_table,
    step,
    step_elementary,
    step_life,
)
from .bitcore import (
    BitVector,
    Gf2Matrix,
    Permutation,
    bv_hamming,
    bv_permute,
    bv_random,
    bv_rotate,
    gf2_matmul,
    gf2_matpow,
    gf2_matvec,
    stream,
)
from .eigen import jacobi_eigvalsh
from .errors import (
    ConfigError,
    ConsistencyError,
    DimensionError,
    FormatError,
    MemoryBudgetError,
    ParameterError,
    StateError,
    UnsupportedRuleError,
)
from .kernel import (
    KernelModel,
    PrecomputedReadout,
    build_MK,
    build_model,
    distance_features,
    dot_features,
    fit_metric,
    kernel_classify,
    kernel_matrix,
    kernel_value,
    linear_predict,
    precompute_Q,
    true_feature_metric,
)
from .readout import LinearReadout, TrialResult, fit, fit_predict, predict, predict_binary, score_task
from .reservoir import (
    RecurrentState,
    ReservoirConfig,
    SpaceTimeFeature,
    covariance_features,
    encode_binary,
    encode_real,
    expand_batch,
    expand_feedforward,
    normalized_add,
    recurrent_init,
    recurrent_step,
)
from .tasks import MemoryTask, gen_20bit, gen_5bit

__version__ = "0.1.0"
