"""Benchmark task generation: the 5-bit and 20-bit memory problems.

Channel layouts are frozen here as this artifact's definition of the tasks.

5-bit, sequence length T0 + 10, four input channels, three output channels:
  steps 0..4    pattern presented as (bit, NOT bit) on channels 0/1
  steps 5..T0+3 distractor channel 2 active (T0 - 1 steps)
  step  T0+4    cue channel 3 active
  steps T0+5..  distractor channel 2 active during the 5 recall steps
Targets: "waiting" channel 2 is 1 everywhere except the final 5 steps,
where channels 0/1 reproduce the pattern. All 32 patterns serve as both
training and test set (noiseless memorization).

20-bit, sequence length T0 + 20: ten pattern steps over a 4-symbol one-hot
alphabet (channels 0..3), distractor channel 4, cue channel 5; outputs are
the 4 symbol channels plus the waiting channel. 300 training and 100 test
patterns are drawn without replacement from the 4**10 pattern space. At fit
time only the pattern/cue/recall steps plus 10 uniformly sampled distractor
steps enter the regression; test evaluation covers every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass
class MemoryTask:
    variant: str
    t0: int
    inputs: np.ndarray  # (sequences, length, in_channels) uint8
    targets: np.ndarray  # (sequences, length, out_channels) uint8
    train_idx: np.ndarray
    test_idx: np.ndarray
    train_step_mask: np.ndarray  # (length,) bool

    @property
    def n_sequences(self) -> int:
        return self.inputs.shape[0]

    @property
    def length(self) -> int:
        return self.inputs.shape[1]

    @property
    def in_channels(self) -> int:
        return self.inputs.shape[2]

    @property
    def out_channels(self) -> int:
        return self.targets.shape[2]

    @property
    def flat_length(self) -> int:
        return self.length * self.in_channels


def gen_5bit(t0: int, rng: np.random.Generator | None = None) -> MemoryTask:
    """All 32 five-bit sequences; deterministic, ``rng`` is unused."""
    if t0 < 1:
        raise ParameterError("distractor period must be >= 1")
    length = t0 + 10
    inputs = np.zeros((32, length, 4), dtype=np.uint8)
    targets = np.zeros((32, length, 3), dtype=np.uint8)
    for s in range(32):
        bits = [(s >> k) & 1 for k in range(5)]
        for t in range(5):
            inputs[s, t, 0] = bits[t]
            inputs[s, t, 1] = 1 - bits[t]
        inputs[s, 5 : t0 + 4, 2] = 1
        inputs[s, t0 + 4, 3] = 1
        inputs[s, t0 + 5 :, 2] = 1
        targets[s, : t0 + 5, 2] = 1
        for m in range(5):
            targets[s, t0 + 5 + m, 0] = bits[m]
            targets[s, t0 + 5 + m, 1] = 1 - bits[m]
    everyone = np.arange(32)
    return MemoryTask(
        variant="5bit",
        t0=t0,
        inputs=inputs,
        targets=targets,
        train_idx=everyone,
        test_idx=everyone,
        train_step_mask=np.ones(length, dtype=bool),
    )


N_PICK_TRAIN = 10
PATTERN_SPACE_20BIT = 4**10


def gen_20bit(
    t0: int,
    rng: np.random.Generator,
    n_train: int = 300,
    n_test: int = 100,
) -> MemoryTask:
    """Sampled 20-bit sequences with disjoint train/test pattern sets."""
    if t0 < 1:
        raise ParameterError("distractor period must be >= 1")
    if n_train + n_test > PATTERN_SPACE_20BIT:
        raise ParameterError(
            f"cannot draw {n_train + n_test} distinct patterns from {PATTERN_SPACE_20BIT}"
        )
    length = t0 + 20
    n_seq = n_train + n_test
    codes = rng.choice(PATTERN_SPACE_20BIT, size=n_seq, replace=False)
    symbols = np.empty((n_seq, 10), dtype=np.int64)
    rem = codes.copy()
    for d in range(10):
        symbols[:, d] = rem % 4
        rem //= 4
    inputs = np.zeros((n_seq, length, 6), dtype=np.uint8)
    targets = np.zeros((n_seq, length, 5), dtype=np.uint8)
    seq = np.arange(n_seq)
    for t in range(10):
        inputs[seq, t, symbols[:, t]] = 1
        targets[seq, t0 + 10 + t, symbols[:, t]] = 1
    inputs[:, 10 : t0 + 9, 4] = 1
    inputs[:, t0 + 9, 5] = 1
    inputs[:, t0 + 10 :, 4] = 1
    targets[:, : t0 + 10, 4] = 1

    mask = np.ones(length, dtype=bool)
    distractor_steps = np.arange(10, t0 + 9)
    mask[distractor_steps] = False
    picked = rng.choice(distractor_steps, size=min(N_PICK_TRAIN, len(distractor_steps)), replace=False)
    mask[picked] = True
    return MemoryTask(
        variant="20bit",
        t0=t0,
        inputs=inputs,
        targets=targets,
        train_idx=np.arange(n_train),
        test_idx=np.arange(n_train, n_seq),
        train_step_mask=mask,
    )
