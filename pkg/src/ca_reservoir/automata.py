"""Cellular-automaton state evolution.

Elementary rules run on a ring (cyclic boundary); Game of Life runs on a
torus with the standard B3/S23 rule. Cyclic wrap is used everywhere because
the shift-matrix algebra of the linear rules is only exact with it.

Public operations work on :class:`~ca_reservoir.bitcore.BitVector`; the
``*_batch`` helpers work on uint8 arrays and are what the feature-expansion
and benchmark code paths use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bitcore import BitVector, Gf2Matrix
from .errors import DimensionError, ParameterError, UnsupportedRuleError


@dataclass(frozen=True)
class Elementary:
    """A Wolfram-numbered elementary rule on a ring of ``n`` cells."""

    rule_number: int
    n: int

    def __post_init__(self):
        if not 0 <= self.rule_number <= 255:
            raise ParameterError(f"rule number must be in [0, 255], got {self.rule_number}")
        if self.n < 3:
            raise ParameterError("ring length must be >= 3")

    @property
    def cell_count(self) -> int:
        return self.n

    def describe(self) -> str:
        return f"rule {self.rule_number} on a ring of {self.n}"


@dataclass(frozen=True)
class GameOfLife:
    """Conway's Game of Life (B3/S23) on a rows x cols torus."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 3 or self.cols < 3:
            raise ParameterError("Game of Life grid must be at least 3x3")

    @property
    def cell_count(self) -> int:
        return self.rows * self.cols

    def describe(self) -> str:
        return f"Game of Life on a {self.rows}x{self.cols} torus"


RuleSpec = Elementary | GameOfLife


@dataclass(frozen=True)
class SpaceTime:
    """Recorded evolution: states[0] is the initial condition A_0."""

    states: tuple[BitVector, ...]
    rule: RuleSpec


def rule_table(rule_number: int) -> np.ndarray:
    """8-entry output table: table[4*left + 2*center + right]."""
    if not 0 <= rule_number <= 255:
        raise ParameterError(f"rule number must be in [0, 255], got {rule_number}")
    return np.array([(rule_number >> i) & 1 for i in range(8)], dtype=np.uint8)


def step_elementary_batch(states: np.ndarray, rule_number: int) -> np.ndarray:
    """One synchronous step of an elementary rule on a batch of rings."""
    return _kernels.eca_evolve(np.atleast_2d(states), rule_table(rule_number), 1)[0]


def evolve_elementary_batch(states: np.ndarray, rule_number: int, iters: int) -> np.ndarray:
    """Iterates A_1..A_iters for a batch of rings, shape (iters, batch, n)."""
    return _kernels.eca_evolve(np.atleast_2d(states), rule_table(rule_number), iters)


def step_life_batch(boards: np.ndarray) -> np.ndarray:
    """One B3/S23 step on a batch of toroidal boards."""
    return _kernels.life_evolve(boards, 1)[0]


def evolve_life_batch(boards: np.ndarray, iters: int) -> np.ndarray:
    """Iterates for a batch of boards, shape (iters, batch, rows, cols)."""
    return _kernels.life_evolve(boards, iters)


def step_elementary(state: BitVector, rule: Elementary) -> BitVector:
    """Neighbors of cell i are (i-1 mod n, i, i+1 mod n)."""
    if state.length != rule.n:
        raise DimensionError(f"state length {state.length} != ring length {rule.n}")
    nxt = step_elementary_batch(state.to_array()[None, :], rule.rule_number)
    return BitVector.from_array(nxt[0])


def step_life(grid: BitVector, rule: GameOfLife) -> BitVector:
    """Toroidal Moore neighborhood; survive on 2-3 neighbors, birth on 3."""
    if grid.length != rule.cell_count:
        raise DimensionError(f"grid length {grid.length} != {rule.rows}*{rule.cols}")
    board = grid.to_array().reshape(1, rule.rows, rule.cols)
    return BitVector.from_array(step_life_batch(board)[0].reshape(-1))


def step(state: BitVector, rule: RuleSpec) -> BitVector:
    if isinstance(rule, Elementary):
        return step_elementary(state, rule)
    return step_life(state, rule)


def evolve(initial: BitVector, rule: RuleSpec, iters: int) -> SpaceTime:
    """Run ``iters`` steps and return all of A_0..A_iters."""
    if iters < 1:
        raise ParameterError("iteration count must be >= 1")
    if initial.length != rule.cell_count:
        raise DimensionError(
            f"initial length {initial.length} != cell count {rule.cell_count}"
        )
    if isinstance(rule, Elementary):
        raw = evolve_elementary_batch(initial.to_array()[None, :], rule.rule_number, iters)
        states = [initial] + [BitVector.from_array(raw[i, 0]) for i in range(iters)]
    else:
        board = initial.to_array().reshape(1, rule.rows, rule.cols)
        raw = evolve_life_batch(board, iters)
        states = [initial] + [
            BitVector.from_array(raw[i, 0].reshape(-1)) for i in range(iters)
        ]
    return SpaceTime(states=tuple(states), rule=rule)


LINEAR_RULES = (90, 150)


def characteristic_matrix(rule_number: int, n: int) -> Gf2Matrix:
    """GF(2) matrix M with M @ s == step(s) for the linear rules 90 and 150."""
    if rule_number not in LINEAR_RULES:
        raise UnsupportedRuleError(
            f"rule {rule_number} has no characteristic matrix here (linear rules: {LINEAR_RULES})"
        )
    if n < 3:
        raise ParameterError("ring length must be >= 3")
    m = np.zeros((n, n), dtype=np.uint8)
    idx = np.arange(n)
    m[idx, (idx + 1) % n] ^= 1
    m[idx, (idx - 1) % n] ^= 1
    if rule_number == 150:
        m[idx, idx] ^= 1
    return Gf2Matrix.from_array(m)
