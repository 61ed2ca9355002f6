"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times the three hot loops (elementary CA evolution, Game of Life evolution,
Jacobi sweeps) on representative workloads under both backends and reports
per-kernel speedups. Used by the ``bench`` CLI subcommand.
"""

from __future__ import annotations

import time

import numpy as np

from . import _kernels
from .automata import rule_table
from .bitcore import stream


def _time(fn, repeats: int = 3) -> float:
    fn()  # warm-up (numba compilation happens here)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmark(scale: float = 1.0, master_seed: int = 0) -> list[dict]:
    """Return rows of {kernel, size, numpy_seconds, numba_seconds, speedup}."""
    rng = stream(master_seed, 0)
    table = rule_table(90)
    eca_states = rng.integers(0, 2, size=(int(512 * scale), 840), dtype=np.uint8)
    life_boards = rng.integers(0, 2, size=(int(256 * scale), 29, 29), dtype=np.uint8)
    sym = rng.random((int(200 * scale), int(200 * scale)))
    sym = sym + sym.T

    cases = [
        ("eca_evolve", f"{eca_states.shape[0]}x840x16", lambda: _kernels.eca_evolve(eca_states, table, 16)),
        ("life_evolve", f"{life_boards.shape[0]}x29x29x16", lambda: _kernels.life_evolve(life_boards, 16)),
        ("jacobi_sweeps", f"{sym.shape[0]}x{sym.shape[0]}", lambda: _kernels.jacobi_sweeps(sym.copy(), 1e-10, 100)),
    ]
    rows = []
    previous = _kernels.active_backend()
    try:
        for name, size, fn in cases:
            timings = {}
            for backend in ("numpy", "numba"):
                try:
                    _kernels.set_backend(backend)
                except Exception:
                    timings[backend] = float("nan")
                    continue
                timings[backend] = _time(fn)
            rows.append(
                {
                    "kernel": name,
                    "size": size,
                    "numpy_seconds": timings["numpy"],
                    "numba_seconds": timings["numba"],
                    "speedup": timings["numpy"] / timings["numba"]
                    if timings.get("numba") and np.isfinite(timings["numba"])
                    else float("nan"),
                }
            )
    finally:
        _kernels.set_backend(previous)
    return rows
