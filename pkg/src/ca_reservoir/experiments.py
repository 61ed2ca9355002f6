"""Experiment drivers: memory benchmarks, metric/kernel runs, Monte Carlo.

Every driver is a deterministic function of its configuration and a master
seed. Independent randomness is drawn from Philox streams addressed as
``stream(master_seed, NAMESPACE + index)``; the namespace constants below
keep trial seeds, task sampling, and tie-break coins from ever colliding.

Memory-task regression structure: the flattened input sequence evolves as
one CA (ring or torus), and each sequence step reads out the evolved values
sitting at its own channel cells across all lanes and iterations (plus the
raw channels when configured). One readout, shared across steps, is fit
over all (sequence, step) training samples and then evaluated at every
step. Training may subsample distractor steps (the 20-bit tasks fit only
10 of them); the shared readout still predicts the full period.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernel as kernel_mod
from .automata import Elementary, GameOfLife, RuleSpec
from .bitcore import stream
from .errors import DimensionError, MemoryBudgetError, ParameterError, UnsupportedRuleError
from .readout import DEFAULT_LAMBDA, _solve_spd, blocked_gram, blocked_normal, fit_predict, score_task
from .reservoir import ReservoirConfig, covariance_batch, expand_batch
from .tasks import MemoryTask, gen_20bit, gen_5bit

GIB = 1 << 30

_NS_TASK = 1 << 20
_NS_TRIAL = 2 << 20
_NS_COINS = 3 << 20
_NS_DATA = 4 << 20
_NS_SPLIT = 5 << 20


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    master_seed: int
    metrics: dict
    rows: list[dict] = field(default_factory=list)
    csv_fields: list[str] = field(default_factory=list)
    trials: list[dict] = field(default_factory=list)
    wall_clock_seconds: float = 0.0

    def summary(self) -> str:
        parts = [f"{k}={_fmt(v)}" for k, v in self.metrics.items()]
        return f"{self.experiment}: " + " ".join(parts)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def report_to_json(report: ExperimentReport) -> str:
    return json.dumps(_jsonable(asdict(report)), indent=2, allow_nan=True)


def report_to_csv(report: ExperimentReport) -> str:
    """Fixed-header CSV of the report rows; floats use repr so values round-trip."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.csv_fields)
    for row in report.rows:
        writer.writerow([_fmt(row[k]) for k in report.csv_fields])
    return buf.getvalue()


def write_report(report: ExperimentReport, path: str) -> None:
    text = report_to_json(report) if str(path).endswith(".json") else report_to_csv(report)
    with open(path, "w") as fh:
        fh.write(text)


def read_csv_rows(path: str) -> list[dict]:
    """Parse a report CSV back into typed rows (ints stay int, floats float)."""
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {}
            for k, v in raw.items():
                try:
                    row[k] = int(v)
                except ValueError:
                    try:
                        row[k] = float(v)
                    except ValueError:
                        row[k] = v
            rows.append(row)
    return rows


# --------------------------------------------------------------------------
# Memory experiments
# --------------------------------------------------------------------------


def _memory_rule(rule: str | int, flat_length: int) -> RuleSpec:
    """Rule geometry for a flattened task: a ring, or the smallest square torus."""
    if isinstance(rule, str) and rule.lower() in ("life", "gol", "gameoflife"):
        side = math.isqrt(flat_length - 1) + 1
        return GameOfLife(side, side)
    return Elementary(int(rule), flat_length)


def _derive_perms(cells: int, n_perms: int, seed: int) -> np.ndarray:
    """Permutation mappings (n_perms, cells); same derivation as ReservoirConfig."""
    return np.stack([stream(seed, r).permutation(cells) for r in range(n_perms)])


def _lane_iterates(padded: np.ndarray, rule: RuleSpec, iters: int, perm: np.ndarray) -> np.ndarray:
    """Evolved iterates of one permuted lane, unpermuted back: (iters, S, cells)."""
    from .reservoir import _evolve_lane

    permuted = padded[:, perm]
    iterates = _evolve_lane(permuted, rule, iters)
    inv = np.argsort(perm)
    return iterates[:, :, inv]


def _iter_step_chunks(
    task: MemoryTask,
    rule: RuleSpec,
    iters: int,
    perms: np.ndarray,
    feature_kind: str,
    include_raw: bool,
):
    """Yield per-lane step-feature chunks of shape (S, L, C*iters).

    distributed: evolved values at each step's channel cells, all iterations.
    local: the covariance pool of the unpermuted flattened input, redistributed
    onto steps by each lane's permutation. A final raw chunk (S, L, C) carries
    the input itself when ``include_raw`` is set.
    """
    s, length, c = task.inputs.shape
    flat = task.flat_length
    inputs_flat = task.inputs.reshape(s, flat)
    cells = rule.cell_count
    if feature_kind == "local":
        if not isinstance(rule, Elementary):
            raise UnsupportedRuleError("local covariance features need an elementary rule")
        pool = covariance_batch(inputs_flat, iters)  # (iters, S, flat)
        for perm in perms:
            scattered = pool[:, :, perm]
            yield np.transpose(scattered.reshape(iters, s, length, c), (1, 2, 0, 3)).reshape(
                s, length, iters * c
            )
    else:
        padded = inputs_flat
        if cells != flat:
            padded = np.zeros((s, cells), dtype=np.uint8)
            padded[:, :flat] = inputs_flat
        for perm in perms:
            un = _lane_iterates(padded, rule, iters, perm)[:, :, :flat]
            yield np.transpose(un.reshape(iters, s, length, c), (1, 2, 0, 3)).reshape(
                s, length, iters * c
            )
    if include_raw:
        yield task.inputs.copy()


def _recurrent_step_features(
    task: MemoryTask, rule_number: int, iters: int, perms: np.ndarray, trial_seed: int
) -> np.ndarray:
    """Per-step recurrent reservoir features, shape (S, L, C*R*iters).

    The R permuted copies of each step input share one ring; insertion uses
    normalized addition with per-step coin streams.
    """
    s, length, c = task.inputs.shape
    ring = c * perms.shape[0]
    lanes = perms.reshape(-1)  # (ring,) column gather indices

    def permute_concat(x):  # x: (S, C) -> (S, ring)
        return x[:, lanes]

    state = permute_concat(task.inputs[:, 0, :])
    feats = np.empty((s, length, ring * iters), dtype=np.uint8)
    from .automata import evolve_elementary_batch

    for t in range(length):
        iterates = evolve_elementary_batch(state, rule_number, iters)  # (I, S, ring)
        feats[:, t, :] = np.transpose(iterates, (1, 0, 2)).reshape(s, iters * ring)
        if t + 1 < length:
            last = iterates[-1]
            incoming = permute_concat(task.inputs[:, t + 1, :])
            coins = stream(trial_seed, _NS_COINS + t).integers(0, 2, size=(s, ring), dtype=np.uint8)
            total = last + incoming
            state = np.where(total == 2, 1, np.where(total == 0, 0, coins)).astype(np.uint8)
    return feats


def _fit_eval_materialized(x, task: MemoryTask, lam: float) -> np.ndarray:
    s, length, d = x.shape
    o = task.targets.shape[2]
    xfit = x[task.train_idx][:, task.train_step_mask].reshape(-1, d)
    yfit = task.targets[task.train_idx][:, task.train_step_mask].reshape(-1, o)
    xeval = x[task.test_idx].reshape(-1, d)
    pred = fit_predict(xfit, yfit, xeval, lam)
    return pred.reshape(len(task.test_idx), length, o)


def _fit_eval_streaming(chunk_factory, task: MemoryTask, lam: float) -> np.ndarray:
    """Two-pass Gram regression over lane chunks; never forms the full design."""
    mask = task.train_step_mask
    o = task.targets.shape[2]
    yfit = task.targets[task.train_idx][:, mask].reshape(-1, o).astype(np.float64)
    n_fit = yfit.shape[0]
    gram = np.zeros((n_fit, n_fit), dtype=np.float64)
    for chunk in chunk_factory():
        cf = chunk[task.train_idx][:, mask].reshape(n_fit, -1).astype(np.float32)
        gram += (cf @ cf.T).astype(np.float64)
    alpha, _ = _solve_spd(gram, yfit, lam)
    del gram
    n_eval = len(task.test_idx) * task.length
    pred = np.zeros((n_eval, o), dtype=np.float64)
    for chunk in chunk_factory():
        cf = chunk[task.train_idx][:, mask].reshape(n_fit, -1).astype(np.float32)
        w = cf.T.astype(np.float64) @ alpha
        ce = chunk[task.test_idx].reshape(n_eval, -1).astype(np.float64)
        pred += ce @ w
    return pred.reshape(len(task.test_idx), task.length, o)


def run_memory_experiment(
    task: str = "5bit",
    rule: str | int = 90,
    t0: int = 200,
    iters: int = 16,
    perms: int = 32,
    trials: int = 25,
    master_seed: int = 0,
    mode: str = "feedforward",
    feature_kind: str = "distributed",
    n_train: int = 300,
    n_test: int = 100,
    lam: float = DEFAULT_LAMBDA,
    include_raw_input: bool = True,
    memory_cap_bytes: int = 4 * GIB,
) -> ExperimentReport:
    """Percent of failed trials on a memory task under the all-bits-exact rule."""
    if task not in ("5bit", "20bit"):
        raise ParameterError(f"unknown task {task!r}")
    if mode not in ("feedforward", "recurrent"):
        raise ParameterError(f"unknown mode {mode!r}")
    if feature_kind not in ("distributed", "local"):
        raise ParameterError(f"unknown feature kind {feature_kind!r}")
    t_start = time.perf_counter()
    trial_records = []
    failures = 0
    for trial in range(trials):
        mt = (
            gen_5bit(t0)
            if task == "5bit"
            else gen_20bit(t0, stream(master_seed, _NS_TASK + trial), n_train, n_test)
        )
        trial_seed = int(stream(master_seed, _NS_TRIAL + trial).integers(2**63))
        result = _run_memory_trial(
            mt, rule, iters, perms, trial_seed, mode, feature_kind, lam,
            include_raw_input, memory_cap_bytes,
        )
        failures += 0 if result.success else 1
        trial_records.append(
            {"trial": trial, "success": result.success, "bit_errors": result.bit_errors}
        )
    percent_failed = 100.0 * failures / trials
    report = ExperimentReport(
        experiment="memtask",
        config={
            "task": task,
            "rule": str(rule),
            "t0": t0,
            "iters": iters,
            "perms": perms,
            "trials": trials,
            "mode": mode,
            "feature_kind": feature_kind,
            "include_raw_input": include_raw_input,
        },
        master_seed=master_seed,
        metrics={"percent_failed": percent_failed},
        rows=[
            {
                "rule": str(rule),
                "t0": t0,
                "I": iters,
                "R": perms,
                "trials": trials,
                "percent_failed": percent_failed,
            }
        ],
        csv_fields=["rule", "t0", "I", "R", "trials", "percent_failed"],
        trials=trial_records,
        wall_clock_seconds=time.perf_counter() - t_start,
    )
    return report


def _run_memory_trial(
    mt: MemoryTask,
    rule: str | int,
    iters: int,
    perms: int,
    trial_seed: int,
    mode: str,
    feature_kind: str,
    lam: float,
    include_raw: bool,
    cap: int,
):
    s, length, c = mt.inputs.shape
    if mode == "recurrent":
        rule_spec = _memory_rule(rule, mt.flat_length)
        if not isinstance(rule_spec, Elementary):
            raise UnsupportedRuleError("recurrent memory runs support elementary rules only")
        perm_maps = _derive_perms(c, perms, trial_seed)
        d_step = c * perms * iters
        _check_budget(s * length * d_step, mt, cap)
        feats = _recurrent_step_features(mt, rule_spec.rule_number, iters, perm_maps, trial_seed)
        pred = _fit_eval_materialized(feats, mt, lam)
        return score_task(pred, mt.targets[mt.test_idx])

    rule_spec = _memory_rule(rule, mt.flat_length)
    perm_maps = _derive_perms(rule_spec.cell_count, perms, trial_seed)
    d_step = c * iters * perms + (c if include_raw else 0)
    mat_bytes = s * length * d_step
    if mat_bytes <= min(cap // 4, GIB):
        chunks = list(
            _iter_step_chunks(mt, rule_spec, iters, perm_maps, feature_kind, include_raw)
        )
        x = np.concatenate(chunks, axis=2)
        del chunks
        pred = _fit_eval_materialized(x, mt, lam)
    else:
        n_fit = len(mt.train_idx) * int(mt.train_step_mask.sum())
        if n_fit * n_fit * 8 > cap:
            raise MemoryBudgetError(
                f"feature matrix needs {mat_bytes / GIB:.1f} GiB and the Gram fallback "
                f"needs {n_fit * n_fit * 8 / GIB:.1f} GiB; cap is {cap / GIB:.1f} GiB"
            )
        pred = _fit_eval_streaming(
            lambda: _iter_step_chunks(mt, rule_spec, iters, perm_maps, feature_kind, include_raw),
            mt,
            lam,
        )
    return score_task(pred, mt.targets[mt.test_idx])


def _check_budget(nbytes: int, mt: MemoryTask, cap: int):
    if nbytes > cap:
        raise MemoryBudgetError(
            f"run needs {nbytes / GIB:.1f} GiB for {mt.variant} features; cap is {cap / GIB:.1f} GiB"
        )


def run_distributed_vs_local(
    t0: int = 200,
    iters: int = 8,
    perm_counts: tuple[int, ...] = (16, 32, 64),
    trials: int = 25,
    master_seed: int = 0,
    lam: float = DEFAULT_LAMBDA,
) -> ExperimentReport:
    """5-bit failure rates with CA-state features vs local covariance features."""
    t_start = time.perf_counter()
    rows = []
    metrics = {}
    for r in perm_counts:
        pair = {}
        for kind in ("distributed", "local"):
            rep = run_memory_experiment(
                task="5bit", rule=90, t0=t0, iters=iters, perms=r, trials=trials,
                master_seed=master_seed, feature_kind=kind, lam=lam,
            )
            pair[kind] = rep.metrics["percent_failed"]
        rows.append(
            {
                "rule": "90",
                "t0": t0,
                "I": iters,
                "R": r,
                "trials": trials,
                "distributed_percent_failed": pair["distributed"],
                "local_percent_failed": pair["local"],
            }
        )
        metrics[f"R={r}"] = (pair["distributed"], pair["local"])
    return ExperimentReport(
        experiment="distlocal",
        config={"t0": t0, "iters": iters, "perm_counts": list(perm_counts), "trials": trials},
        master_seed=master_seed,
        metrics={f"{k}_dist_local": v for k, v in metrics.items()},
        rows=rows,
        csv_fields=[
            "rule", "t0", "I", "R", "trials",
            "distributed_percent_failed", "local_percent_failed",
        ],
        wall_clock_seconds=time.perf_counter() - t_start,
    )


# --------------------------------------------------------------------------
# Metric learning / computational power / distortion
# --------------------------------------------------------------------------


def run_metric_experiment(
    n: int = 400,
    nz: float = 0.1,
    iters: int = 8,
    perms: int = 40,
    mode: str = "distance",
    master_seed: int = 0,
    rule_number: int = 90,
    n_vectors: int = 100,
    train_frac: float = 0.8,
) -> ExperimentReport:
    """Fit the three-feature metric on random vectors; report held-out Pearson."""
    t_start = time.perf_counter()
    degenerate = nz in (0.0, 1.0)
    rng = stream(master_seed, _NS_DATA)
    vectors = (rng.random((n_vectors, n)) < nz).astype(np.uint8)
    cfg_seed = int(stream(master_seed, _NS_TRIAL).integers(2**63))
    cfg = ReservoirConfig(
        rule=Elementary(rule_number, n), R=perms, I=iters,
        master_seed=cfg_seed, include_raw_input=False,
    )
    if degenerate:
        metrics = {"train_pearson": float("nan"), "test_pearson": float("nan"), "degenerate": True}
        coeffs = (float("nan"),) * 3
    else:
        iu = np.triu_indices(n_vectors, k=1)
        pairs = [(vectors[i], vectors[j]) for i, j in zip(*iu)]
        model = kernel_mod.fit_metric(
            pairs, cfg, mode=mode, train_frac=train_frac,
            split_rng=stream(master_seed, _NS_SPLIT),
        )
        metrics = {
            "train_pearson": model.diagnostics["train_pearson"],
            "test_pearson": model.diagnostics["test_pearson"],
            "degenerate": False,
        }
        coeffs = tuple(float(c) for c in model.coeffs)
    row = {
        "n": n, "nz": nz, "I": iters, "R": perms, "mode": mode,
        "train_pearson": metrics["train_pearson"],
        "test_pearson": metrics["test_pearson"],
        "k1": coeffs[0], "k2": coeffs[1], "k3": coeffs[2],
    }
    return ExperimentReport(
        experiment="metric",
        config={"n": n, "nz": nz, "iters": iters, "perms": perms, "mode": mode,
                "rule": rule_number, "n_vectors": n_vectors, "train_frac": train_frac},
        master_seed=master_seed,
        metrics=metrics,
        rows=[row],
        csv_fields=["n", "nz", "I", "R", "mode", "train_pearson", "test_pearson", "k1", "k2", "k3"],
        wall_clock_seconds=time.perf_counter() - t_start,
    )


def mean_pairwise_correlation(features: np.ndarray) -> float:
    """Mean Pearson correlation over all feature-vector pairs.

    Rows with zero variance (all-equal bits) carry no correlation and are
    dropped from the mean.
    """
    f = features.astype(np.float64)
    f = f - f.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(f, axis=1)
    keep = norms > 0
    f = f[keep] / norms[keep, None]
    k = f.shape[0]
    if k < 2:
        return float("nan")
    corr = f @ f.T
    iu = np.triu_indices(k, 1)
    return float(corr[iu].mean())


def run_power_experiment(
    n_list: tuple[int, ...] = (100, 200, 400),
    nz_list: tuple[float, ...] = (0.05, 0.1, 0.25, 0.4),
    iters: int = 8,
    perms: int = 8,
    n_vectors: int = 100,
    n_seeds: int = 20,
    master_seed: int = 0,
    rule_number: int = 90,
) -> ExperimentReport:
    """Mean pairwise feature correlation per (N, Nz) cell; lower means more power."""
    t_start = time.perf_counter()
    rows = []
    metrics = {}
    for ci, n in enumerate(n_list):
        for cj, nz in enumerate(nz_list):
            cell = (ci * len(nz_list) + cj) << 8
            vals = []
            for s in range(n_seeds):
                rng = stream(master_seed, _NS_DATA + cell + s)
                vectors = (rng.random((n_vectors, n)) < nz).astype(np.uint8)
                cfg_seed = int(rng.integers(2**63))
                cfg = ReservoirConfig(
                    rule=Elementary(rule_number, n), R=perms, I=iters,
                    master_seed=cfg_seed, include_raw_input=False,
                )
                feats = expand_batch(vectors, cfg)
                vals.append(mean_pairwise_correlation(feats))
            mean_corr = float(np.nanmean(vals))
            rows.append(
                {"n": n, "nz": nz, "R": perms, "I": iters, "seeds": n_seeds,
                 "mean_pairwise_correlation": mean_corr}
            )
            metrics[f"n{n}_nz{nz}"] = mean_corr
    return ExperimentReport(
        experiment="power",
        config={"n_list": list(n_list), "nz_list": list(nz_list), "iters": iters,
                "perms": perms, "n_vectors": n_vectors, "n_seeds": n_seeds},
        master_seed=master_seed,
        metrics=metrics,
        rows=rows,
        csv_fields=["n", "nz", "R", "I", "seeds", "mean_pairwise_correlation"],
        wall_clock_seconds=time.perf_counter() - t_start,
    )


def pearson_bits(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two 0/1 arrays (1.0 for identical constant pairs)."""
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    if np.array_equal(a, b):
        return 1.0
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return 0.0
    return float(((a - a.mean()) * (b - b.mean())).mean() / (sa * sb))


def run_distortion_experiment(
    n: int = 1024,
    iters: int = 8,
    perms: int = 8,
    flip_percents: tuple[float, ...] = (0, 1, 2, 4, 8, 16),
    n_seeds: int = 50,
    master_seed: int = 0,
    rule_number: int = 90,
    density: float = 0.5,
) -> ExperimentReport:
    """Correlation ratio between original and bit-flipped reservoir features."""
    t_start = time.perf_counter()
    ratios = np.zeros((n_seeds, len(flip_percents)))
    for s in range(n_seeds):
        rng = stream(master_seed, _NS_DATA + s)
        a0 = (rng.random(n) < density).astype(np.uint8)
        cfg_seed = int(rng.integers(2**63))
        cfg = ReservoirConfig(
            rule=Elementary(rule_number, n), R=perms, I=iters,
            master_seed=cfg_seed, include_raw_input=False,
        )
        base = expand_batch(a0[None, :], cfg)[0]
        for j, pct in enumerate(flip_percents):
            k = int(round(pct / 100.0 * n))
            if k == 0:
                ratios[s, j] = 1.0
                continue
            flipped = a0.copy()
            pos = rng.choice(n, size=k, replace=False)
            flipped[pos] ^= 1
            feat = expand_batch(flipped[None, :], cfg)[0]
            ratios[s, j] = pearson_bits(base, feat)
    mean_ratios = ratios.mean(axis=0)
    rows = [
        {"n": n, "R": perms, "I": iters, "flip_percent": float(p), "seeds": n_seeds,
         "corr_ratio": float(r)}
        for p, r in zip(flip_percents, mean_ratios)
    ]
    return ExperimentReport(
        experiment="distort",
        config={"n": n, "iters": iters, "perms": perms,
                "flip_percents": list(flip_percents), "n_seeds": n_seeds, "density": density},
        master_seed=master_seed,
        metrics={f"ratio_{p}pct": float(r) for p, r in zip(flip_percents, mean_ratios)},
        rows=rows,
        csv_fields=["n", "R", "I", "flip_percent", "seeds", "corr_ratio"],
        wall_clock_seconds=time.perf_counter() - t_start,
    )


# --------------------------------------------------------------------------
# MNIST kernel experiment
# --------------------------------------------------------------------------


def run_mnist_kernel_experiment(
    images: np.ndarray,
    labels: np.ndarray,
    iters: int = 8,
    perms: int = 128,
    master_seed: int = 0,
    n_train: int = 200,
    n_test: int = 200,
    rule_number: int = 90,
    ridge_scale: float = 1e-3,
) -> ExperimentReport:
    """Learned CA kernel vs the raw linear kernel under one ridge classifier."""
    if images.shape[0] < n_train + n_test:
        raise ParameterError(f"need at least {n_train + n_test} instances, got {images.shape[0]}")
    t_start = time.perf_counter()
    n = images.shape[1]
    train_x = images[:n_train].astype(np.uint8)
    test_x = images[n_train : n_train + n_test].astype(np.uint8)
    train_y = np.asarray(labels[:n_train])
    test_y = np.asarray(labels[n_train : n_train + n_test])

    cfg_seed = int(stream(master_seed, _NS_TRIAL).integers(2**63))
    cfg = ReservoirConfig(
        rule=Elementary(rule_number, n), R=perms, I=iters,
        master_seed=cfg_seed, include_raw_input=False,
    )
    iu = np.triu_indices(n_train, k=1)
    pairs = [(train_x[i], train_x[j]) for i, j in zip(*iu)]
    model = kernel_mod.fit_metric(pairs, cfg, mode=kernel_mod.MODE_DOT, split_rng=None)

    # held-out fidelity: estimated vs true dot products on unseen test pairs
    iu_t = np.triu_indices(n_test, k=1)
    truth = kernel_mod.true_metric_matrix(test_x, cfg, kernel_mod.MODE_DOT)[iu_t]
    est = kernel_mod._features_for_pairs(test_x[iu_t[0]], test_x[iu_t[1]], model) @ model.coeffs
    dot_pearson = float(np.corrcoef(est, truth)[0, 1])

    ca_k = kernel_mod.kernel_matrix(list(train_x), model)
    ridge_ca = ridge_scale * float(np.mean(np.diag(ca_k)))
    ca_pred, _ = kernel_mod.kernel_classify(train_x, train_y, test_x, model, ridge=ridge_ca)
    ca_acc = float(np.mean(ca_pred == test_y))

    linear_model = kernel_mod.KernelModel(
        n=n, mk=np.zeros((n, n), dtype=np.int64), s=np.zeros(n),
        mode=kernel_mod.MODE_DOT, coeffs=np.array([1.0, 0.0, 0.0]),
    )
    lin_k = kernel_mod.kernel_matrix(list(train_x), linear_model)
    ridge_lin = ridge_scale * float(np.mean(np.diag(lin_k)))
    lin_pred, _ = kernel_mod.kernel_classify(train_x, train_y, test_x, linear_model, ridge=ridge_lin)
    lin_acc = float(np.mean(lin_pred == test_y))

    metrics = {
        "dot_pearson": dot_pearson,
        "ca_accuracy": ca_acc,
        "linear_accuracy": lin_acc,
        "train_pearson": model.diagnostics["train_pearson"],
    }
    row = {
        "n_train": n_train, "n_test": n_test, "R": perms, "I": iters,
        "dot_pearson": dot_pearson, "ca_accuracy": ca_acc, "linear_accuracy": lin_acc,
    }
    return ExperimentReport(
        experiment="mnist-kernel",
        config={"iters": iters, "perms": perms, "n_train": n_train, "n_test": n_test,
                "rule": rule_number, "ridge_scale": ridge_scale},
        master_seed=master_seed,
        metrics=metrics,
        rows=[row],
        csv_fields=["n_train", "n_test", "R", "I", "dot_pearson", "ca_accuracy", "linear_accuracy"],
        wall_clock_seconds=time.perf_counter() - t_start,
    )


# --------------------------------------------------------------------------
# HDC demo experiment
# --------------------------------------------------------------------------


def run_hdc_demo(
    scenario: str = "grandmother",
    dim: int = 10000,
    runs: int = 100,
    master_seed: int = 0,
) -> ExperimentReport:
    """Monte Carlo success rate of a symbolic-processing demo scenario."""
    from . import hdc

    t_start = time.perf_counter()
    if scenario == "grandmother":
        fn = lambda rng: hdc.infer_grandmother_demo(dim, rng)
    elif scenario == "analogy":
        fn = lambda rng: hdc.analogy_demo(dim, rng)
    else:
        raise ParameterError(f"unknown scenario {scenario!r}")
    successes = sum(bool(fn(stream(master_seed, _NS_DATA + r))) for r in range(runs))
    rate = successes / runs
    return ExperimentReport(
        experiment="hdc-demo",
        config={"scenario": scenario, "dim": dim, "runs": runs},
        master_seed=master_seed,
        metrics={"success_rate": rate},
        rows=[{"scenario": scenario, "dim": dim, "runs": runs, "success_rate": rate}],
        csv_fields=["scenario", "dim", "runs", "success_rate"],
        wall_clock_seconds=time.perf_counter() - t_start,
    )
