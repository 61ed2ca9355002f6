"""Command-line interface.

Subcommands: memtask, distlocal, metric, power, distort, mnist-kernel,
hdc-demo, bench. Common flags: --seed, --out (CSV path, or JSON when the
path ends in .json), --config (JSON file whose keys mirror the flags;
explicit flags override the file). Reruns with identical arguments and
seed produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .errors import ConfigError

_COMMON = ("seed", "out", "config")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x != ""]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x != ""]


_SPECS: dict[str, dict] = {
    "memtask": {
        "task": (str, "5bit", "memory task: 5bit or 20bit"),
        "rule": (str, "90", "elementary rule number, or 'life'"),
        "t0": (int, 200, "distractor period"),
        "iters": (int, 16, "CA iterations I"),
        "perms": (int, 32, "random permutations R"),
        "trials": (int, 25, "number of trials"),
        "mode": (str, "feedforward", "feedforward or recurrent"),
        "features": (str, "distributed", "distributed or local"),
        "n-train": (int, 300, "training sequences (20bit)"),
        "n-test": (int, 100, "test sequences (20bit)"),
        "memory-cap-gib": (float, 4.0, "working-set cap in GiB"),
    },
    "distlocal": {
        "t0": (int, 200, "distractor period"),
        "iters": (int, 8, "CA iterations I"),
        "perms": (_int_list, [16, 32, 64], "comma-separated R values"),
        "trials": (int, 25, "number of trials"),
    },
    "metric": {
        "n": (int, 400, "input length"),
        "nz": (float, 0.1, "nonzero ratio"),
        "iters": (int, 8, "CA iterations I"),
        "perms": (int, 40, "random permutations R"),
        "mode": (str, "distance", "distance or dot"),
    },
    "power": {
        "n": (_int_list, [100, 200, 400], "comma-separated input lengths"),
        "nz": (_float_list, [0.05, 0.1, 0.25, 0.4], "comma-separated nonzero ratios"),
        "iters": (int, 8, "CA iterations I"),
        "perms": (int, 8, "random permutations R"),
        "vectors": (int, 100, "vectors per cell"),
        "seeds": (int, 20, "seeds per cell"),
    },
    "distort": {
        "n": (int, 1024, "input length"),
        "iters": (int, 8, "CA iterations I"),
        "perms": (int, 8, "random permutations R"),
        "flips": (_float_list, [0, 1, 2, 4, 8, 16], "comma-separated flip percents"),
        "seeds": (int, 50, "seeds to average"),
    },
    "mnist-kernel": {
        "images": (str, None, "IDX images file (.gz ok)"),
        "labels": (str, None, "IDX labels file (.gz ok)"),
        "threshold": (int, 128, "binarization threshold"),
        "iters": (int, 8, "CA iterations I"),
        "perms": (int, 128, "random permutations R"),
    },
    "hdc-demo": {
        "scenario": (str, "grandmother", "grandmother or analogy"),
        "dim": (int, 10000, "hypervector dimension"),
        "runs": (int, 100, "Monte Carlo runs"),
    },
    "bench": {
        "scale": (float, 1.0, "workload scale factor"),
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ca-reservoir", description="Cellular-automata reservoir computing experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, spec in _SPECS.items():
        p = sub.add_parser(name)
        for flag, (conv, default, help_text) in spec.items():
            p.add_argument(f"--{flag}", type=conv, default=None, help=f"{help_text} (default {default})")
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        p.add_argument("--out", type=str, default=None, help="report path (.csv or .json)")
        p.add_argument("--config", type=str, default=None, help="JSON config file; flags override")
    return parser


def _merge_config(command: str, args: argparse.Namespace) -> dict:
    spec = _SPECS[command]
    merged: dict = {}
    if args.config is not None:
        with open(args.config) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config is not valid JSON: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        for key, value in raw.items():
            norm = key.replace("_", "-")
            if norm not in spec and norm not in _COMMON:
                raise ConfigError(f"unknown config field {key!r} for {command}")
            if norm in _COMMON:
                merged[norm] = value
                continue
            conv = spec[norm][0]
            try:
                merged[norm] = conv(value) if not isinstance(value, list) else conv(",".join(map(str, value)))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"config field {key!r} has the wrong type: {e}") from e
    for flag, (conv, default, _) in spec.items():
        cli_val = getattr(args, flag.replace("-", "_"))
        if cli_val is not None:
            merged[flag] = cli_val
        elif flag not in merged:
            merged[flag] = default
    for name in ("seed", "out"):
        cli_val = getattr(args, name)
        if cli_val is not None:
            merged[name] = cli_val
        elif name not in merged:
            merged[name] = 0 if name == "seed" else None
    return merged


def _run(command: str, cfg: dict):
    from . import experiments

    seed = int(cfg["seed"])
    if command == "memtask":
        return experiments.run_memory_experiment(
            task=cfg["task"], rule=cfg["rule"], t0=cfg["t0"], iters=cfg["iters"],
            perms=cfg["perms"], trials=cfg["trials"], master_seed=seed, mode=cfg["mode"],
            feature_kind=cfg["features"], n_train=cfg["n-train"], n_test=cfg["n-test"],
            memory_cap_bytes=int(cfg["memory-cap-gib"] * experiments.GIB),
        )
    if command == "distlocal":
        return experiments.run_distributed_vs_local(
            t0=cfg["t0"], iters=cfg["iters"], perm_counts=tuple(cfg["perms"]),
            trials=cfg["trials"], master_seed=seed,
        )
    if command == "metric":
        return experiments.run_metric_experiment(
            n=cfg["n"], nz=cfg["nz"], iters=cfg["iters"], perms=cfg["perms"],
            mode=cfg["mode"], master_seed=seed,
        )
    if command == "power":
        return experiments.run_power_experiment(
            n_list=tuple(cfg["n"]), nz_list=tuple(cfg["nz"]), iters=cfg["iters"],
            perms=cfg["perms"], n_vectors=cfg["vectors"], n_seeds=cfg["seeds"],
            master_seed=seed,
        )
    if command == "distort":
        return experiments.run_distortion_experiment(
            n=cfg["n"], iters=cfg["iters"], perms=cfg["perms"],
            flip_percents=tuple(cfg["flips"]), n_seeds=cfg["seeds"], master_seed=seed,
        )
    if command == "mnist-kernel":
        from .mnist import load_mnist_idx

        if not cfg["images"] or not cfg["labels"]:
            raise ConfigError("mnist-kernel needs --images and --labels")
        images, labels = load_mnist_idx(cfg["images"], cfg["labels"], cfg["threshold"])
        return experiments.run_mnist_kernel_experiment(
            images, labels, iters=cfg["iters"], perms=cfg["perms"], master_seed=seed,
        )
    if command == "hdc-demo":
        return experiments.run_hdc_demo(
            scenario=cfg["scenario"], dim=cfg["dim"], runs=cfg["runs"], master_seed=seed,
        )
    if command == "bench":
        rows = __import__("ca_reservoir.bench", fromlist=["run_benchmark"]).run_benchmark(
            scale=cfg["scale"], master_seed=seed
        )
        return experiments.ExperimentReport(
            experiment="bench",
            config={"scale": cfg["scale"]},
            master_seed=seed,
            metrics={r["kernel"]: r["speedup"] for r in rows},
            rows=rows,
            csv_fields=["kernel", "size", "numpy_seconds", "numba_seconds", "speedup"],
        )
    raise ConfigError(f"unknown command {command!r}")


def cli_dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        cfg = _merge_config(args.command, args)
        t0 = time.perf_counter()
        report = _run(args.command, cfg)
        elapsed = time.perf_counter() - t0
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = cfg.get("out")
    if out:
        from .experiments import write_report

        write_report(report, out)
    print(f"{report.summary()} ({elapsed:.1f}s)" + (f" -> {out}" if out else ""))
    return 0


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
