"""Shared helpers for the table reproduction scripts."""

from __future__ import annotations

import argparse
import os

from pauc.estimator import TrimSpec
from pauc.simulation import ScenarioSpec, load_preset


def parser(description: str, runs: int, reps: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--runs", type=int, default=runs, help=f"simulation runs per cell (default {runs})")
    p.add_argument("--bootstrap-reps", type=int, default=reps, help=f"bootstrap replicates (default {reps})")
    p.add_argument("--group-sizes", default="", help="comma-separated subset of the preset's group sizes")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    return p


def load(name: str, args: argparse.Namespace) -> tuple[ScenarioSpec, dict, list[TrimSpec], list[int]]:
    cfg = load_preset(name)
    spec = ScenarioSpec.from_config(cfg).with_(bootstrap_reps=args.bootstrap_reps)
    trims = [TrimSpec(*t) for t in cfg["grid"]["trims"]]
    sizes = [int(n) for n in args.group_sizes.split(",") if n] or list(cfg["grid"]["group_sizes"])
    return spec, cfg, trims, sizes


def print_table(title: str, trims: list[TrimSpec], sizes: list[int], cell) -> None:
    print(title)
    print(f"{'(p,q)':<10}" + "".join(f"{n:>9}" for n in sizes))
    for t in trims:
        print(f"{str(t):<10}" + "".join(f"{cell(t, n):>9.4f}" for n in sizes))
