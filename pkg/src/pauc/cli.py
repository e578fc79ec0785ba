"""Command line front end: ``pauc test``, ``pauc simulate`` and ``pauc roc``.

Exit codes: 0 on success (whatever the test decisions), 1 for usage and
configuration errors, 2 for data errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

import jsonschema
import yaml

from pauc import contrasts
from pauc.estimator import TrimSpec
from pauc.inference import DEFAULT_BOOTSTRAP_REPS, RngStream, holm_adjust, run_mct
from pauc.io import DataError, read_trial_csv, write_trial_csv
from pauc.roc import empirical_roc
from pauc.simulation import (
    PRESETS,
    ScenarioSpec,
    calibrate_effect,
    draw_latent,
    latent_to_sample,
    load_preset,
    run_comparison,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    """Invalid command line or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _trim(text: str) -> TrimSpec:
    try:
        p, q = (float(v) for v in text.split(","))
        return TrimSpec(p, q)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid trim {text!r}: expected 'p,q' ({exc})") from None


def _grid(text: str) -> list[TrimSpec]:
    parts = [t for t in text.replace(" ", "").split(";") if t]
    if not parts:
        raise argparse.ArgumentTypeError("empty grid")
    return [_trim(t) for t in parts]


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _load_yaml(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML: {exc}") from None
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must be a mapping at the top level")
    return cfg


def _cfg_trims(cfg: dict) -> list[TrimSpec] | None:
    try:
        if "grid" in cfg:
            grid = cfg["grid"]
            items = grid.get("trims") if isinstance(grid, dict) else grid
            return [TrimSpec(*t) for t in items]
        if "trim" in cfg:
            t = cfg["trim"]
            return [TrimSpec(t["p"], t["q"]) if isinstance(t, dict) else TrimSpec(*t)]
    except (TypeError, KeyError, ValueError) as exc:
        raise UsageError(f"invalid trim/grid in config: {exc}") from None
    return None


def _validated(report: dict, schema: str) -> dict:
    text = resources.files("pauc").joinpath("schemas", f"{schema}.schema.json").read_text(encoding="utf-8")
    jsonschema.validate(report, json.loads(text))
    return report


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[k]) for r in rows)) if rows else len(h) for k, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.rjust(w) if k else c.ljust(w) for k, (c, w) in enumerate(zip(r, widths))) for r in rows)
    return "\n".join(lines)


def _fmt(x: float, digits: int = 4) -> str:
    return f"{x:.{digits}f}"


def _emit(report: dict, text: str, out: str) -> None:
    if out == "json":
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(text.encode("ascii", "replace").decode("ascii") + "\n")


# -- test ------------------------------------------------------------------------------------------


def cmd_test(args: argparse.Namespace) -> int:
    cfg = _load_yaml(args.config)
    dataset = read_trial_csv(
        args.data,
        id_column=args.id_column or cfg.get("id_column", "id"),
        status_column=args.status_column or cfg.get("status_column", "status"),
        markers=cfg.get("markers"),
    )
    data = dataset.sample
    trims = args.grid or ([args.trim] if args.trim else None) or _cfg_trims(cfg) or [TrimSpec(1.0, 0.0)]
    contrast_cfg = {"type": args.contrast} if args.contrast else cfg.get("contrast", {"type": "tukey"})
    try:
        contrast = contrasts.from_config(contrast_cfg, data.kappa, data.markers)
    except ValueError as exc:
        raise DataError(f"contrast does not fit the data: {exc}") from None
    delta = args.delta if args.delta is not None else float(cfg.get("delta", 0.05))
    B = args.bootstrap_reps or int(cfg.get("bootstrap_reps", DEFAULT_BOOTSTRAP_REPS))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    independent = not (args.dependent_groups or bool(cfg.get("dependent_groups", False)))
    try:
        results = [
            run_mct(
                data,
                contrast,
                t,
                delta=delta,
                B=B,
                rng=RngStream(seed),
                workers=args.workers,
                assume_independent_groups=independent,
            )
            for t in trims
        ]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    holm = None
    if len(results) > 1:
        gp = [r.global_p for r in results]
        holm = {
            "trims": [{"p": t.p, "q": t.q} for t in trims],
            "global_p": gp,
            "adjusted_p": holm_adjust(gp).tolist(),
        }
    report = _validated(
        {
            "command": "test",
            "data": {
                "source": dataset.source,
                "alpha": data.alpha,
                "beta": data.beta,
                "markers": list(data.markers),
            },
            "seed": seed,
            "assume_independent_groups": independent,
            "results": [r.to_dict() for r in results],
            "holm": holm,
        },
        "test_report",
    )
    blocks = []
    for r in results:
        head = (
            f"trim {r.trim}  delta={r.delta:g}  B={r.bootstrap_reps_used}  "
            f"critical={_fmt(r.critical_value, 3)}  global p={_fmt(r.global_p)}"
        )
        rows = [
            [
                h["label"],
                _fmt(h["estimate"]),
                _fmt(h["statistic"], 3),
                _fmt(h["adjusted_p"]),
                _fmt(h["ci_lower"]),
                _fmt(h["ci_upper"]),
                "yes" if h["reject"] else "no",
            ]
            for h in r.to_dict()["hypotheses"]
        ]
        text = head + "\n" + _table(["hypothesis", "estimate", "statistic", "adj.p", "lower", "upper", "reject"], rows)
        blocks.extend([text] + [f"warning: {w}" for w in r.warnings])
    if holm is not None:
        header = ["(p,q)"] + [str(t) for t in trims]
        rows = [["p-value"] + [f"{p:.3f}" for p in holm["global_p"]], ["adj. p-value"] + [f"{p:.3f}" for p in holm["adjusted_p"]]]
        blocks.append("Holm adjustment over the trim grid\n" + _table(header, rows))
    _emit(report, "\n\n".join(blocks), args.out)
    return EXIT_OK


# -- simulate --------------------------------------------------------------------------------------


def _scenario_config(name: str) -> dict:
    if name in PRESETS:
        return load_preset(name)
    path = Path(name)
    if not path.exists():
        raise UsageError(f"{name!r} is neither a preset ({', '.join(PRESETS)}) nor a config file")
    return _load_yaml(str(path))


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _scenario_config(args.scenario)
    try:
        base = ScenarioSpec.from_config(cfg)
        overrides = {}
        if args.runs is not None:
            overrides["sim_runs"] = args.runs
        if args.bootstrap_reps is not None:
            overrides["bootstrap_reps"] = args.bootstrap_reps
        if args.delta is not None:
            overrides["delta"] = args.delta
        base = base.with_(**overrides)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid scenario: {exc}") from None
    grid = cfg.get("grid", {}) if isinstance(cfg.get("grid"), dict) else {}
    kind = cfg.get("kind", "type1")
    if kind not in ("type1", "power"):
        raise UsageError(f"unknown scenario kind {kind!r}")
    if args.grid:
        trims = args.grid
    elif args.full_grid and "trims" in grid:
        trims = [TrimSpec(*t) for t in grid["trims"]]
    else:
        trims = [base.trim]
    sizes = args.group_sizes or (list(grid["group_sizes"]) if args.full_grid and "group_sizes" in grid else [base.group_size])
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))

    if args.dump_sample:
        first = base.with_(group_size=sizes[0])
        z = draw_latent(first, RngStream(seed, (0,)).child(0).generator())
        write_trial_csv(args.dump_sample, latent_to_sample(first, z))

    reports = []
    try:
        if kind == "type1":
            for n in sizes:
                specs = [base.with_(trim=t, group_size=n) for t in trims]
                reports += run_comparison(specs, seed=seed, workers=args.workers)
        else:
            if args.effect_sizes:
                effects = [list(args.effect_sizes) for _ in trims]
            elif args.full_grid and "effect_sizes" in grid and not args.grid:
                effects = [list(row) for row in grid["effect_sizes"]]
            else:
                effects = [[float(cfg.get("effect_size", 0.0))] for _ in trims]
            if len({len(e) for e in effects}) != 1 or len(effects) != len(trims):
                raise UsageError("effect sizes must form one equally long row per trim")
            calibrated = {}
            for ti, t in enumerate(trims):
                for e in effects[ti]:
                    calibrated[(ti, e)] = calibrate_effect(base.with_(trim=t), e).spec
            for n in sizes:
                for k in range(len(effects[0])):
                    specs = [calibrated[(ti, effects[ti][k])].with_(group_size=n) for ti in range(len(trims))]
                    reports += run_comparison(
                        specs, seed=seed, workers=args.workers, effect_sizes=[effects[ti][k] for ti in range(len(trims))]
                    )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    report = _validated(
        {
            "command": "simulate",
            "scenario": base.name,
            "kind": kind,
            "seed": seed,
            "rows": [r.to_dict() for r in reports],
        },
        "simulate_report",
    )
    rows = [
        [
            str(r.trim),
            str(r.group_size),
            "-" if r.effect_size is None else f"{r.effect_size:g}",
            f"{r.mu:.4f}",
            _fmt(r.rejection_rate),
            _fmt(r.mc_standard_error),
            str(r.runs),
            str(r.bootstrap_reps),
        ]
        for r in reports
    ]
    label = "power" if kind == "power" else "type I rate"
    text = f"scenario {base.name}  seed={seed}  delta={base.delta:g}\n" + _table(
        ["(p,q)", "n", "lambda", "mu", label, "mc se", "runs", "B"], rows
    )
    _emit(report, text, args.out)
    return EXIT_OK


# -- roc -------------------------------------------------------------------------------------------


def cmd_roc(args: argparse.Namespace) -> int:
    dataset = read_trial_csv(args.data, id_column=args.id_column or "id", status_column=args.status_column or "status")
    data = dataset.sample
    curves = {m: empirical_roc(data.xi[:, i], data.eta[:, i], args.trim) for i, m in enumerate(data.markers)}
    report = _validated(
        {
            "command": "roc",
            "trim": None if args.trim is None else {"p": args.trim.p, "q": args.trim.q},
            "markers": {m: c.to_dict() for m, c in curves.items()},
        },
        "roc_report",
    )
    blocks = []
    for m, c in curves.items():
        lines = [f"marker {m}", "  vertices (FPR, TPR): " + " ".join(f"({a:.4g},{b:.4g})" for a, b in c.vertices)]
        if args.trim is not None:
            lines.append(f"  cut points: lower={c.lower_cut:.6g} upper={c.upper_cut:.6g}")
            lines.append("  segment: " + (" ".join(f"({a:.4g},{b:.4g})" for a, b in c.segment) or "(empty)"))
        blocks.append("\n".join(lines))
    _emit(report, "\n".join(blocks), args.out)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pauc", description="Simultaneous inference for partial areas under ROC curves.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, help="random seed (non-negative)")
        p.add_argument("--workers", type=int, default=1, help="parallel workers (results do not depend on it)")
        p.add_argument("--out", choices=("json", "table"), default="table", help="output format")

    t = sub.add_parser("test", help="maximum test for a trial data CSV")
    t.add_argument("data", help="CSV with columns id, status (0/1) and one column per marker")
    t.add_argument("config", nargs="?", help="YAML config (contrast, trim or grid, delta, bootstrap_reps, seed)")
    t.add_argument("--trim", type=_trim, help="single trim 'p,q'")
    t.add_argument("--grid", type=_grid, help="trim grid 'p,q;p,q;...' with Holm adjustment across it")
    t.add_argument("--contrast", choices=("tukey", "dunnett"), help="contrast preset (overrides config)")
    t.add_argument("--delta", type=float, help="family-wise level")
    t.add_argument("--bootstrap-reps", type=int, help="bootstrap replicates B")
    t.add_argument("--dependent-groups", action="store_true", help="paired rows: add the dependent-groups term")
    t.add_argument("--id-column", help="subject id column (default 'id')")
    t.add_argument("--status-column", help="status column (default 'status')")
    common(t)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="Monte Carlo type-I error or power experiment")
    s.add_argument("scenario", help=f"preset name ({', '.join(PRESETS)}) or YAML scenario file")
    s.add_argument("--runs", type=int, help="simulation runs")
    s.add_argument("--bootstrap-reps", type=int, help="bootstrap replicates B")
    s.add_argument("--delta", type=float, help="family-wise level")
    s.add_argument("--grid", type=_grid, help="trims 'p,q;p,q;...' compared on shared draws")
    s.add_argument("--group-sizes", type=_ints, help="comma-separated group sizes n")
    s.add_argument("--effect-sizes", type=_floats, help="comma-separated effect sizes (power scenarios)")
    s.add_argument("--full-grid", action="store_true", help="use the scenario's full trim/n/effect grid")
    s.add_argument("--dump-sample", metavar="CSV", help="also write the first simulated trial to CSV")
    common(s)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("roc", help="empirical ROC vertices and trim cut points per marker")
    r.add_argument("data", help="trial data CSV")
    r.add_argument("--trim", type=_trim, help="trim 'p,q' for cut points and the relevant segment")
    r.add_argument("--id-column", help="subject id column (default 'id')")
    r.add_argument("--status-column", help="status column (default 'status')")
    r.add_argument("--out", choices=("json", "table"), default="table", help="output format")
    r.set_defaults(func=cmd_roc)
    return parser


def _usage(parser: argparse.ArgumentParser, message: str) -> int:
    parser.print_usage(sys.stderr)
    print(f"pauc: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        return _usage(parser, "--seed must be non-negative")
    if getattr(args, "workers", 1) < 1:
        return _usage(parser, "--workers must be at least 1")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"pauc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except UsageError as exc:
        print(f"pauc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
