"""Power tables on calibrated effects, procedures compared on shared random numbers."""

from __future__ import annotations

from _common import load, parser, print_table

from pauc.simulation import calibrate_effect, run_comparison


def power_table(name: str, description: str) -> None:
    p = parser(description, runs=1000, reps=2000)
    p.add_argument("--column", type=int, default=0, help="which effect-size column of the preset grid to use")
    args = p.parse_args()
    spec, cfg, trims, sizes = load(name, args)
    effects = [row[args.column] for row in cfg["grid"]["effect_sizes"]]
    calibrated = [calibrate_effect(spec.with_(trim=t), lam).spec for t, lam in zip(trims, effects)]
    for t, c, lam in zip(trims, calibrated, effects):
        print(f"{t}: lambda={lam} -> tuned location {c.mu:.6f}")
    power = {}
    for n in sizes:
        reps = run_comparison([c.with_(group_size=n) for c in calibrated], seed=args.seed, runs=args.runs, workers=args.workers)
        for t, rep in zip(trims, reps):
            power[(t, n)] = rep.rejection_rate
    print_table(f"power, delta={spec.delta}, runs={args.runs}, B={args.bootstrap_reps}", trims, sizes, lambda t, n: power[(t, n)])
