"""Type-I error rates of the maximum test over trims and group sizes (three-marker null design)."""

from _common import load, parser, print_table

from pauc.simulation import run_comparison


def main() -> None:
    args = parser(__doc__, runs=2000, reps=1000).parse_args()
    spec, cfg, trims, sizes = load("table1", args)
    rates = {}
    for n in sizes:
        specs = [spec.with_(trim=t, group_size=n) for t in trims]
        for t, rep in zip(trims, run_comparison(specs, seed=args.seed, runs=args.runs, workers=args.workers)):
            rates[(t, n)] = rep.rejection_rate
    print_table(f"type-I error, delta={spec.delta}, runs={args.runs}, B={args.bootstrap_reps}", trims, sizes, lambda t, n: rates[(t, n)])


if __name__ == "__main__":
    main()
