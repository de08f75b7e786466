"""Mean handovers per user as the population and choice sets grow."""
from _common import load, parser, write_rows

from repalloc.simulator import run_scenario


def main():
    p = parser(__doc__, "configs/static.json")
    p.add_argument("--users", type=int, nargs="+", default=[20, 50, 100])
    p.add_argument("--choices", type=int, nargs="+", default=[2, 3])
    args = p.parse_args()
    base = load(args.config)
    rows = []
    for c in args.choices:
        for n in args.users:
            h = []
            for seed in range(args.seeds):
                m = run_scenario(base.replace(n_users=n, choices=c, seed=seed))
                h.append(m.mean_handovers())
                rows.append([c, n, seed, int(m.converged), f"{h[-1]:.3f}"])
            print(f"choices={c} users={n}: {sum(h) / len(h):.2f} handovers per user")
    write_rows(args.out, "handovers.csv", ["choices", "users", "seed", "converged", "handovers"], rows)


if __name__ == "__main__":
    main()
