"""Dynamic scenarios: the learning rule against the fixed association
baselines and against learning on raw throughput."""
from _common import load, parser, write_rows

from repalloc.simulator import compare_policies, mean_ci


def main():
    args = parser(__doc__, "configs/dynamic.json").parse_args()
    base = load(args.config)
    rows, means = [], {}
    for seed in range(args.seeds):
        for name, m in compare_policies(base.replace(seed=seed)).items():
            rows.append([seed, name, f"{m.mean_throughput():.4f}", f"{m.mean_handovers():.3f}"])
            means.setdefault(name, []).append(m.mean_throughput())
    for name, v in means.items():
        mu, h = mean_ci(v)
        print(f"{name:18s} {mu:8.3f} +- {h:.3f}")
    write_rows(args.out, "baselines.csv", ["seed", "policy", "throughput", "handovers"], rows)


if __name__ == "__main__":
    main()
