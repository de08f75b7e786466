"""Static scenarios: iterations and final throughput of each step rule,
plus the multi-start local search value as a reference."""
from _common import load, parser, write_rows

from repalloc.fairness import local_search
from repalloc.learning import POLICY_NAMES
from repalloc.simulator import run_scenario, scenario_topology


def main():
    p = parser(__doc__, "configs/static.json")
    p.add_argument("--users", type=int, nargs="+", default=[20, 30, 40])
    args = p.parse_args()
    base = load(args.config)
    rows = []
    for n in args.users:
        for seed in range(args.seeds):
            cfg = base.replace(n_users=n, seed=seed)
            ref = local_search(scenario_topology(cfg), starts=30, seed=seed)
            ref = sum(ref.throughputs)
            for step in POLICY_NAMES:
                m = run_scenario(cfg.replace(step=step))
                rows.append([n, seed, step, int(m.converged), m.iterations,
                             f"{m.final_throughput:.4f}", f"{ref:.4f}"])
            print(f"n={n} seed={seed} done")
    write_rows(args.out, "step_heuristics.csv",
               ["users", "seed", "step", "converged", "iterations", "throughput", "local_search"], rows)


if __name__ == "__main__":
    main()
