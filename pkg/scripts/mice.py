"""Mixed mice/elephant traffic: every flow learns vs mice parked on WiFi."""
from _common import load, parser, write_rows

from repalloc.simulator import mean_ci, mice_policy_compare


def main():
    p = parser(__doc__, "configs/mice.json")
    p.add_argument("--fractions", type=float, nargs="+", default=[0.0, 0.5, 0.9])
    args = p.parse_args()
    base = load(args.config)
    rows = []
    for frac in args.fractions:
        gains = []
        for seed in range(args.seeds):
            r = mice_policy_compare(base.replace(seed=seed, mice_fraction=frac))
            gains.append(r["gain_percent"])
            rows.append([frac, seed, f"{r['all_learn_throughput']:.4f}", f"{r['mice_wifi_throughput']:.4f}",
                         f"{r['gain_percent']:.3f}", f"{r['all_learn_handovers']:.3f}",
                         f"{r['mice_wifi_handovers']:.3f}"])
        mu, h = mean_ci(gains)
        print(f"mice fraction {frac:.2f}: gain {mu:+.2f}% +- {h:.2f}")
    write_rows(args.out, "mice.csv", ["mice_fraction", "seed", "all_learn", "mice_wifi", "gain_percent",
                                      "all_learn_handovers", "mice_wifi_handovers"], rows)


if __name__ == "__main__":
    main()
