"""Total throughput and per-user spread of the best allocation found on the
shipped topology as the fairness exponent grows."""
import numpy as np
from _common import parser, write_rows

from repalloc.fairness import optimize
from repalloc.wireless import golden_topology


def main():
    p = parser(__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0, 4.0])
    p.add_argument("--starts", type=int, default=50)
    args = p.parse_args()
    top = golden_topology("fairness")
    rows = []
    for a in args.alphas:
        r = optimize(top, alpha=a, starts=args.starts)
        x = np.asarray(r.throughputs)
        rows.append([a, r.certificate, f"{x.sum():.4f}", f"{x.min():.4f}", f"{x.max():.4f}",
                     " ".join(map(str, r.allocation))])
        print(f"alpha={a}: total {x.sum():.3f}, min {x.min():.3f}, max {x.max():.3f} ({r.certificate})")
    write_rows(args.out, "fairness_tradeoff.csv",
               ["alpha", "certificate", "total", "min_user", "max_user", "allocation"], rows)


if __name__ == "__main__":
    main()
