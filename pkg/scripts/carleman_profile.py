"""Print rhs/lhs against tau for each Carleman order on the seeded bump battery.

Use it to see where in [tau_bar, 4 tau_bar] the supremum is attained and how
the constant depends on epsilon.
"""

import argparse

import numpy as np

from sgplate.uc_lab import CarlemanWeight, carleman_battery, carleman_sweep, sweep_taus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau-bar", type=float, default=8.0)
    ap.add_argument("--count", type=int, default=9)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eps", type=float, nargs=3, default=[0.5, 0.5, 0.2], metavar=("E1", "E2", "E3"))
    args = ap.parse_args()
    taus = sweep_taus(args.tau_bar, args.count)
    battery = carleman_battery(args.seed)
    for order, eps in zip((1, 2, 3), args.eps):
        print(f"\norder {order}, epsilon {eps}")
        print("tau       " + " ".join(f"{u.name[:18]:>20}" for u in battery))
        rows = np.array([carleman_sweep(order, u, CarlemanWeight(eps), taus).ratio for u in battery]).T
        for tau, row in zip(taus, rows):
            print(f"{tau:8.3f}  " + " ".join(f"{v:20.6g}" for v in row))
        print("sup      " + " ".join(f"{v:20.6g}" for v in rows.max(axis=0)))


if __name__ == "__main__":
    main()
