"""IRD of the symmetric (-t, t) construction with targets (0, 1/2, 1): the
middle group stays at exactly 1/2 while the IRD vanishes only as t grows."""

import argparse

from ordinal_risk.org_solver import degenerate_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, default=1.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--tmax", type=int, default=8)
    args = ap.parse_args()
    print(f"{'t':>4} {'R1':>12} {'R2':>5} {'R3':>12} {'IRD':>12}")
    for row in degenerate_demo(args.mu, args.sigma, range(1, args.tmax + 1)):
        print(f"{row.t:4.0f} {row.R[0]:12.4e} {row.R[1]:5.2f} {row.R[2]:12.10f} {row.ird:12.4e}")


if __name__ == "__main__":
    main()
