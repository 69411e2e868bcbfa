"""Reference values for the closed-form threshold formulas.

Evaluates every quantity at 50 significant digits with mpmath and writes
tests/data/thresh_oracle.csv. Rerun after changing the grid below:

    python3 tests/oracle/thresh_oracle.py
"""
import csv
import os

from mpmath import mp, mpf, sqrt, sin, pi, log, nstr

mp.dps = 50

PC = 1 - 2 * sin(pi / 18)
# Decimal occupancy targets; p_c enters at full precision.
RHOS = [mpf("0.1"), mpf("0.3"), mpf("0.5"), PC]


def hex_count(m, n):
    return m * m + 2 * m * (n - 1) ** 2


def radius(m, n):
    return 1 / (2 * sqrt(mpf(hex_count(m, n))))


def classes(m, rho):
    rho = mpf(rho)
    # Smallest integer N >= 1 with M^2 / S(M, N) <= rho, by direct scan.
    n = 1
    while mpf(m * m) / hex_count(m, n) > rho:
        n += 1
    return min(n, m) ** 2


def majority(m):
    x = 1 + sqrt(mpf(m) / 2)
    return int(mp.floor(x + mpf(1) / 2))


def window(n):
    # Order of the sharp-threshold window length at n points.
    n = mpf(n)
    return sqrt(log(n) / n) * log(n) ** (mpf(1) / 4)


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "data", "thresh_oracle.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "m", "arg", "value"])
        w.writerow(["p_c", 0, 0, nstr(PC, 30)])
        w.writerow(["window_ratio", 1600, 100, nstr(window(1600) / window(100), 30)])
        for m in range(2, 201):
            w.writerow(["majority_n", m, 0, majority(m)])
            for n in range(1, min(m, 20) + 1):
                r = radius(m, n)
                w.writerow(["hex_count", m, n, hex_count(m, n)])
                w.writerow(["circumradius", m, n, nstr(r, 30)])
                w.writerow(["r0_star", m, n, nstr((1 / mpf(2 * n) + r) / 2, 30)])
                delta = 1 / mpf(2 * n) - r
                w.writerow(["interval_length", m, n, nstr(delta, 30) if delta > 0 else "none"])
            for k, rho in enumerate(RHOS):
                w.writerow(["expected_classes", m, k, classes(m, rho)])


if __name__ == "__main__":
    main()
