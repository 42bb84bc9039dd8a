"""Two-group gain of full differentiation over one price, closed form.

Writes the gain against t = sqrt(theta_1/theta_2) for a few (alpha, s_bar)
pairs, and the peak gain against s_bar for a few alpha values.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from usage_pricing.analysis import gain_max, gain_two_group
from usage_pricing.scenario import fmt_number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with (out / "two_group_gain_vs_t.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "s_bar", "t", "gain", "region"])
        for alpha in (0.1, 0.5, 0.9):
            for s_bar in (0.5, 2.0, 10.0):
                for t in np.linspace(1.001, 1.5 * (s_bar + alpha) / alpha, 400):
                    p = gain_two_group(float(t), alpha, s_bar)
                    w.writerow([alpha, s_bar, fmt_number(p.t), fmt_number(p.gain), p.region])

    s_grid = np.geomspace(1e-3, 1e3, 601)
    with (out / "two_group_peak_gain.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "s_bar", "t_peak", "g_max"])
        for alpha in (0.01, 0.1, 0.3, 0.5, 0.7, 0.9):
            best = max(gain_max(alpha, float(s))[1] for s in s_grid)
            print(f"alpha={alpha:<5} largest peak gain {100 * best:6.2f}%")
            for s in s_grid:
                t_peak, g = gain_max(alpha, float(s))
                w.writerow([alpha, fmt_number(s), fmt_number(t_peak), fmt_number(g)])
    print(f"wrote {out}/two_group_gain_vs_t.csv and {out}/two_group_peak_gain.csv")


if __name__ == "__main__":
    main()
