"""Plot ``*_summary.csv`` files: median curve with interquartile band.

    python scripts/plot_summaries.py results/coverage-e6 --column c_avg
    python scripts/plot_summaries.py results/mentor-e6 --column c_1 c_2 c_3 c_4 c_5 c_6
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from clic.harness import read_csv


def main():
    p = argparse.ArgumentParser()
    p.add_argument("directory", type=Path)
    p.add_argument("--column", nargs="+", default=["c_avg"])
    p.add_argument("--out", type=Path)
    args = p.parse_args()

    files = sorted(args.directory.glob("*_summary.csv"))
    if not files:
        raise SystemExit(f"no summary files in {args.directory}")
    fig, axes = plt.subplots(1, len(args.column), figsize=(4.5 * len(args.column), 3.5), squeeze=False)
    for ax, col in zip(axes[0], args.column):
        for f in files:
            header, rows = read_csv(f)
            x = rows[:, 0]
            med = rows[:, header.index(f"{col}_median")]
            lo = rows[:, header.index(f"{col}_q25")]
            hi = rows[:, header.index(f"{col}_q75")]
            label = f.stem.removesuffix("_summary")
            ax.plot(x, med, label=label)
            ax.fill_between(x, lo, hi, alpha=0.25)
        ax.set_title(col)
        ax.set_xlabel("learner steps")
    axes[0][0].legend(fontsize=7)
    fig.tight_layout()
    out = args.out or args.directory / ("_".join(args.column) + ".png")
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
