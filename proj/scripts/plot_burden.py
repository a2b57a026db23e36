#!/usr/bin/env python3
"""Plots relative review burden from `seqreview burden` CSV output.

Example:
    seqreview burden --seed 7 --n 2..10 --out burden.csv
    python3 scripts/plot_burden.py burden.csv burden.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("csv", help="output of `seqreview burden`")
    parser.add_argument("png", help="image to write")
    args = parser.parse_args()

    df = pd.read_csv(args.csv)
    x = "n" if (df["setting"] == "gaussian").all() else "paper_count_mean"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(df[x], df["relative_burden"], yerr=2 * df["std_error"], marker="o", capsize=3)
    ax.axhline(1.0, color="grey", linestyle="--", linewidth=0.8)
    ax.set_xlabel("papers per author" if x == "n" else "mean papers per author")
    ax.set_ylabel("sequential / parallel review burden")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(args.png, dpi=150)


if __name__ == "__main__":
    main()
