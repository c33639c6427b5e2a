#!/usr/bin/env python3
"""Render critical-difference diagram data (from `tsadbench report --cd-out`)
to a static image.

usage: plot_cd.py cd.json out.png
"""
import json
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot(data, path):
    methods = data["methods"]
    n = len(methods)
    lo = 1
    hi = max(n + data.get("hidden", 0), max(m["mean_rank"] for m in methods))
    half = (n + 1) // 2
    height = 1.2 + 0.3 * max(half, 1) + 0.15 * len(data["segments"])
    fig, ax = plt.subplots(figsize=(8, height))
    ax.set_xlim(lo - 0.5, hi + 0.5)
    ax.set_ylim(-(half + 1) * 0.3 - 0.15 * len(data["segments"]), 0.6)
    ax.axis("off")

    ax.hlines(0, lo, hi, color="black", lw=1)
    for r in range(int(lo), int(hi) + 1):
        ax.vlines(r, 0, 0.08, color="black", lw=1)
        ax.text(r, 0.15, str(r), ha="center", va="bottom", fontsize=9)

    cd = data["critical_difference"]
    ax.hlines(0.45, lo, lo + cd, color="black", lw=1.5)
    ax.text(lo + cd / 2, 0.5, f"CD = {cd:.3f}", ha="center", va="bottom", fontsize=9)

    for i, m in enumerate(methods):
        left = i < half
        depth = (i if left else n - 1 - i) + 1
        y = -depth * 0.3
        x_text = lo - 0.4 if left else hi + 0.4
        ax.plot([m["mean_rank"], m["mean_rank"], x_text], [0, y, y], color="black", lw=0.8)
        ax.text(
            x_text,
            y,
            f"{m['name']} ({m['mean_rank']:.2f})",
            ha="right" if left else "left",
            va="center",
            fontsize=9,
        )

    for j, seg in enumerate(data["segments"]):
        y = -0.1 - 0.12 * j
        ax.hlines(y, seg["from_rank"] - 0.03, seg["to_rank"] + 0.03, color="black", lw=3)

    fig.savefig(path, bbox_inches="tight", dpi=150)


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    with open(sys.argv[1]) as f:
        data = json.load(f)
    plot(data, sys.argv[2])


if __name__ == "__main__":
    main()
