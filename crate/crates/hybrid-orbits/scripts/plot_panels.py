#!/usr/bin/env python3
"""Plot the panel files written by `hybrid-orbits design` (needs matplotlib).

Usage: python3 plot_panels.py [plot-dir] [out.png]
"""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

PANELS = [("th1", "theta1 [deg]"), ("th2", "theta2 [deg]"), ("th3", "theta3 [deg]"),
          ("u1", "u1 [N m]"), ("u2", "u2 [N m]")]


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    head, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
    cols = list(zip(*data))
    return head, cols


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    out = sys.argv[2] if len(sys.argv) > 2 else str(root / "panels.png")
    fig, axes = plt.subplots(len(PANELS), 1, figsize=(7, 12), sharex=True)
    for ax, (name, label) in zip(axes, PANELS):
        head, cols = load(root / f"{name}.csv")
        t = cols[0]
        for h, c in zip(head[1:], cols[1:]):
            if h == "desired":
                ax.plot(t, c, "r", lw=1.5, label=h)
            elif h == "final":
                ax.plot(t, c, "b", lw=1.5, label=h)
            elif h == "embedding":
                ax.plot(t, c, "g--", lw=1, label=h)
            else:
                ax.plot(t, c, color="0.7", lw=0.5)
        ax.set_ylabel(label)
    axes[0].legend(loc="best")
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
