#!/usr/bin/env python3
"""Plot the tables written by `reactive-sim simulate --out DIR`.

    python3 tools/plot.py DIR [--save out.png]
"""
import argparse
import glob
import os

import matplotlib.pyplot as plt
import numpy as np


def load(path):
    return np.atleast_2d(np.loadtxt(path, comments="#"))


def vehicle_ids(out_dir):
    names = glob.glob(os.path.join(out_dir, "trajectory_*.dat"))
    return sorted(int(os.path.basename(n)[11:-4]) for n in names)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir")
    ap.add_argument("--save")
    args = ap.parse_args()

    fig, axes = plt.subplots(2, 2, figsize=(12, 8))
    path_ax, heading_ax, thrust_ax, clear_ax = axes.flat
    for vid in vehicle_ids(args.out_dir):
        tr = load(os.path.join(args.out_dir, f"trajectory_{vid}.dat"))
        path_ax.plot(tr[:, 1], tr[:, 2], "--", lw=0.8, label=f"{vid} desired")
        path_ax.plot(tr[:, 3], tr[:, 4], lw=1.2, label=f"{vid} actual")
        hd = load(os.path.join(args.out_dir, f"heading_{vid}.dat"))
        heading_ax.plot(hd[:, 0], hd[:, 1], label=str(vid))
        th = load(os.path.join(args.out_dir, f"thrust_{vid}.dat"))
        thrust_ax.plot(th[:, 0], th[:, 1], label=str(vid))
        cl = load(os.path.join(args.out_dir, f"clearance_{vid}.dat"))
        # no other vehicles or obstacles in range are logged as inf
        clear_ax.plot(cl[:, 0], np.where(np.isfinite(cl[:, 1]), cl[:, 1], np.nan), label=f"{vid} obstacle")
        clear_ax.plot(cl[:, 0], np.where(np.isfinite(cl[:, 2]), cl[:, 2], np.nan), label=f"{vid} vehicle")

    path_ax.set_aspect("equal")
    path_ax.set_title("path, m")
    heading_ax.set_title("heading, rad")
    thrust_ax.set_title("thrust, N")
    clear_ax.set_title("clearance, m")
    for ax in axes.flat:
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()
