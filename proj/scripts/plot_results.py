#!/usr/bin/env python3
"""Plot the CSV tables written by oirs-sim.

Usage: plot_results.py RESULT_DIR [RESULT_DIR ...] [--out DIR]

Each RESULT_DIR is an --out directory of one oirs-sim run. Every known
table found there becomes one PNG in --out (default: the result directory).
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def angle_selectivity(df, ax):
    ax.plot(df["aod_deg"], df["relative_to_peak"])
    ax.set_xlabel("angle of departure offset (deg)")
    ax.set_ylabel("gain / peak")


def coherence_space(df, ax):
    for name, part in df.groupby("direction"):
        (line,) = ax.plot(part["delta_r"], part["exact"], label=f"{name} exact")
        ax.plot(part["delta_r"], part["quadratic"], "--", color=line.get_color(), label=f"{name} 2nd order")
    ax.set_xlabel("element shift (m)")
    ax.set_ylabel("relative gain change")
    ax.legend()


def coherence_time(df, ax):
    ax.plot(df["dt"], df["exact"], label="exact")
    ax.plot(df["dt"], df["quadratic"], "--", label="2nd order")
    ax.set_xlabel("time offset (s)")
    ax.set_ylabel("relative gain change")
    ax.legend()


def codebook_sweep(column):
    def plot(df, ax):
        nu = df[df["kind"] == "go_nonuniform"]
        ax.plot(nu[column], nu["frobenius"], "o-", label="non-uniform")
        for _, row in df[df["kind"] == "uniform"].iterrows():
            ax.axhline(row["frobenius"], ls="--", color="gray", label="uniform")
        ax.set_xlabel(column.replace("_", " "))
        ax.set_ylabel("Frobenius error")
        ax.legend()

    return plot


def codebook_compare(df, ax):
    for kind, part in df.groupby("kind"):
        ax.plot(part["radius"], part["frobenius"], "o-", label=kind)
    ax.set_xlabel("positioning error radius r (m)")
    ax.set_ylabel("Frobenius error")
    ax.legend()


def codebook_count(df, ax):
    ax.plot(df["radius"], df["uniform_count"], "o-", label="uniform")
    ax.plot(df["radius"], df["nonuniform_count"], "o-", label="non-uniform")
    ax.set_xlabel("positioning error radius r (m)")
    ax.set_ylabel("codewords swept")
    ax.set_yscale("log")
    ax.legend()


def nmse(df, ax):
    for s, part in df.groupby("s"):
        ax.errorbar(part["sigma"], part["mean_nmse"], yerr=part["stderr_nmse"], marker="o", label=f"s = {s}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("noise standard deviation")
    ax.set_ylabel("NMSE")
    ax.legend()


def overhead(df, ax):
    for (nt, nr), part in df.groupby(["nt", "nr"]):
        ax.plot(part["s"], part["params"], "o-", label=f"{nt}x{nr}")
    ax.set_xlabel("spacing s")
    ax.set_ylabel("estimated parameters")
    ax.set_yscale("log")
    ax.legend()


PLOTS = {
    "angle_selectivity": angle_selectivity,
    "coherence_space": coherence_space,
    "coherence_time": coherence_time,
    "codebook_omega": codebook_sweep("roll_step_deg"),
    "codebook_gamma": codebook_sweep("yaw_step_deg"),
    "codebook_compare": codebook_compare,
    "codebook_count": codebook_count,
    "nmse_siso": nmse,
    "nmse_mimo": nmse,
    "overhead": overhead,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("dirs", nargs="+", type=Path)
    parser.add_argument("--out", type=Path)
    args = parser.parse_args()

    written = 0
    for d in args.dirs:
        out = args.out or d
        out.mkdir(parents=True, exist_ok=True)
        for stem, plot in PLOTS.items():
            path = d / f"{stem}.csv"
            if not path.exists():
                continue
            df = pd.read_csv(path)
            fig, ax = plt.subplots(figsize=(6, 4))
            plot(df, ax)
            ax.set_title(stem.replace("_", " "))
            ax.grid(True, which="both", alpha=0.3)
            fig.tight_layout()
            fig.savefig(out / f"{stem}.png", dpi=120)
            plt.close(fig)
            print(out / f"{stem}.png")
            written += 1
    if written == 0:
        raise SystemExit("no known tables found")


if __name__ == "__main__":
    main()
