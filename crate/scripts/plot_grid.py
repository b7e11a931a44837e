"""Plot a `rotdecoh grid` CSV as a ratio heat map over (omega, z_dimensionless).

Development utility only; needs numpy, pandas and matplotlib.

    rotdecoh grid --out grid.csv
    python scripts/plot_grid.py grid.csv ratio.png
"""

import sys

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def main(src, dst):
    df = pd.read_csv(src)
    if "temperature_K" in df:
        df = df[df["temperature_K"] == df["temperature_K"].iloc[0]]
    table = df.pivot(index="z_dimensionless", columns="omega", values="ratio")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(table.columns, table.index, np.log10(table.values), shading="auto")
    ax.set_yscale("log")
    ax.set_xlabel("omega [rad]")
    ax.set_ylabel("z (dimensionless)")
    fig.colorbar(mesh, label="log10 Lambda_R / Lambda_T")
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit("usage: plot_grid.py GRID.csv OUT.png")
    main(sys.argv[1], sys.argv[2])
