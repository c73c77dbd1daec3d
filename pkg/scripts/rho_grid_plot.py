"""Heat map of the Ł-weight ρ on a coordinate plane.

    python3 scripts/rho_grid_plot.py shear_z2 --bounds -1 1 --resolution 101 --out rho.png

Needs matplotlib (pip install -e .[plots]). Undefined cells (all gradients
zero) are left blank.
"""

import argparse

import numpy as np

from lojmilnor.cli import resolve_map, rho_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("map", help="map file or bundled name")
    ap.add_argument("--axes", type=int, nargs=2, default=[0, 1])
    ap.add_argument("--bounds", type=float, nargs=2, default=[-1.0, 1.0])
    ap.add_argument("--resolution", type=int, default=101)
    ap.add_argument("--out", default="rho_grid.png")
    args = ap.parse_args()

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    G = resolve_map(args.map)
    grid, _ = rho_grid(G, tuple(args.axes), tuple(args.bounds), args.resolution)
    r = grid.resolution
    vals = np.array(grid.values).reshape(r, r)
    vals = np.where(vals < 0.0, np.nan, vals)
    lo, hi = grid.bounds
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(vals, origin="lower", extent=(lo, hi, lo, hi), vmin=0.0, vmax=1.0, cmap="viridis")
    fig.colorbar(im, ax=ax, label="ρ")
    ax.set_xlabel(f"x{grid.axes[0]}")
    ax.set_ylabel(f"x{grid.axes[1]}")
    ax.set_title(G.label)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}; min ρ = {np.nanmin(vals):.6g}")


if __name__ == "__main__":
    main()
