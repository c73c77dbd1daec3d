"""Milnor radius and pair scans over the bundled corpus.

For each map, prints the largest ε in the list whose (a) and (b) scans both
hold, and the pair-scan verdict at (ε, δ).

    python3 scripts/milnor_radius_demo.py --epsilons 1 0.5 0.1 --delta 0.01
"""

import argparse

from lojmilnor.errors import InsufficientDataError
from lojmilnor.maps import corpus
from lojmilnor.milnor import milnor_pair_scan, milnor_radius_estimate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilons", type=float, nargs="+", default=[1.0, 0.5, 0.1])
    ap.add_argument("--delta", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--maps", nargs="*", default=None, help="bundled names (default: all)")
    args = ap.parse_args()

    maps = corpus()
    names = args.maps or sorted(maps)
    print(f"{'map':16s} {'radius':>8s}  a/b per epsilon{'':14s} pair@{max(args.epsilons)}")
    for name in names:
        G = maps[name]
        est = milnor_radius_estimate(G, args.epsilons, seed=args.seed)
        per = " ".join(f"{r['a'].holds:d}{r['b'].holds:d}" for r in est.reports)
        try:
            pair = milnor_pair_scan(G, max(args.epsilons), args.delta, seed=args.seed)
            ptxt = f"{pair.verdict} (margin {pair.transversality_margin:.3g})"
        except InsufficientDataError as err:
            ptxt = f"n/a: {err}"
        radius = "none" if est.epsilon is None else f"{est.epsilon:g}"
        print(f"{name:16s} {radius:>8s}  {per:28s} {ptxt}")


if __name__ == "__main__":
    main()
