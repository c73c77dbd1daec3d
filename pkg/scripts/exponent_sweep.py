"""Fixed-one Łojasiewicz exponent of z^d against the number of radial levels.

The envelope estimate approaches (d-1)/d like log2(d)/(d·levels) when ε = 1/2,
so this prints how many levels a given tolerance needs.

    python3 scripts/exponent_sweep.py --degrees 2 3 4 --levels 8 16 24 32 64
"""

import argparse

from lojmilnor.loja import loja_fit
from lojmilnor.maps import complex_power
from lojmilnor.sampling import RegionSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degrees", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--levels", type=int, nargs="+", default=[8, 16, 24, 32, 48, 64])
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--directions", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--variant", choices=("strong", "weak"), default="strong")
    args = ap.parse_args()

    print("d,levels,theta_hat,target,error")
    for d in args.degrees:
        for L in args.levels:
            region = RegionSpec.at_origin(2, radius=args.epsilon, radial_levels=L,
                                          directions_per_level=args.directions, seed=args.seed)
            est = loja_fit(complex_power(d), (0.0, 0.0), region, args.variant)
            target = (d - 1) / d
            print(f"{d},{L},{est.theta_hat!r},{target!r},{est.theta_hat - target!r}")


if __name__ == "__main__":
    main()
