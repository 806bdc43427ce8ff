"""Compare the compiled and vectorised Monte-Carlo kernels.

    python benchmarks/bench_mc.py [--trials 20000] [--batches 4]

Both backends run the same counter-based random stream, so the trail
histograms must match exactly; the script checks that before timing.
"""

import argparse

import numpy as np

from iceentropy import _accel
from iceentropy.eo_mc import MCConfig, estimate
from iceentropy.generators import clique, hypercube, torus

GRAPHS = {
    "K5": lambda: clique(5),
    "C16xC16": lambda: torus([16, 16]),
    "Q8": lambda: hypercube(8),
    "C40xC40": lambda: torus([40, 40]),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--batches", type=int, default=4)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    cfg = MCConfig(args.trials, args.batches, seed=args.seed)
    backends = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]

    print(f"{'graph':<10}{'|E|':>6}{'backend':>9}{'ns/trial':>12}{'ns/(trial*edge)':>17}{'speedup':>9}")
    for name, make in GRAPHS.items():
        g = make()
        runs = {b: estimate(g, cfg, backend=b) for b in backends}
        if len(runs) == 2:
            assert np.array_equal(runs["numba"].trail_histogram, runs["numpy"].trail_histogram)
        ref = runs[backends[-1]].ns_per_trial
        for b, est in runs.items():
            print(
                f"{name:<10}{g.num_edges:>6}{b:>9}{est.ns_per_trial:>12.0f}"
                f"{est.ns_per_trial / g.num_edges:>17.2f}{ref / est.ns_per_trial:>9.1f}"
            )


if __name__ == "__main__":
    main()
