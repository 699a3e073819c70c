#!/usr/bin/env python3
"""Head-to-head Hill-Climbing vs evolutionary search: score, structure, time.

Example:
    python3 scripts/compare_search.py --shape healthcare --runs 5
"""
import argparse
import dataclasses
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np  # noqa: E402

from hybridbn import (  # noqa: E402
    EvoConfig,
    SHAPES,
    ScoreKind,
    evolve,
    generate_clg_network,
    hill_climb,
    skeleton_f1,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--shape", choices=sorted(SHAPES), default="healthcare")
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--score", choices=["mi", "ll", "bic", "aic"], default="mi")
    args = parser.parse_args()

    kind = ScoreKind(args.score)
    rows = []
    for run in range(args.runs):
        spec = dataclasses.replace(SHAPES[args.shape], seed=1000 + run)
        truth, data = generate_clg_network(spec)

        t0 = time.perf_counter()
        hc = hill_climb(data, kind)
        t_hc = time.perf_counter() - t0

        t0 = time.perf_counter()
        evo = evolve(data, kind, EvoConfig(population_size=20, generations=60,
                                           stagnation_limit=15, seed=run))
        t_evo = time.perf_counter() - t0

        rows.append((run, hc.effective, evo.effective,
                     skeleton_f1(hc.dag, truth.dag), skeleton_f1(evo.dag, truth.dag),
                     t_hc, t_evo))
        print(f"run {run}: hc eff={hc.effective:.4f} f1={rows[-1][3]:.2f} {t_hc:.2f}s | "
              f"evo eff={evo.effective:.4f} f1={rows[-1][4]:.2f} {t_evo:.2f}s")

    arr = np.array([r[1:] for r in rows])
    print(f"\nmeans: hc eff={arr[:,0].mean():.4f} evo eff={arr[:,1].mean():.4f} "
          f"hc f1={arr[:,2].mean():.2f} evo f1={arr[:,3].mean():.2f} "
          f"hc {arr[:,4].mean():.2f}s evo {arr[:,5].mean():.2f}s")


if __name__ == "__main__":
    main()
