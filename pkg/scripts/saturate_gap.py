"""Drive the restriction entropy gap to its ceiling on small inclusions.

For each inclusion the gap S_tau(phi|B) - S_tau(phi) is capped by
log pp_positive; a derivative-free search should reach the cap. On the
tensor inclusion the maximally entangled state is the known maximizer, so
the optimizer mostly has to confirm it; on scalars-in-M_n any pure state
works and the search has to find one from random starts.
"""

import argparse
import sys

import numpy as np

from vne.harness import maximize_gap
from vne.inclusion import (
    diagonal_inclusion,
    entropy_gap_bound,
    scalar_inclusion,
    tensor_pair_inclusion,
)
from vne.states import State


def bell_check(inc):
    """Gap of the maximally entangled state, computed without the optimizer."""
    p, q = inc.bipartite
    r = min(p, q)
    v = np.zeros(p * q, dtype=complex)
    for i in range(r):
        v[i * q + i] = 1.0 / np.sqrt(r)
    rho = np.outer(v, v.conj())
    phi = State(inc.ambient, inc.tau, rho / float(np.real(inc.tau.value(rho))))
    return entropy_gap_bound(inc, phi).gap


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--restarts", type=int, default=200)
    args = ap.parse_args(argv)

    cases = [
        ("M_2 (x) 1  in  M_4", tensor_pair_inclusion(2, 2)),
        ("scalars    in  M_2", scalar_inclusion(2)),
        ("scalars    in  M_3", scalar_inclusion(3)),
        ("diagonals  in  M_2", diagonal_inclusion(2)),
    ]
    worst = 0.0
    print(f"{'inclusion':<22} {'best gap':>12} {'ceiling':>12} {'shortfall':>11} "
          f"{'evals':>7}  converged")
    for label, inc in cases:
        res = maximize_gap(inc, restarts=args.restarts, seed=args.seed)
        worst = max(worst, res.shortfall)
        print(f"{label:<22} {res.gap:>12.7f} {res.bound:>12.7f} "
              f"{res.shortfall:>11.2e} {res.evaluations:>7}  {res.converged}")
    inc = cases[0][1]
    print(f"\nmaximally entangled state on M_2 (x) 1 in M_4: "
          f"gap = {bell_check(inc):.7f} (= log 4 = {np.log(4.0):.7f})")
    print(f"worst shortfall {worst:.2e}")
    return 0 if worst < 1e-4 else 1


if __name__ == "__main__":
    sys.exit(run())
