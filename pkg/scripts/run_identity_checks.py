#!/usr/bin/env python3
"""Randomised verification of the determinant identities.

Draws random connected graphs with random interior pseudomarginal points
and checks, per draw: determinant vs vertex-form zeta, determinant vs
truncated prime-cycle product, and the Hessian-determinant identity.
Prints a worst-case summary; exits non-zero if any tolerance is violated.
"""

import argparse
import sys

import numpy as np

from bethezeta.graph import nonbacktracking_spectral_radius
from bethezeta.lbp import random_interior_point
from bethezeta.zeta import (
    verify_main_formula,
    weights_from_pseudomarginals,
    zeta_det,
    zeta_ihara,
    zeta_product_truncated,
)


def random_graph(rng, max_vertices):
    sys.path.insert(0, "tests")
    from conftest import random_connected_graph

    n = int(rng.integers(3, max_vertices + 1))
    extra = int(rng.integers(0, n * (n - 1) // 2 - (n - 1) + 1))
    return random_connected_graph(rng, n, extra_edges=extra)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-vertices", type=int, default=8)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    worst_ihara = worst_main = worst_product = 0.0
    for _ in range(args.trials):
        g = random_graph(rng, args.max_vertices)
        u = rng.uniform(-0.9, 0.9, size=g.n_directed)
        det = zeta_det(g, u)
        worst_ihara = max(worst_ihara, abs(det - zeta_ihara(g, u)) / max(1e-30, abs(det)))

        q = random_interior_point(g, rng, m_scale=0.7, margin_frac=0.15)
        rep = verify_main_formula(g, q)
        worst_main = max(worst_main, abs(rep.log_residual))

        # product-form check only on sparse draws: prime cycles proliferate
        # exponentially with the cycle rank, so dense graphs need shorter
        # truncations than the tail bound is useful for
        if g.n_edges - g.n_vertices + 1 <= 3:
            uq = weights_from_pseudomarginals(g, q).u
            scale = 0.4 / max(1e-12, np.max(np.abs(uq)) * nonbacktracking_spectral_radius(g))
            small = uq * min(1.0, scale)
            value, bound = zeta_product_truncated(g, small, max_len=12)
            gap = abs(value - zeta_det(g, small))
            worst_product = max(worst_product, gap - bound)

    print(f"trials                     : {args.trials}")
    print(f"max ihara relative error   : {worst_ihara:.3e}  (tolerance 1e-10)")
    print(f"max main-formula residual  : {worst_main:.3e}  (tolerance 1e-8)")
    print(f"max product excess vs bound: {worst_product:.3e}  (must be <= 0)")
    ok = worst_ihara <= 1e-10 and worst_main <= 1e-8 and worst_product <= 0
    print("RESULT:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
