#!/usr/bin/env python3
"""Numeric-rank tables for the matching matrices of every built-in case.

For each matching order n the basis size p sweeps 2n-1 .. 2n+2; the table
shows the rank of the closed-form reference matrix next to the rank of the
wave matrix at random centers, and the final line states whether full rank
2n+1 appeared exactly when p >= 2n+1 throughout.
"""

import argparse
import sys

import numpy as np

from gpw.bench import case_by_name, draw_centers
from gpw.construction import basis_angles, build_basis
from gpw.interp import assemble_gpw_matrix, assemble_reference_matrix, numeric_rank

CASES = ("Ad", "Jc", "JJ", "cs")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument(
        "--case", choices=CASES, action="append",
        help="repeatable; default: all four cases",
    )
    parser.add_argument("--centers", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    iff_everywhere = True
    for name in args.case or CASES:
        case = case_by_name(name)
        rng = np.random.default_rng(args.seed)
        centers = draw_centers(case, args.centers, rng)
        print(f"case {name}: ranks at {len(centers)} centers, seed {args.seed}")
        print(" n   p  reference  gpw  full rank (2n+1)")
        for n in (1, 2, 3, 4):
            for p in (2 * n - 1, 2 * n, 2 * n + 1, 2 * n + 2):
                reference = numeric_rank(
                    assemble_reference_matrix(basis_angles(p), n)
                )
                ranks = set()
                for center in centers:
                    op = case.family.instantiate(center, q=max(1, n - 1))
                    basis = build_basis(op, p)
                    ranks.add(numeric_rank(assemble_gpw_matrix(basis, n)))
                observed = "/".join(str(r) for r in sorted(ranks))
                print(f"{n:2d} {p:3d} {reference:10d} {observed:>4}  {2 * n + 1:d}")
                iff_everywhere &= (reference == 2 * n + 1) == (p >= 2 * n + 1)
                iff_everywhere &= ranks == {reference}
        print()
    print(f"full rank exactly when p >= 2n+1, wave rank = reference rank: {iff_everywhere}")
    return 0 if iff_everywhere else 1


if __name__ == "__main__":
    sys.exit(main())
