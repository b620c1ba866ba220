"""Random exact triangles pushed through the collapse isomorphism, plus the
split homology bound on both block shapes."""

import argparse
import random
import time

from grl.exactalg import Field
from grl.fds import (
    les_collapse_isomorphism,
    random_exact_triangle,
    random_split_family,
    split_bound_rows,
    verify_isomorphism,
)


def les_trials(field, rng, trials):
    fails = 0
    for _ in range(trials):
        v, w, u, tri, c = random_exact_triangle(field, rng)
        phi, phi_inv = les_collapse_isomorphism(v, w, u, tri, c)
        fails += not verify_isomorphism(v, w, phi, phi_inv)
    return fails


def split_trials(field, rng, trials, shape):
    checked = bad = 0
    for _ in range(trials):
        fam = random_split_family(field, rng, sub=shape)
        g = fam.grid
        for c in sorted({g[j] / g[i] for i in range(len(g)) for j in range(i, len(g))}):
            for r in split_bound_rows(fam, c):
                checked += 1
                bad += not r.holds
    return checked, bad


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--field", default="f2")
    args = ap.parse_args()
    field = Field.parse(args.field)
    t = time.perf_counter()
    fails = les_trials(field, random.Random(args.seed), args.trials)
    print(f"exact triangles: {args.trials - fails}/{args.trials} verified ({time.perf_counter() - t:.1f}s)")
    for shape in ("b", "a"):
        checked, bad = split_trials(field, random.Random(args.seed), args.trials, shape)
        print(f"split bound, {shape.upper()} as subsystem: {bad} violations in {checked} checks")


if __name__ == "__main__":
    main()
