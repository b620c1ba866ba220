"""Conjugacy growth tables and tail slopes for a few standard groups."""

import argparse

from grl.groups import conjugacy_count, conjugacy_growth_rate, parse_group_class

DEFAULT_CLASSES = ["freeabelian:1", "freeabelian:2", "freeabelian:3", "free:2", "symmetric:3",
                   "freeproduct:cyclic:2,cyclic:2", "freeproduct:cyclic:2,cyclic:3"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("classes", nargs="*", default=DEFAULT_CLASSES)
    ap.add_argument("--x-max", type=int, default=40)
    ap.add_argument("--show", type=int, default=8, help="number of leading counts to print")
    args = ap.parse_args()
    print(f"{'group':<22} {'Gamma':>6} {'slope':>7}  counts")
    for text in args.classes:
        g = parse_group_class(text)
        table = conjugacy_count(g, args.x_max)
        est = table.tail_estimate()
        slope = "-" if est.slope is None else f"{est.slope:.3f}"
        head = " ".join(str(c) for c in table.counts[: args.show])
        print(f"{str(g):<22} {str(conjugacy_growth_rate(g)):>6} {slope:>7}  {head} ...")


if __name__ == "__main__":
    main()
