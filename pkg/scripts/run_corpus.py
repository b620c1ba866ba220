"""Verdict table for a directory of presentation files (default: corpus/)."""

import argparse
import json
from pathlib import Path

from grl.cli import CORPUS_COLUMNS, corpus_run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory", nargs="?", default=str(Path(__file__).resolve().parent.parent / "corpus"))
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--max-cosets", type=int, default=100_000)
    ap.add_argument("--max-degree", type=int, default=5)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = corpus_run(args.directory, args.n, args.max_cosets, args.max_degree, args.jobs)
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
        return
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) if rows else len(c) for c in CORPUS_COLUMNS}
    print("  ".join(c.ljust(widths[c]) for c in CORPUS_COLUMNS))
    for r in rows:
        print("  ".join(str(r[c]).ljust(widths[c]) for c in CORPUS_COLUMNS))


if __name__ == "__main__":
    main()
