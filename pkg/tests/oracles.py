"""Slow, independent reference computations used as test oracles.

None of these import the package's algorithms; they work on plain lists.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import reduce


# ---------------------------------------------------------------------------
# linear algebra


def rank_mod(rows: list[list[int]], p: int) -> int:
    m = [[x % p for x in r] for r in rows]
    rk, ncols = 0, len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rk, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        inv = pow(m[rk][c], -1, p)
        m[rk] = [x * inv % p for x in m[rk]]
        for r in range(len(m)):
            if r != rk and m[r][c]:
                f = m[r][c]
                m[r] = [(a - f * b) % p for a, b in zip(m[r], m[rk])]
        rk += 1
    return rk


def rank_rational(rows: list[list]) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    rk, ncols = 0, len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rk, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for r in range(len(m)):
            if r != rk and m[r][c] != 0:
                f = m[r][c] / m[rk][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rk])]
        rk += 1
    return rk


def det_leibniz(m: list[list[int]]) -> int:
    n = len(m)
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        total += (-1) ** inversions * math.prod(m[i][perm[i]] for i in range(n))
    return total


def determinantal_divisors(m: list[list[int]]) -> list[int]:
    """d_k = gcd of all k x k minors, for k = 1 .. until a d_k vanishes."""
    rows, cols = len(m), len(m[0]) if m else 0
    out = []
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                g = math.gcd(g, det_leibniz([[m[r][c] for c in cs] for r in rs]))
        if g == 0:
            break
        out.append(g)
    return out


def invariant_factors_by_minors(m: list[list[int]]) -> list[int]:
    d = determinantal_divisors(m)
    return [d[0]] + [d[k] // d[k - 1] for k in range(1, len(d))] if d else []


def homology_ranks_over_q(dims: list[int], boundaries: list[list[list[int]]]) -> list[int]:
    """Betti numbers from ranks over Q; boundaries[i] maps degree i+1 -> degree i."""
    rk = [rank_rational(b) if b and b[0] else 0 for b in boundaries]
    out = []
    for i, n in enumerate(dims):
        into = rk[i] if i < len(rk) else 0
        out_of = rk[i - 1] if i >= 1 else 0
        out.append(n - out_of - into)
    return out


# ---------------------------------------------------------------------------
# conjugacy counts


def zn_ball_bfs(n: int, x_max: int) -> list[int]:
    """Elements (= conjugacy classes) of Z^n in the word-metric ball, by BFS."""
    origin = (0,) * n
    seen = {origin}
    frontier = [origin]
    counts = [1]
    steps = [tuple((s if j == i else 0) for j in range(n)) for i in range(n) for s in (1, -1)]
    for _ in range(x_max):
        nxt = []
        for v in frontier:
            for s in steps:
                u = tuple(a + b for a, b in zip(v, s))
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
        counts.append(len(seen))
    return counts


def _reduced_words(k: int, length: int):
    letters = [i for i in range(1, k + 1)] + [-i for i in range(1, k + 1)]
    def extend(prefix, left):
        if left == 0:
            yield tuple(prefix)
            return
        for a in letters:
            if prefix and prefix[-1] == -a:
                continue
            yield from extend(prefix + [a], left - 1)
    yield from extend([], length)


def _cyclic_core(w: tuple) -> tuple:
    w = list(w)
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def _min_rotation(w: tuple) -> tuple:
    return min(w[i:] + w[:i] for i in range(len(w))) if w else w


def free_group_classes_enum(k: int, x_max: int) -> list[int]:
    """Distinct cyclic words among all reduced words of length <= x."""
    seen: set[tuple] = set()
    counts = []
    for x in range(x_max + 1):
        for w in _reduced_words(k, x):
            seen.add(_min_rotation(_cyclic_core(w)))
        counts.append(len(seen))
    return counts


def free_product_classes_bfs(orders: list[int], x_max: int) -> list[int]:
    """Free product of cyclic groups Z/m (m = 0 means Z), each generated by one
    element and its inverse.  Elements are syllable tuples (factor, exponent);
    classes are cyclically merged syllable sequences up to rotation."""

    def norm(f, e):
        return e % orders[f] if orders[f] else e

    def mul_letter(w, f, e):
        w = list(w)
        if w and w[-1][0] == f:
            e2 = norm(f, w[-1][1] + e)
            w.pop()
            if e2:
                w.append((f, e2))
        else:
            w.append((f, norm(f, e)))
        return tuple(w)

    def canonical(w):
        w = list(w)
        while len(w) >= 2 and w[0][0] == w[-1][0]:
            f = w[0][0]
            e = norm(f, w[-1][1] + w[0][1])
            w = w[1:-1]
            if e:
                w = [(f, e)] + w
        t = tuple(w)
        return _min_rotation(t) if len(t) >= 2 else t

    letters = [(f, s) for f in range(len(orders)) for s in ((1,) if orders[f] == 2 else (1, -1))]
    seen_el = {()}
    frontier = [()]
    classes = {canonical(())}
    counts = [1]
    for _ in range(x_max):
        nxt = []
        for w in frontier:
            for f, s in letters:
                u = mul_letter(w, f, s)
                if u not in seen_el:
                    seen_el.add(u)
                    nxt.append(u)
                    classes.add(canonical(u))
        frontier = nxt
        counts.append(len(classes))
    return counts


# ---------------------------------------------------------------------------
# permutations (tuple images, right action: apply p then q)


def compose(p, q):
    return tuple(q[p[i]] for i in range(len(p)))


def perm_group_order(gens: list[tuple]) -> int:
    n = len(gens[0])
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = compose(g, s)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return len(seen)


# ---------------------------------------------------------------------------
# F_2 vector enumeration


def f2_vectors(n: int):
    return itertools.product((0, 1), repeat=n)


def f2_apply(rows: list[list[int]], v) -> tuple:
    return tuple(sum(a * b for a, b in zip(r, v)) % 2 for r in rows)


def gcd_all(xs) -> int:
    return reduce(math.gcd, xs, 0)
