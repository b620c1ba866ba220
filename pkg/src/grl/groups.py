"""Finite presentations, coset enumeration, quotient search and conjugacy growth.

Words are tuples of nonzero ints: ``i`` is generator i (1-based, as in the
JSON format) and ``-i`` its inverse.  In strings, ``a``..``z`` name
generators 1..26 and upper case letters their inverses.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exactalg import IntegerMatrix, smith_normal_form
from .fds import INFINITY, ZERO_RATE, GrowthEstimate, GrowthRate, estimate_from_table

Word = tuple[int, ...]
Perm = tuple[int, ...]


class GroupError(ValueError):
    pass


class Exceeded(GroupError):
    """Coset enumeration would need more live cosets than the budget allows."""

    def __init__(self, budget: int, defined: int):
        super().__init__(f"coset budget {budget} exceeded after {defined} definitions")
        self.budget = budget
        self.defined = defined


class UnsupportedClass(GroupError):
    pass


class RadiusTooLarge(GroupError):
    pass


# ---------------------------------------------------------------------------
# words


def free_reduce(w: Iterable[int]) -> Word:
    out: list[int] = []
    for x in w:
        if x == 0:
            raise GroupError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_word(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def cyclic_reduce(w: Sequence[int]) -> Word:
    w = list(free_reduce(w))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def parse_word(text: str) -> Word:
    """``"aBa"`` -> (1, -2, 1). The empty string and ``"1"`` give the empty word."""
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    out = []
    for ch in text:
        if ch.isspace() or ch == "*":
            continue
        if not ch.isalpha() or not ch.isascii():
            raise GroupError(f"bad letter {ch!r} in word {text!r}")
        out.append(ord(ch.lower()) - 96 if ch.islower() else -(ord(ch.lower()) - 96))
    return free_reduce(out)


def word_to_string(w: Sequence[int]) -> str:
    if not w:
        return "1"
    if any(abs(x) > 26 for x in w):
        return " ".join(str(x) for x in w)
    return "".join(chr(96 + x) if x > 0 else chr(96 - x).upper() for x in w)


def exponent_sums(w: Sequence[int], k: int) -> list[int]:
    out = [0] * k
    for x in w:
        out[abs(x) - 1] += 1 if x > 0 else -1
    return out


def _parse_relator(r) -> Word:
    if isinstance(r, str):
        return parse_word(r)
    return free_reduce(int(x) for x in r)


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class Presentation:
    generators: int
    relators: tuple[Word, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        rels = tuple(free_reduce(r) for r in self.relators)
        object.__setattr__(self, "relators", rels)
        if self.generators < 0:
            raise GroupError("generator count must be non-negative")
        for r in rels:
            if any(abs(x) > self.generators for x in r):
                raise GroupError(f"relator {list(r)} uses a generator outside 1..{self.generators}")

    @classmethod
    def parse(cls, generators: int, relators: Iterable[str | Sequence[int]], name: str = "") -> "Presentation":
        return cls(generators, tuple(_parse_relator(r) for r in relators), name)

    def to_json(self) -> dict:
        out = {"generators": self.generators, "relators": [list(r) for r in self.relators]}
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Presentation":
        if not isinstance(data, dict) or "generators" not in data:
            raise GroupError("presentation JSON needs a 'generators' field")
        return cls(int(data["generators"]), tuple(_parse_relator(r) for r in data.get("relators", [])), str(data.get("name", "")))

    @classmethod
    def load(cls, path) -> "Presentation":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def __str__(self) -> str:
        gens = ",".join(word_to_string((i,)) for i in range(1, self.generators + 1))
        rels = ",".join(word_to_string(r) for r in self.relators)
        return f"<{gens} | {rels}>"

    def with_relators(self, extra: Iterable[Word]) -> "Presentation":
        return Presentation(self.generators, self.relators + tuple(extra), self.name)


def free_product(*ps: Presentation) -> Presentation:
    """Concatenate generators (later indices offset) and relators."""
    gens, rels = 0, []
    for p in ps:
        rels.extend(tuple(x + gens if x > 0 else x - gens for x in r) for r in p.relators)
        gens += p.generators
    return Presentation(gens, tuple(rels))


def exponent_matrix(p: Presentation) -> IntegerMatrix:
    """k x l matrix: entry (i, j) is the exponent sum of generator i in relator j."""
    cols = [exponent_sums(r, p.generators) for r in p.relators]
    return IntegerMatrix.from_columns(cols, p.generators)


@dataclass(frozen=True)
class AbelianInvariants:
    free_rank: int
    torsion: tuple[int, ...]

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        parts = [f"Z^{self.free_rank}" if self.free_rank > 1 else "Z"] if self.free_rank else []
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) or "0"

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion), "description": str(self)}


def abelianization(p: Presentation) -> AbelianInvariants:
    m = exponent_matrix(p)
    _, d, _ = smith_normal_form(m)
    diag = [d[i, i] for i in range(min(d.rows, d.cols))]
    nonzero = [x for x in diag if x]
    return AbelianInvariants(p.generators - len(nonzero), tuple(x for x in nonzero if x > 1))


# ---------------------------------------------------------------------------
# permutations and finite groups


def perm_mul(p: Perm, q: Perm) -> Perm:
    """p then q (right action: x^(pq) = (x^p)^q)."""
    return tuple(q[i] for i in p)


def perm_inv(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_identity(n: int) -> Perm:
    return tuple(range(n))


def evaluate_word(w: Sequence[int], images: Sequence[Perm], n: int) -> Perm:
    inv = [perm_inv(p) for p in images]
    out = perm_identity(n)
    for x in w:
        out = perm_mul(out, images[x - 1] if x > 0 else inv[-x - 1])
    return out


def cycle_type(p: Perm) -> tuple[int, ...]:
    seen, lengths = set(), []
    for s in range(len(p)):
        if s in seen:
            continue
        n, x = 0, s
        while x not in seen:
            seen.add(x)
            x = p[x]
            n += 1
        lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


def perm_from_cycle_type(ct: Sequence[int]) -> Perm:
    """The permutation (0 1 .. a-1)(a .. a+b-1)... with the given cycle lengths."""
    out, start = [], 0
    for length in ct:
        out.extend(start + (i + 1) % length for i in range(length))
        start += length
    return tuple(out)


def perm_cycles_string(p: Perm) -> str:
    seen, parts = set(), []
    for s in range(len(p)):
        if s in seen or p[s] == s:
            seen.add(s)
            continue
        cyc, x = [], s
        while x not in seen:
            seen.add(x)
            cyc.append(str(x + 1))
            x = p[x]
        parts.append("(" + " ".join(cyc) + ")")
    return "".join(parts) or "()"


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


class FiniteGroupTable:
    """A finite group given by permutations for each presentation generator.

    Elements are enumerated by closing the generators under multiplication;
    element 0 is the identity.  The multiplication table is built lazily.
    """

    def __init__(self, generator_perms: Sequence[Perm], degree: int | None = None):
        perms = [tuple(p) for p in generator_perms]
        n = degree if degree is not None else (len(perms[0]) if perms else 1)
        if any(len(p) != n or sorted(p) != list(range(n)) for p in perms):
            raise GroupError("generator images must be permutations of one common degree")
        self.degree = n
        self.generator_perms = tuple(perms)
        ident = perm_identity(n)
        self.elements: list[Perm] = [ident]
        self.index: dict[Perm, int] = {ident: 0}
        queue = deque([ident])
        closers = list(perms) + [perm_inv(p) for p in perms]
        while queue:
            g = queue.popleft()
            for s in closers:
                h = perm_mul(g, s)
                if h not in self.index:
                    self.index[h] = len(self.elements)
                    self.elements.append(h)
                    queue.append(h)
        self.generator_images = tuple(self.index[p] for p in perms)
        self._table: list[list[int]] | None = None

    @classmethod
    def from_permutations(cls, perms: Sequence[Perm], degree: int | None = None) -> "FiniteGroupTable":
        return cls(perms, degree)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def multiplication(self) -> list[list[int]]:
        if self._table is None:
            idx, els = self.index, self.elements
            self._table = [[idx[perm_mul(a, b)] for b in els] for a in els]
        return self._table

    def mul(self, i: int, j: int) -> int:
        return self.index[perm_mul(self.elements[i], self.elements[j])]

    def inv(self, i: int) -> int:
        return self.index[perm_inv(self.elements[i])]

    def validate(self, rng=None, samples: int = 200) -> bool:
        """Identity, inverses and a spot check of associativity."""
        import random

        rng = rng or random.Random(0)
        n = self.order
        t = self.multiplication
        if any(t[0][i] != i or t[i][0] != i for i in range(n)):
            return False
        if any(t[i][self.inv(i)] != 0 for i in range(n)):
            return False
        for _ in range(samples):
            a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
            if t[t[a][b]][c] != t[a][t[b][c]]:
                return False
        return True

    def conjugacy_classes(self) -> list[frozenset[int]]:
        """Orbits under conjugation by the generators (which generate the group)."""
        seen: dict[int, int] = {}
        classes: list[frozenset[int]] = []
        gens = [self.index[p] for p in self.generator_perms]
        for start in range(self.order):
            if start in seen:
                continue
            orbit = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for g in gens:
                    y = self.mul(self.mul(self.inv(g), x), g)
                    if y not in orbit:
                        orbit.add(y)
                        queue.append(y)
            for x in orbit:
                seen[x] = len(classes)
            classes.append(frozenset(orbit))
        return classes

    def class_of(self) -> dict[int, int]:
        out = {}
        for k, cls in enumerate(self.conjugacy_classes()):
            for x in cls:
                out[x] = k
        return out

    def satisfies(self, p: Presentation) -> bool:
        return all(evaluate_word(r, self.generator_perms, self.degree) == perm_identity(self.degree) for r in p.relators)

    def to_json(self) -> dict:
        return {"order": self.order, "degree": self.degree, "generator_images": [list(g) for g in self.generator_perms]}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteGroupTable":
        return cls([tuple(int(x) for x in g) for g in data["generator_images"]], data.get("degree"))


def symmetric_group(n: int) -> FiniteGroupTable:
    """S_n on generators (1 2) and (1 2 ... n)."""
    if n <= 1:
        return FiniteGroupTable([], 1)
    t = tuple([1, 0] + list(range(2, n)))
    c = tuple(list(range(1, n)) + [0])
    return FiniteGroupTable([t, c], n)


def cyclic_group(m: int) -> FiniteGroupTable:
    if m < 1:
        raise GroupError("cyclic group order must be >= 1")
    return FiniteGroupTable([tuple((i + 1) % m for i in range(m))], m)


# ---------------------------------------------------------------------------
# Todd-Coxeter


def todd_coxeter(p: Presentation, budget: int = 100_000) -> FiniteGroupTable:
    """Enumerate cosets of the trivial subgroup (HLT strategy with coincidences).

    ``budget`` bounds the number of live cosets; hitting it raises Exceeded.
    The result is the regular permutation representation of G_P.
    """
    if budget < 1:
        raise GroupError("budget must be >= 1")
    k = p.generators
    ncols = 2 * k

    def col(x: int) -> int:
        return 2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1

    def inv_col(c: int) -> int:
        return c ^ 1

    relators = [tuple(col(x) for x in r) for r in p.relators if r]
    table: list[list[int]] = [[-1] * ncols]
    parent: list[int] = [0]
    live = 1
    defined = 1

    def find(c: int) -> int:
        root = c
        while parent[root] != root:
            root = parent[root]
        while parent[c] != root:
            parent[c], c = root, parent[c]
        return root

    def define(c: int, x: int) -> int:
        nonlocal live, defined
        if live >= budget:
            raise Exceeded(budget, defined)
        n = len(table)
        table.append([-1] * ncols)
        parent.append(n)
        table[c][x] = n
        table[n][inv_col(x)] = c
        live += 1
        defined += 1
        return n

    def merge(a: int, b: int, queue: list[int]):
        nonlocal live
        a, b = find(a), find(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        parent[b] = a
        live -= 1
        queue.append(b)

    def coincidence(a: int, b: int):
        queue: list[int] = []
        merge(a, b, queue)
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            for x in range(ncols):
                f = table[e][x]
                if f < 0:
                    continue
                table[f][inv_col(x)] = -1
                e1, f1 = find(e), find(f)
                if table[e1][x] >= 0:
                    merge(f1, table[e1][x], queue)
                elif table[f1][inv_col(x)] >= 0:
                    merge(e1, table[f1][inv_col(x)], queue)
                else:
                    table[e1][x] = f1
                    table[f1][inv_col(x)] = e1

    def scan_and_fill(c: int, word: tuple[int, ...]):
        f, b = c, c
        i, j = 0, len(word) - 1
        while True:
            while i <= j and table[f][word[i]] >= 0:
                f = table[f][word[i]]
                i += 1
            if i > j:
                if f != b:
                    coincidence(f, b)
                return
            while j >= i and table[b][inv_col(word[j])] >= 0:
                b = table[b][inv_col(word[j])]
                j -= 1
            if j < i:
                coincidence(f, b)
                return
            if i == j:
                table[f][word[i]] = b
                table[b][inv_col(word[i])] = f
                return
            define(f, word[i])

    c = 0
    while c < len(table):
        if find(c) == c:
            for r in relators:
                scan_and_fill(c, r)
                if find(c) != c:
                    break
            if find(c) == c:
                for x in range(ncols):
                    if table[c][x] < 0:
                        define(c, x)
        c += 1

    cosets = [i for i in range(len(table)) if find(i) == i]
    renum = {old: new for new, old in enumerate(cosets)}
    perms = []
    for g in range(k):
        perms.append(tuple(renum[find(table[i][2 * g])] for i in cosets))
    return FiniteGroupTable(perms, len(cosets)) if k else FiniteGroupTable([], 1)


# ---------------------------------------------------------------------------
# quotient search


@dataclass(frozen=True)
class PermutationWitness:
    """Generator images in S_degree satisfying every relator, not all trivial."""

    degree: int
    images: tuple[Perm, ...]

    def verify(self, p: Presentation) -> bool:
        ident = perm_identity(self.degree)
        if len(self.images) != p.generators or all(g == ident for g in self.images):
            return False
        return all(evaluate_word(r, self.images, self.degree) == ident for r in p.relators)

    def image_order(self) -> int:
        return FiniteGroupTable(self.images, self.degree).order

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "images": [list(g) for g in self.images],
            "cycles": [perm_cycles_string(g) for g in self.images],
            "image_order": self.image_order(),
        }


def search_nontrivial_quotient(p: Presentation, max_degree: int = 5) -> PermutationWitness | None:
    """Exhaustive search for a nontrivial homomorphism G_P -> S_n, n <= max_degree.

    Symmetry pruning: the first generator with a nontrivial image is taken to be
    a fixed representative of its cycle type. Relators mentioning a single
    generator filter that generator's candidates, and each relator is tested as
    soon as all of its generators are assigned.
    """
    if max_degree > 6:
        raise GroupError("quotient search is capped at degree 6")
    k = p.generators
    if k == 0:
        return None
    max_gen = [max(abs(x) for x in r) - 1 if r else -1 for r in p.relators]
    single = [[r for r in p.relators if r and all(abs(x) == g + 1 for x in r)] for g in range(k)]
    for n in range(2, max_degree + 1):
        ident = perm_identity(n)
        all_perms = [ident] + [q for q in itertools.permutations(range(n)) if q != ident]
        reps = [perm_from_cycle_type(ct) for ct in _partitions(n) if ct[0] > 1]

        def ok_single(g: int, q: Perm) -> bool:
            images = [ident] * k
            images[g] = q
            return all(evaluate_word(r, images, n) == ident for r in single[g])

        domains = [[q for q in all_perms if ok_single(g, q)] for g in range(k)]
        rep_domains = [[q for q in reps if ok_single(g, q)] for g in range(k)]
        checks = [[r for r, m in zip(p.relators, max_gen) if m == g] for g in range(k)]
        images: list[Perm] = [ident] * k

        def extend(g: int, nontrivial: bool) -> bool:
            if g == k:
                return nontrivial
            options = domains[g] if nontrivial else rep_domains[g] + [ident]
            for q in options:
                images[g] = q
                if all(evaluate_word(r, images, n) == ident for r in checks[g]):
                    if extend(g + 1, nontrivial or q != ident):
                        return True
            images[g] = ident
            return False

        if extend(0, False):
            return PermutationWitness(n, tuple(images))
    return None


# ---------------------------------------------------------------------------
# triviality


@dataclass(frozen=True)
class TrivialityResult:
    status: str  # "Trivial", "Nontrivial" or "Unknown"
    method: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"status": self.status, "method": self.method, **self.detail}


def triviality_semidecide(p: Presentation, max_cosets: int = 100_000, max_degree: int = 5) -> TrivialityResult:
    """Trivial, Nontrivial or Unknown; never wrong, sometimes silent.

    Triviality of finitely presented groups is undecidable, so an Unknown
    answer is expected on hard inputs and reflects only the budgets.
    """
    h1 = abelianization(p)
    if not h1.is_trivial:
        return TrivialityResult("Nontrivial", "abelianization", {"h1": h1.to_json()})
    try:
        table = todd_coxeter(p, max_cosets)
    except Exceeded as exc:
        witness = search_nontrivial_quotient(p, max_degree)
        if witness is not None:
            return TrivialityResult("Nontrivial", "quotient", {"witness": witness.to_json(), "cosets_exceeded": exc.budget})
        return TrivialityResult("Unknown", "budget", {"max_cosets": max_cosets, "max_degree": max_degree})
    if table.order == 1:
        return TrivialityResult("Trivial", "todd_coxeter", {"order": 1})
    return TrivialityResult("Nontrivial", "todd_coxeter", {"order": table.order})


# ---------------------------------------------------------------------------
# group classes and conjugacy growth


@dataclass(frozen=True, eq=False)
class GroupClass:
    tag: str  # "Trivial", "Finite", "FreeAbelian", "Free", "FreeProduct"
    rank: int = 0
    table: FiniteGroupTable | None = None
    factors: tuple["GroupClass", ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.tag not in ("Trivial", "Finite", "FreeAbelian", "Free", "FreeProduct"):
            raise UnsupportedClass(f"unknown group class {self.tag!r}")
        if self.tag == "Finite" and self.table is None:
            raise UnsupportedClass("a Finite class needs a table")
        if self.tag in ("FreeAbelian", "Free") and self.rank < 1:
            raise UnsupportedClass(f"{self.tag} needs rank >= 1")
        if self.tag == "FreeProduct":
            if len(self.factors) < 2:
                raise UnsupportedClass("a free product needs at least two factors")
            if any(f.is_trivial for f in self.factors):
                raise UnsupportedClass("free-product factors must be nontrivial")

    @property
    def is_trivial(self) -> bool:
        return self.tag == "Trivial" or (self.tag == "Finite" and self.table.order == 1)

    def __str__(self) -> str:
        if self.label:
            return self.label
        if self.tag == "Trivial":
            return "1"
        if self.tag == "Finite":
            return f"Finite({self.table.order})"
        if self.tag == "FreeProduct":
            return " * ".join(str(f) for f in self.factors)
        return f"{self.tag}({self.rank})"


def trivial_group() -> GroupClass:
    return GroupClass("Trivial", label="1")


def finite_group(table: FiniteGroupTable, label: str = "") -> GroupClass:
    return GroupClass("Finite", table=table, label=label)


def cyclic(m: int) -> GroupClass:
    return finite_group(cyclic_group(m), f"Z/{m}")


def symmetric(n: int) -> GroupClass:
    return finite_group(symmetric_group(n), f"S{n}")


def free_abelian(n: int) -> GroupClass:
    return GroupClass("FreeAbelian", rank=n, label=f"Z^{n}")


def free_group(k: int) -> GroupClass:
    return GroupClass("Free", rank=k, label=f"F{k}")


def free_product_class(*factors: GroupClass) -> GroupClass:
    return GroupClass("FreeProduct", factors=tuple(factors))


def parse_group_class(text: str) -> GroupClass:
    """``trivial``, ``cyclic:m``, ``symmetric:n``, ``freeabelian:n``, ``free:k``,
    or ``freeproduct:<class>,<class>,...`` (factors without nesting)."""
    text = text.strip().lower()
    name, _, arg = text.partition(":")
    if name in ("trivial", "1"):
        return trivial_group()
    if name == "freeproduct":
        return free_product_class(*(parse_group_class(f) for f in arg.split(",")))
    try:
        n = int(arg)
    except ValueError:
        raise UnsupportedClass(f"cannot parse group class {text!r}") from None
    if name in ("cyclic", "z/"):
        return trivial_group() if n == 1 else cyclic(n)
    if name in ("symmetric", "s"):
        return trivial_group() if n == 1 else symmetric(n)
    if name in ("freeabelian", "zn", "z^"):
        return free_abelian(n)
    if name in ("free", "f"):
        return free_group(n)
    raise UnsupportedClass(f"cannot parse group class {text!r}")


@dataclass(frozen=True)
class ConjGrowthTable:
    radii: tuple[int, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.counts and self.counts[0] != 1:
            raise ValueError("f(0) must be 1")
        if any(a > b for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("conjugacy counts must be non-decreasing")

    def __getitem__(self, x: int) -> int:
        return self.counts[x]

    def tail_estimate(self, start: int | None = None) -> GrowthEstimate:
        """log-log slope over radii in [start, x_max] (default: upper half)."""
        x_max = self.radii[-1]
        start = max(1, x_max // 2 if start is None else start)
        pairs = [(x, f) for x, f in zip(self.radii, self.counts) if x >= start]
        return estimate_from_table([x for x, _ in pairs], [f for _, f in pairs])

    def to_json(self) -> dict:
        return {"radii": list(self.radii), "counts": [c if c < 2**53 else str(c) for c in self.counts]}


RADIUS_LIMITS = {"Trivial": 10**6, "Finite": 10**6, "FreeAbelian": 10**4, "Free": 10**4, "FreeProduct": 400}


def conjugacy_count(g: GroupClass, x_max: int) -> ConjGrowthTable:
    """f(x) = number of conjugacy classes meeting the ball of radius x, 0 <= x <= x_max."""
    if x_max < 0:
        raise RadiusTooLarge("radius must be non-negative")
    if x_max > RADIUS_LIMITS[g.tag]:
        raise RadiusTooLarge(f"x_max = {x_max} exceeds the limit {RADIUS_LIMITS[g.tag]} for {g.tag}")
    radii = tuple(range(x_max + 1))
    if g.tag == "Trivial":
        counts = [1] * (x_max + 1)
    elif g.tag == "FreeAbelian":
        counts = [_l1_ball(g.rank, x) for x in radii]
    elif g.tag == "Free":
        counts = _free_counts(g.rank, x_max)
    elif g.tag == "Finite":
        counts = _finite_counts(g.table, x_max)
    else:
        counts = _free_product_counts(g.factors, x_max)
    return ConjGrowthTable(radii, tuple(counts))


def _l1_ball(n: int, x: int) -> int:
    return sum(2**k * math.comb(n, k) * math.comb(x, k) for k in range(min(n, x) + 1))


def _cyclically_reduced_count(k: int, d: int) -> int:
    """Cyclically reduced words of length d >= 1 in the free group of rank k."""
    return (2 * k - 1) ** d + 1 + (k - 1) * (1 + (-1) ** d)


def _totient(n: int) -> int:
    return sum(1 for i in range(1, n + 1) if math.gcd(i, n) == 1)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _free_counts(k: int, x_max: int) -> list[int]:
    # nontrivial classes of length m are rotation classes of cyclically reduced words
    counts, total = [1], 1
    for m in range(1, x_max + 1):
        s = sum(_totient(m // d) * _cyclically_reduced_count(k, d) for d in _divisors(m))
        total += s // m
        counts.append(total)
    return counts


def _ball_sizes(table: FiniteGroupTable, x_max: int | None = None) -> list[list[int]]:
    """Spheres of the Cayley graph: element indices at each exact distance."""
    gens = [table.index[p] for p in table.generator_perms]
    gens += [table.inv(s) for s in gens]
    dist = {0: 0}
    spheres = [[0]]
    while spheres[-1] and (x_max is None or len(spheres) <= x_max):
        nxt = []
        for e in spheres[-1]:
            for s in gens:
                f = table.mul(e, s)
                if f not in dist:
                    dist[f] = len(spheres)
                    nxt.append(f)
        if not nxt:
            break
        spheres.append(nxt)
    return spheres


def _finite_counts(table: FiniteGroupTable, x_max: int) -> list[int]:
    spheres = _ball_sizes(table)
    cls = table.class_of()
    seen: set[int] = set()
    counts = []
    for x in range(x_max + 1):
        if x < len(spheres):
            seen.update(cls[e] for e in spheres[x])
        counts.append(len(seen))
    return counts


def _factor_data(f: GroupClass, x_max: int) -> tuple[list[int], list[int]]:
    """(sphere sizes s(l) of nontrivial elements, new nontrivial classes by minimal length)."""
    if f.tag in ("Free", "FreeAbelian") and f.rank == 1:
        return [0] + [2] * x_max, [0] + [2] * x_max
    if f.tag == "Finite":
        spheres = _ball_sizes(f.table)
        cls = f.table.class_of()
        s = [0] + [len(spheres[l]) if l < len(spheres) else 0 for l in range(1, x_max + 1)]
        first: dict[int, int] = {}
        for l, sph in enumerate(spheres):
            for e in sph:
                first.setdefault(cls[e], l)
        new = [0] * (x_max + 1)
        for c, l in first.items():
            if l >= 1 and l <= x_max:
                new[l] += 1
        return s, new
    raise UnsupportedClass(f"conjugacy counting in free products supports finite and infinite cyclic factors, not {f}")


def _poly_mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * (n + 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                if y:
                    out[i + j] += x * y
    return out


def _free_product_counts(factors: Sequence[GroupClass], x_max: int) -> list[int]:
    """Cyclically reduced normal forms up to cyclic permutation of syllables.

    With s_j(z) the growth series of the nontrivial elements of factor j, the
    closed syllable walks of length d are counted by tr T(z)^d for
    T_ij(z) = [i != j] s_j(z); Burnside over syllable rotations gives the
    classes with m >= 2 syllables. Single-syllable classes are the nontrivial
    classes of the factors.
    """
    data = [_factor_data(f, x_max) for f in factors]
    r = len(factors)
    series = [s for s, _ in data]
    # trace_by_d[d] = tr T(z)^d, computed for the substituted series later
    per_length = [0] * (x_max + 1)
    for _, new in data:
        for l in range(1, x_max + 1):
            per_length[l] += new[l]

    def traces(scale: int, upto: int) -> list[list[int]]:
        # tr T(z^scale)^d for d = 0..upto, truncated at degree x_max
        sub = []
        for s in series:
            t = [0] * (x_max + 1)
            for l, c in enumerate(s):
                if c and l * scale <= x_max:
                    t[l * scale] += c
            sub.append(t)
        out = []
        power = [[[int(i == j and l == 0) for l in range(x_max + 1)] for j in range(r)] for i in range(r)]
        for d in range(upto + 1):
            out.append([sum(power[i][i][l] for i in range(r)) for l in range(x_max + 1)])
            new_power = [[[0] * (x_max + 1) for _ in range(r)] for _ in range(r)]
            for i in range(r):
                for j in range(r):
                    acc = [0] * (x_max + 1)
                    for k in range(r):
                        if k != j:
                            prod = _poly_mul(power[i][k], sub[j], x_max)
                            acc = [a + b for a, b in zip(acc, prod)]
                    new_power[i][j] = acc
            power = new_power
        return out

    trace_cache: dict[int, list[list[int]]] = {}
    for m in range(2, x_max + 1):
        acc = [0] * (x_max + 1)
        for d in _divisors(m):
            scale = m // d
            if scale not in trace_cache:
                trace_cache[scale] = traces(scale, x_max // scale)
            tr = trace_cache[scale][d]
            phi = _totient(scale)
            acc = [a + phi * b for a, b in zip(acc, tr)]
        for l in range(x_max + 1):
            if acc[l] % m:
                raise ArithmeticError("Burnside count is not an integer")
            per_length[l] += acc[l] // m
    counts, total = [], 1
    for l in range(x_max + 1):
        if l:
            total += per_length[l]
        counts.append(total)
    return counts


def _is_two_by_two(g: GroupClass) -> bool:
    return len(g.factors) == 2 and all(f.tag == "Finite" and f.table.order == 2 for f in g.factors)


def conjugacy_growth_rate(g: GroupClass) -> GrowthRate:
    """Closed-form conjugacy growth rate for the supported classes."""
    if g.tag in ("Trivial", "Finite"):
        return ZERO_RATE
    if g.tag == "FreeAbelian":
        return GrowthRate.finite(g.rank)
    if g.tag == "Free":
        return GrowthRate.finite(1) if g.rank == 1 else INFINITY
    # a free product of two groups of order 2 is infinite dihedral; every
    # other free product of nontrivial groups contains a free group of rank 2
    return GrowthRate.finite(1) if _is_two_by_two(g) else INFINITY
