"""Exact linear algebra over Q and F_p, integer Smith normal form, chain homology.

Everything here is dense and pure Python.  Matrices are immutable; entries of a
matrix over F_p are ints in ``range(p)``, entries over Q are ``Fraction`` in
lowest terms.  Over F_2 rank and products go through a bitmask fast path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence


class DimensionMismatch(ValueError):
    pass


class InvalidComplex(ValueError):
    pass


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class Field:
    """Coefficient field: ``p == 0`` is Q, otherwise F_p for a prime p."""

    p: int = 2

    def __post_init__(self):
        if self.p < 0 or self.p == 1 or (self.p > 1 and not _is_prime(self.p)):
            raise ValueError(f"field characteristic must be 0 or a prime, got {self.p}")

    @classmethod
    def parse(cls, name: str) -> "Field":
        name = name.strip().lower()
        if name in ("q", "qq", "rational"):
            return cls(0)
        if name.startswith("f") and name[1:].isdigit():
            return cls(int(name[1:]))
        raise ValueError(f"unknown field {name!r}")

    @classmethod
    def default(cls) -> "Field":
        """The field named by ``GRL_FIELD`` (``f2`` or ``q``); F_2 if unset."""
        return cls.parse(os.environ.get("GRL_FIELD", "f2"))

    @property
    def name(self) -> str:
        return "q" if self.p == 0 else f"f{self.p}"

    @property
    def is_rational(self) -> bool:
        return self.p == 0

    def __call__(self, x) -> int | Fraction:
        """Coerce an int, Fraction or numeric string into the field."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.p == 0:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in F_{self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.p == 0:
            return 1 / Fraction(x)
        return pow(x, -1, self.p)

    def random(self, rng) -> int | Fraction:
        """A small random element; over Q drawn from {-2,...,2}."""
        if self.p == 0:
            return Fraction(rng.randint(-2, 2))
        return rng.randrange(self.p)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


F2 = Field(2)
QQ = Field(0)


# ---------------------------------------------------------------------------
# matrices over a field


@dataclass(frozen=True, eq=False)
class ExactMatrix:
    field: Field
    rows: int
    cols: int
    entries: tuple[tuple, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionMismatch(f"entries do not form a {self.rows}x{self.cols} array")

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], cols: int | None = None) -> "ExactMatrix":
        data = tuple(tuple(field(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(field, len(data), cols, data)

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "ExactMatrix":
        z = field(0)
        return cls(field, rows, cols, tuple((z,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, field: Field, n: int) -> "ExactMatrix":
        one, z = field(1), field(0)
        return cls(field, n, n, tuple(tuple(one if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def from_columns(cls, field: Field, columns: Sequence[Sequence], rows: int) -> "ExactMatrix":
        if not columns:
            return cls.zeros(field, rows, 0)
        return cls.from_rows(field, list(zip(*columns)), len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.field, self.shape, self.entries))

    def __repr__(self):
        return f"ExactMatrix({self.field.name}, {[list(map(str, r)) for r in self.entries]}, shape={self.shape})"

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "ExactMatrix":
        data = tuple(tuple(r[j] for r in self.entries) for j in range(self.cols))
        return ExactMatrix(self.field, self.cols, self.rows, data)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "ExactMatrix":
        rows, cols = list(rows), list(cols)
        return ExactMatrix(self.field, len(rows), len(cols), tuple(tuple(self.entries[i][j] for j in cols) for i in rows))

    def _check_same_field(self, other):
        if self.field != other.field:
            raise DimensionMismatch(f"field mismatch: {self.field.name} vs {other.field.name}")

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_field(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        if self.field.p == 2:
            return _f2_matmul(self, other)
        p = self.field.p
        cols_b = other.columns()
        out = []
        for r in self.entries:
            row = []
            for c in cols_b:
                s = sum(a * b for a, b in zip(r, c) if a and b)
                row.append(s % p if p else Fraction(s))
            out.append(tuple(row))
        return ExactMatrix(self.field, self.rows, other.cols, tuple(out))

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_field(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        f = self.field
        return ExactMatrix(f, self.rows, self.cols, tuple(tuple(f(a + b) for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __neg__(self) -> "ExactMatrix":
        f = self.field
        return ExactMatrix(f, self.rows, self.cols, tuple(tuple(f(-a) for a in r) for r in self.entries))

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def scale(self, c) -> "ExactMatrix":
        f = self.field
        c = f(c)
        return ExactMatrix(f, self.rows, self.cols, tuple(tuple(f(c * a) for a in r) for r in self.entries))

    def apply(self, v: Sequence) -> tuple:
        """Matrix-vector product."""
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} for {self.shape} matrix")
        f = self.field
        return tuple(f(sum(a * b for a, b in zip(r, v))) for r in self.entries)

    def rank(self) -> int:
        return rank(self)

    def to_json(self) -> list:
        return [[_scalar_to_json(x) for x in r] for r in self.entries]

    @classmethod
    def from_json(cls, field: Field, data: list, rows: int | None = None, cols: int | None = None) -> "ExactMatrix":
        if not data and rows is not None and cols is not None:
            return cls.zeros(field, rows, cols)
        m = cls.from_rows(field, data, cols if cols is not None else None)
        if rows is not None and m.rows != rows:
            raise DimensionMismatch(f"expected {rows} rows, got {m.rows}")
        return m


def _scalar_to_json(x):
    if isinstance(x, Fraction):
        if x.denominator == 1:
            x = x.numerator
        else:
            return f"{x.numerator}/{x.denominator}"
    if abs(x) >= 2**53:
        return str(x)
    return int(x)


# F_2 bitmask helpers: bit j of a row mask is the entry in column j.

def _row_masks(m: ExactMatrix) -> list[int]:
    masks = []
    for r in m.entries:
        v = 0
        for j, x in enumerate(r):
            if x:
                v |= 1 << j
        masks.append(v)
    return masks


def _f2_matmul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    bm = _row_masks(b)
    out = []
    for r in a.entries:
        acc = 0
        for j, x in enumerate(r):
            if x:
                acc ^= bm[j]
        out.append(tuple((acc >> j) & 1 for j in range(b.cols)))
    return ExactMatrix(a.field, a.rows, b.cols, tuple(out))


def _f2_rank(masks: list[int]) -> int:
    pivots: dict[int, int] = {}
    r = 0
    for v in masks:
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                v ^= pivots[top]
            else:
                pivots[top] = v
                r += 1
                break
    return r


# ---------------------------------------------------------------------------
# elimination


def rref(m: ExactMatrix) -> tuple[list[list], list[int]]:
    """Reduced row echelon form: returns (rows, pivot columns)."""
    f = m.field
    a = [list(r) for r in m.entries]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        piv = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = f.inv(a[r][c])
        a[r] = [f(x * inv) for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                k = a[i][c]
                a[i] = [f(x - k * y) for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return a, pivots


def rank(m: ExactMatrix) -> int:
    """Rank over the matrix's own field."""
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.field.p == 2:
        return _f2_rank(_row_masks(m))
    return len(rref(m)[1])


def rank_of_composite(ms: Sequence[ExactMatrix]) -> int:
    """Rank of the product ``ms[0] @ ms[1] @ ... @ ms[-1]``."""
    if not ms:
        raise DimensionMismatch("empty composite")
    for a, b in zip(ms, ms[1:]):
        if a.cols != b.rows:
            raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return rank(reduce(lambda acc, m: acc @ m, ms[1:], ms[0]))


def compose(ms: Sequence[ExactMatrix]) -> ExactMatrix:
    """The map that applies ``ms[0]`` first, then ``ms[1]``, and so on."""
    for a, b in zip(ms, ms[1:]):
        if b.cols != a.rows:
            raise DimensionMismatch(f"step of shape {b.shape} cannot follow {a.shape}")
    return reduce(lambda acc, m: m @ acc, ms[1:], ms[0])


def nullspace(m: ExactMatrix) -> list[tuple]:
    """Basis of the kernel, one tuple per basis vector."""
    f = m.field
    a, pivots = rref(m)
    free = [c for c in range(m.cols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [f(0)] * m.cols
        v[fc] = f(1)
        for row, pc in enumerate(pivots):
            v[pc] = f(-a[row][fc])
        basis.append(tuple(v))
    return basis


def column_space_basis(m: ExactMatrix) -> list[tuple]:
    """The pivot columns of ``m``; they form a basis of its image."""
    _, pivots = rref(m)
    return [m.column(c) for c in pivots]


def solve(m: ExactMatrix, b: Sequence) -> tuple | None:
    """One solution x of ``m x = b``, or None if the system is inconsistent."""
    f = m.field
    aug = ExactMatrix.from_rows(f, [list(r) + [f(y)] for r, y in zip(m.entries, b)], m.cols + 1) if m.rows else None
    if aug is None:
        return tuple(f(0) for _ in range(m.cols))
    a, pivots = rref(aug)
    if m.cols in pivots:
        return None
    x = [f(0)] * m.cols
    for row, pc in enumerate(pivots):
        x[pc] = a[row][m.cols]
    return tuple(x)


def inverse(m: ExactMatrix) -> ExactMatrix:
    if m.rows != m.cols:
        raise DimensionMismatch("inverse of a non-square matrix")
    n = m.rows
    f = m.field
    aug = ExactMatrix.from_rows(f, [list(r) + [f(int(i == j)) for j in range(n)] for i, r in enumerate(m.entries)], 2 * n)
    a, pivots = rref(aug)
    if pivots[:n] != list(range(n)) if n else False:
        raise ZeroDivisionError("matrix is singular")
    return ExactMatrix(f, n, n, tuple(tuple(r[n:]) for r in a[:n]))


def kron(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    a._check_same_field(b)
    f = a.field
    rows = []
    for i in range(a.rows):
        for k in range(b.rows):
            rows.append(tuple(f(a.entries[i][j] * b.entries[k][l]) for j in range(a.cols) for l in range(b.cols)))
    return ExactMatrix(f, a.rows * b.rows, a.cols * b.cols, tuple(rows))


def block_diag(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    a._check_same_field(b)
    z = a.field(0)
    rows = [tuple(r) + (z,) * b.cols for r in a.entries]
    rows += [(z,) * a.cols + tuple(r) for r in b.entries]
    return ExactMatrix(a.field, a.rows + b.rows, a.cols + b.cols, tuple(rows))


def hstack(field: Field, blocks: Sequence[ExactMatrix], rows: int) -> ExactMatrix:
    cols = sum(b.cols for b in blocks)
    out = [tuple(x for b in blocks for x in b.entries[i]) for i in range(rows)]
    return ExactMatrix(field, rows, cols, tuple(out))


def random_matrix(field: Field, rows: int, cols: int, rng) -> ExactMatrix:
    return ExactMatrix(field, rows, cols, tuple(tuple(field.random(rng) for _ in range(cols)) for _ in range(rows)))


def random_invertible(field: Field, n: int, rng) -> ExactMatrix:
    while True:
        m = random_matrix(field, n, n, rng)
        if rank(m) == n:
            return m


# ---------------------------------------------------------------------------
# integer matrices and Smith normal form


@dataclass(frozen=True, eq=False)
class IntegerMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionMismatch(f"entries do not form a {self.rows}x{self.cols} array")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntegerMatrix":
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntegerMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntegerMatrix":
        if not columns:
            return cls.zeros(rows, 0)
        return cls.from_rows(list(zip(*columns)), len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, self.entries))

    def __repr__(self):
        return f"IntegerMatrix({[list(r) for r in self.entries]}, shape={self.shape})"

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols_b = [tuple(r[j] for r in other.entries) for j in range(other.cols)]
        return IntegerMatrix(self.rows, other.cols, tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols_b) for r in self.entries))

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.entries)

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} for {self.shape} matrix")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.entries)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(self.cols, self.rows, tuple(tuple(r[j] for r in self.entries) for j in range(self.cols)))

    def over(self, field: Field) -> ExactMatrix:
        return ExactMatrix.from_rows(field, self.entries, self.cols)

    def determinant(self) -> int:
        """Fraction-free (Bareiss) determinant."""
        if self.rows != self.cols:
            raise DimensionMismatch("determinant of a non-square matrix")
        n = self.rows
        a = [list(r) for r in self.entries]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1] if n else 1

    def to_json(self) -> list:
        return [[_scalar_to_json(x) for x in r] for r in self.entries]

    @classmethod
    def from_json(cls, data: list, rows: int | None = None, cols: int | None = None) -> "IntegerMatrix":
        if not data and rows is not None and cols is not None:
            return cls.zeros(rows, cols)
        m = cls.from_rows([[int(x) for x in r] for r in data], cols)
        if rows is not None and m.rows != rows:
            raise DimensionMismatch(f"expected {rows} rows, got {m.rows}")
        return m


def smith_normal_form(m: IntegerMatrix) -> tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """Return (U, D, V) with ``U @ m @ V == D``, U and V unimodular.

    D is diagonal with non-negative entries d_1 | d_2 | ...; pivots are chosen
    by minimal absolute value to keep intermediate entries small.
    """
    rows, cols = m.rows, m.cols
    a = [list(r) for r in m.entries]
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, k):  # row dst += k * row src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, k):  # col dst += k * col src
        for r in a:
            r[dst] += k * r[src]
        for r in v:
            r[dst] += k * r[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            piv = a[t][t]
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // piv))
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // piv))
            if any(a[i][t] for i in range(t + 1, rows)) or any(a[t][j] for j in range(t + 1, cols)):
                continue
            bad = next((i for i in range(t + 1, rows) if any(a[i][j] % piv for j in range(t + 1, cols))), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        if a[t][t] == 0:
            break

    return IntegerMatrix.from_rows(u, rows), IntegerMatrix.from_rows(a, cols), IntegerMatrix.from_rows(v, cols)


def invariant_factors(m: IntegerMatrix) -> list[int]:
    """Nonzero diagonal entries of the Smith normal form, in divisibility order."""
    _, d, _ = smith_normal_form(m)
    return [d[i, i] for i in range(min(d.rows, d.cols)) if d[i, i]]


def integer_kernel_basis(m: IntegerMatrix) -> list[tuple[int, ...]]:
    """A Z-basis of ker m (saturated), read off the right SNF transform."""
    _, d, v = smith_normal_form(m)
    r = sum(1 for i in range(min(d.rows, d.cols)) if d[i, i])
    return [v.column(j) for j in range(r, m.cols)]


def integer_inverse(m: IntegerMatrix) -> IntegerMatrix:
    """Inverse of a unimodular integer matrix."""
    inv = inverse(m.over(QQ))
    if any(x.denominator != 1 for r in inv.entries for x in r):
        raise ValueError("matrix is not unimodular")
    return IntegerMatrix.from_rows([[int(x) for x in r] for r in inv.entries], m.cols)


# ---------------------------------------------------------------------------
# chain complexes


@dataclass(frozen=True)
class ChainComplex:
    """Free Z chain complex ``C_top -> ... -> C_1 -> C_0``.

    ``boundaries[i - 1]`` is d_i : C_i -> C_{i-1}, of shape (groups[i-1], groups[i]).
    """

    groups: tuple[int, ...]
    boundaries: tuple[IntegerMatrix, ...]

    def __post_init__(self):
        if len(self.boundaries) != max(len(self.groups) - 1, 0):
            raise InvalidComplex("need one boundary matrix per positive degree")
        for i, d in enumerate(self.boundaries, start=1):
            if d.shape != (self.groups[i - 1], self.groups[i]):
                raise InvalidComplex(f"d_{i} has shape {d.shape}, expected {(self.groups[i - 1], self.groups[i])}")
        for i in range(1, len(self.boundaries)):
            if not (self.boundaries[i - 1] @ self.boundaries[i]).is_zero():
                raise InvalidComplex(f"d_{i} d_{i + 1} != 0")

    @classmethod
    def from_boundaries(cls, groups: Sequence[int], boundaries: Sequence[Sequence[Sequence[int]]]) -> "ChainComplex":
        groups = tuple(groups)
        mats = tuple(IntegerMatrix.from_json(list(b), groups[i - 1], groups[i]) for i, b in enumerate(boundaries, start=1))
        return cls(groups, mats)

    @property
    def top_degree(self) -> int:
        return len(self.groups) - 1

    def boundary(self, i: int) -> IntegerMatrix:
        """d_i, with zero maps outside the stored range."""
        if 1 <= i <= self.top_degree:
            return self.boundaries[i - 1]
        lo = self.groups[i - 1] if 0 <= i - 1 <= self.top_degree else 0
        hi = self.groups[i] if 0 <= i <= self.top_degree else 0
        return IntegerMatrix.zeros(lo, hi)

    def rank(self, i: int) -> int:
        return self.groups[i] if 0 <= i <= self.top_degree else 0

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * n for i, n in enumerate(self.groups))

    def with_cell(self, degree: int, boundary: Sequence[int]) -> "ChainComplex":
        """Add one cell in ``degree`` with the given boundary vector."""
        groups = list(self.groups) + [0] * max(0, degree - self.top_degree)
        mats = [list(map(list, self.boundary(i).entries)) for i in range(1, len(groups))]
        # rows of d_i index (i-1)-cells, columns index i-cells
        if degree >= 1:
            d = mats[degree - 1]
            if len(boundary) != groups[degree - 1]:
                raise DimensionMismatch(f"boundary has length {len(boundary)}, expected {groups[degree - 1]}")
            for r, x in zip(d, boundary):
                r.append(int(x))
        if degree + 1 < len(groups):
            mats[degree].append([0] * groups[degree + 1])
        groups[degree] += 1
        return ChainComplex(tuple(groups), tuple(IntegerMatrix.from_rows(m, groups[i + 1]) if m else IntegerMatrix.zeros(groups[i], groups[i + 1]) for i, m in enumerate(mats)))

    def to_json(self) -> dict:
        return {"groups": list(self.groups), "boundaries": [d.to_json() for d in self.boundaries]}

    @classmethod
    def from_json(cls, data: dict) -> "ChainComplex":
        return cls.from_boundaries(data["groups"], data["boundaries"])


@dataclass(frozen=True)
class HomologySummary:
    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for t in self.torsion:
            if any(x <= 1 for x in t) or any(b % a for a, b in zip(t, t[1:])):
                raise ValueError(f"torsion factors {t} are not a divisibility chain")

    def is_zero(self, i: int) -> bool:
        return i >= len(self.betti) or (self.betti[i] == 0 and not self.torsion[i])

    def is_free_rank(self, i: int, r: int) -> bool:
        return (self.betti[i] if i < len(self.betti) else 0) == r and self.is_torsion_free(i)

    def is_torsion_free(self, i: int) -> bool:
        return i >= len(self.torsion) or not self.torsion[i]

    def nonzero_degrees(self) -> list[int]:
        return [i for i in range(len(self.betti)) if not self.is_zero(i)]

    def is_acyclic(self) -> bool:
        """Reduced homology vanishes: H_0 = Z and everything else is zero."""
        return self.is_free_rank(0, 1) and self.nonzero_degrees() == [0]

    def is_sphere_pattern(self, d: int) -> bool:
        """H_0 = H_d = Z and zero elsewhere (d > 0)."""
        return d > 0 and self.is_free_rank(0, 1) and self.is_free_rank(d, 1) and self.nonzero_degrees() == [0, d]

    def describe(self, i: int) -> str:
        if self.is_zero(i):
            return "0"
        parts = ["Z" if self.betti[i] == 1 else f"Z^{self.betti[i]}"] if self.betti[i] else []
        parts += [f"Z/{t}" for t in self.torsion[i]]
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {"betti": list(self.betti), "torsion": [list(t) for t in self.torsion]}


def homology(c: ChainComplex) -> HomologySummary:
    """Integral homology; betti numbers and torsion from Smith normal forms."""
    betti, torsion = [], []
    ranks = [0] + [len(invariant_factors(c.boundary(i))) for i in range(1, c.top_degree + 2)]
    for i in range(c.top_degree + 1):
        rk_d_i = ranks[i] if i >= 1 else 0
        betti.append(c.rank(i) - rk_d_i - ranks[i + 1])
        torsion.append(tuple(x for x in invariant_factors(c.boundary(i + 1)) if x > 1))
    return HomologySummary(tuple(betti), tuple(torsion))


def homology_generators(c: ChainComplex, i: int) -> list[tuple[tuple[int, ...], int]]:
    """Cycles generating H_i, each paired with its order (0 for infinite order).

    Trivial classes are omitted, so the list is a minimal generating set matching
    the invariant-factor decomposition.
    """
    n = c.rank(i)
    if n == 0:
        return []
    kernel = integer_kernel_basis(c.boundary(i)) if i >= 1 else [tuple(int(a == b) for b in range(n)) for a in range(n)]
    if not kernel:
        return []
    k = IntegerMatrix.from_columns(kernel, n)
    # coordinates of the boundaries in the kernel basis
    d_next = c.boundary(i + 1)
    coords = []
    for j in range(d_next.cols):
        x = _integer_solve(k, d_next.column(j))
        if x is None:
            raise InvalidComplex(f"image of d_{i + 1} is not inside ker d_{i}")
        coords.append(x)
    rel = IntegerMatrix.from_columns(coords, len(kernel))
    u, d, _ = smith_normal_form(rel)
    u_inv = integer_inverse(u)
    gens = []
    for j in range(len(kernel)):
        dj = d[j, j] if j < min(d.rows, d.cols) else 0
        if dj == 1:
            continue
        gens.append((k.apply(u_inv.column(j)), dj))
    return gens


def _integer_solve(k: IntegerMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    sol = solve(k.over(QQ), b)
    if sol is None or any(x.denominator != 1 for x in sol):
        return None
    return tuple(int(x) for x in sol)
