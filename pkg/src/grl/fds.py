"""Filtered directed systems on a rational grid.

A ``ConcreteFds`` is piecewise constant: V_x is V_{x_i} for the largest grid
point x_i <= x, the zero space for x < x_1, and (only when ``stabilized``) the
space V_{x_m} for every x past the last grid point, with identity maps there.
Under this model every statement quantified over x in [1, oo) reduces to
finitely many grid cells, so the checks below are exact on the window.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Sequence

from .exactalg import (
    DimensionMismatch,
    ExactMatrix,
    Field,
    column_space_basis,
    hstack,
    kron,
    block_diag,
    nullspace,
    rank,
    solve,
)


class FdsError(ValueError):
    pass


class IndexOutOfRange(FdsError, IndexError):
    pass


class NotStabilized(FdsError):
    pass


class GridMismatch(FdsError):
    pass


class OutOfWindow(GridMismatch):
    """A point past the last grid point of a system without a stabilized tail."""


class NotExact(FdsError):
    pass


class NotCommutative(FdsError):
    pass


class UTailNotTrivial(FdsError):
    pass


class NoSolution(FdsError):
    pass


class PreconditionFailed(FdsError):
    pass


class HypothesisViolated(FdsError):
    def __init__(self, which: str, detail: str = ""):
        super().__init__(f"{which}: {detail}" if detail else which)
        self.which = which


class BlockStructureViolated(FdsError):
    pass


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# growth rates and symbolic profiles


@total_ordering
@dataclass(frozen=True)
class GrowthRate:
    """Extended real in {-oo} u [0, oo]."""

    kind: str  # "-inf", "finite" or "inf"
    value: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("-inf", "finite", "inf"):
            raise ValueError(f"bad growth-rate kind {self.kind!r}")
        if self.kind == "finite" and self.value < 0:
            raise ValueError("a finite growth rate is never negative")

    @classmethod
    def finite(cls, v) -> "GrowthRate":
        return cls("finite", as_fraction(v))

    @property
    def _key(self):
        return {"-inf": (0, 0), "finite": (1, self.value), "inf": (2, 0)}[self.kind]

    def __lt__(self, other: "GrowthRate") -> bool:
        return self._key < other._key

    def __add__(self, other: "GrowthRate") -> "GrowthRate":
        # -oo absorbs everything, including +oo: a zero factor kills the product
        if MINUS_INFINITY in (self, other):
            return MINUS_INFINITY
        if INFINITY in (self, other):
            return INFINITY
        return GrowthRate.finite(self.value + other.value)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def __str__(self) -> str:
        if self.kind != "finite":
            return self.kind
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    def to_json(self) -> str:
        return str(self)

    @classmethod
    def from_json(cls, s) -> "GrowthRate":
        s = str(s).strip()
        if s in ("-inf", "-oo"):
            return MINUS_INFINITY
        if s in ("inf", "oo", "+inf"):
            return INFINITY
        return cls.finite(Fraction(s))


MINUS_INFINITY = GrowthRate("-inf")
INFINITY = GrowthRate("inf")
ZERO_RATE = GrowthRate.finite(0)


@dataclass(frozen=True)
class RankProfile:
    """Symbolic asymptotic class of a(x): zero, bounded, polynomial or exponential."""

    kind: str  # "zero", "bounded", "poly", "exp"
    param: Fraction = Fraction(0)

    def __post_init__(self):
        k, p = self.kind, self.param
        ok = (
            (k == "zero" and p == 0)
            or (k == "bounded" and p >= 1 and p.denominator == 1)
            or (k == "poly" and p >= 1 and p.denominator == 1)
            or (k == "exp" and p > 1)
        )
        if not ok:
            raise ValueError(f"invalid rank profile {k}:{p}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def bounded(cls, c: int):
        return cls("bounded", Fraction(c))

    @classmethod
    def poly(cls, degree: int):
        return cls("poly", Fraction(degree))

    @classmethod
    def exp(cls, base):
        return cls("exp", as_fraction(base))

    @classmethod
    def parse(cls, text: str) -> "RankProfile":
        """Parse ``zero``, ``bounded:c``, ``poly:n`` or ``exp:b``."""
        name, _, arg = text.strip().lower().partition(":")
        aliases = {"polynomial": "poly", "exponential": "exp", "const": "bounded"}
        name = aliases.get(name, name)
        if name == "zero":
            return cls.zero()
        if name not in ("bounded", "poly", "exp") or not arg:
            raise ValueError(f"cannot parse rank profile {text!r}")
        return cls(name, Fraction(arg))

    def __str__(self) -> str:
        return "zero" if self.kind == "zero" else f"{self.kind}:{self.param}"

    def to_json(self) -> dict:
        return {"class": self.kind, "param": str(self.param)}

    @classmethod
    def from_json(cls, data: dict) -> "RankProfile":
        return cls(data["class"], Fraction(str(data.get("param", 0))))

    def evaluate(self, x) -> int:
        """A representative a(x) in this class (used to build concrete systems)."""
        x = as_fraction(x)
        if self.kind == "zero":
            return 0
        if self.kind == "bounded":
            return int(self.param)
        if self.kind == "poly":
            return math.floor(x ** int(self.param))
        return math.floor(self.param ** math.floor(x))


def growth_rate(p: RankProfile) -> GrowthRate:
    """Exact growth rate of a symbolic profile."""
    if p.kind == "zero":
        return MINUS_INFINITY
    if p.kind == "bounded":
        return ZERO_RATE
    if p.kind == "poly":
        return GrowthRate.finite(p.param)
    return INFINITY


def tensor_profiles(p: RankProfile, q: RankProfile) -> RankProfile:
    if "zero" in (p.kind, q.kind):
        return RankProfile.zero()
    if p.kind == "exp" or q.kind == "exp":
        bases = [r.param for r in (p, q) if r.kind == "exp"]
        return RankProfile.exp(bases[0] * bases[1] if len(bases) == 2 else bases[0])
    if p.kind == "bounded" and q.kind == "bounded":
        return RankProfile.bounded(int(p.param * q.param))
    degree = sum(int(r.param) for r in (p, q) if r.kind == "poly")
    return RankProfile.poly(degree)


def sum_profiles(p: RankProfile, q: RankProfile) -> RankProfile:
    if p.kind == "zero":
        return q
    if q.kind == "zero":
        return p
    order = {"bounded": 0, "poly": 1, "exp": 2}
    if p.kind == q.kind:
        if p.kind == "bounded":
            return RankProfile.bounded(int(p.param + q.param))
        return RankProfile(p.kind, max(p.param, q.param))
    return p if order[p.kind] > order[q.kind] else q


# ---------------------------------------------------------------------------
# concrete systems


@dataclass(frozen=True, eq=False)
class ConcreteFds:
    field: Field
    grid: tuple[Fraction, ...]
    dims: tuple[int, ...]
    steps: tuple[ExactMatrix, ...]
    stabilized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(as_fraction(g) for g in self.grid))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "steps", tuple(self.steps))
        g = self.grid
        if not g:
            raise GridMismatch("a system needs at least one grid point")
        if g[0] < 1 or any(a >= b for a, b in zip(g, g[1:])):
            raise GridMismatch(f"grid must be strictly increasing and start at >= 1: {[str(x) for x in g]}")
        if len(self.dims) != len(g) or len(self.steps) != len(g) - 1:
            raise DimensionMismatch("need one dimension per grid point and one step per gap")
        for i, s in enumerate(self.steps):
            if s.shape != (self.dims[i + 1], self.dims[i]):
                raise DimensionMismatch(f"step {i} has shape {s.shape}, expected {(self.dims[i + 1], self.dims[i])}")
            if s.field != self.field:
                raise DimensionMismatch(f"step {i} is over {s.field.name}, system over {self.field.name}")
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other):
        if not isinstance(other, ConcreteFds):
            return NotImplemented
        return (self.field, self.grid, self.dims, self.steps, self.stabilized) == (
            other.field, other.grid, other.dims, other.steps, other.stabilized)

    def __hash__(self):
        return hash((self.field, self.grid, self.dims, self.steps, self.stabilized))

    @property
    def length(self) -> int:
        return len(self.grid)

    @classmethod
    def constant(cls, field: Field, grid: Sequence, dim: int, stabilized: bool = True) -> "ConcreteFds":
        ident = ExactMatrix.identity(field, dim)
        return cls(field, tuple(grid), (dim,) * len(grid), (ident,) * (len(grid) - 1), stabilized)

    # -- point resolution ------------------------------------------------

    def index_at(self, x) -> int:
        """Grid index governing V_x; -1 below the window.

        Raises OutOfWindow past the last grid point unless the system is stabilized.
        """
        x = as_fraction(x)
        if x < self.grid[0]:
            return -1
        if x > self.grid[-1] and not self.stabilized:
            raise OutOfWindow(f"x = {x} lies past the window of an unstabilized system")
        lo, hi = 0, len(self.grid) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.grid[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def resolvable(self, x) -> bool:
        return as_fraction(x) <= self.grid[-1] or self.stabilized

    def dim_at(self, x) -> int:
        i = self.index_at(x)
        return 0 if i < 0 else self.dims[i]

    def transition(self, i: int, j: int) -> ExactMatrix:
        """Matrix of psi_{x_i, x_j} (0-based indices, i <= j)."""
        m = len(self.grid)
        if not (0 <= i <= j < m):
            raise IndexOutOfRange(f"need 0 <= i <= j < {m}, got i={i}, j={j}")
        key = (i, j)
        cache = self._cache
        if key not in cache:
            if i == j:
                cache[key] = ExactMatrix.identity(self.field, self.dims[i])
            else:
                cache[key] = self.steps[j - 1] @ self.transition(i, j - 1)
        return cache[key]

    def map_between(self, x, y) -> ExactMatrix:
        """Matrix of psi_{x,y} for x <= y under the piecewise-constant model."""
        x, y = as_fraction(x), as_fraction(y)
        if x > y:
            raise IndexOutOfRange(f"psi_{{x,y}} needs x <= y, got {x} > {y}")
        i, j = self.index_at(x), self.index_at(y)
        if i < 0:
            return ExactMatrix.zeros(self.field, self.dim_at(y), 0)
        return self.transition(i, j)

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "field": self.field.name,
            "grid": [_frac_json(g) for g in self.grid],
            "dims": list(self.dims),
            "steps": [s.to_json() for s in self.steps],
            "stabilized": self.stabilized,
        }

    @classmethod
    def from_json(cls, data: dict, default_field: Field | None = None) -> "ConcreteFds":
        f = Field.parse(data["field"]) if "field" in data else (default_field or Field.default())
        grid = tuple(Fraction(str(g)) for g in data["grid"])
        dims = tuple(int(d) for d in data["dims"])
        steps = tuple(ExactMatrix.from_json(f, s, dims[i + 1], dims[i]) for i, s in enumerate(data["steps"]))
        return cls(f, grid, dims, steps, bool(data.get("stabilized", True)))


def _frac_json(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def transition_rank(v: ConcreteFds, i: int, j: int) -> int:
    """rank of psi_{x_i, x_j}; 0-based indices."""
    return rank(v.transition(i, j))


def colimit_rank(v: ConcreteFds, i: int) -> int:
    """a(x_i): rank of the image of V_{x_i} in the colimit."""
    if not v.stabilized:
        raise NotStabilized("the colimit is only available for systems with a stabilized tail")
    return transition_rank(v, i, v.length - 1)


def rank_table(v: ConcreteFds) -> list[int]:
    """a(x_i) for every grid point."""
    return [colimit_rank(v, i) for i in range(v.length)]


@dataclass(frozen=True)
class GrowthEstimate:
    """Least-squares log-log slope on a finite window. Never a certificate."""

    rate: GrowthRate
    slope: float | None
    points: int
    is_estimate: bool = True

    def to_json(self) -> dict:
        return {"estimate": self.rate.to_json(), "slope": self.slope, "points": self.points, "is_estimate": True}


def estimate_from_table(xs: Sequence, values: Sequence[int]) -> GrowthEstimate:
    pts = [(math.log(float(x)), math.log(a)) for x, a in zip(xs, values) if a > 0]
    if not pts:
        return GrowthEstimate(MINUS_INFINITY, None, 0)
    if len(pts) < 2 or len({p[0] for p in pts}) < 2:
        return GrowthEstimate(ZERO_RATE, 0.0, len(pts))
    slope = statistics.linear_regression([p[0] for p in pts], [p[1] for p in pts]).slope
    clamped = Fraction(max(slope, 0.0)).limit_denominator(10**6)
    return GrowthEstimate(GrowthRate.finite(clamped), slope, len(pts))


def estimate_growth_rate(v: ConcreteFds) -> GrowthEstimate:
    if not v.stabilized:
        raise NotStabilized("growth estimates need colimit ranks")
    return estimate_from_table(v.grid, rank_table(v))


def system_from_table(field: Field, grid: Sequence, table: Sequence[int]) -> ConcreteFds:
    """Stabilized system of coordinate inclusions realizing a non-decreasing a-table."""
    table = [int(a) for a in table]
    if any(a > b for a, b in zip(table, table[1:])) or any(a < 0 for a in table):
        raise ValueError("table must be non-negative and non-decreasing")
    steps = []
    for a, b in zip(table, table[1:]):
        steps.append(ExactMatrix.from_rows(field, [[int(r == c) for c in range(a)] for r in range(b)], a))
    return ConcreteFds(field, tuple(grid), tuple(table), tuple(steps), True)


def system_from_profile(field: Field, p: RankProfile, grid: Sequence) -> ConcreteFds:
    table = [p.evaluate(x) for x in grid]
    return system_from_table(field, grid, table)


# -- grids ---------------------------------------------------------------


def resample(v: ConcreteFds, points: Sequence) -> ConcreteFds:
    """Re-express ``v`` on a finer grid; lossless under the piecewise-constant model.

    Points below the window get the zero space.
    """
    new = sorted(set(as_fraction(p) for p in points) | set(v.grid))
    if new[0] < 1:
        raise GridMismatch("grid points must be >= 1")
    for x in new:
        v.index_at(x)  # raises OutOfWindow when unresolvable
    dims = [v.dim_at(x) for x in new]
    steps = [v.map_between(a, b) for a, b in zip(new, new[1:])]
    return ConcreteFds(v.field, tuple(new), tuple(dims), tuple(steps), v.stabilized)


def align(v: ConcreteFds, w: ConcreteFds) -> tuple[ConcreteFds, ConcreteFds]:
    """Resample both systems onto the union of their grids."""
    if v.field != w.field:
        raise GridMismatch("systems over different fields")
    pts = sorted(set(v.grid) | set(w.grid))
    return resample(v, pts), resample(w, pts)


def reindex(v: ConcreteFds, c) -> ConcreteFds:
    """The system W_x = V_{x/c} (c >= 1)."""
    c = as_fraction(c)
    if c < 1:
        raise ValueError("reindexing factor must be >= 1")
    return ConcreteFds(v.field, tuple(c * g for g in v.grid), v.dims, v.steps, v.stabilized)


def _require_shared_grid(v: ConcreteFds, w: ConcreteFds):
    if v.grid != w.grid:
        raise GridMismatch("systems must share a grid (use align first)")
    if v.field != w.field:
        raise GridMismatch("systems over different fields")


def tensor(v, w):
    """Tensor product of two concrete systems or two symbolic profiles."""
    if isinstance(v, RankProfile) and isinstance(w, RankProfile):
        return tensor_profiles(v, w)
    _require_shared_grid(v, w)
    dims = tuple(a * b for a, b in zip(v.dims, w.dims))
    steps = tuple(kron(s, t) for s, t in zip(v.steps, w.steps))
    return ConcreteFds(v.field, v.grid, dims, steps, v.stabilized and w.stabilized)


def direct_sum(v, w):
    """Direct sum of two concrete systems or two symbolic profiles."""
    if isinstance(v, RankProfile) and isinstance(w, RankProfile):
        return sum_profiles(v, w)
    _require_shared_grid(v, w)
    dims = tuple(a + b for a, b in zip(v.dims, w.dims))
    steps = tuple(block_diag(s, t) for s, t in zip(v.steps, w.steps))
    return ConcreteFds(v.field, v.grid, dims, steps, v.stabilized and w.stabilized)


# ---------------------------------------------------------------------------
# morphisms and isomorphisms


@dataclass(frozen=True, eq=False)
class FdsMorphism:
    """Maps a_{x_i}: V_{x_i} -> V'_{shift * x_i}, one per source grid point.

    Between grid points a_x is a_{x_i} followed by the target system's map, so
    the grid data determine the whole morphism.
    """

    shift: Fraction
    maps: tuple[ExactMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "shift", as_fraction(self.shift))
        object.__setattr__(self, "maps", tuple(self.maps))
        if self.shift < 1:
            raise ValueError("morphism shift must be >= 1")

    def at(self, source: ConcreteFds, target: ConcreteFds, x) -> ExactMatrix:
        """Matrix of a_x: V_x -> V'_{shift * x} for any resolvable x."""
        x = as_fraction(x)
        i = source.index_at(x)
        if i < 0:
            return ExactMatrix.zeros(source.field, target.dim_at(self.shift * x), 0)
        return target.map_between(self.shift * source.grid[i], self.shift * x) @ self.maps[i]

    def to_json(self) -> dict:
        return {"shift": _frac_json(self.shift), "maps": [m.to_json() for m in self.maps]}

    @classmethod
    def from_json(cls, data: dict, source: ConcreteFds, target: ConcreteFds) -> "FdsMorphism":
        shift = Fraction(str(data["shift"]))
        maps = []
        for x, d, m in zip(source.grid, source.dims, data["maps"]):
            maps.append(ExactMatrix.from_json(source.field, m, target.dim_at(shift * x), d))
        return cls(shift, tuple(maps))


def identity_morphism(v: ConcreteFds) -> FdsMorphism:
    return FdsMorphism(Fraction(1), tuple(ExactMatrix.identity(v.field, d) for d in v.dims))


def shift_morphism(v: ConcreteFds, c) -> FdsMorphism:
    """The morphism x -> psi_{x, c x} of ``v`` into itself."""
    c = as_fraction(c)
    return FdsMorphism(c, tuple(v.map_between(x, c * x) for x in v.grid))


def compose_morphisms(v: ConcreteFds, w: ConcreteFds, z: ConcreteFds, phi: FdsMorphism, chi: FdsMorphism) -> FdsMorphism:
    """chi o phi for phi: v -> w and chi: w -> z; shifts multiply."""
    maps = tuple(chi.at(w, z, phi.shift * x) @ m for x, m in zip(v.grid, phi.maps))
    return FdsMorphism(phi.shift * chi.shift, maps)


def _check_morphism_shape(v: ConcreteFds, w: ConcreteFds, phi: FdsMorphism):
    if v.field != w.field:
        raise GridMismatch("systems over different fields")
    if len(phi.maps) != v.length:
        raise GridMismatch(f"morphism has {len(phi.maps)} maps for {v.length} grid points")
    for x in v.grid:
        w.index_at(phi.shift * x)  # OutOfWindow if the target is unresolvable


def verify_morphism(v: ConcreteFds, w: ConcreteFds, phi: FdsMorphism) -> bool:
    """All squares a_{x_j} psi_{x_i,x_j} = psi'_{C x_i, C x_j} a_{x_i} on grid pairs."""
    _check_morphism_shape(v, w, phi)
    c = phi.shift
    for i, (x, m) in enumerate(zip(v.grid, phi.maps)):
        if m.shape != (w.dim_at(c * x), v.dims[i]) or m.field != v.field:
            return False
    for i in range(v.length):
        for j in range(i + 1, v.length):
            lhs = phi.maps[j] @ v.transition(i, j)
            rhs = w.map_between(c * v.grid[i], c * v.grid[j]) @ phi.maps[i]
            if lhs != rhs:
                return False
    return True


def _composite_is_shift(v: ConcreteFds, w: ConcreteFds, phi: FdsMorphism, chi: FdsMorphism) -> bool:
    """chi o phi equals psi_{x, C_phi C_chi x} at every checkable grid point of v."""
    total = phi.shift * chi.shift
    for i, x in enumerate(v.grid):
        if not v.resolvable(total * x):
            continue
        comp = chi.at(w, v, phi.shift * x) @ phi.maps[i]
        if comp != v.map_between(x, total * x):
            return False
    return True


def verify_isomorphism(v: ConcreteFds, w: ConcreteFds, phi: FdsMorphism, phi_inv: FdsMorphism) -> bool:
    """phi: v -> w and phi_inv: w -> v compose to shift maps in both orders."""
    if not (verify_morphism(v, w, phi) and verify_morphism(w, v, phi_inv)):
        return False
    return _composite_is_shift(v, w, phi, phi_inv) and _composite_is_shift(w, v, phi_inv, phi)


def equalize_constants(v: ConcreteFds, w: ConcreteFds, phi: FdsMorphism, phi_inv: FdsMorphism, c=None):
    """Push both halves of an isomorphism to a common shift ``c``.

    phi is replaced by psi'_{C_phi x, c x} o phi and likewise for phi_inv; the
    default c is the larger of the two shifts.
    """
    c = as_fraction(c) if c is not None else max(phi.shift, phi_inv.shift)
    if c < phi.shift or c < phi_inv.shift:
        raise ValueError("the common constant must dominate both shifts")
    new_phi = FdsMorphism(c, tuple(w.map_between(phi.shift * x, c * x) @ m for x, m in zip(v.grid, phi.maps)))
    new_inv = FdsMorphism(c, tuple(v.map_between(phi_inv.shift * x, c * x) @ m for x, m in zip(w.grid, phi_inv.maps)))
    return new_phi, new_inv


# ---------------------------------------------------------------------------
# "bigger than"


def transport_bigger_constants(a, b, c, kappa) -> tuple[Fraction, Fraction, Fraction]:
    """Constants witnessing bigger-than after replacing both systems by
    isomorphic ones whose isomorphisms all have shift kappa."""
    a, b, c, k = map(as_fraction, (a, b, c, kappa))
    return (k**4 * a, k**2 * b, k**2 * c)


def _check_bigger_constants(a, b, c):
    if min(a, b, c) < 1 or c < b:
        raise ValueError("need A, B, C >= 1 and C >= B")


def bigger_than_counterexample(v: ConcreteFds, w: ConcreteFds, a, b, c):
    """First (x, y) with rank psi_{Bx, Cyx} < rank psi'_{x, Ayx}, or None.

    Writing t = yx, both ranks are constant on the cells cut out by the
    breakpoints of x in {grid(w), grid(v)/B, 1} and of t in {grid(w)/A,
    grid(v)/C, 1}; one representative per cell with t >= x decides the check.
    Pairs whose indices cannot be resolved on the windows are skipped.
    """
    a, b, c = map(as_fraction, (a, b, c))
    _check_bigger_constants(a, b, c)
    if v.field != w.field:
        raise GridMismatch("systems over different fields")
    xs = sorted({Fraction(1)} | {g for g in w.grid if g >= 1} | {g / b for g in v.grid if g / b >= 1})
    ts = sorted({Fraction(1)} | {g / a for g in w.grid if g / a >= 1} | {g / c for g in v.grid if g / c >= 1})
    for xi, x in enumerate(xs):
        x_end = xs[xi + 1] if xi + 1 < len(xs) else None
        for ti, t0 in enumerate(ts):
            t_end = ts[ti + 1] if ti + 1 < len(ts) else None
            t = max(t0, x)
            if t_end is not None and t >= t_end:
                continue
            if not (v.resolvable(c * t) and w.resolvable(a * t) and v.resolvable(b * x) and w.resolvable(x)):
                continue
            lhs = rank(v.map_between(b * x, c * t))
            rhs = rank(w.map_between(x, a * t))
            if lhs < rhs:
                return (x, t / x)
    return None


def bigger_than_check(v: ConcreteFds, w: ConcreteFds, a, b, c) -> bool:
    """Window check that ``v`` is bigger than ``w`` with constants (A, B, C).

    Exact for piecewise-constant systems on the resolvable part of the
    windows; a necessary condition for the asymptotic relation only.
    """
    return bigger_than_counterexample(v, w, a, b, c) is None


@dataclass(frozen=True, eq=False)
class RankModel:
    """Concrete image system im psi'_{x/B, (A/B)x} with its ambient bases."""

    system: ConcreteFds
    bases: tuple[ExactMatrix, ...]  # columns span the image inside W at ambient_points[i]
    ambient_points: tuple[Fraction, ...]


def _rank_model(w: ConcreteFds, a, b) -> RankModel:
    a, b = as_fraction(a), as_fraction(b)
    ratio = a / b
    pts = {b} | {b * g for g in w.grid if b * g >= b} | {g / ratio for g in w.grid if g / ratio >= b}
    pts = sorted(p for p in pts if w.resolvable(ratio * p))
    if not pts:
        raise OutOfWindow("no resolvable point for the rank model")
    bases, dims, ambient = [], [], []
    for z in pts:
        img = w.map_between(z / b, ratio * z)
        cols = column_space_basis(img)
        bases.append(ExactMatrix.from_columns(w.field, cols, img.rows))
        dims.append(len(cols))
        ambient.append(ratio * z)
    steps = []
    for i in range(len(pts) - 1):
        pushed = w.map_between(ambient[i], ambient[i + 1]) @ bases[i]
        steps.append(_coordinates(bases[i + 1], pushed))
    sys = ConcreteFds(w.field, tuple(pts), tuple(dims), tuple(steps), w.stabilized)
    return RankModel(sys, tuple(bases), tuple(ambient))


def _coordinates(basis: ExactMatrix, vectors: ExactMatrix) -> ExactMatrix:
    """Coordinates of each column of ``vectors`` in the column basis ``basis``."""
    cols = []
    for v in vectors.columns():
        x = solve(basis, v)
        if x is None:
            raise NoSolution("vector outside the span of the basis")
        cols.append(x)
    return ExactMatrix.from_columns(basis.field, cols, basis.cols)


def bigger_than_rank_model(v: ConcreteFds, w: ConcreteFds, a, b, c) -> ConcreteFds:
    """The image system x -> im psi'_{x/B, (A/B)x} (zero for x < B), which is
    isomorphic to ``w`` and dominated dimensionwise by ``v``."""
    if not bigger_than_check(v, w, a, b, c):
        raise PreconditionFailed("v is not bigger than w with these constants")
    model = _rank_model(w, a, b).system
    for x, d in zip(model.grid, model.dims):
        if v.resolvable(x) and d > v.dim_at(x):
            raise PreconditionFailed(f"model dimension {d} exceeds dim V at x = {x}")
    return model


def rank_model_isomorphism(w: ConcreteFds, a, b) -> tuple[ConcreteFds, FdsMorphism, FdsMorphism]:
    """(model, phi, phi_inv) with phi: w -> model of shift B and phi_inv the inclusion."""
    a, b = as_fraction(a), as_fraction(b)
    rm = _rank_model(w, a, b)
    model = rm.system
    back = max(Fraction(1), a / b)
    phi_maps = []
    for x in w.grid:
        j = model.index_at(b * x)
        img = w.map_between(x, a * x)
        phi_maps.append(_coordinates(rm.bases[j], img))
    inv_maps = tuple(w.map_between(amb, back * z) @ basis for z, amb, basis in zip(model.grid, rm.ambient_points, rm.bases))
    return model, FdsMorphism(b, tuple(phi_maps)), FdsMorphism(back, inv_maps)


# ---------------------------------------------------------------------------
# long exact sequences


@dataclass(frozen=True, eq=False)
class ExactTriangle:
    """Per-grid-point maps V -a12-> V' -a23-> V'' -a31-> V on a shared grid."""

    a12: tuple[ExactMatrix, ...]
    a23: tuple[ExactMatrix, ...]
    a31: tuple[ExactMatrix, ...]

    def to_json(self) -> dict:
        return {k: [m.to_json() for m in getattr(self, k)] for k in ("a12", "a23", "a31")}

    @classmethod
    def from_json(cls, data: dict, v: ConcreteFds, w: ConcreteFds, u: ConcreteFds) -> "ExactTriangle":
        f = v.field
        a12 = tuple(ExactMatrix.from_json(f, m, w.dims[i], v.dims[i]) for i, m in enumerate(data["a12"]))
        a23 = tuple(ExactMatrix.from_json(f, m, u.dims[i], w.dims[i]) for i, m in enumerate(data["a23"]))
        a31 = tuple(ExactMatrix.from_json(f, m, v.dims[i], u.dims[i]) for i, m in enumerate(data["a31"]))
        return cls(a12, a23, a31)


def _exact_at(f_in: ExactMatrix, f_out: ExactMatrix) -> bool:
    """im f_in == ker f_out."""
    if not (f_out @ f_in).is_zero():
        return False
    return rank(f_in) == f_out.cols - rank(f_out)


def check_exact_triangle(v: ConcreteFds, w: ConcreteFds, u: ConcreteFds, les: ExactTriangle):
    """Raise unless the triangle is exact at every point and commutes with every step."""
    if not (v.grid == w.grid == u.grid):
        raise GridMismatch("the three systems must share a grid")
    n = v.length
    if not (len(les.a12) == len(les.a23) == len(les.a31) == n):
        raise GridMismatch("need one triple of maps per grid point")
    for i in range(n):
        a12, a23, a31 = les.a12[i], les.a23[i], les.a31[i]
        shapes = [(a12.shape, (w.dims[i], v.dims[i])), (a23.shape, (u.dims[i], w.dims[i])), (a31.shape, (v.dims[i], u.dims[i]))]
        if any(s != t for s, t in shapes):
            raise DimensionMismatch(f"maps at grid point {i} have wrong shapes")
        if not (_exact_at(a12, a23) and _exact_at(a23, a31) and _exact_at(a31, a12)):
            raise NotExact(f"sequence is not exact at grid point {i}")
    for i in range(n - 1):
        for f, src, dst in ((les.a12, v, w), (les.a23, w, u), (les.a31, u, v)):
            if f[i + 1] @ src.steps[i] != dst.steps[i] @ f[i]:
                raise NotCommutative(f"square between grid points {i} and {i + 1} fails")


def les_collapse_isomorphism(v: ConcreteFds, w: ConcreteFds, u: ConcreteFds, les: ExactTriangle, c) -> tuple[FdsMorphism, FdsMorphism]:
    """Isomorphism v ~ w from an exact triangle whose third system dies after shift C.

    phi_x = a12 at x. For q in V'_x, psi'_{x,Cx}(q) = a12(w) for some w in
    V_{Cx}, and phi_inv_x(q) = psi_{Cx, C^2 x}(w), independent of the choice
    of w. The composites are psi_{x, C^2 x} and psi'_{x, C^2 x}.
    """
    c = as_fraction(c)
    if c < 1:
        raise ValueError("shift constant must be >= 1")
    check_exact_triangle(v, w, u, les)
    for x in u.grid:
        if not u.resolvable(c * x):
            raise OutOfWindow(f"cannot resolve the third system at {c * x}")
        if not u.map_between(x, c * x).is_zero():
            raise UTailNotTrivial(f"psi''_{{x, Cx}} is nonzero at x = {x}")
    phi = FdsMorphism(Fraction(1), les.a12)
    inv_maps = []
    for x in w.grid:
        cx = c * x
        k = v.index_at(cx)
        pushed = w.map_between(x, cx)
        forward = v.map_between(cx, c * cx)
        cols = []
        for q in pushed.columns():
            if k < 0:
                pre = ()
            else:
                pre = solve(les.a12[k], q)
                if pre is None:
                    raise NoSolution(f"no preimage under a12 at {cx}")
            cols.append(forward.apply(pre) if pre else tuple(v.field(0) for _ in range(v.dim_at(c * cx))))
        inv_maps.append(ExactMatrix.from_columns(v.field, cols, v.dim_at(c * cx)))
    return phi, FdsMorphism(c * c, tuple(inv_maps))


def random_exact_triangle(field: Field, rng, length: int = 4, max_block: int = 2):
    """A random exact triangle V -> V' -> V'' -> V of stabilized systems whose
    third system vanishes at the last grid point.

    Each space splits as V = P + R, V' = R + S, V'' = S + P with the triangle
    maps the evident projections/inclusions.  Commuting with the steps forces
    block upper-triangular steps whose diagonal blocks are shared:
    (X, Y; 0, Rm) on V, (Rm, Z; 0, Sm) on V' and (Sm, W; 0, X) on V''.
    Random changes of basis then hide the block form.  Returns
    (v, w, u, triangle, C) with C the smallest grid ratio killing u.
    """
    grid = [Fraction(1)]
    for _ in range(length - 1):
        grid.append(grid[-1] + Fraction(rng.randint(1, 4), rng.randint(1, 2)))
    p = [rng.randint(0, max_block) for _ in range(length)]
    r = [rng.randint(0, max_block) for _ in range(length)]
    s = [rng.randint(0, max_block) for _ in range(length)]
    p[-1] = s[-1] = 0

    def rnd(rows, cols):
        from .exactalg import random_matrix
        return random_matrix(field, rows, cols, rng)

    def blocks(tl, tr, br, top_rows, bot_rows, left_cols, right_cols):
        z = ExactMatrix.zeros(field, bot_rows, left_cols)
        rows = [list(a) + list(b) for a, b in zip(tl.entries, tr.entries)]
        rows += [list(a) + list(b) for a, b in zip(z.entries, br.entries)]
        return ExactMatrix.from_rows(field, rows, left_cols + right_cols) if rows else ExactMatrix.zeros(field, 0, left_cols + right_cols)

    fv, fw, fu = [], [], []
    for i in range(length - 1):
        x = rnd(p[i + 1], p[i])
        rm = rnd(r[i + 1], r[i])
        sm = rnd(s[i + 1], s[i])
        fv.append(blocks(x, rnd(p[i + 1], r[i]), rm, p[i + 1], r[i + 1], p[i], r[i]))
        fw.append(blocks(rm, rnd(r[i + 1], s[i]), sm, r[i + 1], s[i + 1], r[i], s[i]))
        fu.append(blocks(sm, rnd(s[i + 1], p[i]), x, s[i + 1], p[i + 1], s[i], p[i]))

    def proj(src_a, src_b, dst_b):
        # (a, b) -> (b, 0): identity from the second summand onto the first
        rows = [[int(j == src_a + i) for j in range(src_a + src_b)] for i in range(src_b)]
        rows += [[0] * (src_a + src_b) for _ in range(dst_b)]
        return ExactMatrix.from_rows(field, rows, src_a + src_b)

    a12 = [proj(p[i], r[i], s[i]) for i in range(length)]
    a23 = [proj(r[i], s[i], p[i]) for i in range(length)]
    a31 = [proj(s[i], p[i], r[i]) for i in range(length)]

    from .exactalg import random_invertible, inverse
    bv = [random_invertible(field, p[i] + r[i], rng) for i in range(length)]
    bw = [random_invertible(field, r[i] + s[i], rng) for i in range(length)]
    bu = [random_invertible(field, s[i] + p[i], rng) for i in range(length)]
    iv, iw, iu = [inverse(m) for m in bv], [inverse(m) for m in bw], [inverse(m) for m in bu]
    conj = lambda steps, b, binv: tuple(b[i + 1] @ st @ binv[i] for i, st in enumerate(steps))
    v = ConcreteFds(field, tuple(grid), tuple(p[i] + r[i] for i in range(length)), conj(fv, bv, iv))
    w = ConcreteFds(field, tuple(grid), tuple(r[i] + s[i] for i in range(length)), conj(fw, bw, iw))
    u = ConcreteFds(field, tuple(grid), tuple(s[i] + p[i] for i in range(length)), conj(fu, bu, iu))
    tri = ExactTriangle(
        tuple(bw[i] @ a12[i] @ iv[i] for i in range(length)),
        tuple(bu[i] @ a23[i] @ iw[i] for i in range(length)),
        tuple(bv[i] @ a31[i] @ iu[i] for i in range(length)),
    )
    c = smallest_killing_shift(u)
    return v, w, u, tri, c


def smallest_killing_shift(u: ConcreteFds) -> Fraction:
    """Smallest ratio C of grid points with psi''_{x, Cx} = 0 for every x."""
    if not u.stabilized or u.dims[-1] != 0:
        raise UTailNotTrivial("the system does not die on its stabilized tail")
    candidates = sorted({b / a for a in u.grid for b in u.grid if b >= a})
    for c in candidates:
        if all(u.map_between(x, c * x).is_zero() for x in u.grid):
            return c
    return candidates[-1]  # unreachable: the last ratio lands on the zero tail


# ---------------------------------------------------------------------------
# families of complexes: homology systems


@dataclass(frozen=True, eq=False)
class ComplexFamily:
    """A directed system of square-zero differentials on V_x.

    ``levels[i][k]`` is the filtration level of basis vector k at grid point i
    (F_j is spanned by the basis vectors of level <= j); empty when unused.
    """

    field: Field
    grid: tuple[Fraction, ...]
    dims: tuple[int, ...]
    steps: tuple[ExactMatrix, ...]
    differentials: tuple[ExactMatrix, ...]
    levels: tuple[tuple[int, ...], ...] = ()
    stabilized: bool = True

    def __post_init__(self):
        self.system  # validates shapes
        for i, d in enumerate(self.differentials):
            if d.shape != (self.dims[i], self.dims[i]):
                raise DimensionMismatch(f"differential {i} has shape {d.shape}")
        if self.levels and (len(self.levels) != len(self.grid) or any(len(l) != d for l, d in zip(self.levels, self.dims))):
            raise DimensionMismatch("need one filtration level per basis vector")

    @property
    def system(self) -> ConcreteFds:
        return ConcreteFds(self.field, self.grid, self.dims, self.steps, self.stabilized)

    def to_json(self) -> dict:
        out = self.system.to_json()
        out["differentials"] = [d.to_json() for d in self.differentials]
        if self.levels:
            out["levels"] = [list(l) for l in self.levels]
        return out

    @classmethod
    def from_json(cls, data: dict, default_field: Field | None = None) -> "ComplexFamily":
        s = ConcreteFds.from_json(data, default_field)
        diffs = tuple(ExactMatrix.from_json(s.field, d, n, n) for d, n in zip(data["differentials"], s.dims))
        levels = tuple(tuple(int(a) for a in l) for l in data.get("levels", ()))
        return cls(s.field, s.grid, s.dims, s.steps, diffs, levels, s.stabilized)


def homology_dimension(d: ExactMatrix) -> int:
    """dim ker d - dim im d for a square-zero d."""
    return d.cols - 2 * rank(d)


def _homology_data(d: ExactMatrix) -> tuple[ExactMatrix, ExactMatrix]:
    """(reps, boundary basis): columns of reps project to a basis of ker d / im d."""
    f = d.field
    n = d.cols
    bnd = column_space_basis(d)
    cyc = nullspace(d)
    reps = []
    current = list(bnd)
    for z in cyc:
        trial = ExactMatrix.from_columns(f, current + [z], n)
        if rank(trial) > len(current):
            current.append(z)
            reps.append(z)
    return ExactMatrix.from_columns(f, reps, n), ExactMatrix.from_columns(f, bnd, n)


def _homology_class(reps: ExactMatrix, bnd: ExactMatrix, z: Sequence) -> tuple:
    stacked = hstack(reps.field, [reps, bnd], reps.rows)
    sol = solve(stacked, z)
    if sol is None:
        raise NoSolution("vector is not a cycle")
    return tuple(sol[: reps.cols])


def homology_system(fam: ComplexFamily) -> ConcreteFds:
    """The induced directed system of homologies H(V_x, d_x)."""
    data = [_homology_data(d) for d in fam.differentials]
    dims = tuple(r.cols for r, _ in data)
    steps = []
    for i, st in enumerate(fam.steps):
        reps_next, bnd_next = data[i + 1]
        cols = [_homology_class(reps_next, bnd_next, st.apply(z)) for z in data[i][0].columns()]
        steps.append(ExactMatrix.from_columns(fam.field, cols, dims[i + 1]))
    return ConcreteFds(fam.field, fam.grid, dims, tuple(steps), fam.stabilized)


def _level_indices(levels: Sequence[int], j: int) -> list[int]:
    return [k for k, l in enumerate(levels) if l == j]


def graded_family(fam: ComplexFamily) -> ComplexFamily:
    """The associated graded family: sum over j of F_j / F_{j-1} with the
    diagonal blocks of the differentials and steps."""
    top = max((max(l) for l in fam.levels if l), default=-1)
    orders = [[k for j in range(top + 1) for k in _level_indices(l, j)] for l in fam.levels]
    diffs, steps = [], []
    for i, d in enumerate(fam.differentials):
        lv = fam.levels[i]
        keep = [[int(lv[a] == lv[b]) for b in orders[i]] for a in orders[i]]
        sub = d.submatrix(orders[i], orders[i])
        diffs.append(_mask(sub, keep))
    for i, st in enumerate(fam.steps):
        src, dst = fam.levels[i], fam.levels[i + 1]
        keep = [[int(dst[a] == src[b]) for b in orders[i]] for a in orders[i + 1]]
        steps.append(_mask(st.submatrix(orders[i + 1], orders[i]), keep))
    new_levels = tuple(tuple(fam.levels[i][k] for k in orders[i]) for i in range(len(orders)))
    return ComplexFamily(fam.field, fam.grid, fam.dims, tuple(steps), tuple(diffs), new_levels, fam.stabilized)


def _mask(m: ExactMatrix, keep) -> ExactMatrix:
    z = m.field(0)
    return ExactMatrix(m.field, m.rows, m.cols, tuple(tuple(x if keep[r][c] else z for c, x in enumerate(row)) for r, row in enumerate(m.entries)))


# ---------------------------------------------------------------------------
# filtration dominance


@dataclass(frozen=True)
class DominanceReport:
    holds: bool
    kappa: Fraction
    constants: tuple[Fraction, Fraction, Fraction]
    submodel_bigger: bool
    transported_bigger: bool


def _check_filtration_hypotheses(fam: ComplexFamily, m: Fraction, n: Fraction):
    if not fam.levels:
        raise HypothesisViolated("filtration", "no filtration levels given")
    for i, d in enumerate(fam.differentials):
        if not (d @ d).is_zero():
            raise HypothesisViolated("differential", f"d^2 != 0 at grid point {i}")
        lv = fam.levels[i]
        for r in range(d.rows):
            for c in range(d.cols):
                if d[r, c] != 0 and lv[r] > lv[c]:
                    raise HypothesisViolated("filtration", f"differential raises filtration level at grid point {i}")
    for i, st in enumerate(fam.steps):
        if st @ fam.differentials[i] != fam.differentials[i + 1] @ st:
            raise HypothesisViolated("chain map", f"step {i} does not commute with the differentials")
        src, dst = fam.levels[i], fam.levels[i + 1]
        for r in range(st.rows):
            for c in range(st.cols):
                if st[r, c] != 0 and dst[r] > src[c]:
                    raise HypothesisViolated("filtration", f"step {i} raises filtration level")
    for i, x in enumerate(fam.grid):
        if fam.levels[i] and max(fam.levels[i]) > math.floor(n * x):
            raise HypothesisViolated("stabilization", f"levels above floor(N x) at x = {x}")
    # graded maps must be isomorphisms for y > x >= M j
    gr = graded_family(fam)
    top = max((max(l) for l in fam.levels if l), default=-1)
    for j in range(top + 1):
        piece = _graded_piece_system(gr, j)
        for a in range(len(fam.grid)):
            nxt = fam.grid[a + 1] if a + 1 < len(fam.grid) else None
            if nxt is not None and nxt <= m * j:
                continue  # no x >= M j inside [x_a, x_{a+1})
            for b in range(a + 1, len(fam.grid)):
                t = piece.transition(a, b)
                if not (t.rows == t.cols == rank(t)):
                    raise HypothesisViolated("graded isomorphism", f"level {j} map from x = {fam.grid[a]} to {fam.grid[b]} is not invertible")


def _graded_piece_system(gr: ComplexFamily, j: int) -> ConcreteFds:
    idx = [_level_indices(l, j) for l in gr.levels]
    sub = ComplexFamily(
        gr.field, gr.grid, tuple(len(ix) for ix in idx),
        tuple(st.submatrix(idx[i + 1], idx[i]) for i, st in enumerate(gr.steps)),
        tuple(d.submatrix(ix, ix) for d, ix in zip(gr.differentials, idx)),
        (), gr.stabilized,
    )
    return homology_system(sub)


def truncated_family(fam: ComplexFamily, m) -> ComplexFamily:
    """C'_x = F^x_j on M j <= x < M (j + 1), as a subfamily of ``fam``."""
    m = as_fraction(m)
    top = max((max(l) for l in fam.levels if l), default=0)
    pts = set(fam.grid) | {m * j for j in range(1, top + 2) if m * j >= fam.grid[0] and fam.system.resolvable(m * j)}
    pts = sorted(pts)
    base = fam.system
    idx, dims, diffs, levels = [], [], [], []
    for x in pts:
        i = base.index_at(x)
        cut = math.floor(x / m)
        keep = [k for k, l in enumerate(fam.levels[i]) if l <= cut]
        idx.append(keep)
        dims.append(len(keep))
        diffs.append(fam.differentials[i].submatrix(keep, keep))
        levels.append(tuple(fam.levels[i][k] for k in keep))
    steps = []
    for a in range(len(pts) - 1):
        full = base.map_between(pts[a], pts[a + 1])
        steps.append(full.submatrix(idx[a + 1], idx[a]))
    return ComplexFamily(fam.field, tuple(pts), tuple(dims), tuple(steps), tuple(diffs), tuple(levels), fam.stabilized)


def filtration_dominance_report(fam: ComplexFamily, m, n) -> DominanceReport:
    m, n = as_fraction(m), as_fraction(n)
    if m <= 1 or n <= 1:
        raise HypothesisViolated("constants", "need M > 1 and N > 1")
    _check_filtration_hypotheses(fam, m, n)
    kappa = m * n
    sub = truncated_family(fam, m)
    gr_sub = homology_system(graded_family(sub))
    h_sub = homology_system(sub)
    first = bigger_than_check(gr_sub, h_sub, 1, 1, 1)
    consts = transport_bigger_constants(1, 1, 1, kappa)
    gr_full = homology_system(graded_family(fam))
    h_full = homology_system(fam)
    second = bigger_than_check(gr_full, h_full, *consts)
    return DominanceReport(first and second, kappa, consts, first, second)


def filtration_dominance_check(fam: ComplexFamily, m, n) -> bool:
    """Hypotheses verified, then the graded homology system is shown bigger
    than the homology system on the window, with constants (k^4, k^2, k^2)
    for k = M N."""
    return filtration_dominance_report(fam, m, n).holds


# ---------------------------------------------------------------------------
# split homology bound


@dataclass(frozen=True, eq=False)
class SplitFamily:
    """Complexes Q_x = A_x + B_x (A first) with block steps and differentials."""

    field: Field
    grid: tuple[Fraction, ...]
    a_dims: tuple[int, ...]
    b_dims: tuple[int, ...]
    steps: tuple[ExactMatrix, ...]
    differentials: tuple[ExactMatrix, ...]
    stabilized: bool = True

    @property
    def system(self) -> ConcreteFds:
        dims = tuple(a + b for a, b in zip(self.a_dims, self.b_dims))
        return ConcreteFds(self.field, tuple(self.grid), dims, self.steps, self.stabilized)

    def b_block(self, m: ExactMatrix, i: int, j: int) -> ExactMatrix:
        """B-to-B block of a map from grid point j to grid point i."""
        return m.submatrix(range(self.a_dims[i], self.a_dims[i] + self.b_dims[i]), range(self.a_dims[j], self.a_dims[j] + self.b_dims[j]))

    def to_json(self) -> dict:
        out = self.system.to_json()
        del out["dims"]
        out["a_dims"], out["b_dims"] = list(self.a_dims), list(self.b_dims)
        out["differentials"] = [d.to_json() for d in self.differentials]
        return out

    @classmethod
    def from_json(cls, data: dict, default_field: Field | None = None) -> "SplitFamily":
        dims = [int(a) + int(b) for a, b in zip(data["a_dims"], data["b_dims"])]
        s = ConcreteFds.from_json({**data, "dims": dims}, default_field)
        diffs = tuple(ExactMatrix.from_json(s.field, d, k, k) for d, k in zip(data["differentials"], dims))
        return cls(s.field, s.grid, tuple(data["a_dims"]), tuple(data["b_dims"]), s.steps, diffs, s.stabilized)


def check_block_structure(fam: SplitFamily):
    sys = fam.system
    n = len(fam.grid)
    for i, d in enumerate(fam.differentials):
        if d.shape != (sys.dims[i], sys.dims[i]):
            raise BlockStructureViolated(f"differential {i} has shape {d.shape}")
        if not (d @ d).is_zero():
            raise BlockStructureViolated(f"d_q^2 != 0 at grid point {i}")
        db = fam.b_block(d, i, i)
        if not (db @ db).is_zero():
            raise BlockStructureViolated(f"d_b^2 != 0 at grid point {i}")
    for i, st in enumerate(fam.steps):
        if st @ fam.differentials[i] != fam.differentials[i + 1] @ st:
            raise BlockStructureViolated(f"step {i} does not commute with the differentials")
    for i in range(n):
        for j in range(i + 1, n):
            full = fam.b_block(sys.transition(i, j), j, i)
            chained = ExactMatrix.identity(fam.field, fam.b_dims[i])
            for k in range(i, j):
                chained = fam.b_block(fam.steps[k], k + 1, k) @ chained
            if full != chained:
                raise BlockStructureViolated(f"B blocks are not functorial between {i} and {j}")
            db_i = fam.b_block(fam.differentials[i], i, i)
            db_j = fam.b_block(fam.differentials[j], j, j)
            if full @ db_i != db_j @ full:
                raise BlockStructureViolated(f"d_b does not commute with the B maps between {i} and {j}")


@dataclass(frozen=True)
class SplitBoundRow:
    x: Fraction
    h_b_image: int
    h_q_image: int
    a_dim: int

    @property
    def holds(self) -> bool:
        return self.h_b_image <= self.h_q_image + 6 * self.a_dim


def split_bound_rows(fam: SplitFamily, c) -> list[SplitBoundRow]:
    """Both sides of |H(B')| <= |H(Q')| + 6|A| at each resolvable grid point.

    B' = im b_{x,Cx} and Q' = im q_{x,Cx} carry the restricted differentials,
    so dim H = rank(map) - 2 rank(d o map).
    """
    c = as_fraction(c)
    check_block_structure(fam)
    sys = fam.system
    rows = []
    for i, x in enumerate(fam.grid):
        if not sys.resolvable(c * x):
            continue
        j = sys.index_at(c * x)
        q = sys.map_between(x, c * x)
        b = fam.b_block(q, j, i)
        dq, db = fam.differentials[j], fam.b_block(fam.differentials[j], j, j)
        hq = rank(q) - 2 * rank(dq @ q)
        hb = rank(b) - 2 * rank(db @ b)
        rows.append(SplitBoundRow(x, hb, hq, fam.a_dims[i]))
    return rows


def split_homology_bound_check(fam: SplitFamily, c) -> bool:
    return all(r.holds for r in split_bound_rows(fam, c))


def random_split_family(field: Field, rng, length: int = 3, max_total: int = 8, sub: str | None = None) -> SplitFamily:
    """Random split family satisfying the block hypotheses.

    ``sub`` picks which summand is a subsystem: "b" (steps and differentials
    have no B -> A component) or "a" (no A -> B component). Steps are random
    solutions of the chain-map equations with that block pattern.
    """
    from .exactalg import random_matrix

    sub = sub or rng.choice("ab")
    grid = [Fraction(1)]
    for _ in range(length - 1):
        grid.append(grid[-1] + rng.randint(1, 3))
    a_dims, b_dims = [], []
    for _ in range(length):
        total = rng.randint(0, max_total)
        a = rng.randint(0, total)
        a_dims.append(a)
        b_dims.append(total - a)

    def allowed(r_blk: str, c_blk: str) -> bool:
        # forbidden component: source c_blk -> target r_blk
        return not ((sub == "b" and c_blk == "b" and r_blk == "a") or (sub == "a" and c_blk == "a" and r_blk == "b"))

    def blk(k, i):
        return "a" if k < a_dims[i] else "b"

    diffs = []
    for i in range(length):
        diffs.append(_random_square_zero(field, rng, a_dims[i], b_dims[i], lambda r, c: allowed(blk(r, i), blk(c, i))))
    steps = []
    for i in range(length - 1):
        n_src, n_dst = a_dims[i] + b_dims[i], a_dims[i + 1] + b_dims[i + 1]
        pattern = [(r, c) for r in range(n_dst) for c in range(n_src) if allowed(blk(r, i + 1), blk(c, i))]
        steps.append(_random_chain_map(field, rng, diffs[i], diffs[i + 1], pattern))
    return SplitFamily(field, tuple(grid), tuple(a_dims), tuple(b_dims), tuple(steps), tuple(diffs), True)


def _random_square_zero(field: Field, rng, a: int, b: int, allowed) -> ExactMatrix:
    """A random square-zero matrix with the given zero pattern, built as
    (B-part differential, A-part differential, coupling) by rejection."""
    from .exactalg import random_matrix

    n = a + b
    for _ in range(200):
        m = random_matrix(field, n, n, rng)
        # sparsify toward low rank so d^2 = 0 happens often
        rows = [[x if allowed(r, c) and rng.random() < 0.35 else field(0) for c, x in enumerate(row)] for r, row in enumerate(m.entries)]
        d = ExactMatrix.from_rows(field, rows, n) if n else ExactMatrix.zeros(field, 0, 0)
        if (d @ d).is_zero():
            return d
    return ExactMatrix.zeros(field, n, n)


def _random_chain_map(field: Field, rng, d_src: ExactMatrix, d_dst: ExactMatrix, pattern) -> ExactMatrix:
    """Random f with f d_src = d_dst f, supported on ``pattern`` entries."""
    n_src, n_dst = d_src.cols, d_dst.cols
    if not pattern:
        return ExactMatrix.zeros(field, n_dst, n_src)
    var = {rc: k for k, rc in enumerate(pattern)}
    eqs = []
    for r in range(n_dst):
        for c in range(n_src):
            row = [field(0)] * len(pattern)
            # (f d_src)[r][c] = sum_k f[r][k] d_src[k][c]
            for k in range(n_src):
                if (r, k) in var and d_src[k, c]:
                    row[var[(r, k)]] = field(row[var[(r, k)]] + d_src[k, c])
            # (d_dst f)[r][c] = sum_k d_dst[r][k] f[k][c]
            for k in range(n_dst):
                if (k, c) in var and d_dst[r, k]:
                    row[var[(k, c)]] = field(row[var[(k, c)]] - d_dst[r, k])
            eqs.append(row)
    basis = nullspace(ExactMatrix.from_rows(field, eqs, len(pattern)))
    coeffs = [field(0)] * len(pattern)
    for vec in basis:
        t = field.random(rng)
        coeffs = [field(a + t * b) for a, b in zip(coeffs, vec)]
    out = [[field(0)] * n_src for _ in range(n_dst)]
    for (r, c), k in var.items():
        out[r][c] = coeffs[k]
    return ExactMatrix.from_rows(field, out, n_src) if n_dst else ExactMatrix.zeros(field, 0, n_src)
