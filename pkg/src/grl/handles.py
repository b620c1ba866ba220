"""Homotopy ledgers: a fundamental-group presentation paired with an integral
cellular chain complex, transformed by handle attachments.

A ledger is the combinatorial shadow of a Stein domain: it tracks exactly the
invariants (pi_1 presentation, homology) that the construction of N_P
controls, and nothing geometric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .exactalg import (
    ChainComplex,
    DimensionMismatch,
    HomologySummary,
    IntegerMatrix,
    homology,
    homology_generators,
    integer_kernel_basis,
)
from .groups import (
    Presentation,
    TrivialityResult,
    Word,
    abelianization,
    exponent_sums,
    free_product,
    triviality_semidecide,
)

MIN_HALF_DIM = 5
GEOMETRIC_HALF_DIM = 8


class HandleError(ValueError):
    pass


class NotACycle(HandleError):
    pass


class WordBoundaryMismatch(HandleError):
    pass


class H1Nonzero(HandleError):
    pass


class PatternMismatch(HandleError):
    pass


class DimMismatch(HandleError):
    pass


# ---------------------------------------------------------------------------
# framing data


def framing_obstruction_group(sphere_dim: int, bundle_rank: int, oriented: bool = True) -> str:
    """Group classifying framings of the normal bundle of an attaching sphere.

    Returns ``"Z/2"``, ``"trivial"`` or ``"Unsupported"`` for pairs outside the
    small table used by the construction: pi_1(O(m)) = Z/2 for m >= 3,
    pi_2(O(m)) = 0 for m > 2, and a single oriented framing over a 0-sphere.
    """
    if sphere_dim == 1 and bundle_rank >= 3:
        return "Z/2"
    if sphere_dim == 2 and bundle_rank > 2:
        return "trivial"
    if sphere_dim == 0 and oriented:
        return "trivial"
    return "Unsupported"


@dataclass(frozen=True)
class HatDescriptor:
    """Attaching data at the homotopy level: sphere dimension, the homology
    class it represents, and a framing choice in the obstruction group."""

    sphere_dim: int
    homology_target: tuple[int, ...]
    framing_bit: int = 0
    bundle_rank: int = 3

    def __post_init__(self):
        group = framing_obstruction_group(self.sphere_dim, self.bundle_rank)
        legal = {"Z/2": (0, 1), "trivial": (0,)}.get(group)
        if legal is None:
            raise HandleError(f"no framing table for sphere dimension {self.sphere_dim}, rank {self.bundle_rank}")
        if self.framing_bit not in legal:
            raise HandleError(f"framing bit {self.framing_bit} is not in the {group} obstruction group")

    def to_json(self) -> dict:
        return {"sphere_dim": self.sphere_dim, "homology_target": list(self.homology_target),
                "framing_bit": self.framing_bit, "bundle_rank": self.bundle_rank}


@dataclass(frozen=True)
class Handle:
    index: int
    boundary: tuple[int, ...]
    ambient_half_dim: int
    word: Word | None = None
    label: str = ""
    hat: HatDescriptor | None = None

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(int(x) for x in self.boundary))
        if self.word is not None:
            object.__setattr__(self, "word", tuple(self.word))
        if self.index == 2 and self.word is None:
            raise HandleError("a 2-handle needs an attaching word")
        if self.index != 2 and self.word is not None:
            raise HandleError("only 2-handles carry attaching words")

    @property
    def subcritical(self) -> bool:
        return self.index < self.ambient_half_dim

    def to_json(self) -> dict:
        out = {"index": self.index, "boundary": list(self.boundary), "ambient_half_dim": self.ambient_half_dim,
               "label": self.label, "subcritical": self.subcritical}
        if self.word is not None:
            out["word"] = list(self.word)
        if self.hat is not None:
            out["hat"] = self.hat.to_json()
        return out


# ---------------------------------------------------------------------------
# ledgers


@dataclass(frozen=True, eq=False)
class HomotopyLedger:
    pi1: Presentation
    chain: ChainComplex
    half_dim: int
    history: tuple[dict, ...] = ()
    homology: HomologySummary = field(init=False)

    def __post_init__(self):
        if self.chain.rank(0) != 1:
            raise HandleError("a ledger has exactly one 0-cell")
        if self.chain.rank(1) != self.pi1.generators:
            raise HandleError(f"{self.chain.rank(1)} one-cells but {self.pi1.generators} generators")
        if self.chain.rank(2) < len(self.pi1.relators):
            raise HandleError("fewer 2-cells than relators")
        if not self.chain.boundary(1).is_zero():
            raise HandleError("1-cells must be loops at the 0-cell")
        object.__setattr__(self, "homology", homology(self.chain))

    def __eq__(self, other):
        if not isinstance(other, HomotopyLedger):
            return NotImplemented
        return (self.pi1, self.chain, self.half_dim, self.history) == (other.pi1, other.chain, other.half_dim, other.history)

    @classmethod
    def point(cls, half_dim: int) -> "HomotopyLedger":
        return cls(Presentation(0), ChainComplex((1,), ()), half_dim, ({"op": "point"},))

    def cells(self, k: int) -> int:
        return self.chain.rank(k)

    def with_history(self, entry: dict) -> "HomotopyLedger":
        return HomotopyLedger(self.pi1, self.chain, self.half_dim, self.history + (entry,))

    def is_acyclic(self) -> bool:
        return self.homology.is_acyclic()

    def sphere_degree(self) -> int | None:
        """d if the homology is H_0 = H_d = Z and zero elsewhere."""
        nz = self.homology.nonzero_degrees()
        if len(nz) == 2 and nz[0] == 0 and self.homology.is_sphere_pattern(nz[1]):
            return nz[1]
        return None

    def euler_characteristic(self) -> int:
        return self.chain.euler_characteristic()

    def to_json(self) -> dict:
        return {
            "half_dim": self.half_dim,
            "pi1": self.pi1.to_json(),
            "chain": self.chain.to_json(),
            "history": list(self.history),
        }

    @classmethod
    def from_json(cls, data: dict) -> "HomotopyLedger":
        return cls(Presentation.from_json(data["pi1"]), ChainComplex.from_json(data["chain"]), int(data["half_dim"]),
                   tuple(data.get("history", ())))

    @classmethod
    def load(cls, path) -> "HomotopyLedger":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def ledger_from_presentation_complex(p: Presentation, half_dim: int = GEOMETRIC_HALF_DIM) -> HomotopyLedger:
    """One 0-cell, a 1-cell per generator and a 2-cell per relator."""
    k, l = p.generators, len(p.relators)
    from .groups import exponent_matrix

    chain = ChainComplex((1, k, l), (IntegerMatrix.zeros(1, k), exponent_matrix(p)))
    return HomotopyLedger(p, chain, half_dim, ({"op": "presentation_complex", "generators": k, "relators": l},))


def attach_handle(l: HomotopyLedger, h: Handle) -> HomotopyLedger:
    """Add one k-cell with the handle's boundary; 1- and 2-handles update pi_1."""
    k = h.index
    if h.ambient_half_dim != l.half_dim:
        raise DimMismatch(f"handle built for half dimension {h.ambient_half_dim}, ledger has {l.half_dim}")
    if k < 1:
        raise HandleError("0-handles are not attached to a connected ledger")
    if k > l.half_dim:
        raise HandleError(f"handle index {k} exceeds half dimension {l.half_dim}")
    expected = l.chain.rank(k - 1)
    if len(h.boundary) != expected:
        raise DimensionMismatch(f"boundary has length {len(h.boundary)}, expected {expected}")
    if k >= 2 and any(l.chain.boundary(k - 1).apply(h.boundary)):
        raise NotACycle(f"boundary of the {k}-handle is not a cycle")
    if k == 1 and any(h.boundary):
        raise NotACycle("a 1-handle boundary must vanish")
    pi1 = l.pi1
    if k == 1:
        pi1 = Presentation(pi1.generators + 1, pi1.relators)
    elif k == 2:
        if list(h.boundary) != exponent_sums(h.word, pi1.generators):
            raise WordBoundaryMismatch(f"exponent sums of the attaching word differ from the boundary {list(h.boundary)}")
        pi1 = pi1.with_relators([h.word])
    chain = l.chain.with_cell(k, h.boundary)
    entry = {"op": "attach", "index": k, "label": h.label, "subcritical": h.subcritical}
    if h.hat is not None:
        entry["hat"] = h.hat.to_json()
    return HomotopyLedger(pi1, chain, l.half_dim, l.history + (entry,))


def _add_formal_cell(l: HomotopyLedger, degree: int) -> HomotopyLedger:
    chain = l.chain.with_cell(degree, [0] * l.chain.rank(degree - 1))
    return HomotopyLedger(l.pi1, chain, l.half_dim, l.history)


def synth_boundary_model(p: Presentation, n: int) -> HomotopyLedger:
    """Chain model of the cotangent disc bundle of a homology (n-2)-sphere with
    fundamental group G_P.

    Presentation complex, plus 3-cells along a Smith-normal-form kernel basis
    of d_2, plus one (n-2)-cell with zero boundary. The ledger's half
    dimension is n - 2. H_2(G_P) = 0 is a caller assertion; H_1 = 0 is checked.
    """
    if n < MIN_HALF_DIM:
        raise HandleError(f"need n >= {MIN_HALF_DIM} so the sphere class sits above the 3-cells")
    h1 = abelianization(p)
    if not h1.is_trivial:
        raise H1Nonzero(f"H_1 = {h1} is not trivial")
    l = ledger_from_presentation_complex(p, n - 2)
    d2 = l.chain.boundary(2)
    for j, cyc in enumerate(integer_kernel_basis(d2)):
        l = attach_handle(l, Handle(3, cyc, n - 2, label=f"kill-pi2-{j}"))
    l = _add_formal_cell(l, n - 2)
    entry = {"op": "synth_boundary_model", "n": n, "assumes": "H2(G_P) = 0",
             "geometric_dimension_ok": n >= GEOMETRIC_HALF_DIM}
    return l.with_history(entry)


def build_N2(l: HomotopyLedger) -> HomotopyLedger:
    """Kill each generator with a 2-handle, then kill the resulting free H_2
    with 3-handles along a basis of its generators."""
    d = l.sphere_degree()
    k = l.pi1.generators
    for i in range(1, k + 1):
        e = [int(j == i) for j in range(1, k + 1)]
        l = attach_handle(l, Handle(2, e, l.half_dim, word=(i,), label=f"kill-g{i}",
                                    hat=HatDescriptor(1, tuple(e), 0, 2 * l.half_dim - 1)))
    gens = homology_generators(l.chain, 2)
    if any(order != 0 for _, order in gens):
        raise PatternMismatch("H_2 after the 2-handles has torsion")
    for j, (cyc, _) in enumerate(gens):
        l = attach_handle(l, Handle(3, cyc, l.half_dim, label=f"kill-h2-{j}",
                                    hat=HatDescriptor(2, cyc, 0, 2 * l.half_dim - 2)))
    if d is not None and l.sphere_degree() != d:
        raise PatternMismatch(f"expected the sphere pattern in degree {d} after the 2- and 3-handles")
    return l.with_history({"op": "build_N2", "two_handles": k, "three_handles": len(gens)})


def product_with_T(l: HomotopyLedger) -> HomotopyLedger:
    """Product with the contractible tom Dieck-Petrie surface: invariants are
    unchanged, half dimension grows by 2, and the factor's growth rate is
    recorded as >= 0."""
    entry = {"op": "product_with_T", "factor": "tom Dieck-Petrie surface", "factor_growth_lower": "0", "rule": "R9"}
    return HomotopyLedger(l.pi1, l.chain, l.half_dim + 2, l.history + (entry,))


def build_N4(l: HomotopyLedger) -> HomotopyLedger:
    """Attach an (n-1)-handle along the generator of H_{n-2}; the result is acyclic."""
    d = l.sphere_degree()
    if d is None or d != l.half_dim - 2:
        raise PatternMismatch(f"need homology Z in degrees 0 and {l.half_dim - 2} only")
    gens = homology_generators(l.chain, d)
    if len(gens) != 1 or gens[0][1] != 0:
        raise PatternMismatch("the top class is not a single free generator")
    cyc = gens[0][0]
    out = attach_handle(l, Handle(d + 1, cyc, l.half_dim, label="cap-sphere"))
    if not out.is_acyclic():
        raise PatternMismatch("attaching the top handle did not produce an acyclic ledger")
    return out.with_history({"op": "build_N4", "index": d + 1, "subcritical": d + 1 < l.half_dim})


def build_NP(p: Presentation, n: int = GEOMETRIC_HALF_DIM) -> HomotopyLedger:
    """N4(T x N2(model(P * P * P))): the ledger of N_P in complex dimension n."""
    p3 = free_product(p, p, p)
    ledger = build_N4(product_with_T(build_N2(synth_boundary_model(p3, n))))
    return ledger.with_history({"op": "build_NP", "n": n, "source_generators": p.generators, "source_relators": len(p.relators)})


def end_connect_sum(l1: HomotopyLedger, l2: HomotopyLedger) -> HomotopyLedger:
    """Join two ledgers by a 1-handle.

    Modelled as the wedge at the 0-cells, which is homotopy equivalent to the
    disjoint union plus a joining 1-cell and keeps 1-cells equal to generators.
    """
    if l1.half_dim != l2.half_dim:
        raise DimMismatch(f"half dimensions {l1.half_dim} and {l2.half_dim} differ")
    top = max(l1.chain.top_degree, l2.chain.top_degree)
    groups = [1] + [l1.chain.rank(i) + l2.chain.rank(i) for i in range(1, top + 1)]
    mats = [IntegerMatrix.zeros(1, groups[1])] if top >= 1 else []
    for i in range(2, top + 1):
        a, b = l1.chain.boundary(i), l2.chain.boundary(i)
        rows = [list(r) + [0] * b.cols for r in a.entries] + [[0] * a.cols + list(r) for r in b.entries]
        mats.append(IntegerMatrix.from_rows(rows, a.cols + b.cols) if rows else IntegerMatrix.zeros(0, a.cols + b.cols))
    chain = ChainComplex(tuple(groups), tuple(mats))
    pi1 = free_product(l1.pi1, l2.pi1)
    entry = {"op": "end_connect_sum", "left": len(l1.history), "right": len(l2.history)}
    return HomotopyLedger(pi1, chain, l1.half_dim, l1.history + l2.history + (entry,))


# ---------------------------------------------------------------------------
# contractibility


@dataclass(frozen=True)
class ContractibilityResult:
    status: str  # "Certified", "HomologyObstruction", "Pi1Nontrivial" or "Pi1Unknown"
    degree: int | None = None
    group: TrivialityResult | None = None

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.degree is not None:
            out["degree"] = self.degree
        if self.group is not None:
            out["pi1"] = self.group.to_json()
        return out


def verify_contractible(l: HomotopyLedger, max_cosets: int = 100_000, max_degree: int = 5) -> ContractibilityResult:
    """Exact homology check, then a pi_1 triviality semidecision.

    Certified means acyclic and simply connected, hence contractible for a CW
    complex. Pi1Unknown is an honest outcome when the budgets run out.
    """
    for d in l.homology.nonzero_degrees():
        if d > 0:
            return ContractibilityResult("HomologyObstruction", degree=d)
    if not l.homology.is_free_rank(0, 1):
        return ContractibilityResult("HomologyObstruction", degree=0)
    t = triviality_semidecide(l.pi1, max_cosets, max_degree)
    status = {"Trivial": "Certified", "Nontrivial": "Pi1Nontrivial", "Unknown": "Pi1Unknown"}[t.status]
    return ContractibilityResult(status, group=t)
