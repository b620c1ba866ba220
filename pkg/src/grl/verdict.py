"""Growth-rate verdicts for the domains N_P, derived from a fixed rule set.

The rules are theorems about symplectic homology that are trusted, not
computed here: every rule carries the status ``ConditionalOnPaper`` and every
report repeats the disclaimer.  What *is* computed is the group-theoretic input
(triviality evidence for G_P) and the ledger facts each rule consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fds import INFINITY, MINUS_INFINITY, ZERO_RATE, GrowthRate
from .groups import (
    PermutationWitness,
    Presentation,
    abelianization,
    todd_coxeter,
    triviality_semidecide,
)
from .handles import Handle, HomotopyLedger, build_NP

DISCLAIMER = "Floer-theoretic premises are trusted, not computed; every rule is conditional."
STATUS = "ConditionalOnPaper"


@dataclass(frozen=True)
class Rule:
    id: str
    statement: str
    anchor: str
    status: str = STATUS

    def to_json(self) -> dict:
        return {"id": self.id, "statement": self.statement, "anchor": self.anchor, "status": self.status}


RULES: dict[str, Rule] = {r.id: r for r in (
    Rule("R1", "Gamma of the completed N_P is >= 0 for every presentation P", "dichotomy lemma for N_P"),
    Rule("R2", "Gamma of the completed N_P is finite iff G_P is trivial", "dichotomy lemma for N_P"),
    Rule("R3", "Gamma(D*Q) >= conjugacy growth rate of pi_1(Q)", "cotangent bundle lower bound"),
    Rule("R4", "Gamma of a product is the sum of the Gammas", "product formula"),
    Rule("R5", "attaching subcritical handles leaves Gamma unchanged", "subcritical invariance"),
    Rule("R6", "Gamma(M) <= dim_C A when M is deformation equivalent to a smooth affine variety A", "affine upper bound"),
    Rule("R7", "a filling of the standard contact sphere has Gamma = -oo", "standard sphere fillings"),
    Rule("R8", "Gamma of a disjoint union is the maximum of the Gammas", "disjoint union rule"),
    Rule("R9", "the tom Dieck-Petrie factor has Gamma >= 0", "nonvanishing symplectic homology of the factor"),
)}


@dataclass(frozen=True)
class Step:
    rule: str
    facts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"rule": self.rule, "facts": self.facts}


@dataclass(frozen=True)
class Verdict:
    lower: GrowthRate
    upper: GrowthRate
    conclusion: str  # "Finite", "Infinite", "Interval" or "Unknown"
    derivation: tuple[Step, ...]
    group_fact: str  # "Trivial", "Nontrivial" or "Unknown"
    facts: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.upper < self.lower:
            raise ValueError("verdict lower bound exceeds upper bound")
        if self.conclusion not in ("Finite", "Infinite", "Interval", "Unknown"):
            raise ValueError(f"bad conclusion {self.conclusion!r}")
        if any(s.rule not in RULES for s in self.derivation):
            raise ValueError("every derivation step must name a known rule")
        if self.conclusion == "Infinite":
            cited = {s.rule for s in self.derivation}
            if self.group_fact != "Nontrivial" or not {"R2", "R3", "R4"} <= cited:
                raise ValueError("an Infinite verdict needs a Nontrivial group fact through R2, R3 and R4")

    def to_json(self) -> dict:
        return {
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "conclusion": self.conclusion,
            "group_fact": self.group_fact,
            "derivation": [s.to_json() for s in self.derivation],
            "facts": self.facts,
            "rule_status": STATUS,
            "disclaimer": DISCLAIMER,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Verdict":
        return cls(
            GrowthRate.from_json(data["lower"]),
            GrowthRate.from_json(data["upper"]),
            data["conclusion"],
            tuple(Step(s["rule"], dict(s.get("facts", {}))) for s in data.get("derivation", [])),
            data.get("group_fact", "Unknown"),
            dict(data.get("facts", {})),
        )


def _conclude(lower: GrowthRate, upper: GrowthRate) -> str:
    if lower == INFINITY:
        return "Infinite"
    if upper < INFINITY:
        return "Finite"
    if lower == ZERO_RATE and upper == INFINITY:
        return "Unknown"
    return "Interval"


def np_verdict(p: Presentation, n: int = 8, max_cosets: int = 100_000, max_degree: int = 5,
               ledger: HomotopyLedger | None = None) -> Verdict:
    """Bounds on Gamma of the completion of N_P from triviality evidence for G_P."""
    ledger = ledger if ledger is not None else build_NP(p, n)
    has_t = any(h.get("op") == "product_with_T" for h in ledger.history)
    evidence = triviality_semidecide(p, max_cosets, max_degree)
    facts = {
        "presentation": p.to_json(),
        "n": n,
        "ledger_acyclic": ledger.is_acyclic(),
        "ledger_has_T_factor": has_t,
        "group_evidence": evidence.to_json(),
        "budgets": {"max_cosets": max_cosets, "max_degree": max_degree},
    }
    t_step = Step("R9", {"factor": "tom Dieck-Petrie surface", "gamma_lower": "0"})
    if evidence.status == "Trivial":
        steps = (
            Step("R1", {"gamma_lower": "0", "via": "R9 factor"}),
            Step("R2", {"group": "trivial", "gamma_finite": True}),
            Step("R6", {"affine_dim": n, "gamma_upper": str(n)}),
        )
        return Verdict(ZERO_RATE, GrowthRate.finite(n), "Finite", steps, "Trivial", facts)
    if evidence.status == "Nontrivial":
        steps = (
            Step("R2", {"group": "nontrivial", "evidence": evidence.method}),
            Step("R3", {"pi1": "G_P * G_P * G_P", "nontrivial_factors": 3, "conjugacy_growth": "inf"}),
            Step("R4", {"summands": ["D*M", "T"], "gamma": "inf"}),
            t_step,
        )
        return Verdict(INFINITY, INFINITY, "Infinite", steps, "Nontrivial", facts)
    steps = (Step("R1", {"gamma_lower": "0", "via": "R9 factor"}), t_step)
    return Verdict(ZERO_RATE, INFINITY, "Unknown", steps, "Unknown", facts)


def distinguish(p1: Presentation, p2: Presentation, n: int = 8, max_cosets: int = 100_000, max_degree: int = 5) -> tuple[str, Verdict, Verdict]:
    """Distinguished when one verdict is Finite and the other Infinite.

    NotDistinguished only says this invariant fails to separate the two.
    """
    v1 = np_verdict(p1, n, max_cosets, max_degree)
    v2 = np_verdict(p2, n, max_cosets, max_degree)
    pair = {v1.conclusion, v2.conclusion}
    if pair == {"Finite", "Infinite"}:
        return "Distinguished", v1, v2
    if "Unknown" in pair or "Interval" in pair:
        return "Unknown", v1, v2
    return "NotDistinguished", v1, v2


def cn_comparison(v: Verdict) -> str:
    """NotStandardCn when the verdict forces Gamma >= 0; C^n itself has Gamma = -oo."""
    return "NotStandardCn" if v.lower >= ZERO_RATE else "Unknown"


def apply_rule(v: Verdict, rule: str, facts: dict | None = None) -> Verdict:
    """Extend a verdict by one more rule application.

    R7 (standard sphere boundary) forces Gamma = -oo; R5 (subcritical handle)
    keeps the bounds. Other rules are applied only inside np_verdict.
    """
    facts = dict(facts or {})
    if rule == "R7":
        return Verdict(MINUS_INFINITY, MINUS_INFINITY, "Finite", v.derivation + (Step("R7", facts),), v.group_fact, v.facts)
    if rule == "R5":
        if facts.get("subcritical") is not True:
            raise ValueError("R5 needs a subcritical handle")
        return Verdict(v.lower, v.upper, v.conclusion, v.derivation + (Step("R5", facts),), v.group_fact, v.facts)
    raise ValueError(f"rule {rule} is not applied to an existing verdict")


def attach_subcritical(v: Verdict, h: Handle) -> Verdict:
    if not h.subcritical:
        raise ValueError("handle is not subcritical")
    return apply_rule(v, "R5", {"subcritical": True, "index": h.index, "half_dim": h.ambient_half_dim})


def disjoint_union(v1: Verdict, v2: Verdict) -> Verdict:
    lower, upper = max(v1.lower, v2.lower), max(v1.upper, v2.upper)
    facts = {"parts": [{"lower": v1.lower.to_json(), "upper": v1.upper.to_json()},
                       {"lower": v2.lower.to_json(), "upper": v2.upper.to_json()}]}
    group = "Nontrivial" if "Nontrivial" in (v1.group_fact, v2.group_fact) else (
        "Trivial" if v1.group_fact == v2.group_fact == "Trivial" else "Unknown")
    steps = (Step("R8", facts),)
    conclusion = _conclude(lower, upper)
    if conclusion == "Infinite":
        # the infinite part already carries its own R2/R3/R4 chain
        src = v1 if v1.lower == INFINITY else v2
        steps = src.derivation + steps
        group = "Nontrivial"
    return Verdict(lower, upper, conclusion, steps, group, facts)


# ---------------------------------------------------------------------------
# replay


def _evidence_holds(p: Presentation, evidence: dict) -> bool:
    """Re-check the stored group evidence directly."""
    method = evidence.get("method")
    if method == "abelianization":
        return not abelianization(p).is_trivial
    if method == "quotient":
        w = evidence["witness"]
        return PermutationWitness(int(w["degree"]), tuple(tuple(g) for g in w["images"])).verify(p)
    if method == "todd_coxeter":
        order = todd_coxeter(p, max(int(evidence.get("order", 1)) * 64, 1024)).order
        return order == int(evidence.get("order", order)) and ((order == 1) == (evidence.get("status") == "Trivial"))
    return method == "budget" and evidence.get("status") == "Unknown"


def replay(v: Verdict) -> bool:
    """Re-derive a verdict's bounds and conclusion from its rule list alone.

    Starts from the vacuous bounds [-oo, oo] and applies each step's effect;
    the group evidence stored in the facts is checked independently.
    """
    lower, upper = MINUS_INFINITY, INFINITY
    dstar_infinite = False
    t_nonnegative = False
    group = v.group_fact
    p = Presentation.from_json(v.facts["presentation"]) if "presentation" in v.facts else None
    evidence = v.facts.get("group_evidence")
    if p is not None and evidence is not None:
        if evidence.get("status") != group or not _evidence_holds(p, evidence):
            return False
    for step in v.derivation:
        f = step.facts
        if step.rule == "R9":
            t_nonnegative = True
        elif step.rule == "R1":
            if not v.facts.get("ledger_has_T_factor", False):
                return False
            lower = max(lower, ZERO_RATE)
        elif step.rule == "R2":
            if group == "Trivial":
                if f.get("gamma_finite") is not True:
                    return False
            elif group == "Nontrivial":
                pass  # finite Gamma is excluded; the value comes from R3/R4
            else:
                return False
        elif step.rule == "R3":
            if group != "Nontrivial" or int(f.get("nontrivial_factors", 0)) < 3:
                return False
            dstar_infinite = True
        elif step.rule == "R4":
            if not dstar_infinite:
                return False
        elif step.rule == "R6":
            if group != "Trivial":
                return False
            upper = min(upper, GrowthRate.finite(int(f["affine_dim"])))
        elif step.rule == "R5":
            if f.get("subcritical") is not True:
                return False
        elif step.rule == "R7":
            lower = upper = MINUS_INFINITY
        elif step.rule == "R8":
            parts = f["parts"]
            lower = max(GrowthRate.from_json(x["lower"]) for x in parts)
            upper = max(GrowthRate.from_json(x["upper"]) for x in parts)
        else:
            return False
    if dstar_infinite:
        cited = {s.rule for s in v.derivation}
        if not ({"R4", "R9"} <= cited and t_nonnegative):
            return False
        lower = upper = INFINITY
    if (lower, upper) != (v.lower, v.upper):
        return False
    expected = "Finite" if (lower, upper) == (MINUS_INFINITY, MINUS_INFINITY) else _conclude(lower, upper)
    return expected == v.conclusion
