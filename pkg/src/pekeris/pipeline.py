"""The concrete construction: S-state operator in (r1, r2, r12) to perimetric form."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .diffop import DiffOp, change_vars_linear, clear, coefficient_universe, gauge_conjugate
from .exact import MultiPoly

R_VARS = ("r1", "r2", "r12")
P_VARS = ("u", "v", "w")

# u = eps(r2 + r12 - r1), v = eps(r1 + r12 - r2), w = 2 eps(r1 + r2 - r12)
PERIMETRIC_FORWARD = {
    "u": {"r1": (-1, 1), "r2": (1, 1), "r12": (1, 1)},
    "v": {"r1": (1, 1), "r2": (-1, 1), "r12": (1, 1)},
    "w": {"r1": (2, 1), "r2": (2, 1), "r12": (-2, 1)},
}
# r1 = (2v + w)/(4 eps), r2 = (2u + w)/(4 eps), r12 = (u + v)/(2 eps)
PERIMETRIC_INVERSE = {
    "r1": {"v": (Fraction(1, 2), -1), "w": (Fraction(1, 4), -1)},
    "r2": {"u": (Fraction(1, 2), -1), "w": (Fraction(1, 4), -1)},
    "r12": {"u": (Fraction(1, 2), -1), "v": (Fraction(1, 2), -1)},
}


@dataclass(frozen=True)
class PipelineConfig:
    interaction: bool = True
    keep_symbolic_z: bool = True

    def __post_init__(self):
        if not self.keep_symbolic_z:
            raise ValueError("Z stays symbolic throughout the derivation")


def hylleraas_operator(config: PipelineConfig = PipelineConfig()) -> DiffOp:
    """S-state two-electron operator in (r1, r2, r12), multiplied through by r1*r2*r12."""
    U = coefficient_universe(R_VARS)
    r1, r2, r12 = (MultiPoly.var(x, U) for x in R_VARS)
    Z, E = MultiPoly.var("Z", U), MultiPoly.var("E", U)
    kappa = 1 if config.interaction else 0
    prod = r1 * r2 * r12
    terms = {
        (2, 0, 0): prod,
        (0, 2, 0): prod,
        (0, 0, 2): 2 * prod,
        (1, 0, 0): 2 * r2 * r12,
        (0, 1, 0): 2 * r1 * r12,
        (0, 0, 1): 4 * r1 * r2,
        (1, 0, 1): r2 * (r1**2 - r2**2 + r12**2),
        (0, 1, 1): r1 * (r2**2 - r1**2 + r12**2),
        (0, 0, 0): 2 * (E * prod + Z * r2 * r12 + Z * r1 * r12 - kappa * r1 * r2),
    }
    return DiffOp(R_VARS, terms)


def perimetric_gauge() -> MultiPoly:
    """The exponent -(u + v + w)/2 of the asymptotic factor."""
    U = coefficient_universe(P_VARS)
    return sum((MultiPoly.var(x, U) for x in P_VARS), MultiPoly.zero(U)) * Fraction(-1, 2)


def perimetric_stages(config: PipelineConfig = PipelineConfig()) -> dict[str, DiffOp]:
    """Every intermediate operator of the derivation, in order."""
    stages = {"hylleraas": hylleraas_operator(config)}
    stages["changed"] = change_vars_linear(stages["hylleraas"], PERIMETRIC_FORWARD, PERIMETRIC_INVERSE, P_VARS)
    stages["gauged"] = gauge_conjugate(stages["changed"], perimetric_gauge())
    U = stages["gauged"].vars
    stages["substituted"] = stages["gauged"].substitute({"E": -MultiPoly.var("eps", U) ** 2})
    stages["perimetric"] = clear(stages["substituted"])
    return stages


def perimetric_operator(config: PipelineConfig = PipelineConfig()) -> DiffOp:
    """Cleared operator for F(u, v, w), where psi = exp(-(u+v+w)/2) F."""
    return perimetric_stages(config)["perimetric"]


@dataclass(frozen=True)
class EulerReport:
    ok: bool
    violations: tuple = ()


def euler_check(op: DiffOp) -> EulerReport:
    """Check that every x^a d_x^i term has a >= i, variable by variable.

    This is the condition under which each derivative can be absorbed into
    Euler operators x d/dx.
    """
    idx = [op.vars.index(v) for v in op.diff_vars]
    bad = []
    for k, c in op.sorted_terms():
        for e, q in c.terms.items():
            deficit = {v: k[j] - e[idx[j]] for j, v in enumerate(op.diff_vars) if e[idx[j]] < k[j]}
            if deficit:
                bad.append({"derivativeIndex": k, "monomial": e, "coefficient": q, "deficit": deficit})
    return EulerReport(not bad, tuple(bad))
