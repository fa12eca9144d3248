"""From a polynomial-coefficient operator to a recurrence on Laguerre coefficients.

Write ``F = sum A(l, m, n) L_l(u) L_m(v) L_n(w)``.  A differential operator
``P`` acting on ``F`` gives another Laguerre series whose coefficients are
``Phi(P) A`` for a finite-stencil sequence operator ``Phi(P)``.  ``Phi`` is
multiplicative, so it suffices to know it on generators, per variable
(``k`` is the Laguerre index of that variable)::

    x            (XA)(k) = -k A(k-1) + (2k+1) A(k) - (k+1) A(k+1)
    theta = x d  (TA)(k) =  k A(k) - (k+1) A(k+1)
    d x d        (DA)(k) = -(k+1) A(k+1)

The last one follows from ``x L'' + (1 - x) L' = -k L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, gcd, lcm
from typing import Mapping

from .diffop import DiffOp
from .exact import MultiPoly, Rational

INDEX_VARS = ("l", "m", "n")
REC_VARS = ("l", "m", "n", "Z", "eps")

Shift = tuple[int, int, int]


class PreconditionError(ValueError):
    """The operator cannot be transferred to a banded recurrence."""


class DerivationMismatch(RuntimeError):
    """The derived recurrence does not have the expected shape."""

    def __init__(self, message: str, details: dict):
        super().__init__(f"{message}: {details}")
        self.details = details


def laguerre_eval(n: int, x: Rational) -> Fraction:
    """Exact ``L_n(x) = sum_k C(n, k) (-x)^k / k!``."""
    if n < 0:
        raise ValueError("Laguerre index must be non-negative")
    x = Fraction(x)
    return sum((Fraction(comb(n, k) * (-1) ** k, factorial(k)) * x**k for k in range(n + 1)), Fraction(0))


@lru_cache(maxsize=None)
def laguerre_poly(n: int, var: str, vars: tuple[str, ...]) -> MultiPoly:
    """``L_n`` as an exact polynomial in ``var`` over universe ``vars``."""
    i = vars.index(var)
    terms = {}
    for k in range(n + 1):
        e = [0] * len(vars)
        e[i] = k
        terms[tuple(e)] = Fraction(comb(n, k) * (-1) ** k, factorial(k))
    return MultiPoly(vars, terms)


def laguerre_resum(A: Mapping[Shift, object], vars: tuple[str, ...]) -> MultiPoly:
    """``sum A(l, m, n) L_l(u) L_m(v) L_n(w)`` as a polynomial over ``vars``.

    Entries may be rationals or polynomials in ``Z`` and ``eps``.
    """
    total = MultiPoly.zero(vars)
    for (l, m, n), a in A.items():
        if isinstance(a, MultiPoly):
            a = a.lift(vars)
        basis = laguerre_poly(l, "u", vars) * laguerre_poly(m, "v", vars) * laguerre_poly(n, "w", vars)
        total = total + basis * a
    return total


class SeqOp:
    """Sequence operator ``(S A)(p) = sum_s c_s(p) A(p + s)`` on arrays over N0^3.

    Coefficients are polynomials in ``(l, m, n, Z, eps)``; the anchor ``p``
    is ``(l, m, n)``.  Entries at negative indices are taken to be zero.
    """

    __slots__ = ("stencil",)

    def __init__(self, stencil: Mapping[Shift, MultiPoly]):
        clean = {}
        for s, c in stencil.items():
            if c.vars != REC_VARS:
                c = c.lift(REC_VARS)
            if c:
                clean[tuple(s)] = c
        self.stencil = clean

    @classmethod
    def identity(cls) -> SeqOp:
        return cls({(0, 0, 0): MultiPoly.const(1, REC_VARS)})

    @classmethod
    def scalar(cls, c: MultiPoly) -> SeqOp:
        return cls({(0, 0, 0): c})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SeqOp) and self.stencil == other.stencil

    def __len__(self) -> int:
        return len(self.stencil)

    def __add__(self, other: SeqOp) -> SeqOp:
        out = dict(self.stencil)
        for s, c in other.stencil.items():
            out[s] = out[s] + c if s in out else c
        return SeqOp(out)

    def __neg__(self) -> SeqOp:
        return SeqOp({s: -c for s, c in self.stencil.items()})

    def __sub__(self, other: SeqOp) -> SeqOp:
        return self + (-other)

    def __mul__(self, other: Rational | MultiPoly) -> SeqOp:
        return SeqOp({s: c * other for s, c in self.stencil.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: SeqOp) -> SeqOp:
        """Composition ``self o other``."""
        out: dict[Shift, MultiPoly] = {}
        for s, p in self.stencil.items():
            for t, q in other.stencil.items():
                r = (s[0] + t[0], s[1] + t[1], s[2] + t[2])
                term = p * _shift_poly(q, s)
                out[r] = out[r] + term if r in out else term
        return SeqOp(out)

    def shifts(self) -> list[Shift]:
        return sorted(self.stencil)

    def degree_report(self) -> dict:
        cs = self.stencil.values()
        return {
            "terms": len(self.stencil),
            "lmnDegree": max((c.total_degree(INDEX_VARS) for c in cs), default=-1),
            "zDegree": max((c.degree("Z") for c in cs), default=-1),
            "epsDegree": max((c.degree("eps") for c in cs), default=-1),
        }

    def apply(self, A: Mapping[Shift, Rational], bindings: Mapping[str, Rational] | None = None) -> dict:
        """Apply to a finitely supported array.

        With ``bindings`` for ``Z`` and ``eps`` the result is rational;
        without, entries are polynomials in ``(Z, eps)`` over ``REC_VARS``.
        Only nonzero entries are returned.
        """
        out: dict = {}
        for p, a in A.items():
            if not a:
                continue
            # target anchor q receives c_s(q) * A(q + s) with q + s == p
            for s, c in self.stencil.items():
                q = (p[0] - s[0], p[1] - s[1], p[2] - s[2])
                if min(q) < 0:
                    continue
                point = {"l": q[0], "m": q[1], "n": q[2]}
                if bindings is not None:
                    point.update(bindings)
                    val = c.evaluate(point) * a
                else:
                    val = c.substitute(point) * a
                if q in out:
                    out[q] = out[q] + val
                else:
                    out[q] = val
        return {q: v for q, v in out.items() if v}

    def render(self) -> str:
        lines = []
        for s in self.shifts():
            lines.append(f"A(l{s[0]:+d}, m{s[1]:+d}, n{s[2]:+d}) * ({self.stencil[s].render()})")
        return "\n".join(lines)

    def to_json(self) -> list:
        return [
            {
                "shift": list(s),
                "coeff": [
                    {"exponents": t["exponents"], "coefficient": t["coefficient"]}
                    for t in self.stencil[s].to_json()
                ],
            }
            for s in self.shifts()
        ]

    @classmethod
    def from_json(cls, data: list) -> SeqOp:
        return cls({tuple(e["shift"]): MultiPoly.from_json(REC_VARS, e["coeff"]) for e in data})


@lru_cache(maxsize=4096)
def _shift_poly(q: MultiPoly, s: Shift) -> MultiPoly:
    if s == (0, 0, 0):
        return q
    one = MultiPoly.const(1, REC_VARS)
    binds = {v: MultiPoly.var(v, REC_VARS) + one * k for v, k in zip(INDEX_VARS, s) if k}
    return q.substitute(binds)


def _unit(axis: int, k: int) -> Shift:
    return tuple(k if i == axis else 0 for i in range(3))


@lru_cache(maxsize=None)
def x_op(axis: int) -> SeqOp:
    """Multiplication by the continuous variable along ``axis``."""
    k = MultiPoly.var(INDEX_VARS[axis], REC_VARS)
    return SeqOp({_unit(axis, -1): -k, _unit(axis, 0): 2 * k + 1, _unit(axis, 1): -(k + 1)})


@lru_cache(maxsize=None)
def theta_op(axis: int) -> SeqOp:
    """The Euler operator ``x d/dx`` along ``axis``."""
    k = MultiPoly.var(INDEX_VARS[axis], REC_VARS)
    return SeqOp({_unit(axis, 0): k, _unit(axis, 1): -(k + 1)})


@lru_cache(maxsize=None)
def dxd_op(axis: int) -> SeqOp:
    """``d/dx x d/dx`` along ``axis``."""
    k = MultiPoly.var(INDEX_VARS[axis], REC_VARS)
    return SeqOp({_unit(axis, 1): -(k + 1)})


@lru_cache(maxsize=None)
def _factor(axis: int, power: int, order: int, dxd: bool) -> SeqOp:
    # x^power * d^order = x^(power-order) * theta(theta-1)...(theta-order+1)
    # or, when dxd, the pair x d^2 + d
    if dxd:
        return dxd_op(axis)
    op = SeqOp.identity()
    for _ in range(power - order):
        op = op @ x_op(axis)
    for j in range(order):
        op = op @ (theta_op(axis) - SeqOp.identity() * j)
    return op


@dataclass(frozen=True)
class _Piece:
    coeff: Fraction
    params: tuple[int, ...]  # exponents of (Z, eps)
    powers: tuple[int, int, int]
    orders: tuple[int, int, int]
    dxd: tuple[bool, bool, bool]


def _decompose(op: DiffOp) -> tuple[list[_Piece], list[dict]]:
    """Split ``op`` into per-variable generator products; report leftovers."""
    if op.diff_vars != ("u", "v", "w"):
        raise PreconditionError(f"expected an operator in (u, v, w), got {op.diff_vars}")
    if op.vars.count("E") and any(e[op.vars.index("E")] for c in op.terms.values() for e in c.terms):
        raise PreconditionError("energy E must be eliminated before transfer")
    iv = [op.vars.index(v) for v in op.diff_vars]
    ip = [op.vars.index(v) for v in ("Z", "eps")]
    pieces: list[_Piece] = []
    # bare first derivatives created by rewriting x d^2 as (d x d) - d
    residual: dict[tuple, Fraction] = {}
    for k, c in op.terms.items():
        for e, q in c.terms.items():
            pw = tuple(e[i] for i in iv)
            params = tuple(e[i] for i in ip)
            dxd = [False] * 3
            for a in range(3):
                if k[a] == 2 and pw[a] == 1:
                    dxd[a] = True
                    nk = tuple(1 if b == a else k[b] for b in range(3))
                    npw = tuple(0 if b == a else pw[b] for b in range(3))
                    key = (nk, npw, params)
                    residual[key] = residual.get(key, Fraction(0)) - q
            if not all(dxd[a] or pw[a] >= k[a] for a in range(3)):
                key = (k, pw, params)
                residual[key] = residual.get(key, Fraction(0)) + q
                continue
            pieces.append(_Piece(q, params, pw, k, tuple(dxd)))
    leftovers = []
    for (k, pw, params), q in residual.items():
        if not q:
            continue
        if all(pw[a] >= k[a] for a in range(3)):
            pieces.append(_Piece(q, params, pw, k, (False, False, False)))
        else:
            leftovers.append({"derivativeIndex": k, "monomial": pw, "params": params, "coefficient": q})
    return pieces, leftovers


def laguerre_check(op: DiffOp) -> list[dict]:
    """Terms that obstruct a banded transfer (empty list means admissible).

    Weaker than the strict Euler condition: a term ``x d_x^2`` with a single
    power of ``x`` is accepted when it pairs with a matching bare ``d_x`` term.
    """
    return _decompose(op)[1]


def phi_transfer(op: DiffOp) -> SeqOp:
    """The sequence operator ``Phi(op)`` acting on Laguerre coefficients."""
    pieces, leftovers = _decompose(op)
    if leftovers:
        raise PreconditionError(f"operator terms without a banded Laguerre image: {leftovers}")
    z = MultiPoly.var("Z", REC_VARS)
    eps = MultiPoly.var("eps", REC_VARS)
    grouped: dict[tuple, MultiPoly] = {}
    for pc in pieces:
        key = (pc.powers, pc.orders, pc.dxd)
        scal = z ** pc.params[0] * eps ** pc.params[1] * pc.coeff
        grouped[key] = grouped[key] + scal if key in grouped else scal
    total = SeqOp({})
    for (powers, orders, dxd), scal in sorted(grouped.items()):
        if not scal:
            continue
        term = _factor(0, powers[0], orders[0], dxd[0]) @ _factor(1, powers[1], orders[1], dxd[1])
        term = term @ _factor(2, powers[2], orders[2], dxd[2])
        total = total + term * scal
    return total


class Recurrence(SeqOp):
    """A normalized sequence operator: coprime integer coefficients, fixed sign."""

    __slots__ = ()

    @classmethod
    def normalized(cls, op: SeqOp) -> Recurrence:
        if not op.stencil:
            raise DerivationMismatch("empty recurrence", {"terms": 0})
        qs = [q for c in op.stencil.values() for q in c.terms.values()]
        den = lcm(*(q.denominator for q in qs))
        num = gcd(*(int(q * den) for q in qs))
        scale = Fraction(den, num)
        first = op.stencil[min(op.stencil)]
        if first.leading_term()[1] < 0:
            scale = -scale
        return cls({s: c * scale for s, c in op.stencil.items()})


EXPECTED_TERMS = 33
EXPECTED_LMN_DEGREE = 3


def validate(rec: SeqOp, expected_terms: int = EXPECTED_TERMS) -> dict:
    report = rec.degree_report()
    problems = {}
    if report["terms"] != expected_terms:
        problems["terms"] = report["terms"]
    if report["lmnDegree"] != EXPECTED_LMN_DEGREE:
        problems["lmnDegree"] = report["lmnDegree"]
    if report["zDegree"] > 1:
        problems["zDegree"] = report["zDegree"]
    if report["epsDegree"] > 1:
        problems["epsDegree"] = report["epsDegree"]
    if problems:
        raise DerivationMismatch("recurrence has unexpected shape", {**report, "offending": problems})
    return report


def pekeris_recurrence(op: DiffOp, check: bool = True) -> Recurrence:
    """Transfer and normalize; with ``check``, insist on the 33-term shape."""
    rec = Recurrence.normalized(phi_transfer(op))
    if check:
        validate(rec)
    return rec
