"""Linear differential operators with polynomial coefficients.

An operator is ``eps**eps_valuation * sum_alpha c_alpha * d^alpha`` where
``alpha`` is a multi-index over ``diff_vars`` and each ``c_alpha`` is a
:class:`~pekeris.exact.MultiPoly` over ``diff_vars + (Z, eps, E)``.  Keeping
negative powers of eps in a single integer lets every coefficient stay a
true polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, gcd, lcm
from typing import Iterable, Mapping

from .exact import MultiPoly, Rational, UniverseError, universe

PARAMETERS = ("Z", "eps", "E")
MAX_ORDER = 2


class TransformError(ValueError):
    """Forward and inverse coordinate maps are not mutual inverses."""


class UnsupportedError(ValueError):
    """Gauge exponent is not linear in the differentiated variables."""


def coefficient_universe(diff_vars: Iterable[str]) -> tuple[str, ...]:
    return universe(*diff_vars, *PARAMETERS)


class DiffOp:
    """Immutable linear differential operator."""

    __slots__ = ("diff_vars", "terms", "eps_valuation", "vars")

    def __init__(self, diff_vars: Iterable[str], terms: Mapping[tuple[int, ...], MultiPoly], eps_valuation: int = 0):
        self.diff_vars = tuple(diff_vars)
        self.vars = coefficient_universe(self.diff_vars)
        clean = {}
        for idx, c in terms.items():
            idx = tuple(idx)
            if len(idx) != len(self.diff_vars):
                raise ValueError(f"derivative index {idx} does not match {self.diff_vars}")
            if sum(idx) > MAX_ORDER:
                raise ValueError(f"derivative order {sum(idx)} exceeds {MAX_ORDER}")
            if c.vars != self.vars:
                raise UniverseError(f"coefficient universe {c.vars} != {self.vars}")
            if c:
                clean[idx] = c
        self.terms = clean
        self.eps_valuation = eps_valuation

    @classmethod
    def d(cls, var: str, diff_vars: Iterable[str], order: int = 1) -> DiffOp:
        """The plain derivative ``d^order / d var^order``."""
        diff_vars = tuple(diff_vars)
        idx = tuple(order if v == var else 0 for v in diff_vars)
        return cls(diff_vars, {idx: MultiPoly.const(1, coefficient_universe(diff_vars))})

    @classmethod
    def mul(cls, p: MultiPoly, diff_vars: Iterable[str]) -> DiffOp:
        """Multiplication by the polynomial ``p``."""
        diff_vars = tuple(diff_vars)
        return cls(diff_vars, {(0,) * len(diff_vars): p})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return (self.diff_vars, self.terms, self.eps_valuation) == (other.diff_vars, other.terms, other.eps_valuation)

    def __hash__(self) -> int:
        return hash((self.diff_vars, frozenset(self.terms.items()), self.eps_valuation))

    def __add__(self, other: DiffOp) -> DiffOp:
        if self.diff_vars != other.diff_vars:
            raise UniverseError("operators act on different variables")
        lo = min(self.eps_valuation, other.eps_valuation)
        a, b = self._shifted(lo), other._shifted(lo)
        out = dict(a)
        for k, c in b.items():
            out[k] = out[k] + c if k in out else c
        return DiffOp(self.diff_vars, out, lo)

    def __neg__(self) -> DiffOp:
        return DiffOp(self.diff_vars, {k: -c for k, c in self.terms.items()}, self.eps_valuation)

    def __sub__(self, other: DiffOp) -> DiffOp:
        return self + (-other)

    def __rmul__(self, scalar: Rational | MultiPoly) -> DiffOp:
        return DiffOp(self.diff_vars, {k: c * scalar for k, c in self.terms.items()}, self.eps_valuation)

    def _shifted(self, target: int) -> dict:
        shift = self.eps_valuation - target
        if not shift:
            return self.terms
        epsk = MultiPoly.var("eps", self.vars) ** shift
        return {k: c * epsk for k, c in self.terms.items()}

    @property
    def order(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def map_coefficients(self, fn) -> DiffOp:
        return DiffOp(self.diff_vars, {k: fn(c) for k, c in self.terms.items()}, self.eps_valuation)

    def substitute(self, bindings: Mapping[str, MultiPoly | Rational]) -> DiffOp:
        """Substitute parameters (e.g. ``E -> -eps^2``) in every coefficient."""
        bad = [v for v in bindings if v in self.diff_vars]
        if bad:
            raise ValueError(f"cannot substitute differentiated variables {bad}")
        return self.map_coefficients(lambda c: c.substitute(bindings))

    def swap(self, a: str, b: str) -> DiffOp:
        """Exchange two differentiated variables (coefficients and derivatives)."""
        ia, ib = self.diff_vars.index(a), self.diff_vars.index(b)
        sa, sb = MultiPoly.var(a, self.vars), MultiPoly.var(b, self.vars)
        out = {}
        for k, c in self.terms.items():
            nk = list(k)
            nk[ia], nk[ib] = k[ib], k[ia]
            out[tuple(nk)] = c.substitute({a: sb, b: sa})
        return DiffOp(self.diff_vars, out, self.eps_valuation)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], MultiPoly]]:
        """Terms ordered by descending derivative order, then index."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def render(self) -> str:
        lines = []
        if self.eps_valuation:
            lines.append(f"eps^{self.eps_valuation} * [")
        for k, c in self.sorted_terms():
            d = "*".join(
                (f"D[{v}]" if e == 1 else f"D[{v}]^{e}") for v, e in zip(self.diff_vars, k) if e
            ) or "1"
            lines.append(f"  ({c.render()}) * {d}")
        if self.eps_valuation:
            lines.append("]")
        return "\n".join(lines) if lines else "0"

    def to_json(self) -> dict:
        return {
            "diffVars": list(self.diff_vars),
            "coefficientVars": list(self.vars),
            "epsValuation": self.eps_valuation,
            "terms": [
                {"derivativeIndex": list(k), "coefficient": c.render(), "monomials": c.to_json()}
                for k, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> DiffOp:
        diff_vars = tuple(data["diffVars"])
        vars = coefficient_universe(diff_vars)
        terms = {tuple(t["derivativeIndex"]): MultiPoly.from_json(vars, t["monomials"]) for t in data["terms"]}
        return cls(diff_vars, terms, data["epsValuation"])


def _derive(f: MultiPoly, var_idx: Iterable[tuple[str, int]]) -> MultiPoly:
    for v, k in var_idx:
        for _ in range(k):
            f = f.partial(v)
    return f


def apply_to_poly(op: DiffOp, f: MultiPoly) -> MultiPoly:
    """``sum_alpha c_alpha * d^alpha f``.

    The operator's eps valuation is an implicit overall factor and is *not*
    applied; callers working at a numeric eps multiply by ``eps**op.eps_valuation``.
    """
    if f.vars != op.vars:
        f = f.lift(op.vars)
    result = MultiPoly.zero(op.vars)
    for k, c in op.terms.items():
        result = result + c * _derive(f, zip(op.diff_vars, k))
    return result


def compose(p: DiffOp, q: DiffOp) -> DiffOp:
    """The operator product ``p o q`` (Leibniz rule)."""
    if p.diff_vars != q.diff_vars:
        raise UniverseError("operators act on different variables")
    n = len(p.diff_vars)
    out: dict[tuple[int, ...], MultiPoly] = {}
    for a, pc in p.terms.items():
        for b, qc in q.terms.items():
            # d^a (qc * d^b) = sum_{g <= a} C(a, g) (d^g qc) d^(a - g + b)
            for g in _sub_indices(a):
                weight = 1
                for ai, gi in zip(a, g):
                    weight *= comb(ai, gi)
                dq = _derive(qc, zip(p.diff_vars, g))
                if not dq:
                    continue
                k = tuple(a[i] - g[i] + b[i] for i in range(n))
                term = pc * dq * weight
                out[k] = out[k] + term if k in out else term
    return DiffOp(p.diff_vars, out, p.eps_valuation + q.eps_valuation)


def _sub_indices(a: tuple[int, ...]):
    if not a:
        yield ()
        return
    for g0 in range(a[0] + 1):
        for rest in _sub_indices(a[1:]):
            yield (g0,) + rest


# -- eps-Laurent bookkeeping ----------------------------------------------

class _Laurent:
    """``poly * eps**val`` with eps factored out of ``poly`` as far as possible."""

    __slots__ = ("poly", "val")

    def __init__(self, poly: MultiPoly, val: int = 0):
        if poly and "eps" in poly.vars:
            i = poly.vars.index("eps")
            k = min(e[i] for e in poly.terms)
            if k:
                out = {}
                for e, c in poly.terms.items():
                    ne = list(e)
                    ne[i] -= k
                    out[tuple(ne)] = c
                poly = MultiPoly._raw(poly.vars, out)
                val += k
        self.poly = poly
        self.val = val if poly else 0

    def lift_to(self, target: int) -> MultiPoly:
        if not self.poly:
            return self.poly
        if self.val < target:
            raise ValueError("cannot lower below the eps valuation")
        return self.poly * MultiPoly.var("eps", self.poly.vars) ** (self.val - target)

    def __add__(self, other: _Laurent) -> _Laurent:
        if not self.poly:
            return other
        if not other.poly:
            return self
        lo = min(self.val, other.val)
        return _Laurent(self.lift_to(lo) + other.lift_to(lo), lo)

    def __mul__(self, other: _Laurent) -> _Laurent:
        return _Laurent(self.poly * other.poly, self.val + other.val)


LinearMap = Mapping[str, Mapping[str, tuple[Rational, int]]]
"""``{target: {source: (rational, eps_power)}}``: target = sum rational*eps^k*source."""


def _check_inverse(forward: LinearMap, inverse: LinearMap, old: tuple[str, ...], new: tuple[str, ...]) -> None:
    # (forward o inverse) must be the identity on new vars and vice versa
    for outer, inner, src, dst in ((forward, inverse, old, new), (inverse, forward, new, old)):
        for t in dst:
            for s in dst:
                acc: dict[int, Fraction] = {}
                for mid in src:
                    a = outer.get(t, {}).get(mid)
                    b = inner.get(mid, {}).get(s)
                    if a is None or b is None:
                        continue
                    k = a[1] + b[1]
                    acc[k] = acc.get(k, Fraction(0)) + Fraction(a[0]) * Fraction(b[0])
                acc = {k: c for k, c in acc.items() if c}
                want = {0: Fraction(1)} if t == s else {}
                if acc != want:
                    raise TransformError(f"maps are not mutual inverses at ({t}, {s}): {acc}")


def change_vars_linear(op: DiffOp, forward: LinearMap, inverse: LinearMap, new_vars: Iterable[str]) -> DiffOp:
    """Rewrite ``op`` in new variables related linearly to the old ones.

    ``forward`` expresses each new variable through the old ones and
    ``inverse`` each old variable through the new ones; both may carry
    integer powers of eps.  Chain rule: ``d/d old_i = sum_j (d new_j / d old_i) d/d new_j``.
    """
    new_vars = tuple(new_vars)
    old_vars = op.diff_vars
    _check_inverse(forward, inverse, old_vars, new_vars)
    nu = coefficient_universe(new_vars)

    def scalar(c: Rational, k: int) -> _Laurent:
        return _Laurent(MultiPoly.const(c, nu), k)

    # images of old coordinates and old derivatives, as eps-Laurent objects
    coord_image = {}
    for o in old_vars:
        acc = _Laurent(MultiPoly.zero(nu))
        for nv, (c, k) in inverse[o].items():
            acc = acc + _Laurent(MultiPoly.var(nv, nu) * c, k)
        coord_image[o] = acc
    deriv_image: dict[str, dict[tuple[int, ...], _Laurent]] = {}
    for i, o in enumerate(old_vars):
        comb_ = {}
        for j, nv in enumerate(new_vars):
            entry = forward[nv].get(o)
            if entry is not None and entry[0]:
                idx = tuple(int(jj == j) for jj in range(len(new_vars)))
                comb_[idx] = scalar(*entry)
        deriv_image[o] = comb_

    def dmul(x: dict, y: dict) -> dict:
        out = {}
        for ka, va in x.items():
            for kb, vb in y.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                p = va * vb
                out[k] = out[k] + p if k in out else p
        return out

    pass_through = {v: MultiPoly.var(v, nu) for v in PARAMETERS}
    one = {(0,) * len(new_vars): scalar(1, 0)}
    result: dict[tuple[int, ...], _Laurent] = {}
    for alpha, coeff in op.terms.items():
        d = one
        for o, k in zip(old_vars, alpha):
            for _ in range(k):
                d = dmul(d, deriv_image[o])
        # coefficient: substitute old coordinates monomial by monomial
        c_new = _Laurent(MultiPoly.zero(nu))
        split = coeff.coefficients_in(old_vars)
        for exps, rest in split.items():
            piece = _Laurent(rest.substitute(pass_through, nu) if rest.vars != nu else rest)
            for o, k in zip(old_vars, exps):
                for _ in range(k):
                    piece = piece * coord_image[o]
            c_new = c_new + piece
        for k, dv in d.items():
            term = c_new * dv
            result[k] = result[k] + term if k in result else term
    result = {k: v for k, v in result.items() if v.poly}
    base = min((v.val for v in result.values()), default=0)
    terms = {k: v.lift_to(base) for k, v in result.items()}
    return DiffOp(new_vars, terms, op.eps_valuation + base)


def gauge_conjugate(op: DiffOp, exponent: MultiPoly) -> DiffOp:
    """Return ``op'`` with ``exp(g) * op'(F) == op(exp(g) * F)``.

    Every ``d/dx`` becomes ``d/dx + dg/dx``; ``g`` must be linear in the
    differentiated variables (its slopes may involve parameters).
    """
    if exponent.vars != op.vars:
        exponent = exponent.lift(op.vars)
    if exponent.total_degree(op.diff_vars) > 1:
        raise UnsupportedError("gauge exponent must be linear in the differentiated variables")
    slopes = [exponent.partial(v) for v in op.diff_vars]
    for s in slopes:
        if s.total_degree(op.diff_vars) > 0:
            raise UnsupportedError("gauge slope depends on a differentiated variable")
    n = len(op.diff_vars)
    out: dict[tuple[int, ...], MultiPoly] = {}
    for alpha, coeff in op.terms.items():
        # prod_i (d_i + s_i)^alpha_i, expanded binomially
        for beta in _sub_indices(alpha):
            w = coeff
            for i in range(n):
                k = alpha[i] - beta[i]
                if k:
                    w = w * (slopes[i] ** k) * comb(alpha[i], beta[i])
            if w:
                out[beta] = out[beta] + w if beta in out else w
    return DiffOp(op.diff_vars, out, op.eps_valuation)


def clear(op: DiffOp) -> DiffOp:
    """Scale ``op`` so all coefficients are coprime integer polynomials.

    Removes rational denominators, the common integer content and the
    common power of eps; the eps valuation is reset to 0.  The sign makes
    the graded-lex leading coefficient of the highest derivative term positive.
    """
    if not op.terms:
        return DiffOp(op.diff_vars, {}, 0)
    coeffs = [c for c in op.terms.values()]
    den = lcm(*(q.denominator for c in coeffs for q in c.terms.values()))
    num = gcd(*(int(q * den) for c in coeffs for q in c.terms.values()))
    scale = Fraction(den, num)
    i = op.vars.index("eps")
    kmin = min(e[i] for c in coeffs for e in c.terms)
    top = op.sorted_terms()[0][1]
    if top.leading_term()[1] < 0:
        scale = -scale
    out = {}
    for k, c in op.terms.items():
        t = {}
        for e, q in c.terms.items():
            ne = list(e)
            ne[i] -= kmin
            t[tuple(ne)] = q * scale
        out[k] = MultiPoly(op.vars, t)
    return DiffOp(op.diff_vars, out, 0)
