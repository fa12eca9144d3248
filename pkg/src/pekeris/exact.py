"""Exact multivariate polynomials with rational coefficients.

A polynomial lives in a *universe*: an ordered subset of the closed variable
set :data:`VARIABLES`.  Terms are stored as a dict mapping exponent tuples
(one entry per universe variable) to nonzero :class:`fractions.Fraction`
coefficients; the zero polynomial is the empty dict.

Polynomials over different universes never mix implicitly.  Use
:meth:`MultiPoly.lift` to move a polynomial into a larger universe.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Union

VARIABLES = ("r1", "r2", "r12", "u", "v", "w", "l", "m", "n", "Z", "eps", "E")
_RANK = {name: i for i, name in enumerate(VARIABLES)}

Rational = Union[int, Fraction]


class UniverseError(ValueError):
    """Polynomials over different variable universes were combined."""


class EvaluationError(ValueError):
    """A variable was left unbound during evaluation."""


def universe(*names: str) -> tuple[str, ...]:
    """Return ``names`` as a canonical universe (deduplicated, globally ordered)."""
    for name in names:
        if name not in _RANK:
            raise UniverseError(f"unknown variable {name!r}")
    return tuple(sorted(set(names), key=_RANK.__getitem__))


def _graded_key(exps: tuple[int, ...]) -> tuple:
    return (sum(exps), exps)


class MultiPoly:
    """Immutable sparse polynomial over a fixed variable universe."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Iterable[str], terms: Mapping[tuple[int, ...], Rational] | None = None):
        vars = tuple(vars)
        if vars != universe(*vars) or len(set(vars)) != len(vars):
            raise UniverseError(f"universe {vars} is not in canonical order")
        self.vars = vars
        clean = {}
        for exps, c in (terms or {}).items():
            if len(exps) != len(vars):
                raise UniverseError(f"exponent {exps} does not match universe {vars}")
            if c:
                clean[tuple(exps)] = Fraction(c)
        self.terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, vars: Iterable[str]) -> MultiPoly:
        return cls(vars)

    @classmethod
    def const(cls, value: Rational, vars: Iterable[str]) -> MultiPoly:
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): value})

    @classmethod
    def var(cls, name: str, vars: Iterable[str]) -> MultiPoly:
        vars = tuple(vars)
        if name not in vars:
            raise UniverseError(f"{name!r} is not in universe {vars}")
        exps = tuple(int(v == name) for v in vars)
        return cls(vars, {exps: 1})

    @classmethod
    def _raw(cls, vars: tuple[str, ...], terms: dict) -> MultiPoly:
        # trusted fast path: terms already canonical
        obj = cls.__new__(cls)
        obj.vars = vars
        obj.terms = terms
        obj._hash = None
        return obj

    # -- basic protocol ---------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.vars)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"MultiPoly({self.render()!r}, vars={self.vars})"

    def __str__(self) -> str:
        return self.render()

    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            if other.vars != self.vars:
                raise UniverseError(f"universe mismatch: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(other, self.vars)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other) -> MultiPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> MultiPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> MultiPoly:
        return (-self) + other

    def __mul__(self, other) -> MultiPoly:
        if isinstance(other, (int, Fraction)):
            if not other:
                return MultiPoly._raw(self.vars, {})
            return MultiPoly._raw(self.vars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MultiPoly._raw(self.vars, out)

    __rmul__ = __mul__

    def __truediv__(self, other: Rational) -> MultiPoly:
        if not isinstance(other, (int, Fraction)) or not other:
            raise ZeroDivisionError("polynomials divide only by nonzero rationals")
        return self * (Fraction(1) / other)

    def __pow__(self, k: int) -> MultiPoly:
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = MultiPoly.const(1, self.vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- structure --------------------------------------------------------

    def degree(self, name: str) -> int:
        """Degree in one variable (-1 for the zero polynomial)."""
        if name not in self.vars:
            return 0 if self.terms else -1
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def total_degree(self, names: Iterable[str] | None = None) -> int:
        """Total degree, optionally restricted to a subset of variables."""
        idx = range(len(self.vars)) if names is None else [self.vars.index(n) for n in names if n in self.vars]
        return max((sum(e[i] for i in idx) for e in self.terms), default=-1)

    def free_vars(self) -> tuple[str, ...]:
        """Variables that actually occur."""
        return tuple(v for i, v in enumerate(self.vars) if any(e[i] for e in self.terms))

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        """Leading (exponent, coefficient) under graded-lexicographic order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=_graded_key)
        return e, self.terms[e]

    def lift(self, vars: Iterable[str]) -> MultiPoly:
        """Re-express in a larger (or equal) universe."""
        vars = tuple(vars)
        missing = [v for v in self.free_vars() if v not in vars]
        if missing:
            raise UniverseError(f"variables {missing} not in target universe {vars}")
        pos = [self.vars.index(v) if v in self.vars else None for v in vars]
        out = {}
        for e, c in self.terms.items():
            out[tuple(e[p] if p is not None else 0 for p in pos)] = c
        return MultiPoly(vars, out)

    def coefficients_in(self, names: Iterable[str]) -> dict[tuple[int, ...], MultiPoly]:
        """Split by monomials in ``names``; coefficients stay in the full universe.

        Returns ``{exps_in_names: coefficient}`` such that
        ``self == sum(coeff * prod(name**e))``.
        """
        names = tuple(names)
        idx = [self.vars.index(n) for n in names]
        out: dict[tuple[int, ...], dict] = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in idx)
            rest = list(e)
            for i in idx:
                rest[i] = 0
            out.setdefault(key, {})[tuple(rest)] = c
        return {k: MultiPoly._raw(self.vars, t) for k, t in out.items()}

    # -- substitution and evaluation -------------------------------------

    def substitute(self, bindings: Mapping[str, MultiPoly | Rational], out_vars: Iterable[str] | None = None) -> MultiPoly:
        """Simultaneous substitution.  Unbound variables pass through.

        Bound targets must be polynomials over ``out_vars`` (default: own
        universe) or rationals.
        """
        out_vars = self.vars if out_vars is None else tuple(out_vars)
        if not bindings:
            return self.lift(out_vars) if out_vars != self.vars else self
        images = []
        for v in self.vars:
            if v in bindings:
                b = bindings[v]
                if isinstance(b, MultiPoly):
                    if b.vars != out_vars:
                        raise UniverseError(f"binding for {v} lives in {b.vars}, expected {out_vars}")
                    images.append(b)
                else:
                    images.append(MultiPoly.const(b, out_vars))
            else:
                if v not in out_vars:
                    if any(e[len(images)] for e in self.terms):
                        raise UniverseError(f"unbound variable {v!r} missing from output universe")
                    images.append(None)
                    continue
                images.append(MultiPoly.var(v, out_vars))
        powers: list[dict[int, MultiPoly]] = [{} for _ in images]

        def power(i: int, k: int) -> MultiPoly:
            cache = powers[i]
            if k not in cache:
                cache[k] = images[i] ** k
            return cache[k]

        result = MultiPoly.zero(out_vars)
        for e, c in self.terms.items():
            term = MultiPoly.const(c, out_vars)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            result = result + term
        return result

    def evaluate(self, point: Mapping[str, Rational]) -> Fraction:
        """Exact value at a rational point; every occurring variable must be bound."""
        free = self.free_vars()
        missing = [v for v in free if v not in point]
        if missing:
            raise EvaluationError(f"unbound variables {missing}")
        vals = [Fraction(point[v]) if v in point else Fraction(0) for v in self.vars]
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for x, k in zip(vals, e):
                if k:
                    t *= x**k
            total += t
        return total

    def partial(self, name: str) -> MultiPoly:
        """Formal partial derivative."""
        if name not in self.vars:
            return MultiPoly.zero(self.vars)
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return MultiPoly._raw(self.vars, out)

    # -- normalization and rendering ---------------------------------------

    def normalize_content(self) -> tuple[Fraction, MultiPoly]:
        """Split into ``(content, primitive)`` with ``self == content * primitive``.

        The primitive part has coprime integer coefficients and a positive
        graded-lex leading coefficient.
        """
        if not self.terms:
            raise ValueError("cannot normalize the zero polynomial")
        den = lcm(*(c.denominator for c in self.terms.values()))
        num = gcd(*(int(c * den) for c in self.terms.values()))
        content = Fraction(num, den)
        if self.leading_term()[1] < 0:
            content = -content
        return content, self * (1 / content)

    def render(self) -> str:
        """Canonical text form: graded-lex descending, ``*`` products, ``^`` powers."""
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_graded_key, reverse=True):
            c = self.terms[e]
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def to_json(self) -> list:
        """``[{"exponents": [...], "coefficient": "p/q"}]`` in canonical order."""
        return [
            {"exponents": list(e), "coefficient": str(self.terms[e])}
            for e in sorted(self.terms, key=_graded_key, reverse=True)
        ]

    @classmethod
    def from_json(cls, vars: Iterable[str], data: list) -> MultiPoly:
        return cls(vars, {tuple(t["exponents"]): Fraction(t["coefficient"]) for t in data})


def poly_add(*args: MultiPoly) -> MultiPoly:
    result = args[0]
    for p in args[1:]:
        result = result + p
    return result


def poly_mul(*args: MultiPoly) -> MultiPoly:
    result = args[0]
    for p in args[1:]:
        result = result * p
    return result
