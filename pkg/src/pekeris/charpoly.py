"""Exact ``det(A - eps*B)`` as an integer polynomial in eps.

Determinants are evaluated modulo word-size primes at ``eps = 0..n``,
interpolated over each prime field, and glued together by the Chinese
remainder theorem with balanced lifting.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import prevprime

from .assembly import SparsePencil

PRIME_CEILING = 2**31


class InconclusiveError(RuntimeError):
    def __init__(self, message: str, provenance: dict):
        super().__init__(message)
        self.provenance = provenance


class ConsistencyError(RuntimeError):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def primes_below(bound: int = PRIME_CEILING, skip: int = 0):
    """Descending primes below ``bound``, after skipping the first ``skip``."""
    p = bound
    i = 0
    while True:
        p = prevprime(p)
        if i >= skip:
            yield p
        i += 1


def _dense_mod(pencil: SparsePencil, p: int) -> tuple[np.ndarray, np.ndarray]:
    A = np.zeros((pencil.dim, pencil.dim), dtype=np.int64)
    B = np.zeros_like(A)
    for r, c, a, b in pencil.entries:
        A[r, c] = a % p
        B[r, c] = b % p
    return A, B


def prime_ceiling(dim: int) -> int:
    """Largest prime size for which ``dim * p**2`` stays inside int64.

    Elimination below subtracts ``dim`` unreduced products of residues before
    reducing, so the headroom is what bounds the prime.
    """
    return min(PRIME_CEILING, math.isqrt(2**62 // max(dim, 1)))


def _batched_det_mod(M: np.ndarray, p: int) -> list[int]:
    """Determinants of a stack ``M[k]`` of square matrices modulo ``p`` (destroys M).

    Trailing blocks are reduced lazily: only the pivot row and column are
    brought back into ``[0, p)`` at each step.
    """
    nb, n, _ = M.shape
    det = np.ones(nb, dtype=np.int64)
    alive = np.ones(nb, dtype=bool)
    ar = np.arange(nb)
    for k in range(n):
        M[:, k:, k] %= p
        nz = M[:, k:, k] != 0
        alive &= nz.any(axis=1)
        piv = k + np.argmax(nz, axis=1)
        swap = alive & (piv != k)
        if swap.any():
            idx = ar[swap]
            rows_k = M[idx, k, :].copy()
            M[idx, k, :] = M[idx, piv[swap], :]
            M[idx, piv[swap], :] = rows_k
            det[idx] = (p - det[idx]) % p
        M[:, k, k:] %= p
        pv = M[:, k, k].copy()
        pv[~alive] = 1
        det = det * pv % p
        inv = np.array([pow(int(x), p - 2, p) for x in pv], dtype=np.int64)
        if k + 1 < n:
            f = M[:, k + 1 :, k] * inv[:, None] % p
            M[:, k + 1 :, k + 1 :] -= f[:, :, None] * M[:, k, None, k + 1 :]
    det[~alive] = 0
    return [int(x) for x in det]


def det_mod_prime(pencil: SparsePencil, eps_value: int, p: int) -> int:
    """``det(A - eps_value*B) mod p`` by Gaussian elimination over GF(p)."""
    if p <= 2:
        raise ValueError("need an odd prime")
    if p > prime_ceiling(pencil.dim):
        raise ValueError(f"prime {p} too large for dimension {pencil.dim}")
    A, B = _dense_mod(pencil, p)
    M = ((A - (eps_value % p) * B) % p)[None]
    return _batched_det_mod(M, p)[0]


def det_values_mod_prime(pencil: SparsePencil, points, p: int, chunk: int = 64) -> list[int]:
    """``det(A - j*B) mod p`` for every ``j`` in ``points``."""
    A, B = _dense_mod(pencil, p)
    out = []
    points = list(points)
    for i in range(0, len(points), chunk):
        js = np.array([j % p for j in points[i : i + chunk]], dtype=np.int64)
        M = (A[None] - js[:, None, None] * B[None]) % p
        out.extend(_batched_det_mod(M, p))
    return out


def interpolate_mod(values: list[int], p: int) -> list[int]:
    """Coefficients (low to high) of the polynomial taking ``values[j]`` at ``j``."""
    n = len(values)
    # Newton divided differences on 0, 1, ..., n-1
    c = [v % p for v in values]
    for k in range(1, n):
        inv_k = pow(k, p - 2, p)
        for j in range(n - 1, k - 1, -1):
            c[j] = (c[j] - c[j - 1]) * inv_k % p
    coeffs = [0] * n
    # Horner on nested form: c0 + x(c1 + (x-1)(c2 + (x-2)(...)))
    for k in range(n - 1, -1, -1):
        # coeffs <- coeffs * (x - k) + c[k]
        new = [0] * n
        for i in range(n - 1, -1, -1):
            lower = coeffs[i - 1] if i else 0
            new[i] = (lower - k * coeffs[i]) % p
        new[0] = (new[0] + c[k]) % p
        coeffs = new
    return coeffs


def hadamard_bound(pencil: SparsePencil) -> int:
    """Integer bound on every coefficient of ``det(A - eps*B)``.

    On ``|z| = 1`` each row of ``A - zB`` is dominated entrywise by
    ``|a| + |b|``, so Hadamard's inequality bounds ``|det|`` there by the
    product of those row norms, and Cauchy's estimate transfers it to
    every coefficient.
    """
    sq = [0] * pencil.dim
    for r, _, a, b in pencil.entries:
        sq[r] += (abs(a) + abs(b)) ** 2
    bound = 1
    for s in sq:
        bound *= math.isqrt(s) + 1
    return bound


@dataclass
class CharPoly:
    coefficients: list[int]
    primes: list[int] = field(default_factory=list)
    points: int = 0
    strategy: str = "hadamard"
    bound_bits: int | None = None
    seconds: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def max_digits(self) -> int:
        return max(len(str(abs(c))) for c in self.coefficients if c)

    def __call__(self, x) -> Fraction | int:
        """Exact value; float arguments are converted to Fraction first."""
        if isinstance(x, float):
            x = Fraction(x)
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "coefficients": [str(c) for c in self.coefficients],
            "provenance": {
                "strategy": self.strategy,
                "primes": self.primes,
                "evaluationPoints": self.points,
                "boundBits": self.bound_bits,
                "maxDigits": self.max_digits() if any(self.coefficients) else 0,
                "seconds": round(self.seconds, 3),
            },
        }


def _balanced(x: int, m: int) -> int:
    return x - m if x > m // 2 else x


def residue_charpoly(pencil: SparsePencil, p: int) -> list[int]:
    """``det(A - eps*B) mod p`` as coefficients, from values at ``eps = 0..n``."""
    return interpolate_mod(det_values_mod_prime(pencil, range(pencil.dim + 1), p), p)


def _crt(images: list[tuple[int, list[int]]]) -> tuple[list[int], int]:
    residues, modulus = None, 1
    for p, cp in images:
        if residues is None:
            residues = list(cp)
        else:
            inv = pow(modulus % p, p - 2, p)
            residues = [r + modulus * ((c - r) * inv % p) for r, c in zip(residues, cp)]
        modulus *= p
    return residues, modulus


def charpoly_exact(
    pencil: SparsePencil,
    strategy: str = "hadamard",
    primes=None,
    extra_primes: int = 2,
    max_primes: int = 10_000,
    workers: int = 1,
) -> CharPoly:
    """Exact integer coefficients of ``det(A - eps*B)``, low degree first.

    ``strategy="hadamard"`` stops once the modulus exceeds twice
    :func:`hadamard_bound`; ``"stable"`` stops once the balanced lift has not
    changed over ``extra_primes`` further primes.  With ``workers > 1`` the
    per-prime images of the Hadamard strategy are computed in a process pool.
    """
    if pencil.dim < 1:
        raise ValueError("pencil must have dimension >= 1")
    if strategy not in ("hadamard", "stable"):
        raise ValueError(f"unknown strategy {strategy!r}")
    t0 = time.perf_counter()
    n = pencil.dim
    bound = hadamard_bound(pencil)
    primes = iter(primes) if primes is not None else primes_below(prime_ceiling(n))

    if strategy == "hadamard":
        chosen, modulus = [], 1
        for p in primes:
            if modulus > 2 * bound or len(chosen) >= max_primes:
                break
            chosen.append(p)
            modulus *= p
        if modulus <= 2 * bound:
            raise InconclusiveError(
                "not enough primes to exceed the coefficient bound",
                {"primes": chosen, "boundBits": bound.bit_length(), "strategy": strategy},
            )
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                images = list(zip(chosen, pool.map(residue_charpoly, [pencil] * len(chosen), chosen)))
        else:
            images = [(p, residue_charpoly(pencil, p)) for p in chosen]
        residues, modulus = _crt(images)
        used = chosen
    else:
        images, used, last, stable = [], [], None, 0
        for p in primes:
            if len(used) >= max_primes:
                break
            images.append((p, residue_charpoly(pencil, p)))
            used.append(p)
            residues, modulus = _crt(images)
            lifted = [_balanced(r, modulus) for r in residues]
            stable = stable + 1 if lifted == last else 0
            last = lifted
            if stable >= extra_primes:
                break
        if stable < extra_primes:
            raise InconclusiveError(
                "coefficients did not stabilize before the primes ran out",
                {"primes": used, "strategy": strategy},
            )
    coeffs = [_balanced(r, modulus) for r in residues]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return CharPoly(coeffs, used, n + 1, strategy, bound.bit_length(), time.perf_counter() - t0)


# -- exact fraction-free oracles --------------------------------------------

def bareiss_det(M: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    a = [row[:] for row in M]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _pmul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _ptrim(out)


def _psub(a: list[int], b: list[int]) -> list[int]:
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] -= y
    return _ptrim(out)


def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pdiv_exact(a: list[int], b: list[int]) -> list[int]:
    a = a[:]
    if not a:
        return []
    q = [0] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(q) - 1, -1, -1):
        c, r = divmod(a[i + len(b) - 1], lead)
        if r:
            raise ArithmeticError("inexact polynomial division")
        q[i] = c
        if c:
            for j, y in enumerate(b):
                a[i + j] -= c * y
    if any(a):
        raise ArithmeticError("inexact polynomial division")
    return _ptrim(q)


def bareiss_charpoly(pencil: SparsePencil) -> list[int]:
    """``det(A - eps*B)`` by Bareiss elimination over Z[eps] (low degree first)."""
    A, B = pencil.dense_int()
    n = pencil.dim
    a = [[_ptrim([A[i][j], -B[i][j]]) for j in range(n)] for i in range(n)]
    sign, prev = 1, [1]
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return [0]
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = _psub(_pmul(a[i][j], a[k][k]), _pmul(a[i][k], a[k][j]))
                a[i][j] = _pdiv_exact(num, prev)
        prev = a[k][k]
    det = [sign * c for c in a[n - 1][n - 1]]
    return det or [0]


# -- tying exact and numeric results together --------------------------------

def largest_real_root(cp: CharPoly, upper: float, tol: float = 1e-13, grid: int = 4000) -> Fraction | None:
    """Largest sign change of ``cp`` in ``(0, upper]``, refined by exact bisection."""
    hi = Fraction(upper).limit_denominator(10**6)
    step = hi / grid
    prev_x, prev_v = hi, cp(hi)
    if prev_v == 0:
        return hi
    for k in range(1, grid + 1):
        x = hi - k * step
        v = cp(x)
        if v == 0:
            return x
        if (v > 0) != (prev_v > 0):
            lo, up = x, prev_x
            s_lo = v > 0
            while up - lo > tol:
                mid = (lo + up) / 2
                vm = cp(mid)
                if vm == 0:
                    return mid
                if (vm > 0) == s_lo:
                    lo = mid
                else:
                    up = mid
            return (lo + up) / 2
        prev_x, prev_v = x, v
    return None


def cross_check_roots(cp: CharPoly, pencil: SparsePencil, tol: float = 1e-8) -> dict:
    """Compare the largest real root of ``cp`` with the numeric pencil root."""
    from .spectral import find_largest_root

    upper = pencil.charge + 1
    exact = largest_real_root(cp, upper)
    numeric = find_largest_root(pencil).epsilon
    report = {
        "exactRoot": None if exact is None else float(exact),
        "numericRoot": numeric,
        "gap": None if exact is None else abs(float(exact) - numeric),
        "tol": tol,
    }
    if exact is None or report["gap"] > tol:
        raise ConsistencyError("exact and numeric largest roots disagree", report)
    return report
