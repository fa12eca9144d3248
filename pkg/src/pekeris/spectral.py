"""Numerical solution of the pencil: largest root, eigenvector, wave function."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import PARA, SparsePencil, assemble_pencil, enumerate_basis, fold
from .pipeline import PipelineConfig, perimetric_operator
from .transfer import Recurrence, pekeris_recurrence

log = logging.getLogger(__name__)


class NoRootError(RuntimeError):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


class IterationError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def derived_recurrence(interaction: bool = True) -> Recurrence:
    """Derive (once per process) the recurrence for either Hamiltonian."""
    op = perimetric_operator(PipelineConfig(interaction=interaction))
    return pekeris_recurrence(op, check=interaction)


def _perm_sign(perm: np.ndarray) -> int:
    seen = np.zeros(len(perm), dtype=bool)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def log_det_sign(pencil: SparsePencil, eps: float) -> tuple[int, float]:
    """``(sign, log|det|)`` of ``A - eps*B`` from a sparse LU factorization."""
    if pencil.dim == 0:
        raise ValueError("empty pencil")
    M = pencil.at(eps)
    try:
        lu = spla.splu(M)
    except RuntimeError:
        # SuperLU reports an exactly zero pivot
        return 0, -math.inf
    d = lu.U.diagonal()
    if np.any(d == 0):
        return 0, -math.inf
    sign = int(np.prod(np.sign(d))) * _perm_sign(lu.perm_r) * _perm_sign(lu.perm_c)
    return sign, float(np.sum(np.log(np.abs(d))))


@dataclass
class RootReport:
    epsilon: float
    bracket: tuple[float, float]
    iterations: int
    exact_hit: bool = False
    warnings: list = field(default_factory=list)


def find_largest_root(
    pencil: SparsePencil,
    eps_hi: float | None = None,
    scan_step: float | None = None,
    tol: float = 1e-12,
) -> RootReport:
    """Scan down from ``eps_hi`` for the first sign change of det, then refine."""
    Z = pencil.charge
    eps_hi = Z + 1.0 if eps_hi is None else eps_hi
    scan_step = 0.01 * Z if scan_step is None else scan_step
    if scan_step <= 0 or tol <= 0:
        raise ValueError("scan step and tolerance must be positive")
    trace = []
    warnings = []
    prev = None
    k = 0
    while True:
        x = eps_hi - k * scan_step
        if x <= 0:
            raise NoRootError(f"no sign change of det(A - eps*B) in (0, {eps_hi}]", trace)
        s, ld = log_det_sign(pencil, x)
        trace.append((x, s, ld))
        if s == 0:
            return RootReport(x, (x, x), 0, True, warnings)
        if prev is not None and s != prev[1]:
            break
        if len(trace) >= 3:
            (_, _, l0), (x1, _, l1), _ = trace[-3:]
            if l1 < l0 and l1 < ld and min(l0, ld) - l1 > 2.0:
                warnings.append(f"log|det| dips near eps={x1:.6g} without a sign change (possible even-multiplicity root)")
        prev = (x, s, ld)
        k += 1
    hi, s_hi, ld_hi = prev
    lo, s_lo = x, s
    its = 0
    # bisection keeps sign(det(hi)) != sign(det(lo))
    while hi - lo > tol and its < 200:
        mid = 0.5 * (hi + lo)
        if mid in (lo, hi):
            break
        sm, _ = log_det_sign(pencil, mid)
        its += 1
        if sm == 0:
            return RootReport(mid, (mid, mid), its, True, warnings)
        if sm == s_hi:
            hi = mid
        else:
            lo = mid
    root = _secant_polish(pencil, lo, hi, s_hi)
    its += 1
    return RootReport(root, (lo, hi), its, False, warnings)


def _secant_polish(pencil: SparsePencil, lo: float, hi: float, s_hi: int) -> float:
    s1, l1 = log_det_sign(pencil, lo)
    s2, l2 = log_det_sign(pencil, hi)
    if s1 == 0:
        return lo
    if s2 == 0:
        return hi
    shift = max(l1, l2)
    f1 = s1 * math.exp(l1 - shift)
    f2 = s2 * math.exp(l2 - shift)
    if f1 == f2:
        return 0.5 * (lo + hi)
    x = lo - f1 * (hi - lo) / (f2 - f1)
    return x if lo <= x <= hi else 0.5 * (lo + hi)


def inverse_iteration(
    pencil: SparsePencil,
    eps_star: float,
    max_iter: int = 50,
    tol: float = 1e-10,
    offset: float | None = None,
) -> tuple[np.ndarray, float, int]:
    """Null vector of ``A - eps_star*B`` by shifted inverse iteration.

    Returns ``(v, residual, iterations)`` with ``v`` of unit length and its
    first significant entry positive.
    """
    A, B = pencil.matrices()
    M = (A - eps_star * B).tocsc()
    if offset is None:
        offset = 1e-9 * max(1.0, abs(eps_star))
    lu = spla.splu((A - (eps_star + offset) * B).tocsc())
    x = np.ones(pencil.dim) / math.sqrt(pencil.dim)
    res = math.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(B @ x)
        nrm = np.linalg.norm(y)
        if not np.isfinite(nrm) or nrm == 0:
            raise IterationError("inverse iteration broke down")
        x_new = y / nrm
        if np.dot(x_new, x) < 0:
            x_new = -x_new
        res = np.linalg.norm(M @ x_new)
        step = np.linalg.norm(x_new - x)
        x = x_new
        if res <= tol or step <= 1e-14:
            break
    else:
        if res > tol:
            raise IterationError(f"no convergence after {max_iter} steps (residual {res:.3e}); root may be multiple")
    return _sign_normalize(x), float(res), it


def _sign_normalize(x: np.ndarray) -> np.ndarray:
    big = np.flatnonzero(np.abs(x) > 1e-12 * np.max(np.abs(x)))
    return -x if x[big[0]] < 0 else x


@dataclass
class EigenResult:
    Z: int
    omega: int
    sym_class: str
    epsilon: float
    residual: float
    vector: np.ndarray
    triples: tuple
    dim: int
    iterations: int = 0
    seconds: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def energy(self) -> float:
        return -self.epsilon**2

    def to_json(self, with_vector: bool = False) -> dict:
        out = {
            "Z": self.Z,
            "omega": self.omega,
            "symClass": self.sym_class,
            "dim": self.dim,
            "epsilon": self.epsilon,
            "energy": self.energy,
            "residual": self.residual,
        }
        if with_vector:
            out["vector"] = [
                {"triple": list(t), "value": float(c)} for t, c in zip(self.triples, self.vector)
            ]
        return out


def pencil_for(
    Z: int, omega: int, sym_class: str = PARA, interaction: bool = True, recurrence: Recurrence | None = None
) -> SparsePencil:
    rec = derived_recurrence(interaction) if recurrence is None else recurrence
    return assemble_pencil(rec, enumerate_basis(omega, sym_class), Z)


def ground_state(
    Z: int,
    omega: int,
    sym_class: str = PARA,
    tol: float = 1e-12,
    interaction: bool = True,
    scan_step: float | None = None,
    recurrence: Recurrence | None = None,
) -> EigenResult:
    """Largest pencil root and its coefficient vector for one configuration."""
    if Z < 1 or omega < 0:
        raise ValueError("need Z >= 1 and omega >= 0")
    t0 = time.perf_counter()
    pencil = pencil_for(Z, omega, sym_class, interaction, recurrence)
    root = find_largest_root(pencil, scan_step=scan_step, tol=tol)
    for w in root.warnings:
        log.warning(w)
    v, res, _ = inverse_iteration(pencil, root.epsilon)
    return EigenResult(
        Z=Z,
        omega=omega,
        sym_class=sym_class,
        epsilon=root.epsilon,
        residual=res,
        vector=v,
        triples=pencil.basis.triples,
        dim=pencil.dim,
        iterations=root.iterations,
        seconds=time.perf_counter() - t0,
        warnings=root.warnings,
    )


def laguerre_values(kmax: int, x: float) -> np.ndarray:
    """``[L_0(x), ..., L_kmax(x)]`` by the upward three-term recurrence."""
    out = np.empty(kmax + 1)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 1.0 - x
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + 1 - x) * out[k] - k * out[k - 1]) / (k + 1)
    return out


def evaluate_wavefunction(result: EigenResult, r1: float, r2: float, r12: float) -> float:
    """``psi(r1, r2, r12)`` reconstructed from the coefficient vector (unnormalized)."""
    if min(r1, r2, r12) <= 0:
        raise ValueError("distances must be positive")
    if r12 > r1 + r2 or r1 > r2 + r12 or r2 > r1 + r12:
        raise ValueError(f"({r1}, {r2}, {r12}) violates the triangle inequality")
    e = result.epsilon
    u = e * (r2 + r12 - r1)
    v = e * (r1 + r12 - r2)
    w = 2 * e * (r1 + r2 - r12)
    om = result.omega
    Lu, Lv, Lw = laguerre_values(om, u), laguerre_values(om, v), laguerre_values(om, w)
    index = {t: i for i, t in enumerate(result.triples)}
    total = 0.0
    for l in range(om + 1):
        for m in range(om + 1 - l):
            for n in range(om + 1 - l - m):
                f = fold((l, m, n), result.sym_class, om)
                if f is None:
                    continue
                total += f[1] * result.vector[index[f[0]]] * Lu[l] * Lv[m] * Lw[n]
    return math.exp(-0.5 * (u + v + w)) * total
