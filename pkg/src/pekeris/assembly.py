"""Truncated, symmetry-reduced integer pencils ``M(eps) = A - eps*B``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .transfer import SeqOp

PARA, ORTHO = "para", "ortho"
ORDERING = "graded-lex by (l+m+n, l, m); rows and columns share the ordering"


class StructureError(ValueError):
    """A recurrence coefficient is not linear in eps."""


@dataclass(frozen=True)
class Basis:
    omega: int
    sym_class: str
    triples: tuple[tuple[int, int, int], ...]
    index: dict = field(compare=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.triples)

    def permuted(self, perm) -> Basis:
        """Same triples in the order ``triples[perm[i]]``."""
        triples = tuple(self.triples[i] for i in perm)
        return Basis(self.omega, self.sym_class, triples, {t: i for i, t in enumerate(triples)})


def _check_class(sym_class: str) -> None:
    if sym_class not in (PARA, ORTHO):
        raise ValueError(f"symmetry class must be 'para' or 'ortho', got {sym_class!r}")


def basis_dimension(omega: int, sym_class: str) -> int:
    """Closed-form count ``(T +- D) / 2``."""
    _check_class(sym_class)
    total = comb(omega + 3, 3)
    diag = sum(omega - 2 * l + 1 for l in range(omega // 2 + 1))
    return (total + diag) // 2 if sym_class == PARA else (total - diag) // 2


def enumerate_basis(omega: int, sym_class: str) -> Basis:
    """Triples with ``l + m + n <= omega`` and ``l <= m`` (para) or ``l < m`` (ortho)."""
    _check_class(sym_class)
    if omega < 0:
        raise ValueError("omega must be non-negative")
    strict = sym_class == ORTHO
    triples = []
    for s in range(omega + 1):
        for l in range(s + 1):
            for m in range(l + strict, s - l + 1):
                triples.append((l, m, s - l - m))
    triples = tuple(triples)
    return Basis(omega, sym_class, triples, {t: i for i, t in enumerate(triples)})


def fold(triple, sym_class: str, omega: int):
    """Map a triple into the fundamental domain: ``None`` or ``(canonical, sign)``."""
    l, m, n = triple
    if min(l, m, n) < 0 or l + m + n > omega:
        return None
    if l == m and sym_class == ORTHO:
        return None
    if l > m:
        return (m, l, n), (1 if sym_class == PARA else -1)
    return (l, m, n), 1


@dataclass
class SparsePencil:
    """Exact integer pencil; entry ``(r, c, a, b)`` means ``M[r, c] = a - eps*b``."""

    dim: int
    entries: list[tuple[int, int, int, int]]
    charge: int
    basis: Basis

    def matrices(self, dtype=float) -> tuple[sp.csc_matrix, sp.csc_matrix]:
        if self.entries:
            r, c, a, b = (np.array(x) for x in zip(*self.entries))
        else:
            r = c = a = b = np.zeros(0, dtype=int)
        shape = (self.dim, self.dim)
        A = sp.csc_matrix((a.astype(dtype), (r, c)), shape=shape)
        B = sp.csc_matrix((b.astype(dtype), (r, c)), shape=shape)
        return A, B

    def dense_int(self) -> tuple[list[list[int]], list[list[int]]]:
        """Exact Python-int dense copies of A and B."""
        A = [[0] * self.dim for _ in range(self.dim)]
        B = [[0] * self.dim for _ in range(self.dim)]
        for r, c, a, b in self.entries:
            A[r][c] = a
            B[r][c] = b
        return A, B

    def at(self, eps: float) -> sp.csc_matrix:
        A, B = self.matrices()
        return (A - eps * B).tocsc()

    def max_row_nnz(self) -> int:
        counts = np.bincount([e[0] for e in self.entries], minlength=self.dim) if self.entries else [0]
        return int(np.max(counts))

    def permuted(self, perm) -> SparsePencil:
        """Simultaneous row/column permutation: new index i holds old ``perm[i]``."""
        inv = {old: new for new, old in enumerate(perm)}
        entries = sorted((inv[r], inv[c], a, b) for r, c, a, b in self.entries)
        return SparsePencil(self.dim, entries, self.charge, self.basis.permuted(perm))

    def column(self, triple) -> dict[int, tuple[int, int]]:
        j = self.basis.index[triple]
        return {r: (a, b) for r, c, a, b in self.entries if c == j}


def assemble_pencil(rec: SeqOp, basis: Basis, Z: int) -> SparsePencil:
    """One equation per basis triple, one unknown per basis triple."""
    if Z < 1:
        raise ValueError("charge must be a positive integer")
    # per shift: coefficient split into eps^0 and eps^1 parts, Z bound
    split = []
    for s, c in sorted(rec.stencil.items()):
        if c.degree("eps") > 1:
            raise StructureError(f"shift {s} has eps-degree {c.degree('eps')}")
        parts = c.coefficients_in(("eps",))
        c0 = parts.get((0,))
        c1 = parts.get((1,))
        split.append((s, _compile(c0, Z), _compile(c1, Z)))
    acc: dict[tuple[int, int], list[int]] = {}
    for row, t in enumerate(basis.triples):
        l, m, n = t
        for s, f0, f1 in split:
            target = fold((l + s[0], m + s[1], n + s[2]), basis.sym_class, basis.omega)
            if target is None:
                continue
            col = basis.index[target[0]]
            sign = target[1]
            a = f0(l, m, n)
            b = f1(l, m, n)
            if not (a or b):
                continue
            cell = acc.setdefault((row, col), [0, 0])
            cell[0] += sign * a
            cell[1] -= sign * b
    entries = [(r, c, a, b) for (r, c), (a, b) in sorted(acc.items()) if a or b]
    return SparsePencil(basis.dim, entries, Z, basis)


def _compile(c, Z: int):
    """Integer evaluator ``(l, m, n) -> int`` for a coefficient with Z bound."""
    if c is None:
        return lambda l, m, n: 0
    iz = c.vars.index("Z")
    il, im, in_ = (c.vars.index(v) for v in ("l", "m", "n"))
    terms = []
    for e, q in c.terms.items():
        if q.denominator != 1:
            raise StructureError("recurrence coefficients must be integers")
        terms.append((int(q) * Z ** e[iz], e[il], e[im], e[in_]))

    def f(l: int, m: int, n: int) -> int:
        return sum(k * l**a * m**b * n**d for k, a, b, d in terms)

    return f


# -- export / import ---------------------------------------------------------

def export_pencil(p: SparsePencil, directory, stem: str | None = None, format: str = "matrixmarket") -> dict[str, Path]:
    """Write ``A`` and ``B`` plus a JSON manifest; returns the written paths."""
    directory = Path(directory)
    stem = stem or f"pencil_Z{p.charge}_w{p.basis.omega}_{p.basis.sym_class}"
    manifest = {
        "omega": p.basis.omega,
        "symClass": p.basis.sym_class,
        "Z": p.charge,
        "dim": p.dim,
        "ordering": ORDERING,
        "format": format,
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        paths = {"manifest": directory / f"{stem}.json"}
        if format == "matrixmarket":
            for name, col in (("A", 2), ("B", 3)):
                nz = [e for e in p.entries if e[col]]
                rows = np.array([e[0] for e in nz], dtype=np.int64)
                cols = np.array([e[1] for e in nz], dtype=np.int64)
                vals = np.array([e[col] for e in nz], dtype=np.int64)
                mat = sp.coo_matrix((vals, (rows, cols)), shape=(p.dim, p.dim))
                path = directory / f"{stem}_{name}.mtx"
                scipy.io.mmwrite(path, mat, field="integer", comment=f"pencil M = A - eps*B, Z={p.charge}")
                paths[name] = path
                manifest[name] = path.name
        elif format == "json":
            path = directory / f"{stem}_entries.json"
            path.write_text(json.dumps({"entries": [[r + 1, c + 1, str(a), str(b)] for r, c, a, b in p.entries]}))
            paths["entries"] = path
            manifest["entries"] = path.name
        else:
            raise ValueError(f"unknown export format {format!r}")
        paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write pencil to {directory}: {exc}") from exc
    return paths


def import_pencil(manifest_path) -> SparsePencil:
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read manifest {manifest_path}: {exc}") from exc
    basis = enumerate_basis(manifest["omega"], manifest["symClass"])
    cells: dict[tuple[int, int], list[int]] = {}
    if manifest.get("format", "matrixmarket") == "matrixmarket":
        for name, slot in (("A", 0), ("B", 1)):
            path = manifest_path.parent / manifest[name]
            mat = scipy.io.mmread(path).tocoo()
            for r, c, v in zip(mat.row, mat.col, mat.data):
                cells.setdefault((int(r), int(c)), [0, 0])[slot] = int(v)
    else:
        data = json.loads((manifest_path.parent / manifest["entries"]).read_text())
        for r, c, a, b in data["entries"]:
            cells[(r - 1, c - 1)] = [int(a), int(b)]
    entries = [(r, c, a, b) for (r, c), (a, b) in sorted(cells.items())]
    if basis.dim != manifest["dim"]:
        raise ValueError(f"manifest dim {manifest['dim']} != basis size {basis.dim}")
    return SparsePencil(basis.dim, entries, manifest["Z"], basis)
