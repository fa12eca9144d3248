import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pekeris.assembly import (
    ORTHO,
    PARA,
    StructureError,
    assemble_pencil,
    basis_dimension,
    enumerate_basis,
    export_pencil,
    fold,
    import_pencil,
)
from pekeris.exact import MultiPoly
from pekeris.transfer import REC_VARS, SeqOp


@pytest.mark.parametrize("omega,cls,dim", [(10, PARA, 161), (60, PARA, 20336), (10, ORTHO, 125), (0, PARA, 1), (0, ORTHO, 0)])
def test_dimensions(omega, cls, dim):
    assert enumerate_basis(omega, cls).dim == dim
    assert basis_dimension(omega, cls) == dim


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 25))
def test_para_and_ortho_partition_all_triples(omega):
    from math import comb

    assert basis_dimension(omega, PARA) + basis_dimension(omega, ORTHO) == comb(omega + 3, 3)


def test_ordering_is_graded_lex():
    b = enumerate_basis(4, PARA)
    keys = [(sum(t), t[0], t[1]) for t in b.triples]
    assert keys == sorted(keys)
    assert b.triples[:4] == ((0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 0, 2))


def test_fold():
    assert fold((2, 1, 0), PARA, 5) == ((1, 2, 0), 1)
    assert fold((2, 1, 0), ORTHO, 5) == ((1, 2, 0), -1)
    assert fold((1, 1, 0), ORTHO, 5) is None
    assert fold((1, 1, 0), PARA, 5) == ((1, 1, 0), 1)
    assert fold((-1, 0, 0), PARA, 5) is None
    assert fold((3, 3, 0), PARA, 5) is None
    with pytest.raises(ValueError):
        enumerate_basis(3, "singlet")


def test_row_width_bounded_by_stencil(rec):
    p = assemble_pencil(rec, enumerate_basis(12, PARA), 2)
    assert p.max_row_nnz() <= 33
    assert all(isinstance(a, int) and isinstance(b, int) for _, _, a, b in p.entries)


def test_hydrogenic_kernel_column(rec_free):
    # M(Z) e_1 = 0 exactly: the first column of A equals Z times that of B
    for Z in (1, 2, 7):
        p = assemble_pencil(rec_free, enumerate_basis(4, PARA), Z)
        col = p.column((0, 0, 0))
        assert col
        assert all(a - Z * b == 0 for a, b in col.values())


def test_nonlinear_eps_is_rejected():
    bad = SeqOp({(0, 0, 0): MultiPoly.var("eps", REC_VARS) ** 2})
    with pytest.raises(StructureError):
        assemble_pencil(bad, enumerate_basis(2, PARA), 2)


@pytest.mark.parametrize("fmt", ["matrixmarket", "json"])
def test_export_round_trip(rec, tmp_path, fmt):
    p = assemble_pencil(rec, enumerate_basis(6, ORTHO), 3)
    paths = export_pencil(p, tmp_path, format=fmt)
    q = import_pencil(paths["manifest"])
    assert q.dim == p.dim and q.charge == 3
    assert sorted(q.entries) == sorted(p.entries)


def test_export_unknown_format(rec, tmp_path):
    p = assemble_pencil(rec, enumerate_basis(2, PARA), 2)
    with pytest.raises(ValueError):
        export_pencil(p, tmp_path, format="csv")


def test_permutation_preserves_entries(rec):
    p = assemble_pencil(rec, enumerate_basis(4, PARA), 2)
    perm = np.random.default_rng(0).permutation(p.dim)
    q = p.permuted(perm)
    A, B = p.matrices()
    A2, B2 = q.matrices()
    assert np.array_equal(A.toarray()[np.ix_(perm, perm)], A2.toarray())
    assert np.array_equal(B.toarray()[np.ix_(perm, perm)], B2.toarray())


def test_dimension_formula_matches_brute_force():
    for omega in range(21):
        triples = [(l, m, n) for l in range(omega + 1) for m in range(omega + 1) for n in range(omega + 1) if l + m + n <= omega]
        assert basis_dimension(omega, PARA) == sum(1 for l, m, _ in triples if l <= m)
        assert basis_dimension(omega, ORTHO) == sum(1 for l, m, _ in triples if l < m)


def test_fold_idempotent_and_involutive():
    for t in enumerate_basis(6, PARA).triples:
        assert fold(t, PARA, 6) == (t, 1)
        assert fold((t[1], t[0], t[2]), PARA, 6) == (t, 1)
    for t in enumerate_basis(6, ORTHO).triples:
        swapped = (t[1], t[0], t[2])
        canon, sign = fold(swapped, ORTHO, 6)
        assert canon == t and sign == -1


def test_converged_vector_satisfies_interior_recurrence(rec):
    from fractions import Fraction

    from pekeris.spectral import ground_state

    omega = 14
    r = ground_state(2, omega)
    A = {}
    for l in range(omega + 1):
        for m in range(omega + 1 - l):
            for n in range(omega + 1 - l - m):
                f = fold((l, m, n), PARA, omega)
                if f:
                    A[(l, m, n)] = Fraction(float(f[1] * r.vector[r.triples.index(f[0])]))
    eps = Fraction(r.epsilon)
    reach = max(sum(abs(x) for x in s) for s in rec.shifts())
    out = rec.apply(A, {"Z": 2, "eps": eps})
    # scale of the individual contributions at each row
    absrec = SeqOp({s: MultiPoly(c.vars, {e: abs(q) for e, q in c.terms.items()}) for s, c in rec.stencil.items()})
    scale = absrec.apply({k: abs(v) for k, v in A.items()}, {"Z": 2, "eps": eps})
    worst = max(
        abs(float(out.get(t, 0))) / float(scale[t])
        for t in A if sum(t) <= omega - reach and scale.get(t)
    )
    assert worst <= 1e-8
