import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pekeris.assembly import PARA, ORTHO, SparsePencil, enumerate_basis
from pekeris.charpoly import (
    ConsistencyError,
    CharPoly,
    InconclusiveError,
    bareiss_charpoly,
    bareiss_det,
    charpoly_exact,
    cross_check_roots,
    det_mod_prime,
    hadamard_bound,
    interpolate_mod,
    prime_ceiling,
    primes_below,
)
from pekeris.spectral import pencil_for


def random_pencil(n, seed, lo=-6, hi=6):
    rng = random.Random(seed)
    entries = []
    for r in range(n):
        for c in range(n):
            if rng.random() < 0.6:
                entries.append((r, c, rng.randint(lo, hi), rng.randint(lo, hi)))
    basis = enumerate_basis(0, PARA)
    return SparsePencil(n, entries, 2, basis)


def test_bareiss_det_small():
    assert bareiss_det([[2, 1], [7, 4]]) == 1
    assert bareiss_det([[0, 1], [1, 0]]) == -1
    assert bareiss_det([[1, 2], [2, 4]]) == 0
    assert bareiss_det([]) == 1


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(-50, 50), min_size=5, max_size=5), min_size=5, max_size=5))
def test_bareiss_det_matches_sympy(M):
    import sympy

    assert bareiss_det(M) == sympy.Matrix(M).det()


def test_det_mod_prime_matches_exact():
    p = random_pencil(9, 1)
    A, B = p.dense_int()
    exact = bareiss_det([[a - 3 * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)])
    q = 1_000_003
    assert det_mod_prime(p, 3, q) == exact % q
    with pytest.raises(ValueError):
        det_mod_prime(p, 3, prime_ceiling(p.dim) * 4 + 1)


def test_interpolation_mod_p():
    q = 101
    coeffs = [5, 0, 100, 7]
    vals = [sum(c * j**k for k, c in enumerate(coeffs)) % q for j in range(4)]
    assert interpolate_mod(vals, q) == coeffs


def test_primes_below():
    ps = list(zip(range(3), primes_below(100)))
    assert [p for _, p in ps] == [97, 89, 83]
    assert next(primes_below(100, skip=2)) == 83


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_pencils_match_bareiss(seed):
    p = random_pencil(7, seed)
    cp = charpoly_exact(p)
    want = bareiss_charpoly(p)
    assert cp.coefficients == want[: len(cp.coefficients)]
    assert all(c == 0 for c in want[len(cp.coefficients):])


def test_hadamard_bound_dominates_coefficients():
    p = random_pencil(8, 4)
    cp = charpoly_exact(p)
    assert max(abs(c) for c in cp.coefficients) <= hadamard_bound(p)


def test_strategies_agree():
    p = pencil_for(2, 4, ORTHO)
    a = charpoly_exact(p, strategy="hadamard")
    b = charpoly_exact(p, strategy="stable")
    assert a.coefficients == b.coefficients
    assert a.strategy == "hadamard" and b.strategy == "stable"


def test_inconclusive_when_primes_run_out():
    p = pencil_for(2, 4, PARA)
    with pytest.raises(InconclusiveError) as exc:
        charpoly_exact(p, primes=[1_000_003, 999_983])
    assert exc.value.provenance["primes"] == [1_000_003, 999_983]
    with pytest.raises(ValueError):
        charpoly_exact(p, strategy="guess")


def test_charpoly_value_at_zero_is_det_a():
    p = pencil_for(3, 4, PARA)
    cp = charpoly_exact(p)
    A, _ = p.dense_int()
    assert cp(0) == bareiss_det(A)
    assert cp.degree == p.dim


def test_cross_check_and_consistency_error():
    p = pencil_for(2, 4, PARA)
    cp = charpoly_exact(p)
    rep = cross_check_roots(cp, p)
    assert rep["gap"] < 1e-8
    shifted = CharPoly([c * (-1) ** k for k, c in enumerate(cp.coefficients)])
    with pytest.raises(ConsistencyError):
        cross_check_roots(shifted, p)


def test_to_json():
    cp = charpoly_exact(pencil_for(2, 2, PARA))
    d = cp.to_json()
    assert d["degree"] == cp.degree
    assert [int(c) for c in d["coefficients"]] == cp.coefficients
    assert d["provenance"]["primes"] == cp.primes


def test_numeric_determinant_sign_matches_charpoly():
    p = pencil_for(2, 4, PARA)
    cp = charpoly_exact(p)
    for eps in (0.5, 1.5, 1.8):
        d = np.linalg.det(p.at(eps).toarray())
        # float Horner on huge coefficients would cancel; evaluation is exact
        assert float(cp(eps)) == pytest.approx(d, rel=1e-8)


def test_disjoint_prime_sets_agree():
    p = pencil_for(2, 6, ORTHO)
    a = charpoly_exact(p)
    b = charpoly_exact(p, primes=primes_below(prime_ceiling(p.dim), skip=len(a.primes) + 5))
    assert not set(a.primes) & set(b.primes)
    assert a.coefficients == b.coefficients


def test_evaluation_consistency():
    p = pencil_for(2, 4, ORTHO)
    cp = charpoly_exact(p)
    for q in cp.primes[:2]:
        for j in (0, 1, 5, p.dim):
            assert cp(j) % q == det_mod_prime(p, j, q)
