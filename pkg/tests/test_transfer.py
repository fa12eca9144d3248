import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pekeris.diffop import DiffOp, apply_to_poly, coefficient_universe, compose
from pekeris.exact import MultiPoly
from pekeris.pipeline import P_VARS
from pekeris.transfer import (
    DerivationMismatch,
    PreconditionError,
    SeqOp,
    dxd_op,
    laguerre_eval,
    laguerre_resum,
    phi_transfer,
    theta_op,
    validate,
    x_op,
)

DATA = Path(__file__).parent / "data"
U = coefficient_universe(P_VARS)


def random_array(rng, max_total=4, density=0.4):
    A = {}
    for s in range(max_total + 1):
        for l in range(s + 1):
            for m in range(s - l + 1):
                if rng.random() < density:
                    A[(l, m, s - l - m)] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
    return A


def test_laguerre_values():
    assert laguerre_eval(0, 7) == 1
    assert laguerre_eval(1, 3) == -2
    assert laguerre_eval(2, 1) == Fraction(-1, 2)
    with pytest.raises(ValueError):
        laguerre_eval(-1, 0)


@pytest.mark.parametrize("gen,dop", [
    (x_op, lambda u: DiffOp.mul(u, P_VARS)),
    (theta_op, lambda u: DiffOp(P_VARS, {(1, 0, 0): u})),
    (dxd_op, lambda u: DiffOp(P_VARS, {(2, 0, 0): u, (1, 0, 0): MultiPoly.const(1, U)})),
])
def test_generators_match_direct_action(gen, dop):
    rng = random.Random(3)
    u = MultiPoly.var("u", U)
    op, S = dop(u), gen(0)
    for _ in range(10):
        A = random_array(rng, 3)
        assert apply_to_poly(op, laguerre_resum(A, U)) == laguerre_resum(S.apply(A), U)


def test_transfer_is_multiplicative():
    u, w = MultiPoly.var("u", U), MultiPoly.var("w", U)
    p = DiffOp(P_VARS, {(1, 0, 0): u * w, (0, 0, 1): w})
    q = DiffOp(P_VARS, {(1, 0, 0): u, (0, 0, 0): w})
    rng = random.Random(5)
    lhs, rhs = phi_transfer(compose(p, q)), phi_transfer(p) @ phi_transfer(q)
    for _ in range(10):
        A = random_array(rng, 3)
        assert lhs.apply(A) == rhs.apply(A)


def test_reconstruction_oracle(perimetric):
    S = phi_transfer(perimetric)
    rng = random.Random(2024)
    for _ in range(25):
        A = random_array(rng)
        assert apply_to_poly(perimetric, laguerre_resum(A, U)) == laguerre_resum(S.apply(A), U)


def test_non_banded_operator_is_rejected():
    # plain d_u has no finite Laguerre image
    with pytest.raises(PreconditionError):
        phi_transfer(DiffOp.d("u", P_VARS))
    with pytest.raises(PreconditionError):
        phi_transfer(DiffOp.d("r1", ("r1", "r2", "r12")))


def test_recurrence_shape(rec):
    rep = validate(rec)
    assert rep == {"terms": 33, "lmnDegree": 3, "zDegree": 1, "epsDegree": 1}
    assert all(max(map(abs, s)) <= 2 for s in rec.shifts())


def test_recurrence_matches_frozen_fixture(rec):
    frozen = SeqOp.from_json(json.loads((DATA / "recurrence_interaction.json").read_text()))
    assert frozen.stencil == rec.stencil


def test_recurrence_is_normalized(rec):
    coeffs = [q for c in rec.stencil.values() for q in c.terms.values()]
    assert all(q.denominator == 1 for q in coeffs)
    from math import gcd

    assert gcd(*(int(q) for q in coeffs)) == 1


def test_free_recurrence_drops_the_w_pair(rec, rec_free):
    assert len(rec_free.stencil) == 31
    assert set(rec.shifts()) - set(rec_free.shifts()) == {(0, 0, 2), (0, 0, -2)}
    with pytest.raises(DerivationMismatch):
        validate(rec_free)


def test_seqop_json_round_trip(rec):
    assert SeqOp.from_json(rec.to_json()).stencil == rec.stencil


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
    st.fractions(min_value=-5, max_value=5, max_denominator=4),
    max_size=6,
), st.integers(1, 4), st.integers(1, 4))
def test_apply_is_linear(A, a, b):
    S = theta_op(1) @ x_op(2) + dxd_op(0)
    twice = S.apply({k: a * v + b * v for k, v in A.items()})
    sep = S.apply(A)
    assert twice == {k: (a + b) * v for k, v in sep.items()}


def test_hydrogenic_delta_solves_free_recurrence(rec_free):
    from pekeris.transfer import REC_VARS

    Z = MultiPoly.var("Z", REC_VARS)
    out = rec_free.apply({(0, 0, 0): 1})
    assert out and all(v.substitute({"eps": Z}).is_zero() for v in out.values())


def test_support_dilates_by_stencil(rec):
    rng = random.Random(11)
    A = random_array(rng, 3)
    out = rec.apply(A, {"Z": 2, "eps": Fraction(17, 10)})
    allowed = {(p[0] - s[0], p[1] - s[1], p[2] - s[2]) for p in A for s in rec.shifts()}
    assert set(out) <= allowed
