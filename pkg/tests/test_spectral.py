import math

import numpy as np
import pytest

from pekeris.assembly import PARA, ORTHO
from pekeris.spectral import (
    NoRootError,
    evaluate_wavefunction,
    find_largest_root,
    ground_state,
    inverse_iteration,
    laguerre_values,
    log_det_sign,
    pencil_for,
)
from pekeris.transfer import laguerre_eval


def test_log_det_sign_matches_dense():
    p = pencil_for(2, 4, PARA)
    for eps in (0.3, 1.2, 1.9, 2.7):
        s, ld = log_det_sign(p, eps)
        d = np.linalg.det(p.at(eps).toarray())
        assert s == np.sign(d)
        assert ld == pytest.approx(math.log(abs(d)), rel=1e-9)


def test_exact_zero_pivot_is_reported():
    p = pencil_for(2, 0, PARA, interaction=False)
    assert log_det_sign(p, 2.0) == (0, -math.inf)
    r = find_largest_root(p, eps_hi=2.5, scan_step=0.25)
    assert r.exact_hit and r.epsilon == 2.0


@pytest.mark.parametrize("Z", [1, 4, 10])
def test_hydrogenic_root(Z):
    r = ground_state(Z, 4, interaction=False)
    assert abs(r.epsilon - Z) < 1e-10


def test_no_root_in_range():
    p = pencil_for(2, 2, PARA)
    with pytest.raises(NoRootError) as exc:
        find_largest_root(p, eps_hi=0.05, scan_step=0.02)
    assert exc.value.trace


def test_helium_ground_state():
    r = ground_state(2, 10)
    assert r.energy == pytest.approx(-2.903724, abs=2e-6)
    assert r.residual < 1e-9
    assert r.dim == 161
    assert np.linalg.norm(r.vector) == pytest.approx(1.0)


def test_inverse_iteration_residual():
    p = pencil_for(3, 8, ORTHO)
    root = find_largest_root(p)
    v, res, it = inverse_iteration(p, root.epsilon)
    A, B = p.matrices()
    assert np.linalg.norm((A - root.epsilon * B) @ v) == pytest.approx(res)
    assert res < 1e-9
    assert it <= 50


def test_laguerre_values_agree_with_exact():
    vals = laguerre_values(8, 1.75)
    for k in range(9):
        assert vals[k] == pytest.approx(float(laguerre_eval(k, 1.75)), abs=1e-12)


def test_wavefunction_is_symmetric_and_decays():
    r = ground_state(2, 8)
    a = evaluate_wavefunction(r, 0.7, 1.3, 1.1)
    b = evaluate_wavefunction(r, 1.3, 0.7, 1.1)
    assert a == pytest.approx(b, rel=1e-10)
    assert abs(evaluate_wavefunction(r, 6.0, 6.0, 1.0)) < abs(a)
    with pytest.raises(ValueError):
        evaluate_wavefunction(r, 1.0, 1.0, 3.0)


def test_ortho_wavefunction_is_antisymmetric():
    r = ground_state(2, 8, ORTHO)
    a = evaluate_wavefunction(r, 0.7, 1.3, 1.1)
    assert evaluate_wavefunction(r, 1.3, 0.7, 1.1) == pytest.approx(-a, rel=1e-10)
    assert evaluate_wavefunction(r, 1.0, 1.0, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_to_json_with_vector():
    r = ground_state(2, 2)
    d = r.to_json(with_vector=True)
    assert len(d["vector"]) == r.dim
    assert d["energy"] == pytest.approx(-r.epsilon**2)


def test_rayleigh_quotient_matches_root():
    p = pencil_for(2, 10, PARA)
    root = find_largest_root(p)
    v, _, _ = inverse_iteration(p, root.epsilon)
    A, B = p.matrices()
    assert (v @ (A @ v)) / (v @ (B @ v)) == pytest.approx(root.epsilon, abs=1e-8)


def test_epsilon_increases_with_charge():
    eps = [ground_state(z, 6).epsilon for z in range(1, 11)]
    assert all(a < b for a, b in zip(eps, eps[1:]))


def test_bisection_keeps_a_sign_change():
    p = pencil_for(3, 6, PARA)
    r = find_largest_root(p, tol=1e-9)
    lo, hi = r.bracket
    assert log_det_sign(p, lo)[0] != log_det_sign(p, hi)[0]
