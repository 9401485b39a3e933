import math

import numpy as np
import pytest

from csikey.errors import DimensionGuardError
from csikey.lattice import (LatticeBasis, babai_nearest_plane, dual_basis,
                            enumerate_cvp, enumerate_svp, gapsvp_decide,
                            int_det, is_lll_reduced, lll_reduce,
                            sivp_solve_small, successive_minima)
from csikey.numerics import make_rng


def _random_int_basis(rng, n, lo=-9, hi=9):
    while True:
        m = rng.integers(lo, hi + 1, size=(n, n))
        if abs(int_det(m.astype(object))) >= 1:
            return LatticeBasis(m.astype(float))


def test_int_det_matches_numpy():
    rng = make_rng(0)
    for _ in range(20):
        m = rng.integers(-9, 10, size=(5, 5))
        assert int_det(m.astype(object)) == round(float(np.linalg.det(m)))


def test_lll_identity_fixed_point():
    red = lll_reduce(LatticeBasis(np.eye(4)))
    assert np.allclose(red.reduced.matrix, np.eye(4))
    assert red.swaps == 0


def test_lll_unimodular_and_conditions():
    rng = make_rng(1)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        b = _random_int_basis(rng, n)
        red = lll_reduce(b)
        assert int_det(red.transform) in (1, -1)
        assert np.allclose(b.matrix @ red.transform.astype(float),
                           red.reduced.matrix)
        assert is_lll_reduced(red.reduced)


def test_lll_classic_2d():
    # Strongly skewed 2-D basis reduces to vectors of the minimal norms.
    b = LatticeBasis(np.array([[1.0, 99.0], [0.0, 1.0]]))
    red = lll_reduce(b)
    norms = np.linalg.norm(red.reduced.matrix, axis=0)
    assert np.max(norms) <= math.sqrt(2.0) + 1e-9


def test_babai_exact_on_lattice_points():
    rng = make_rng(2)
    b = _random_int_basis(rng, 4)
    coeffs = rng.integers(-5, 6, size=4)
    point, got = babai_nearest_plane(b, b.matrix @ coeffs.astype(float))
    assert np.array_equal(got, coeffs)
    assert np.allclose(point, b.matrix @ coeffs.astype(float))


def test_enumerate_svp_z2_skewed():
    b = LatticeBasis(np.array([[1.0, 7.0], [0.0, 1.0]]))
    vec, lam1 = enumerate_svp(b)
    assert lam1 == pytest.approx(1.0)
    assert np.allclose(np.abs(vec), [1.0, 0.0])


def test_enumerate_cvp_brute_force():
    rng = make_rng(3)
    for _ in range(10):
        b = _random_int_basis(rng, 3, lo=-4, hi=4)
        target = rng.normal(size=3) * 3.0
        point, coeffs = enumerate_cvp(b, target)
        grid = np.array(np.meshgrid(*[np.arange(-12, 13)] * 3)).reshape(3, -1)
        pts = b.matrix @ grid
        best = np.min(np.sum((pts - target[:, None]) ** 2, axis=0))
        assert np.sum((point - target) ** 2) == pytest.approx(best, abs=1e-6)
        assert np.allclose(b.matrix @ coeffs.astype(float), point)


def test_enumerate_cvp_tie_lexicographic():
    # Target equidistant from 0 and 1 on Z^1: coefficient 0 wins the tie.
    _, coeffs = enumerate_cvp(LatticeBasis(np.eye(1)), np.array([0.5]))
    assert coeffs[0] == 0


def test_successive_minima_z_family():
    est = successive_minima(LatticeBasis(np.diag([1.0, 2.0, 3.0])))
    assert np.allclose(est.values, [1.0, 2.0, 3.0])
    assert est.exact
    # vectors are linearly independent
    assert np.linalg.matrix_rank(est.vectors) == 3


def test_successive_minima_skewed_matches_known():
    b = LatticeBasis(np.array([[2.0, 1.0], [0.0, 2.0]]))
    est = successive_minima(b)
    assert est.values[0] == pytest.approx(2.0)
    assert est.values[1] == pytest.approx(math.sqrt(5.0))


def test_dimension_guard():
    with pytest.raises(DimensionGuardError):
        enumerate_svp(LatticeBasis(np.eye(9)))


def test_dual_basis_roundtrip():
    rng = make_rng(4)
    b = _random_int_basis(rng, 4)
    d = dual_basis(b)
    assert np.allclose(d.matrix.T @ b.matrix, np.eye(4), atol=1e-9)
    assert np.allclose(dual_basis(d).matrix, b.matrix, atol=1e-9)


def test_gapsvp_decide():
    b = LatticeBasis(np.eye(3))
    assert gapsvp_decide(b, 1.0, 2.0) == "YES"
    assert gapsvp_decide(b, 0.4, 2.0) == "NO"
    assert gapsvp_decide(b, 0.9, 2.0) == "UNRESOLVED"


def test_sivp_small():
    b = LatticeBasis(np.diag([1.0, 4.0]))
    vecs = sivp_solve_small(b, gamma=4.0)
    assert np.linalg.matrix_rank(vecs) == 2


def test_basis_json_roundtrip():
    rng = make_rng(5)
    b = _random_int_basis(rng, 3)
    again = LatticeBasis.from_json(b.to_json())
    assert np.array_equal(again.matrix, b.matrix)
