import numpy as np
import pytest

from zustint.dyadic import Rectangle
from zustint.funcrep import (Constant, Coordinate, SchauderSeries, from_json, g_beta, hat,
                             holder_seminorm_estimate, make_f_gamma_delta, mollify, oscillation,
                             random_schauder, schauder_coeffs, sup_distance)
from zustint.geometry import Graph

UNIT = Rectangle.unit(1)


def test_hat_values():
    assert hat(0.0) == 0.0
    assert hat(0.5) == 0.5
    assert hat(0.75) == 0.25
    assert hat(1.5) == 0.0


def test_schauder_of_affine_is_trivial():
    S = schauder_coeffs(lambda x: 2.0 + 3.0 * x, 6)
    assert S.base == (2.0, 3.0)
    assert all(not np.any(c) for c in S.coeffs)


def test_schauder_of_basis_element():
    S = schauder_coeffs(hat, 5)
    assert S.coeff(0, 0) == 1.0
    assert sum(np.count_nonzero(c) for c in S.coeffs) == 1


def test_schauder_of_f_gamma_delta():
    f = make_f_gamma_delta(0.6, 1.0, 7)
    S = schauder_coeffs(f, 7)
    for j in range(1, 8):
        assert np.allclose(S.coeffs[j], 2.0 ** (-0.6 * j) * j, rtol=0, atol=1e-13)
    assert not np.any(S.coeffs[0])


def test_schauder_round_trip_exact():
    rng = np.random.default_rng(1)
    f = random_schauder(0.7, 9, rng, base=(0.5, -1.0))
    S = schauder_coeffs(f, f.j_max)
    assert S.base == f.base
    for a, b in zip(S.coeffs, f.coeffs):
        assert np.allclose(a, b, rtol=0, atol=1e-14)
    x = np.arange(2**11 + 1) / 2**11
    assert np.allclose(S(x), f(x), rtol=0, atol=1e-14)


def test_f_gamma_delta_values():
    f = make_f_gamma_delta(0.5, 0.0, 9)
    assert f(np.array([0.0, 1.0])).tolist() == [0.0, 0.0]
    # every hat of level >= 1 vanishes at 1/2, so the finite sum is zero there
    oracle = sum(2.0 ** (-0.5 * j) * hat(2**j * 0.5 - k) for j in range(1, 10) for k in range(2**j))
    assert f(np.array(0.5)) == oracle == 0.0
    assert f(np.array(0.25)) == pytest.approx(2**-0.5 * 0.5, abs=1e-15)
    assert np.all(f(np.linspace(0, 1, 1001)) >= 0)


def test_g_beta_oscillation_grows_with_beta():
    lam = (0.25, 0.5)
    oscs = [oscillation(g_beta(b, 12), lam) for b in (1.2, 1.6, 1.99)]
    assert oscs[0] < oscs[1] < oscs[2]


def test_oscillation_basic():
    assert oscillation(Constant(3.0, 1), (0.0, 1.0)) == 0.0
    assert oscillation(Coordinate(0, 1), (0.0, 1.0)) == 1.0
    with pytest.raises(ValueError):
        oscillation(Constant(1.0, 1), (0, 1), samples=1)


def test_oscillation_lower_bound_on_dyadic_intervals():
    gamma, delta = 0.5, -2.0
    f = make_f_gamma_delta(gamma, delta, 12)
    for j in range(1, 10):
        for k in (0, 2**j // 3, 2**j - 1):
            lam = (k / 2**j, (k + 1) / 2**j)
            assert oscillation(f, lam) >= 2.0 ** (-gamma * j) * j**delta / 2


def test_oscillation_box_count_bracket():
    f = g_beta(1.5, 12)
    graph = Graph(f)
    for j in (3, 6, 9):
        m, lo, hi = graph.column_ranges(j)
        s = 2**j
        for col in range(0, s, max(1, s // 16)):
            lam = (col / s, (col + 1) / s)
            n_col = int(np.floor(hi[col + 1] * s) - np.ceil(lo[col + 1] * s) + 2)
            osc = oscillation(f, lam)
            assert s * osc <= n_col + 1e-9
            assert n_col <= s * osc + 2 + 1e-9


def test_holder_seminorm_trivial():
    assert holder_seminorm_estimate(Coordinate(0, 1), 1.0, UNIT, 8) == pytest.approx(1.0)
    assert holder_seminorm_estimate(Constant(2.0, 1), 0.3, UNIT, 8) == 0.0


def test_holder_seminorm_plateau_g_beta():
    f = g_beta(1.5, 16)
    vals = [holder_seminorm_estimate(f, 0.5, UNIT, L) for L in (10, 12, 14)]
    assert np.isfinite(vals).all()
    assert max(vals) <= 1.1 * min(vals)


def test_schauder_holder_criterion():
    rng = np.random.default_rng(3)
    gamma = 0.6
    f = random_schauder(gamma, 16, rng)
    C = max(np.max(np.abs(c) * 2.0 ** (gamma * j)) for j, c in enumerate(f.coeffs))
    for L in range(8, 15):
        assert holder_seminorm_estimate(f, gamma, UNIT, L) <= 8 * C


def test_mollify_fixed_points():
    assert mollify(Constant(2.5, 1), 4)(np.array(0.3)) == 2.5
    x = np.linspace(-1, 2, 31)
    assert np.allclose(mollify(Coordinate(0, 1), 8)(x), x)
    with pytest.raises(ValueError):
        mollify(Constant(1.0, 1), 0)


def test_mollify_keeps_seminorm():
    rng = np.random.default_rng(4)
    f = random_schauder(0.6, 14, rng)
    for n, alpha in ((4, 0.6), (16, 0.6), (16, 0.3)):
        K1 = Rectangle((-1.0 / n,), (1.0 + 1.0 / n,))
        lhs = holder_seminorm_estimate(mollify(f, n), alpha, UNIT, 10)
        rhs = holder_seminorm_estimate(f, alpha, K1, 10)
        assert lhs <= rhs * (1 + 1e-9)


def test_mollify_sup_rate():
    f = make_f_gamma_delta(0.5, 0.0, 16)
    ns = np.array([4, 8, 16, 32])
    dist = [sup_distance(f, mollify(f, n), UNIT, 12) for n in ns]
    slope = np.polyfit(np.log2(ns), np.log2(dist), 1)[0]
    assert -0.6 <= slope <= -0.4


def test_from_json_kinds():
    x = from_json({"kind": "preset", "name": "coordinate", "axis": 2}, 2)
    assert x(np.array([0.3, 0.7])) == 0.7
    c = from_json({"kind": "preset", "name": "constant", "value": 1.5}, 2)
    assert c(np.array([0.1, 0.2])) == 1.5
    s = from_json({"kind": "schauder", "gamma": 0.5, "delta": 0, "J": 6}, 1)
    assert isinstance(s, SchauderSeries) and s.exponent == 0.5
    t = from_json({"kind": "tensor1d", "of": {"kind": "schauder", "gamma": 0.5, "J": 6},
                   "axis": 1}, 2)
    assert t(np.array([0.5, 0.9])) == s(np.array(0.5))
    p = from_json({"kind": "product", "of": [{"kind": "preset", "name": "coordinate", "axis": 1},
                                            {"kind": "preset", "name": "constant", "value": 2}]}, 2)
    assert p(np.array([0.25, 0.0])) == 0.5
    m = from_json({"kind": "mollified", "n": 8,
                   "of": {"kind": "preset", "name": "coordinate", "axis": 1}}, 1)
    assert m(np.array(0.4)) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        from_json({"kind": "nope"}, 1)
    with pytest.raises(ValueError):
        from_json({"kind": "preset", "name": "coordinate", "axis": 3}, 2)


def test_declared_exponent_and_tail():
    f = make_f_gamma_delta(0.4, 0.0, 10)
    assert f.exponent == 0.4
    assert f.tail_bound > 0
    with pytest.raises(ValueError):
        make_f_gamma_delta(1.2, 0.0, 4)
