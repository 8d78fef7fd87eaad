import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from configs import UNIT_SQUARE, holder_config
from zustint.dyadic import Rectangle
from zustint.funcrep import (Constant, Coordinate, Monomial, Sum, Tensor1D, g_beta, mollify,
                             random_schauder)
from zustint.sewing import (BudgetExceeded, ExponentWarning, NoConvergence, SewingConfig,
                            boundary_integral, germ_sum, lipschitz_oracle, zust_integral)

IDENTITY2 = [Coordinate(0, 2), Coordinate(1, 2)]


def test_config_validation():
    with pytest.raises(ValueError):
        SewingConfig(max_level=0)
    with pytest.raises(ValueError):
        SewingConfig(tolerance=0.0)


def test_boundary_integral_examples():
    res = boundary_integral([Monomial(0, 2, 1)], Rectangle((0.0,), (3.0,)))
    assert res.value == 9.0
    assert boundary_integral(IDENTITY2, UNIT_SQUARE).value == pytest.approx(1.0, abs=1e-12)
    assert boundary_integral([Constant(2.0, 2), Coordinate(1, 2)], UNIT_SQUARE).value == 0.0


def test_boundary_integral_degenerate():
    res = boundary_integral(IDENTITY2, Rectangle((0.0, 0.5), (1.0, 0.5)))
    assert res.value == 0.0 and res.degenerate


def test_zust_trivial_values():
    assert zust_integral(Constant(1.0, 2), IDENTITY2, UNIT_SQUARE).value == pytest.approx(1.0)
    f = Coordinate(0, 2) + Coordinate(1, 2)
    res = zust_integral(f, IDENTITY2, UNIT_SQUARE, SewingConfig(max_level=12, tolerance=1e-5))
    assert res.value == pytest.approx(1.0, abs=1e-3)


def test_zust_result_fields():
    res = zust_integral(Coordinate(0, 2), IDENTITY2, UNIT_SQUARE, SewingConfig(max_level=6))
    assert res.level_used >= 1 and res.cauchy_gap >= 0 and res.cost > 0
    assert res.history[-1][1] == res.value
    assert res.to_json()["level_used"] == res.level_used


def test_fubini_reduction_to_young():
    h = g_beta(1.5, 12)
    g = [Tensor1D(h, 0, 2), Coordinate(1, 2)]
    res = zust_integral(Constant(1.0, 2), g, UNIT_SQUARE, SewingConfig(max_level=8))
    young = float(h(np.array(1.0)) - h(np.array(0.0)))
    assert res.value == pytest.approx(young, abs=1e-12)


def test_lipschitz_oracle_examples():
    assert lipschitz_oracle(Constant(1.0, 2), IDENTITY2, UNIT_SQUARE, 5) == pytest.approx(1.0)
    x = Coordinate(0, 2)
    assert lipschitz_oracle(Constant(1.0, 2), [x, x], UNIT_SQUARE, 5) == pytest.approx(0.0)
    val = lipschitz_oracle(x, [Monomial(0, 2, 2), Coordinate(1, 2)], UNIT_SQUARE, 8)
    assert val == pytest.approx(2.0 / 3.0, abs=1e-5)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_lipschitz_agreement_mollified(d):
    rng = np.random.default_rng(d)
    g = [Coordinate(m, d) + 0.3 * Tensor1D(random_schauder(0.7, 10, rng), (m + 1) % d, d)
         for m in range(d)]
    g = [mollify(gi, 8) for gi in g]
    f = Constant(1.0, d) + Coordinate(0, d)
    R = Rectangle.unit(d)
    levels = {1: 14, 2: 8, 3: 5}
    res = zust_integral(f, g, R, SewingConfig(max_level=levels[d], tolerance=1e-9))
    oracle = lipschitz_oracle(f, g, R, levels[d])
    assert abs(res.value - oracle) <= 2.0 ** -levels[d] * 8 + 4 * res.cauchy_gap


def test_continuity_in_mollification():
    f, g = holder_config(7, J=12)
    cfg = SewingConfig(max_level=9, tolerance=1e-9)
    exact = zust_integral(f, g, UNIT_SQUARE, cfg).value
    errs = [abs(zust_integral(f, [mollify(gi, n) for gi in g], UNIT_SQUARE, cfg).value - exact)
            for n in (4, 16, 64)]
    assert errs[-1] < errs[0]


def test_additivity_on_half_splits():
    f, g = holder_config(11)
    cfg = SewingConfig(max_level=10, tolerance=1e-9)
    whole = zust_integral(f, g, UNIT_SQUARE, cfg)
    for axis in (0, 1):
        P, Q = UNIT_SQUARE.split(axis)
        p, q = zust_integral(f, g, P, cfg), zust_integral(f, g, Q, cfg)
        gap = max(whole.cauchy_gap, p.cauchy_gap, q.cauchy_gap)
        assert abs(whole.value - p.value - q.value) <= 3 * gap


def test_antisymmetry_and_constant_kill_exact():
    f, (g1, g2) = holder_config(5)
    cfg = SewingConfig(max_level=6)
    assert zust_integral(f, [g2, g1], UNIT_SQUARE, cfg).value == \
        -zust_integral(f, [g1, g2], UNIT_SQUARE, cfg).value
    assert zust_integral(f, [g1, Constant(-3.0, 2)], UNIT_SQUARE, cfg).value == 0.0
    assert germ_sum(f, [Constant(1.0, 2), g2], UNIT_SQUARE, 6) == 0.0


def test_antisymmetry_three_dimensions():
    rng = np.random.default_rng(2)
    g = [Coordinate(m, 3) + Tensor1D(random_schauder(0.9, 8, rng), (m + 1) % 3, 3)
         for m in range(3)]
    f = Constant(1.0, 3)
    R = Rectangle.unit(3)
    a = germ_sum(f, g, R, 4)
    assert germ_sum(f, [g[1], g[0], g[2]], R, 4) == -a
    assert germ_sum(f, [g[0], g[2], g[1]], R, 4) == -a


def test_linearity_in_f():
    f1, g = holder_config(3)
    f2 = Coordinate(0, 2)
    lam = 0.375
    R = UNIT_SQUARE
    lhs = germ_sum(Sum([f1, f2], [1.0, lam]), g, R, 7)
    rhs = germ_sum(f1, g, R, 7) + lam * germ_sum(f2, g, R, 7)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_face_level_offset_converges_to_same_limit():
    f, g = holder_config(1, J=10)
    a = zust_integral(f, g, UNIT_SQUARE, SewingConfig(max_level=10, tolerance=1e-7))
    b = zust_integral(f, g, UNIT_SQUARE,
                      SewingConfig(max_level=9, tolerance=1e-7, face_level_offset=1))
    assert abs(a.value - b.value) <= 3 * (a.cauchy_gap + b.cauchy_gap) + 1e-6


def test_exponent_warning():
    rng = np.random.default_rng(0)
    g = [Tensor1D(random_schauder(0.3, 8, rng), m, 2) for m in range(2)]
    with pytest.warns(ExponentWarning):
        try:
            zust_integral(Constant(1.0, 2), g, UNIT_SQUARE, SewingConfig(max_level=6))
        except NoConvergence:
            pass


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        zust_integral(Coordinate(0, 2), IDENTITY2, UNIT_SQUARE,
                      SewingConfig(max_level=12, tolerance=1e-30, memo_capacity=2**10))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        zust_integral(Constant(1.0, 2), [Coordinate(0, 2)], UNIT_SQUARE)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), level=st.integers(0, 4),
       lo=st.tuples(st.floats(-1, 0), st.floats(-1, 0)),
       size=st.tuples(st.floats(0.1, 2), st.floats(0.1, 2)), c=st.floats(-5, 5))
def test_germ_sum_algebra(seed, level, lo, size, c):
    f, (g1, g2) = holder_config(seed, J=6)
    R = Rectangle(lo, (lo[0] + size[0], lo[1] + size[1]))
    assert germ_sum(f, [g2, g1], R, level) == -germ_sum(f, [g1, g2], R, level)
    assert germ_sum(f, [Constant(c, 2), g2], R, level) == 0.0
    assert germ_sum(f, [g1, Constant(c, 2)], R, level) == 0.0


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), level=st.integers(0, 3))
def test_germ_sum_linear_in_f(a, b, level):
    f1, g = holder_config(1, J=6)
    f2, _ = holder_config(2, J=6)
    lhs = germ_sum(Sum([f1, f2], [a, b]), g, UNIT_SQUARE, level)
    rhs = a * germ_sum(f1, g, UNIT_SQUARE, level) + b * germ_sum(f2, g, UNIT_SQUARE, level)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
