import json
import math
import warnings

import numpy as np
import pytest

from configs import UNIT_SQUARE
from zustint.distribution import DistributionRep, coeff_sweep
from zustint.dyadic import Rectangle
from zustint.funcrep import Constant, Coordinate, g_beta
from zustint.geometry import (DiskDomain, EpigraphDomain, RectangleDomain, SegmentDomain,
                              UnionDomain, build_grid, indicator_coeffs)
from zustint.pairing import integrate_over_domain, pair
from zustint.wavelets import build_basis, empty_field


@pytest.fixture(scope="module")
def area():
    return DistributionRep(Constant(1.0, 2), [Coordinate(0, 2), Coordinate(1, 2)])


def _integrate(D, omega, J):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return integrate_over_domain(D, omega, J)


def test_unit_square_area(area):
    res = _integrate(area, RectangleDomain(UNIT_SQUARE), 4)
    assert res.value == pytest.approx(1.0, abs=1e-10)


def test_interval_length_1d():
    D = DistributionRep(Constant(1.0, 1), [Coordinate(0, 1)])
    res = _integrate(D, RectangleDomain(Rectangle((0.25,), (0.75,))), 6)
    assert res.value == pytest.approx(0.5, abs=1e-10)


def test_disk_area(area):
    res = _integrate(area, DiskDomain((0.5, 0.5), 0.3), 6)
    assert res.value == pytest.approx(math.pi * 0.09, abs=1e-3)


def test_epigraph_area(area):
    # g_beta at J = 14 is linear between nodes of spacing 2^-15, so the trapezoid rule is exact
    h = g_beta(1.5, 14)
    y = h(np.linspace(0.0, 1.0, 2**15 + 1))
    expected = (y[:-1] + y[1:]).sum() / 2**16
    res = _integrate(area, EpigraphDomain(h), 5)
    assert res.value == pytest.approx(expected, abs=1e-4)


def test_empty_indicator_gives_zero(area):
    T = coeff_sweep(area, 2, UNIT_SQUARE)
    res = pair(T, empty_field(2, T.basis_order), 2)
    assert res.value == 0.0 and res.tail_estimate == 0.0


def test_normalization_mismatch_raises(area):
    T = coeff_sweep(area, 2, UNIT_SQUARE)
    h = indicator_coeffs(build_grid(RectangleDomain(UNIT_SQUARE), 3), area.basis, 2)
    h.normalization = "l2"
    with pytest.raises(ValueError, match="normalization"):
        pair(T, h, 2)


def test_missing_indicator_levels_raise(area):
    T = coeff_sweep(area, 4, UNIT_SQUARE)
    h = indicator_coeffs(build_grid(RectangleDomain(UNIT_SQUARE), 3), area.basis, 2)
    with pytest.raises(ValueError, match="level"):
        pair(T, h, 4)


def test_bilinear_in_distribution():
    B = build_basis(4)
    g = [Coordinate(0, 2), Coordinate(1, 2)]
    D1 = DistributionRep(Coordinate(0, 2), g, B)
    D2 = DistributionRep(Coordinate(1, 2), g, B)
    D3 = DistributionRep(2.0 * Coordinate(0, 2) - 3.0 * Coordinate(1, 2), g, B)
    h = indicator_coeffs(build_grid(DiskDomain((0.5, 0.5), 0.3), 5), B, 4)
    v = [pair(coeff_sweep(D, 4, UNIT_SQUARE), h, 4).value for D in (D1, D2, D3)]
    assert v[2] == pytest.approx(2 * v[0] - 3 * v[1], abs=1e-8)


def test_whisker_does_not_change_value(area):
    square = RectangleDomain(Rectangle((0.25, 0.25), (0.75, 0.75)))
    whisker = UnionDomain([square, SegmentDomain((0.75, 0.5), (1.0, 0.5))])
    a = _integrate(area, square, 4)
    b = _integrate(area, whisker, 4)
    assert a.value == b.value


def test_result_bookkeeping(area):
    res = _integrate(area, DiskDomain((0.5, 0.5), 0.3), 4)
    assert res.tail_estimate >= 0.0
    assert math.fsum(p["value"] for p in res.per_level) == res.value
    assert [p["level"] for p in res.per_level] == ["scaling", 0, 1, 2, 3, 4]
    out = json.loads(res.dumps())
    assert out["tail_is_heuristic"] is True and out["J"] == 4
