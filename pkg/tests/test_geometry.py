import itertools

import numpy as np
import pytest

from zustint.dyadic import Rectangle
from zustint.funcrep import g_beta
from zustint.geometry import (BitmapDomain, BoxCounts, DiskDomain, EpigraphDomain, Graph, Point,
                              RectangleBoundary, RectangleDomain, SampledSet, Segment,
                              SegmentDomain, UnionDomain, besov_criterion, box_count, box_counts,
                              box_dimension_estimate, build_grid, domain_from_json,
                              indicator_coeffs, indicator_field, lebesgue_boundary, read_bitmap,
                              regularize, topological_boundary, write_bitmap)
from zustint.wavelets import build_basis

UNIT = Rectangle.unit(2)


def brute_segment_count(p, q, j, window=2):
    """Closed cubes meeting the segment pq, by clipping the segment to each cube."""
    s = 2**j
    p, q = np.array(p, float), np.array(q, float)
    hit = set()
    for k in itertools.product(range(-window, s + window), repeat=2):
        lo, hi = np.array(k) / s, (np.array(k) + 1) / s
        t0, t1 = 0.0, 1.0
        ok = True
        for l in range(2):
            v = q[l] - p[l]
            if v == 0:
                ok &= lo[l] <= p[l] <= hi[l]
            else:
                a, b = sorted(((lo[l] - p[l]) / v, (hi[l] - p[l]) / v))
                t0, t1 = max(t0, a), min(t1, b)
        if ok and t0 <= t1:
            hit.add(k)
    return hit


def test_point_counts():
    assert box_count(Point((0.25, 0.5)), 2) == 4
    assert box_count(Point((0.3, 0.3)), 2) == 1
    counts = box_counts(Point((0.5, 0.5)), range(2, 7))
    assert abs(box_dimension_estimate(counts, 2, 6)) <= 0.1


def test_square_boundary_brute_force():
    edges = [((0, 0), (1, 0)), ((1, 0), (1, 1)), ((1, 1), (0, 1)), ((0, 1), (0, 0))]
    for j in range(7):
        brute = set().union(*(brute_segment_count(p, q, j) for p, q in edges))
        cubes = {tuple(c) for c in RectangleBoundary(UNIT).cubes(j)}
        assert cubes == brute
        assert RectangleBoundary(UNIT).count(j) == len(brute)


def test_gridline_segment_counts_both_sides():
    for j in range(7):
        seg = Segment((0.25, 0.5), (0.75, 0.5))
        assert {tuple(c) for c in seg.cubes(j)} == brute_segment_count((0.25, 0.5), (0.75, 0.5), j)


def test_oblique_segment_brute_force():
    p, q = (0.1, 0.2), (0.8, 0.65)
    for j in range(6):
        assert {tuple(c) for c in Segment(p, q).cubes(j)} == brute_segment_count(p, q, j)


def test_sphere_counts_against_samples():
    disk = DiskDomain((0.5, 0.5), 0.3)
    t = np.linspace(0, 2 * np.pi, 200001)
    pts = np.stack([0.5 + 0.3 * np.cos(t), 0.5 + 0.3 * np.sin(t)], axis=-1)
    for j in range(2, 7):
        sampled = SampledSet(pts).count(j)
        exact = box_count(disk, j)
        assert sampled <= exact <= sampled + 8


def test_graph_counts_match_sampling():
    h = g_beta(1.5, 10)
    x = np.linspace(0, 1, 2**16 + 1)
    pts = np.stack([x, h(x)], axis=-1)
    for j in (3, 5, 7):
        assert Graph(h).count(j) == SampledSet(pts).count(j) == len(Graph(h).cubes(j))


def test_box_dimension_square():
    counts = box_counts(RectangleDomain(UNIT), range(2, 10))
    assert abs(box_dimension_estimate(counts, 2, 9) - 1.0) <= 0.1
    with pytest.raises(ValueError):
        box_dimension_estimate(counts, 2, 3)


def test_lebesgue_boundary_open_closed_and_full():
    for j in (2, 4, 6):
        closed = lebesgue_boundary(build_grid(RectangleDomain(UNIT), 6), j).as_set()
        opened = lebesgue_boundary(build_grid(RectangleDomain(UNIT, open=True), 6), j).as_set()
        assert closed == opened
        assert len(closed) == RectangleBoundary(UNIT).count(j)
    full = build_grid(RectangleDomain(UNIT), 5, region=UNIT)
    full.pixels[:] = True
    full.vertices[:] = True
    assert lebesgue_boundary(full, 5).count == 0


def test_lebesgue_boundary_needs_subsamples():
    with pytest.raises(ValueError):
        lebesgue_boundary(build_grid(RectangleDomain(UNIT), 4, s=2), 4)


def test_whisker_removed():
    square = RectangleDomain(Rectangle((0.25, 0.25), (0.75, 0.75)))
    whisker = UnionDomain([square, SegmentDomain((0.75, 0.5), (1.0, 0.5))])
    Gs = build_grid(square, 7, region=UNIT)
    Gw = build_grid(whisker, 7, region=UNIT)
    for j in range(8):
        assert lebesgue_boundary(Gw, j).as_set() == lebesgue_boundary(Gs, j).as_set()
    assert topological_boundary(Gw, 7).count > topological_boundary(Gs, 7).count


def test_regularization_idempotent_and_inclusion():
    G = build_grid(DiskDomain((0.5, 0.5), 0.3), 6)
    R1 = regularize(G)
    R2 = regularize(R1)
    assert np.array_equal(R1.vertices, R2.vertices)
    for j in (2, 4, 6):
        assert lebesgue_boundary(R1, j).as_set() == lebesgue_boundary(G, j).as_set()
        leb = lebesgue_boundary(G, j).as_set()
        assert leb <= topological_boundary(G, j).as_set()


def test_cube_states():
    G = build_grid(RectangleDomain(Rectangle((0.25, 0.25), (0.75, 0.75))), 3, region=UNIT)
    st = G.cube_states()
    assert st["full"] + st["empty"] + st["mixed"] == np.prod(G.pixels.shape) // G.s**2
    assert st["mixed"] == 0 and st["full"] == 16


def test_g_beta_band_and_lower_bound():
    beta, gamma, delta = 1.5, 0.5, -2.0
    counts = box_counts(Graph(g_beta(beta, 14)), range(4, 13))
    scaled = [counts.table[j] * j**2 * 2.0 ** (-beta * j) for j in counts.levels]
    assert max(scaled) / min(scaled) <= 10
    for j in counts.levels:
        assert 2.0 ** ((2 - gamma) * j - 1) * j**delta <= counts.table[j]


def test_besov_criterion_square():
    counts = box_counts(RectangleDomain(UNIT), range(1, 11))
    partial, verdict = besov_criterion(counts, 1.5, 10)
    assert verdict == "converging"
    assert partial == sorted(partial)
    chk = besov_criterion(counts, 1.5, 10)
    assert chk.heuristic and np.allclose(chk.ratios[-4:], 2**-0.5, atol=0.05)


def test_besov_criterion_g_beta():
    counts = box_counts(Graph(g_beta(1.5, 14)), range(4, 13))
    assert besov_criterion(counts, 1.5, 12).verdict == "converging"
    assert besov_criterion(counts, 0.9, 12).verdict == "diverging"
    with pytest.raises(ValueError):
        besov_criterion(counts, 1.5, 13)


def test_boxcounts_serialization():
    counts = box_counts(RectangleDomain(UNIT), range(0, 3))
    assert isinstance(counts, BoxCounts)
    assert counts.to_csv().splitlines() == ["j,N_j", "0,9", "1,16", "2,32"]


def test_bitmap_round_trip(tmp_path):
    bits = np.zeros((8, 8), bool)
    bits[2:6, 1:7] = True
    path = tmp_path / "b.txt"
    write_bitmap(path, bits)
    text = path.read_text().splitlines()
    assert text[0] == "DGRID 2 3" and len(text) == 9 and all(len(r) == 8 for r in text[1:])
    assert np.array_equal(read_bitmap(path), bits)
    dom = domain_from_json({"kind": "bitmap", "path": "b.txt"}, tmp_path)
    assert dom.contains(np.array([0.3, 0.2])) and not dom.contains(np.array([0.1, 0.1]))
    path.write_text("DGRID 2 3\n0101\n")
    with pytest.raises(ValueError):
        read_bitmap(path)


def test_bitmap_boundary_matches_rectangle():
    bits = np.zeros((16, 16), bool)
    bits[4:12, 4:12] = True
    G = build_grid(BitmapDomain(bits), 6)
    rect = RectangleBoundary(Rectangle((0.25, 0.25), (0.75, 0.75)))
    for j in range(7):
        assert lebesgue_boundary(G, j).count == rect.count(j)


def test_domain_from_json_kinds():
    assert isinstance(domain_from_json({"kind": "disk", "center": [0.5, 0.5], "radius": 0.2}),
                      DiskDomain)
    epi = domain_from_json({"kind": "epigraph", "beta": 1.5, "J": 10})
    assert isinstance(epi, EpigraphDomain) and epi.bbox.b[1] > 0
    with pytest.raises(ValueError):
        domain_from_json({"kind": "cloud"})


def test_epigraph_boundary_exact_vs_grid():
    E = EpigraphDomain(g_beta(1.5, 14))
    G = build_grid(E, 8)
    for j in (3, 5):
        exact = box_count(E, j)
        grid = lebesgue_boundary(G, j).count
        assert abs(grid - exact) <= 0.05 * exact


def test_indicator_empty_and_resolution():
    B = build_basis(4)
    G = build_grid(RectangleDomain(UNIT), 4)
    with pytest.raises(ValueError, match="resolution"):
        indicator_coeffs(G, B, 4)
    G.pixels[:] = False
    assert indicator_coeffs(G, B, 3).is_empty()


def test_indicator_unit_square():
    B = build_basis(4)
    G = build_grid(RectangleDomain(UNIT), 7)
    h = indicator_coeffs(G, B, 6)
    assert np.all(np.abs(h.scaling.values) <= 1 + 1e-12)
    for j in range(7):
        bound = B.N**2 * lebesgue_boundary(G, j).count
        assert all(blk.count() <= bound for _, blk in h.level_blocks(j))
    # stored entries outside the support test are absent, and their exact values vanish
    box = Rectangle((0.25, 0.25), (0.5, 0.5))
    small = indicator_field(RectangleDomain(box), B, 3, region=UNIT)
    scale = sum(v for i, j, k, v in small.entries() if i == 0)
    assert scale == pytest.approx(box.volume, abs=1e-12)
