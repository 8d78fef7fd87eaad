"""Wavelet coefficients of the distribution ``f dg^1 ^ ... ^ dg^d``.

Coefficient sweeps evaluate all ``c_k`` and ``c_ijk`` from one common
lattice of cells at absolute level ``L``: every cell contributes
``f(lower corner) * int_cell dg`` weighted by the wavelet value at its lower
corner. Additivity of the integral makes this the germ sum of each
coefficient over its support cube. The lattice is deepened until the change
from ``L - 1`` to ``L`` is below ``tolerance * 2^(gamma j)`` at every level.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dyadic import Rectangle
from .funcrep import Constant, Coordinate, FunctionRep, Monomial, Product, Sum, Tensor1D, mollify
from .sewing import ExponentWarning, SewingConfig, _parity, cell_forms, zust_integral
from .wavelets import (Block, CoefficientField, TensorWavelet, WaveletBasis, basis_for_level,
                       build_basis,
                       lattice_correlations, pattern_of, support_index_range)


MAX_SEPARABLE_LEVEL = 18


@dataclass
class DistributionRep:
    """The distribution ``T = f dg^1 ^ ... ^ dg^d`` with its exponent data.

    Parameters
    ----------
    f, g : FunctionRep
        Integrand and the d integrators; their declared exponents give
        ``alpha`` and ``beta_i``.
    basis : WaveletBasis
    sewing : SewingConfig
        Used by single-coefficient evaluation.
    tolerance : float
        Target for the lattice Cauchy gap, scaled by ``2^(gamma j)``.
    """

    f: FunctionRep
    g: Sequence[FunctionRep]
    basis: WaveletBasis = field(default_factory=build_basis)
    sewing: SewingConfig = field(default_factory=SewingConfig)
    tolerance: float = 1e-4
    lattice_offset: int = 4
    max_extra_levels: int = 4
    max_extra_levels_separable: int = 12
    separable: bool = True
    cache: dict = field(default_factory=dict, repr=False)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.g = list(self.g)
        d = self.f.dim
        if len(self.g) != d or any(gi.dim != d for gi in self.g):
            raise ValueError("f and the g's must share the dimension d = len(g)")
        if self.alpha + self.beta <= self.d:
            msg = (f"alpha + beta = {self.alpha + self.beta:.4g} <= d = {d}; "
                   "coefficients carry no convergence guarantee")
            warnings.warn(msg, ExponentWarning, stacklevel=2)
            self.warnings.append(msg)

    @property
    def d(self) -> int:
        return self.f.dim

    @property
    def alpha(self) -> float:
        return self.f.exponent

    @property
    def betas(self) -> list[float]:
        return [gi.exponent for gi in self.g]

    @property
    def beta(self) -> float:
        return sum(self.betas)

    @property
    def gamma(self) -> float:
        return self.d - self.beta

    @property
    def warning_mode(self) -> bool:
        return self.alpha + self.beta <= self.d


def dist_coeff(D: DistributionRep, i: int, j: int, k: Sequence[int]) -> float:
    """Single coefficient by a Züst integral over the support cube.

    ``i = 0`` gives the scaling coefficient ``c_k`` (``j`` must be 0).
    """
    d = D.d
    if i == 0 and j != 0:
        raise ValueError("scaling coefficients live at j = 0")
    key = (i, j, tuple(int(v) for v in k))
    if key in D.cache:
        return D.cache[key]
    wav = TensorWavelet(D.basis, pattern_of(i, d), j, k)
    s = 2.0**-j
    cube = Rectangle(tuple(v * s for v in key[2]), tuple((v + D.basis.N) * s for v in key[2]))
    cfg = replace(D.sewing, tolerance=D.tolerance * 2.0 ** (D.gamma * j),
                  min_level=max(D.sewing.min_level, D.lattice_offset))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExponentWarning)
        res = zust_integral(Product([D.f, wav]), D.g, cube, cfg)
    val = 2.0 ** (d * j) * res.value
    D.cache[key] = val
    return val


def _node_range(lo_need: int, hi_need: int, sup: tuple[float, float], L: int) -> tuple[int, int]:
    lo, hi = lo_need, hi_need
    if sup[0] > -math.inf:
        lo = max(lo, math.floor(sup[0] * 2**L))
    if sup[1] < math.inf:
        hi = min(hi, math.ceil(sup[1] * 2**L) + 1)
    return lo, max(hi, lo + 1)


def _lattice_field(D: DistributionRep, basis: WaveletBasis, j_max: int, region: Rectangle,
                   L: int) -> CoefficientField:
    d = D.d
    N = basis.N
    kranges = {j: [support_index_range(lo, hi, j, N) for lo, hi in zip(region.a, region.b)]
               for j in range(j_max + 1)}
    sup = D.f.support
    n_lo, n_hi = [], []
    for l in range(d):
        need_lo = min(kranges[j][l][0] * 2 ** (L - j) for j in kranges)
        need_hi = max((kranges[j][l][1] + N) * 2 ** (L - j) for j in kranges)
        a, b = _node_range(need_lo, need_hi, sup[l], L)
        n_lo.append(a)
        n_hi.append(b)
    axes = [np.arange(a, b + 1) / 2.0**L for a, b in zip(n_lo, n_hi)]
    BI = cell_forms([gi.on_grid(axes) for gi in D.g])
    F = D.f.on_grid([ax[:-1] for ax in axes])
    W = F * BI
    out = CoefficientField(d, basis.order, meta={"lattice_level": L})
    for j in range(j_max + 1):
        kr = kranges[j]
        origin = tuple(k0 for k0, _ in kr)
        if j == 0:
            sc = lattice_correlations(W, n_lo, L, 0, basis, kr, [(0,) * d])
            out.scaling = Block(origin, sc[(0,) * d])
        pats = [pattern_of(i, d) for i in range(1, 2**d)]
        res = lattice_correlations(W, n_lo, L, j, basis, kr, pats)
        for i, p in enumerate(pats, start=1):
            out.details[(i, j)] = Block(origin, res[p] * 2.0 ** (d * j))
    return out


# ---------------------------------------------------------------------------
# separable fast path
# ---------------------------------------------------------------------------

def _f_factors(f: FunctionRep):
    """``(const, {axis: [1-D factors]})`` when ``f`` is a product of 1-D lifts, else None."""
    if isinstance(f, Constant):
        return f.value, {}
    if isinstance(f, Tensor1D):
        return 1.0, {f.axis: [f.of]}
    if isinstance(f, Coordinate):
        return 1.0, {f.axis: [Coordinate(0, 1)]}
    if isinstance(f, Sum) and len(f.parts) == 1:
        inner = _f_factors(f.parts[0])
        return None if inner is None else (f.weights[0] * inner[0], inner[1])
    if isinstance(f, Product):
        const, out = 1.0, {}
        for part in f.parts:
            inner = _f_factors(part)
            if inner is None:
                return None
            const *= inner[0]
            for ax, fs in inner[1].items():
                out.setdefault(ax, []).extend(fs)
        return const, out
    return None


def _g_terms(g: FunctionRep, weight: float = 1.0):
    """List of ``(weight, axis, 1-D function)`` when ``g`` is a sum of 1-D lifts, else None."""
    if isinstance(g, Constant):
        return []
    if isinstance(g, Coordinate):
        return [(weight, g.axis, Coordinate(0, 1))]
    if isinstance(g, Monomial):
        return [(weight, g.axis, Monomial(0, g.power, 1))]
    if isinstance(g, Tensor1D):
        return [(weight, g.axis, g.of)]
    if isinstance(g, Sum):
        out = []
        for w, part in zip(g.weights, g.parts):
            inner = _g_terms(part, weight * w)
            if inner is None:
                return None
            out += inner
        return out
    return None


def separable_structure(D: DistributionRep):
    """Decompose ``f`` and the ``g``'s into 1-D pieces when possible.

    Returns ``(const, factors, A)`` with ``factors[l]`` the 1-D factor of
    ``f`` on axis ``l`` (None for 1) and ``A[m][l]`` the part of ``g^m``
    depending on axis ``l`` (None for none), or None if not separable.
    For such data every cell form is an alternating sum of products of 1-D
    increments, so lattice germ sums factor into 1-D lattice sums.
    """
    ff = _f_factors(D.f)
    if ff is None:
        return None
    const, fac = ff
    d = D.d
    factors = []
    for l in range(d):
        fs = fac.get(l, [])
        factors.append(None if not fs else fs[0] if len(fs) == 1 else Product(fs))
    A = []
    for gm in D.g:
        terms = _g_terms(gm)
        if terms is None:
            return None
        row = []
        for l in range(d):
            parts = [(w, h) for w, ax, h in terms if ax == l]
            row.append(None if not parts else Sum([h for _, h in parts], [w for w, _ in parts]))
        A.append(row)
    return const, factors, A


def _axis_sums(factor, a, basis, L, j_max, kranges_l, sup):
    """1-D lattice sums ``sum_n p(x_n) T(2^j x_n - k) (a(x_{n+1}) - a(x_n))`` for T in {phi, psi}."""
    N = basis.N
    need_lo = min(kranges_l[j][0] * 2 ** (L - j) for j in kranges_l)
    need_hi = max((kranges_l[j][1] + N) * 2 ** (L - j) for j in kranges_l)
    lo, hi = _node_range(need_lo, need_hi, sup, L)
    x = np.arange(lo, hi + 1) / 2.0**L
    inc = np.diff(a(x))
    W = inc if factor is None else factor(x[:-1]) * inc
    out = {}
    for j in range(j_max + 1):
        res = lattice_correlations(W, [lo], L, j, basis, [kranges_l[j]], [(0,), (1,)])
        out[(j, 0)] = res[(0,)]
        out[(j, 1)] = res[(1,)]
    return out


def _separable_field(D, structure, basis, j_max, region, L) -> CoefficientField:

    const, factors, A = structure
    d = D.d
    N = basis.N
    kranges = {j: [support_index_range(lo, hi, j, N) for lo, hi in zip(region.a, region.b)]
               for j in range(j_max + 1)}
    sup = D.f.support
    sums = {}
    for m in range(d):
        for l in range(d):
            if A[m][l] is not None:
                sums[(m, l)] = _axis_sums(factors[l], A[m][l], basis, L, j_max,
                                          {j: kranges[j][l] for j in kranges}, sup[l])
    out = CoefficientField(d, basis.order, meta={"lattice_level": L, "separable": True})

    def block(j, pattern):
        shape = tuple(k1 - k0 + 1 for k0, k1 in kranges[j])
        terms = []
        for perm in itertools.permutations(range(d)):
            # g^m is differentiated along axis perm[m]
            if any((m, perm[m]) not in sums for m in range(d)):
                terms.append(np.zeros(shape))
                continue
            val = None
            for l in range(d):
                m = perm.index(l)
                v = sums[(m, l)][(j, pattern[l])]
                v = v.reshape([-1 if ax == l else 1 for ax in range(d)])
                val = v if val is None else val * v
            val = np.broadcast_to(val, shape)
            terms.append(val if _parity(perm) > 0 else -val)
        if d == 1:
            return const * terms[0]
        T = np.sort(np.stack(terms), axis=0)
        n = len(terms)
        acc = T[0] + T[n - 1]
        for i in range(1, n // 2):
            acc = acc + (T[i] + T[n - 1 - i])
        return const * acc

    for j in range(j_max + 1):
        origin = tuple(k0 for k0, _ in kranges[j])
        if j == 0:
            out.scaling = Block(origin, block(0, (0,) * d))
        for i in range(1, 2**d):
            out.details[(i, j)] = Block(origin, block(j, pattern_of(i, d)) * 2.0 ** (d * j))
    return out


def _lattice_cells(D: DistributionRep, j_max: int, region: Rectangle, L: int) -> int:
    N = D.basis.N
    total = 1
    for l, (lo, hi) in enumerate(zip(region.a, region.b)):
        a = (math.ceil(lo) - N) * 2**L
        b = (math.floor(hi) + N) * 2**L
        a, b = _node_range(a, b, D.f.support[l], L)
        total *= b - a
    return total


def _field_gap(a: CoefficientField, b: CoefficientField, j: int) -> float:
    gap = 0.0
    if j == 0 and a.scaling is not None:
        gap = float(np.max(np.abs(a.scaling.values - b.scaling.values), initial=0.0))
    for i, blk in a.level_blocks(j):
        other = b.details[(i, j)]
        gap = max(gap, float(np.max(np.abs(blk.values - other.values), initial=0.0)))
    return gap


def coeff_sweep(D: DistributionRep, j_max: int, region: Rectangle | None,
                lattice_level: int | None = None) -> CoefficientField:
    """All coefficients with support cube meeting ``region`` for ``j <= j_max``.

    With ``lattice_level`` given the lattice is fixed; otherwise it starts at
    ``j_max + lattice_offset`` and deepens (at most ``max_extra_levels``
    times) until the per-level gap meets ``tolerance * 2^(gamma j)``. If the
    cell budget ``sewing.memo_capacity`` cannot hold the lattice, the
    returned field covers fewer levels and is flagged incomplete.
    ``region=None`` stands for the empty region and gives an empty field.
    """
    d = D.d
    if region is None:
        return CoefficientField(d, D.basis.order)
    if region.d != d:
        raise ValueError("region dimension differs from the distribution's")
    key = ("sweep", j_max, region, lattice_level)
    if key in D.cache:
        return D.cache[key]
    budget = D.sewing.memo_capacity
    complete = True
    structure = separable_structure(D) if D.separable else None
    if lattice_level is not None:
        levels = [lattice_level]
    else:
        start = j_max + D.lattice_offset
        extra = D.max_extra_levels if structure is None else D.max_extra_levels_separable
        levels = list(range(start, start + extra + 1))
    if structure is not None:
        return _separable_sweep(D, structure, j_max, region, levels, key)
    while _lattice_cells(D, j_max, region, levels[0]) > budget:
        complete = False
        if j_max == 0 or lattice_level is not None:
            return CoefficientField(d, D.basis.order, complete=False,
                                    meta={"reason": "budget-exceeded"})
        j_max -= 1
        levels = [lv - 1 for lv in levels]
    prev = _lattice_field(D, basis_for_level(D.basis, levels[0] - 1), j_max, region,
                          levels[0] - 1)
    gaps: list = []
    current = prev
    for L in levels:
        if _lattice_cells(D, j_max, region, L) > budget:
            complete = False
            break
        current = _lattice_field(D, basis_for_level(D.basis, L), j_max, region, L)
        gaps = [_field_gap(current, prev, j) for j in range(j_max + 1)]
        prev = current
        if _gaps_ok(D, gaps):
            break
    current.complete = complete
    current.meta.update({"gaps": gaps, "j_max": j_max, "tolerance": D.tolerance,
                         "converged": _gaps_ok(D, gaps)})
    D.cache[key] = current
    return current


def _gaps_ok(D: DistributionRep, gaps: Sequence[float]) -> bool:
    return bool(gaps) and all(gp <= D.tolerance * 2.0 ** (D.gamma * j) for j, gp in enumerate(gaps))


def _separable_sweep(D, structure, j_max, region, levels, key) -> CoefficientField:
    levels = [L for L in levels if L <= MAX_SEPARABLE_LEVEL] or [min(levels)]
    prev = _separable_field(D, structure, basis_for_level(D.basis, levels[0] - 1), j_max,
                            region, levels[0] - 1)
    current, gaps = prev, []
    for L in levels:
        current = _separable_field(D, structure, basis_for_level(D.basis, L), j_max, region, L)
        gaps = [_field_gap(current, prev, j) for j in range(j_max + 1)]
        prev = current
        if _gaps_ok(D, gaps):
            break
    current.meta.update({"gaps": gaps, "j_max": j_max, "tolerance": D.tolerance,
                         "converged": _gaps_ok(D, gaps)})
    D.cache[key] = current
    return current


def regularity_fit(C: CoefficientField, j_min: int, j_max: int) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log2 max_{i,k} |c_ijk|`` against ``j``."""
    js, ys = [], []
    for j in range(j_min, j_max + 1):
        m = C.max_abs(j)
        if m > 0.0:
            js.append(j)
            ys.append(math.log2(m))
    if len(js) < 3:
        raise ValueError("insufficient levels: fewer than 3 nonzero levels in the window")
    slope, intercept = np.polyfit(np.array(js, float), np.array(ys), 1)
    return float(slope), float(intercept)


def regularity_report(C: CoefficientField, j_min: int, j_max: int) -> dict:
    slope, intercept = regularity_fit(C, j_min, j_max)
    return {"slope": slope, "intercept": intercept,
            "levels": {j: C.max_abs(j) for j in range(j_min, j_max + 1)},
            "window": [j_min, j_max]}


def weighted_distance(a: CoefficientField, b: CoefficientField, gamma_prime: float,
                      j_max: int) -> float:
    """``sup |c(a) - c(b)| 2^(-gamma' j)`` over the scaling block and levels ``<= j_max``."""
    dist = 0.0
    if a.scaling is not None and b.scaling is not None:
        dist = float(np.max(np.abs(a.scaling.values - b.scaling.values), initial=0.0))
    for j in range(j_max + 1):
        for i, blk in a.level_blocks(j):
            diff = np.max(np.abs(blk.values - b.details[(i, j)].values), initial=0.0)
            dist = max(dist, float(diff) * 2.0 ** (-gamma_prime * j))
    return dist


def continuity_study(D: DistributionRep, mollification_levels: Sequence[int], j_max: int = 4,
                     region: Rectangle | None = None, gamma_prime: float | None = None,
                     lattice_level: int | None = None) -> list[dict]:
    """Weighted coefficient distance between ``f dg_n`` and ``f dg`` for each ``n``.

    ``g_n`` mollifies every integrator at radius ``1/n``; all fields share
    one lattice so the distances reflect the data, not the discretization.
    ``gamma_prime`` defaults to ``gamma + 0.1 d``.
    """
    ns = list(mollification_levels)
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("mollification levels must be increasing")
    region = region or Rectangle.unit(D.d)
    gp = D.gamma + 0.1 * D.d if gamma_prime is None else gamma_prime
    L = lattice_level if lattice_level is not None else j_max + D.lattice_offset
    base = coeff_sweep(D, j_max, region, lattice_level=L)
    rows = []
    for n in ns:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExponentWarning)
            Dn = DistributionRep(D.f, [mollify(gi, n) for gi in D.g], D.basis, D.sewing,
                                 D.tolerance, D.lattice_offset, D.max_extra_levels)
        cn = coeff_sweep(Dn, j_max, region, lattice_level=L)
        rows.append({"n": n, "distance": weighted_distance(cn, base, gp, j_max),
                     "gamma_prime": gp, "lattice_level": L})
    return rows
