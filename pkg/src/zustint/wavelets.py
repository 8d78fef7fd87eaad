"""Daubechies wavelets: embedded filters, cascade tables and tensor wavelets.

Coefficients follow the unnormalized convention
``c_ijk = 2^{dj} <h, psi^(i)(2^j . - k)>`` and ``c_k = <h, phi(. - k)>``.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .dyadic import Rectangle
from .funcrep import FunctionRep

NORMALIZATION = "2^(dj)<.,psi(2^j.-k)>"

# Low-pass filters of the extremal-phase Daubechies family, normalized to
# sum(h) = sqrt(2), indexed by the number of vanishing moments.
DAUBECHIES_FILTERS = {
    1: (
        0.7071067811865476,
        0.7071067811865476,
    ),
    2: (
        0.48296291314453416,
        0.8365163037378079,
        0.2241438680420134,
        -0.12940952255126037,
    ),
    3: (
        0.33267055295008263,
        0.8068915093110925,
        0.45987750211849154,
        -0.13501102001025458,
        -0.08544127388202666,
        0.03522629188570953,
    ),
    4: (
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ),
    5: (
        0.16010239797419293,
        0.6038292697971896,
        0.7243085284377729,
        0.13842814590132074,
        -0.24229488706638203,
        -0.032244869584638375,
        0.07757149384004572,
        -0.006241490212798274,
        -0.012580751999081999,
        0.0033357252854737712,
    ),
    6: (
        0.11154074335010947,
        0.49462389039845306,
        0.7511339080210954,
        0.31525035170919763,
        -0.22626469396543983,
        -0.12976686756726194,
        0.09750160558732304,
        0.027522865530305727,
        -0.03158203931748603,
        0.0005538422011614961,
        0.004777257510945511,
        -0.0010773010853084796,
    ),
    7: (
        0.07785205408500918,
        0.3965393194819173,
        0.7291320908462351,
        0.4697822874051931,
        -0.14390600392856498,
        -0.22403618499387498,
        0.07130921926683026,
        0.08061260915108308,
        -0.03802993693501441,
        -0.01657454163066688,
        0.01255099855609984,
        0.0004295779729213665,
        -0.0018016407040474908,
        0.00035371379997452024,
    ),
    8: (
        0.05441584224310401,
        0.31287159091429995,
        0.6756307362972898,
        0.5853546836542067,
        -0.015829105256349306,
        -0.2840155429615469,
        0.0004724845739132828,
        0.12874742662047847,
        -0.017369301001807547,
        -0.044088253930794755,
        0.013981027917398282,
        0.008746094047405777,
        -0.004870352993451574,
        -0.00039174037337694705,
        0.0006754494064505693,
        -0.00011747678412476953,
    ),
    9: (
        0.038077947363878345,
        0.24383467461259034,
        0.6048231236901112,
        0.6572880780513005,
        0.13319738582500756,
        -0.2932737832791749,
        -0.09684078322297646,
        0.14854074933810638,
        0.03072568147933338,
        -0.06763282906132997,
        0.00025094711483145197,
        0.022361662123679096,
        -0.004723204757751397,
        -0.00428150368246343,
        0.0018476468830562265,
        0.00023038576352319597,
        -0.0002519631889427101,
        3.93473203162716e-05,
    ),
    10: (
        0.026670057900555554,
        0.1881768000776915,
        0.5272011889317256,
        0.6884590394536035,
        0.2811723436605775,
        -0.24984642432731538,
        -0.19594627437737705,
        0.12736934033579325,
        0.09305736460357235,
        -0.07139414716639708,
        -0.029457536821875813,
        0.033212674059341,
        0.0036065535669561697,
        -0.010733175483330575,
        0.001395351747052901,
        0.001992405295185056,
        -0.0006858566949597116,
        -0.00011646685512928545,
        9.358867032006959e-05,
        -1.3264202894521244e-05,
    ),
}

# Approximate Hölder exponents of the scaling functions.
HOLDER_REGULARITY = {1: 0.0, 2: 0.550, 3: 1.088, 4: 1.618, 5: 1.969, 6: 2.189,
                     7: 2.460, 8: 2.760, 9: 3.073, 10: 3.361}


def _integer_values(h: np.ndarray, N: int) -> np.ndarray:
    """phi at 0..N: eigenvector of ``sqrt2 * h[2n - m]`` for eigenvalue 1, unit sum."""
    if N == 1:
        return np.array([1.0, 0.0])
    M = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        for m in range(N + 1):
            if 0 <= 2 * n - m <= N:
                M[n, m] = math.sqrt(2.0) * h[2 * n - m]
    A = np.vstack([M - np.eye(N + 1), np.ones((1, N + 1))])
    rhs = np.zeros(N + 2)
    rhs[-1] = 1.0
    v, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return v


def _cumulative_integer_values(h: np.ndarray, N: int) -> np.ndarray:
    """Phi(n) = int_0^n phi at 0..N from ``Phi(x) = sum_k h_k Phi(2x - k) / sqrt2``."""
    out = np.zeros(N + 1)
    out[N] = 1.0
    if N == 1:
        return out
    n_int = N - 1
    A = np.eye(n_int)
    b = np.zeros(n_int)
    for row, n in enumerate(range(1, N)):
        for k, hk in enumerate(h):
            m = 2 * n - k
            if m >= N:
                b[row] += hk / math.sqrt(2.0)
            elif m >= 1:
                A[row, m - 1] -= hk / math.sqrt(2.0)
    out[1:N] = np.linalg.solve(A, b)
    return out


def _refine(prev: np.ndarray, filt: np.ndarray, factor: float, gen: int, N: int,
            right_value: float, nested: bool = True) -> np.ndarray:
    """Values at generation ``gen`` from a generation ``gen - 1`` table.

    With ``nested`` the function is refinable with this filter, so the
    even-index entries are copied from ``prev`` and coarser tables embed
    exactly into finer ones.
    """
    step = 2 ** (gen - 1)
    n = np.arange(N * 2**gen + 1)
    out = np.zeros(n.size)
    top = N * step
    for k, fk in enumerate(filt):
        idx = n - k * step
        vals = np.where(idx > top, right_value, prev[np.clip(idx, 0, top)])
        vals = np.where(idx < 0, 0.0, vals)
        out += fk * vals
    out *= factor
    if nested:
        out[::2] = prev
    return out


@dataclass(frozen=True)
class WaveletBasis:
    """Daubechies filter pair with cascade tables on ``[0, N]``.

    ``phi``, ``psi`` hold values at ``i / 2^cascade_level``; ``Phi`` and ``Psi``
    the corresponding running integrals from 0.
    """

    order: int
    h: np.ndarray
    g: np.ndarray
    N: int
    cascade_level: int
    phi: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    Psi: np.ndarray = field(repr=False)

    @property
    def vanishing_moments(self) -> int:
        return self.order

    @property
    def regularity(self) -> float:
        return HOLDER_REGULARITY[self.order]

    def table(self, kind: str, gen: int) -> np.ndarray:
        """Subsample a cascade table at generation ``gen <= cascade_level``."""
        if not 0 <= gen <= self.cascade_level:
            raise ValueError(f"generation {gen} outside 0..{self.cascade_level}; "
                             "rebuild the basis with a deeper cascade")
        return getattr(self, kind)[:: 2 ** (self.cascade_level - gen)]

    def phi_at(self, x) -> np.ndarray:
        return _eval_table(self.phi, self.cascade_level, x, 0.0)

    def psi_at(self, x) -> np.ndarray:
        return _eval_table(self.psi, self.cascade_level, x, 0.0)

    def Phi_at(self, x) -> np.ndarray:
        return _eval_table(self.Phi, self.cascade_level, x, 1.0)

    def Psi_at(self, x) -> np.ndarray:
        return _eval_table(self.Psi, self.cascade_level, x, 0.0)


def _eval_table(table: np.ndarray, gen: int, x, right: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    t = x * 2.0**gen
    last = table.size - 1
    i = np.floor(t)
    frac = t - i
    i = np.clip(i.astype(np.int64), 0, last)
    nxt = np.minimum(i + 1, last)
    val = table[i] + frac * (table[nxt] - table[i])
    val = np.where(frac == 0.0, table[i], val)
    val = np.where(t < 0, 0.0, val)
    return np.where(t >= last, right, val)


def build_basis(family_order: int = 4, cascade_level: int = 10) -> WaveletBasis:
    """Daubechies basis with ``family_order`` vanishing moments (1 is Haar)."""
    if family_order not in DAUBECHIES_FILTERS:
        raise ValueError(f"unsupported order {family_order}; choose 1..10")
    if cascade_level < 1:
        raise ValueError("cascade_level must be positive")
    h = np.array(DAUBECHIES_FILTERS[family_order])
    N = h.size - 1
    g = np.array([(-1) ** k * h[N - k] for k in range(N + 1)])
    phi = _integer_values(h, N)
    Phi = _cumulative_integer_values(h, N)
    s2 = math.sqrt(2.0)
    for gen in range(1, cascade_level + 1):
        prev_phi, prev_Phi = phi, Phi
        phi = _refine(phi, h, s2, gen, N, 0.0)
        Phi = _refine(Phi, h, 1.0 / s2, gen, N, 1.0)
    psi = _refine(prev_phi, g, s2, cascade_level, N, 0.0, nested=False)
    Psi = _refine(prev_Phi, g, 1.0 / s2, cascade_level, N, 1.0, nested=False)
    for arr in (h, g, phi, psi, Phi, Psi):
        arr.setflags(write=False)
    return WaveletBasis(family_order, h, g, N, cascade_level, phi, psi, Phi, Psi)


@functools.lru_cache(maxsize=8)
def _deeper_basis(order: int, level: int) -> WaveletBasis:
    return build_basis(order, level)


def basis_for_level(basis: WaveletBasis, L: int) -> WaveletBasis:
    """``basis`` itself, or the same family with cascade tables down to generation ``L``."""
    return basis if L <= basis.cascade_level else _deeper_basis(basis.order, L)


def pattern_of(i: int, d: int) -> tuple[int, ...]:
    """Per-axis selector (1 = psi, 0 = phi) from the binary digits of ``i``."""
    if not 0 <= i < 2**d:
        raise ValueError(f"pattern index {i} outside 0..{2**d - 1}")
    return tuple((i >> l) & 1 for l in range(d))


class TensorWavelet(FunctionRep):
    """``x -> prod_l T_l(2^j x_l - k_l)`` with ``T_l`` either phi or psi."""

    kind = "preset"

    def __init__(self, basis: WaveletBasis, pattern: Sequence[int], j: int = 0,
                 k: Sequence[int] | None = None):
        d = len(pattern)
        super().__init__(d, min(1.0, max(basis.regularity, 0.01)),
                         f"wavelet pattern {tuple(pattern)} j={j} k={k}")
        self.basis = basis
        self.pattern = tuple(int(p) for p in pattern)
        self.j = int(j)
        self.k = tuple(int(v) for v in (k if k is not None else (0,) * d))
        self.smooth = basis.regularity >= 1.0

    def _axis_values(self, l: int, x) -> np.ndarray:
        u = np.asarray(x, dtype=float) * 2.0**self.j - self.k[l]
        return self.basis.psi_at(u) if self.pattern[l] else self.basis.phi_at(u)

    def _eval(self, pts):
        out = self._axis_values(0, pts[..., 0])
        for l in range(1, self.dim):
            out = out * self._axis_values(l, pts[..., l])
        return out

    def on_grid(self, axes):
        out = None
        for l, ax in enumerate(axes):
            shape = [1] * self.dim
            shape[l] = -1
            v = self._axis_values(l, ax).reshape(shape)
            out = v if out is None else out * v
        return np.broadcast_to(out, tuple(len(a) for a in axes)).copy()

    @property
    def axes_used(self):
        return frozenset(range(self.dim))

    @property
    def support(self):
        s = 2.0**-self.j
        return tuple((k * s, (k + self.basis.N) * s) for k in self.k)


class WaveletSeries(FunctionRep):
    """1-D Hölder function ``linear*x + scale * sum_l 2^(-gamma l) sum_k w_lk T(2^l x - k)``.

    ``T`` is the cumulative wavelet ``Psi`` (default) or ``psi``; both are
    compactly supported, so every level adds bumps of height ``2^(-gamma l)``
    and width ``2^-l`` and the sum is exactly ``gamma``-Hölder. Weights are
    random signs. With ``inside`` only shifts supported in [0, 1] are used
    and the function vanishes outside [0, 1].
    """

    kind = "wavelet_series"

    def __init__(self, basis: WaveletBasis, gamma: float, J: int, rng: np.random.Generator,
                 kind: str = "Psi", linear: float = 0.0, scale: float = 1.0,
                 inside: bool = False):
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if kind not in ("Psi", "psi"):
            raise ValueError("kind must be 'Psi' or 'psi'")
        super().__init__(1, gamma, f"wavelet series gamma={gamma} J={J} {kind}")
        self.basis = basis
        self.gamma = float(gamma)
        self.J = int(J)
        self.T = kind
        self.linear = float(linear)
        self.scale = float(scale)
        self.inside = bool(inside)
        N = basis.N
        self.weights = [rng.choice([-1.0, 1.0], 2**l + N) for l in range(self.J + 1)]

    def _eval(self, pts):
        x = pts[..., 0]
        N = self.basis.N
        tab = self.basis.Psi_at if self.T == "Psi" else self.basis.psi_at
        out = self.linear * x
        for l in range(self.J + 1):
            t = x * 2.0**l
            fl = np.floor(t).astype(np.int64)
            amp = self.scale * 2.0 ** (-self.gamma * l)
            w = self.weights[l]
            for sft in range(N):
                k = fl - sft
                ok = (k >= -N) & (k <= 2**l - 1)
                if self.inside:
                    ok &= (k >= 0) & (k + N <= 2**l)
                kk = np.clip(k + N, 0, w.size - 1)
                out = out + np.where(ok, amp * w[kk] * tab(t - k), 0.0)
        return out

    @property
    def support(self):
        if self.inside and self.linear == 0.0:
            return ((0.0, 1.0),)
        return ((-math.inf, math.inf),)

    def to_json(self):
        return {"kind": self.kind, "gamma": self.gamma, "J": self.J, "T": self.T,
                "linear": self.linear, "scale": self.scale, "inside": self.inside,
                "basis_order": self.basis.order}


def tensor_wavelet(basis: WaveletBasis, i: int, d: int) -> TensorWavelet:
    """The mother wavelet ``psi^(i)`` on R^d; bit l of ``i`` selects psi on axis l+1."""
    if i == 0:
        raise ValueError("i = 0 is the pure scaling pattern, not a wavelet")
    return TensorWavelet(basis, pattern_of(i, d))


# ---------------------------------------------------------------------------
# coefficient fields
# ---------------------------------------------------------------------------

@dataclass
class Block:
    """Dense array of coefficients indexed from ``origin``; ``mask`` marks stored entries."""

    origin: tuple[int, ...]
    values: np.ndarray
    mask: np.ndarray | None = None

    def stored(self) -> np.ndarray:
        return np.ones(self.values.shape, bool) if self.mask is None else self.mask

    def count(self) -> int:
        return int(self.stored().sum())

    def entries(self) -> Iterator[tuple[tuple[int, ...], float]]:
        st = self.stored()
        for idx in zip(*np.nonzero(st)):
            yield tuple(int(o + i) for o, i in zip(self.origin, idx)), float(self.values[idx])

    def get(self, k: Sequence[int]) -> float:
        idx = tuple(int(a) - o for a, o in zip(k, self.origin))
        if any(i < 0 or i >= n for i, n in zip(idx, self.values.shape)):
            return 0.0
        if self.mask is not None and not self.mask[idx]:
            return 0.0
        return float(self.values[idx])


def _overlap(a: Block, b: Block) -> float:
    """sum_k a[k] b[k] over shared indices."""
    sl_a, sl_b = [], []
    for oa, ob, na, nb in zip(a.origin, b.origin, a.values.shape, b.values.shape):
        lo = max(oa, ob)
        hi = min(oa + na, ob + nb)
        if hi <= lo:
            return 0.0
        sl_a.append(slice(lo - oa, hi - oa))
        sl_b.append(slice(lo - ob, hi - ob))
    va = a.values[tuple(sl_a)]
    vb = b.values[tuple(sl_b)]
    if a.mask is not None:
        va = np.where(a.mask[tuple(sl_a)], va, 0.0)
    if b.mask is not None:
        vb = np.where(b.mask[tuple(sl_b)], vb, 0.0)
    return float(np.sum(va * vb))


@dataclass
class CoefficientField:
    """Scaling coefficients ``c_k`` and detail coefficients ``c_ijk``.

    Entries are kept in dense blocks per ``(i, j)``; indices outside a block
    (or masked out) are absent and read as zero.
    """

    d: int
    basis_order: int
    normalization: str = NORMALIZATION
    scaling: Block | None = None
    details: dict = field(default_factory=dict)
    complete: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def levels(self) -> list[int]:
        return sorted({j for (_, j) in self.details})

    def get(self, i: int, j: int, k: Sequence[int]) -> float:
        if i == 0:
            return 0.0 if self.scaling is None else self.scaling.get(k)
        blk = self.details.get((i, j))
        return 0.0 if blk is None else blk.get(k)

    def level_blocks(self, j: int) -> list[tuple[int, Block]]:
        return [(i, self.details[(i, jj)]) for (i, jj) in sorted(self.details) if jj == j]

    def count(self, j: int) -> int:
        return sum(b.count() for _, b in self.level_blocks(j))

    def max_abs(self, j: int) -> float:
        vals = [np.max(np.abs(np.where(b.stored(), b.values, 0.0)), initial=0.0)
                for _, b in self.level_blocks(j)]
        return float(max(vals, default=0.0))

    def l1(self, j: int) -> float:
        return float(sum(np.sum(np.abs(np.where(b.stored(), b.values, 0.0)))
                         for _, b in self.level_blocks(j)))

    def entries(self) -> Iterator[tuple[int, int, tuple[int, ...], float]]:
        if self.scaling is not None:
            for k, v in self.scaling.entries():
                yield 0, 0, k, v
        for (i, j) in sorted(self.details, key=lambda t: (t[1], t[0])):
            for k, v in self.details[(i, j)].entries():
                yield i, j, k, v

    def is_empty(self) -> bool:
        return next(self.entries(), None) is None

    def header(self) -> dict:
        return {"basis_order": self.basis_order, "normalization": self.normalization,
                "d": self.d, "levels": self.levels, "complete": self.complete}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j"] + [f"k{l + 1}" for l in range(self.d)] + ["value"])
        for i, j, k, v in self.entries():
            w.writerow([i, j, *k, repr(v)])
        return buf.getvalue()

    def header_json(self) -> str:
        return json.dumps(self.header(), sort_keys=True, indent=2)


def empty_field(d: int, basis_order: int) -> CoefficientField:
    return CoefficientField(d, basis_order)


# ---------------------------------------------------------------------------
# lattice correlation
# ---------------------------------------------------------------------------

def support_index_range(lo: float, hi: float, j: int, N: int) -> tuple[int, int]:
    """Inclusive k range with ``[k/2^j, (k+N)/2^j]`` meeting ``[lo, hi]``."""
    s = 2.0**j
    return math.ceil(lo * s) - N, math.floor(hi * s)


def _correlate_axis(W: np.ndarray, axis: int, table: np.ndarray, q: int,
                    m0: int, kmin: int, K: int) -> np.ndarray:
    """``out[k] = sum_r table[r] W[(kmin + k) 2^q + r - m0]`` along ``axis``."""
    step = 2**q
    need_lo = kmin * step - m0
    need_hi = (kmin + K - 1) * step + table.size - 1 - m0
    n = W.shape[axis]
    pad_lo = max(0, -need_lo)
    pad_hi = max(0, need_hi - (n - 1))
    if pad_lo or pad_hi:
        widths = [(0, 0)] * W.ndim
        widths[axis] = (pad_lo, pad_hi)
        W = np.pad(W, widths)
    start = need_lo + pad_lo
    Wm = np.moveaxis(W, axis, -1)[..., start: start + (K - 1) * step + table.size]
    windows = np.lib.stride_tricks.sliding_window_view(Wm, table.size, axis=-1)[..., ::step, :]
    out = windows @ table
    return np.moveaxis(out, -1, axis)


def lattice_correlations(W: np.ndarray, m0: Sequence[int], M: int, j: int,
                         basis: WaveletBasis, kranges: Sequence[tuple[int, int]],
                         patterns: Sequence[tuple[int, ...]]) -> dict:
    """Raw sums ``sum_m W[m] prod_l T_l(2^j x_m - k_l)`` for lattice points ``x_m = (m0 + m)/2^M``.

    Returns a dict mapping each pattern to an array indexed by ``k - kmin``.
    """
    q = M - j
    tabs = (basis.table("phi", q), basis.table("psi", q))
    d = W.ndim
    partial = {(): W}
    for l in range(d):
        kmin, kmax = kranges[l]
        K = kmax - kmin + 1
        nxt = {}
        wanted = {p[: l + 1] for p in patterns}
        for prefix in wanted:
            src = partial[prefix[:-1]]
            nxt[prefix] = _correlate_axis(src, l, tabs[prefix[-1]], q, m0[l], kmin, K)
        partial = nxt
    return {p: partial[p] for p in patterns}


def function_coeffs(h: FunctionRep, basis: WaveletBasis, j_max: int, region: Rectangle,
                    quad_level: int | None = None) -> CoefficientField:
    """Wavelet coefficients of an ordinary function by cascade-table quadrature.

    All ``(j <= j_max, k)`` whose support cube meets ``region`` are stored.
    The quadrature is the node sum over the lattice of spacing
    ``2^-(j + quad_level)``.
    """
    d = region.d
    if h.dim != d:
        raise ValueError("function and region dimensions differ")
    if quad_level is None:
        quad_level = basis.cascade_level if d == 1 else min(basis.cascade_level, 7 if d == 2 else 5)
    q = quad_level
    field_ = CoefficientField(d, basis.order, meta={"quad_level": q})
    sup = h.support
    for j in [0] + list(range(0, j_max + 1)):
        M = j + q
        kr = [support_index_range(lo, hi, j, basis.N) for lo, hi in zip(region.a, region.b)]
        m_lo, m_hi = [], []
        for l, (k0, k1) in enumerate(kr):
            lo = k0 * 2**q
            hi = (k1 + basis.N) * 2**q
            slo, shi = sup[l]
            if slo > -math.inf:
                lo = max(lo, math.floor(slo * 2**M))
            if shi < math.inf:
                hi = min(hi, math.ceil(shi * 2**M))
            m_lo.append(lo)
            m_hi.append(max(hi, lo))
        axes = [(np.arange(a, b + 1) / 2.0**M) for a, b in zip(m_lo, m_hi)]
        W = h.on_grid(axes)
        if field_.scaling is None:
            out = lattice_correlations(W, m_lo, M, j, basis, kr, [(0,) * d])
            field_.scaling = Block(tuple(k0 for k0, _ in kr), out[(0,) * d] * 2.0 ** (-d * q))
            continue
        pats = [pattern_of(i, d) for i in range(1, 2**d)]
        out = lattice_correlations(W, m_lo, M, j, basis, kr, pats)
        for i, p in enumerate(pats, start=1):
            field_.details[(i, j)] = Block(tuple(k0 for k0, _ in kr), out[p] * 2.0 ** (-d * q))
    return field_
