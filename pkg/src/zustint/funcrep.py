"""Evaluable Hölder functions: presets, Schauder series, composites, mollification.

Every representation evaluates on point arrays of shape ``(..., d)`` and on
tensor grids through :meth:`FunctionRep.on_grid`, which composite kinds
implement separably so that grid sampling costs one 1-D evaluation per axis.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .dyadic import Rectangle

MOLLIFIER_NODES = 64
INF = math.inf


class FunctionRep:
    """Base class of evaluable functions on R^d.

    Parameters
    ----------
    dim : int
        Number of variables.
    exponent : float
        Declared Hölder exponent in (0, 1].
    description : str
        Free-form label carried into reports.
    """

    kind = "preset"
    smooth = False

    def __init__(self, dim: int, exponent: float = 1.0, description: str = ""):
        if dim < 1:
            raise ValueError("dimension must be positive")
        if not 0.0 < exponent <= 1.0:
            raise ValueError(f"declared exponent {exponent} outside (0, 1]")
        self.dim = int(dim)
        self.exponent = float(exponent)
        self.description = description

    # evaluation -----------------------------------------------------------
    def _eval(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return self._eval(x[..., None])
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected points with last axis {self.dim}, got {x.shape}")
        return self._eval(x)

    def on_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid ``axes[0] x ... x axes[d-1]``."""
        if len(axes) != self.dim:
            raise ValueError("one coordinate array per axis is required")
        mesh = np.meshgrid(*[np.asarray(a, dtype=float) for a in axes], indexing="ij")
        return self._eval(np.stack(mesh, axis=-1))

    # structure ------------------------------------------------------------
    @property
    def axes_used(self) -> frozenset:
        return frozenset(range(self.dim))

    @property
    def support(self) -> tuple[tuple[float, float], ...]:
        """Per-axis closed interval outside of which the function vanishes."""
        return ((-INF, INF),) * self.dim

    def to_json(self) -> dict:
        return {"kind": self.kind, "description": self.description}

    # algebra --------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Constant(other, self.dim)
        return Sum([self, other])

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Constant(other, self.dim)
        return Sum([self, other], [1.0, -1.0])

    def __neg__(self):
        return Sum([self], [-1.0])

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Sum([self], [float(other)])
        return Product([self, other])

    __rmul__ = __mul__

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim} {self.description}>"


class Constant(FunctionRep):
    smooth = True

    def __init__(self, value: float, dim: int = 1):
        super().__init__(dim, 1.0, f"constant {value}")
        self.value = float(value)

    def _eval(self, pts):
        return np.full(pts.shape[:-1], self.value)

    def on_grid(self, axes):
        return np.full(tuple(len(a) for a in axes), self.value)

    @property
    def axes_used(self):
        return frozenset()

    def to_json(self):
        return {"kind": "preset", "name": "constant", "value": self.value}


class Coordinate(FunctionRep):
    """``x -> x[axis]`` (0-based axis)."""

    smooth = True

    def __init__(self, axis: int, dim: int):
        if not 0 <= axis < dim:
            raise ValueError(f"axis {axis} out of range for dimension {dim}")
        super().__init__(dim, 1.0, f"x{axis + 1}")
        self.axis = axis

    def _eval(self, pts):
        return pts[..., self.axis].copy()

    def on_grid(self, axes):
        shape = [1] * self.dim
        shape[self.axis] = -1
        full = tuple(len(a) for a in axes)
        return np.broadcast_to(np.asarray(axes[self.axis], float).reshape(shape), full).copy()

    @property
    def axes_used(self):
        return frozenset({self.axis})

    def to_json(self):
        return {"kind": "preset", "name": "coordinate", "axis": self.axis + 1}


class Monomial(FunctionRep):
    """``x -> x[axis] ** power``."""

    smooth = True

    def __init__(self, axis: int, power: int, dim: int):
        if not 0 <= axis < dim:
            raise ValueError(f"axis {axis} out of range for dimension {dim}")
        super().__init__(dim, 1.0, f"x{axis + 1}^{power}")
        self.axis = axis
        self.power = int(power)

    def _eval(self, pts):
        return pts[..., self.axis] ** self.power

    def on_grid(self, axes):
        return Tensor1D(_Power1D(self.power), self.axis, self.dim).on_grid(axes)

    @property
    def axes_used(self):
        return frozenset({self.axis})

    def to_json(self):
        return {"kind": "preset", "name": "monomial", "axis": self.axis + 1, "power": self.power}


class _Power1D(FunctionRep):
    smooth = True

    def __init__(self, power):
        super().__init__(1, 1.0, f"x^{power}")
        self.power = power

    def _eval(self, pts):
        return pts[..., 0] ** self.power


class SineBump(FunctionRep):
    """``sin^2(pi u)`` on ``u = (x - lo)/(hi - lo)`` in [0, 1], zero elsewhere (1-D, smooth)."""

    kind = "preset"

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        if not lo < hi:
            raise ValueError("bump needs lo < hi")
        super().__init__(1, 1.0, f"sine bump on [{lo}, {hi}]")
        self.lo, self.hi = float(lo), float(hi)
        self.smooth = True

    def _eval(self, pts):
        u = (pts[..., 0] - self.lo) / (self.hi - self.lo)
        return np.where((u > 0.0) & (u < 1.0), np.sin(np.pi * np.clip(u, 0.0, 1.0)) ** 2, 0.0)

    @property
    def support(self):
        return ((self.lo, self.hi),)

    def to_json(self):
        return {"kind": "preset", "name": "bump", "interval": [self.lo, self.hi]}


class CallableRep(FunctionRep):
    """Wrap a vectorized Python callable taking an array of shape ``(..., d)``."""

    def __init__(self, fn, dim: int, exponent: float = 1.0, description: str = "callable",
                 smooth: bool = False):
        super().__init__(dim, exponent, description)
        self.fn = fn
        self.smooth = smooth

    def _eval(self, pts):
        return np.asarray(self.fn(pts), dtype=float)


# ---------------------------------------------------------------------------
# Schauder series
# ---------------------------------------------------------------------------

def hat(x) -> np.ndarray:
    """The hat function: x on [0, 1/2], 1 - x on [1/2, 1], zero elsewhere."""
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0.0) & (x <= 1.0), np.minimum(x, 1.0 - x), 0.0)


class SchauderSeries(FunctionRep):
    """Finite Schauder expansion ``f0 + slope*u + sum_j sum_k c[j][k] hat(2^j u - k)``.

    ``u = (x - lo) / (hi - lo)`` maps ``interval`` onto [0, 1]. Outside the
    interval the hats vanish and the affine part continues.

    Parameters
    ----------
    base : (float, float)
        ``(f(lo), f(hi) - f(lo))``.
    coeffs : list of arrays
        ``coeffs[j]`` has length ``2**j``; levels may be all-zero.
    """

    kind = "schauder"

    def __init__(self, base: tuple[float, float], coeffs: Sequence[np.ndarray],
                 exponent: float = 1.0, interval: tuple[float, float] = (0.0, 1.0),
                 description: str = "schauder series", tail_bound: float | None = None):
        super().__init__(1, exponent, description)
        self.base = (float(base[0]), float(base[1]))
        self.coeffs = []
        for j, c in enumerate(coeffs):
            c = np.asarray(c, dtype=float)
            if c.shape != (2**j,):
                raise ValueError(f"level {j} needs {2**j} coefficients, got {c.shape}")
            self.coeffs.append(c)
        lo, hi = map(float, interval)
        if not lo < hi:
            raise ValueError("interval must have positive length")
        self.interval = (lo, hi)
        self.tail_bound = tail_bound

    @property
    def j_max(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, j: int, k: int) -> float:
        if j < len(self.coeffs) and 0 <= k < 2**j:
            return float(self.coeffs[j][k])
        return 0.0

    def _eval(self, pts):
        x = pts[..., 0]
        lo, hi = self.interval
        u = (x - lo) / (hi - lo)
        out = self.base[0] + self.base[1] * u
        inside = (u >= 0.0) & (u <= 1.0)
        if not np.any(inside):
            return out
        ui = u[inside]
        acc = np.zeros_like(ui)
        for j, c in enumerate(self.coeffs):
            if not np.any(c):
                continue
            t = ui * 2.0**j
            k = np.floor(t)
            frac = t - k
            k = np.minimum(k.astype(np.int64), 2**j - 1)
            frac = np.where(t >= 2**j, 1.0, frac)
            acc += c[k] * np.minimum(frac, 1.0 - frac)
        out = np.array(out, dtype=float, copy=True)
        out[inside] += acc
        return out

    @property
    def support(self):
        if self.base == (0.0, 0.0):
            return (self.interval,)
        return ((-INF, INF),)

    def breakpoints(self, lo: float, hi: float, max_points: int = 2**22) -> np.ndarray | None:
        """All generation ``j_max + 1`` dyadic nodes inside ``[lo, hi]`` (None if too many)."""
        a, b = self.interval
        n = 2 ** (self.j_max + 1)
        i0 = max(0, math.ceil((lo - a) / (b - a) * n))
        i1 = min(n, math.floor((hi - a) / (b - a) * n))
        if i1 - i0 + 1 > max_points:
            return None
        if i1 < i0:
            return np.empty(0)
        return a + (b - a) * (np.arange(i0, i1 + 1) / n)

    def to_json(self):
        return {"kind": "schauder", "description": self.description, "j_max": self.j_max,
                "interval": list(self.interval), "base": list(self.base),
                "exponent": self.exponent, "tail_bound": self.tail_bound}


def schauder_coeffs(f, J: int, interval: tuple[float, float] = (0.0, 1.0)) -> SchauderSeries:
    """Schauder expansion of a 1-D function truncated at level ``J``.

    Uses the midpoint second difference
    ``c[j][k] = 2 f((k+1/2)/2^j) - f((k+1)/2^j) - f(k/2^j)`` (in interval
    coordinates), so the result interpolates ``f`` at generation ``J + 1``.
    """
    if J < 0:
        raise ValueError("J must be nonnegative")
    lo, hi = interval
    n = 2 ** (J + 1)
    x = lo + (hi - lo) * (np.arange(n + 1) / n)
    v = np.asarray(f(x), dtype=float)
    coeffs = []
    for j in range(J + 1):
        s = 2 ** (J - j)
        left = v[0:n:2 * s]
        mid = v[s:n:2 * s]
        right = v[2 * s:n + 1:2 * s]
        coeffs.append(2.0 * mid - right - left)
    exponent = getattr(f, "exponent", 1.0)
    return SchauderSeries((v[0], v[-1] - v[0]), coeffs, exponent, interval,
                          description=f"schauder expansion to level {J}")


def _f_gamma_delta_tail(gamma: float, delta: float, J: int) -> float:
    total = 0.0
    j = J + 1
    while True:
        term = 2.0 ** (-gamma * j) * j**delta / 2.0
        total += term
        if (term < 1e-17 * total and j > J + 10) or j > J + 100000:
            return total
        j += 1


def make_f_gamma_delta(gamma: float, delta: float, J: int,
                       interval: tuple[float, float] = (0.0, 1.0)) -> SchauderSeries:
    """Partial sum ``sum_{j=1}^J sum_k 2^{-gamma j} j^delta hat_{j,k}``."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if J < 1:
        raise ValueError("J must be at least 1")
    coeffs = [np.zeros(1)]
    for j in range(1, J + 1):
        coeffs.append(np.full(2**j, 2.0 ** (-gamma * j) * float(j) ** delta))
    return SchauderSeries((0.0, 0.0), coeffs, gamma, interval,
                          description=f"f_(gamma={gamma},delta={delta}) J={J}",
                          tail_bound=_f_gamma_delta_tail(gamma, delta, J))


def g_beta(beta: float, J: int) -> SchauderSeries:
    """The series ``f_{2-beta, -2}`` whose graph has box dimension ``beta``."""
    f = make_f_gamma_delta(2.0 - beta, -2.0, J)
    f.description = f"g_beta(beta={beta}) J={J}"
    return f


def random_schauder(gamma: float, J: int, rng: np.random.Generator,
                    base: tuple[float, float] = (0.0, 0.0), scale: float = 1.0,
                    interval: tuple[float, float] = (0.0, 1.0)) -> SchauderSeries:
    """Schauder series with coefficients ``scale * u * 2^{-gamma j}``, u uniform in [-1, 1]."""
    coeffs = [scale * rng.uniform(-1.0, 1.0, 2**j) * 2.0 ** (-gamma * j) for j in range(J + 1)]
    return SchauderSeries(base, coeffs, gamma, interval,
                          description=f"random schauder gamma={gamma} J={J}")


# ---------------------------------------------------------------------------
# composites
# ---------------------------------------------------------------------------

class Tensor1D(FunctionRep):
    """Lift a 1-D function to R^d acting on coordinate ``axis`` (0-based)."""

    kind = "tensor1d"

    def __init__(self, of: FunctionRep, axis: int, dim: int):
        if of.dim != 1:
            raise ValueError("tensor1d needs a 1-D function")
        if not 0 <= axis < dim:
            raise ValueError(f"axis {axis} out of range for dimension {dim}")
        super().__init__(dim, of.exponent, f"{of.description} in x{axis + 1}")
        self.of = of
        self.axis = axis
        self.smooth = of.smooth

    def _eval(self, pts):
        return self.of._eval(pts[..., self.axis:self.axis + 1])

    def on_grid(self, axes):
        vals = self.of(np.asarray(axes[self.axis], float))
        shape = [1] * self.dim
        shape[self.axis] = -1
        return np.broadcast_to(vals.reshape(shape), tuple(len(a) for a in axes)).copy()

    @property
    def axes_used(self):
        return frozenset({self.axis})

    @property
    def support(self):
        sup = [(-INF, INF)] * self.dim
        sup[self.axis] = self.of.support[0]
        return tuple(sup)

    def to_json(self):
        return {"kind": "tensor1d", "axis": self.axis + 1, "of": self.of.to_json()}


class Sum(FunctionRep):
    kind = "sum"

    def __init__(self, parts: Sequence[FunctionRep], weights: Sequence[float] | None = None):
        parts = list(parts)
        if not parts:
            raise ValueError("sum of no functions")
        dim = parts[0].dim
        if any(p.dim != dim for p in parts):
            raise ValueError("dimension mismatch in sum")
        super().__init__(dim, min(p.exponent for p in parts), "sum")
        self.parts = parts
        self.weights = [1.0] * len(parts) if weights is None else [float(w) for w in weights]
        self.smooth = all(p.smooth for p in parts)

    def _eval(self, pts):
        out = self.weights[0] * self.parts[0]._eval(pts)
        for w, p in zip(self.weights[1:], self.parts[1:]):
            out = out + w * p._eval(pts)
        return out

    def on_grid(self, axes):
        out = self.weights[0] * self.parts[0].on_grid(axes)
        for w, p in zip(self.weights[1:], self.parts[1:]):
            out = out + w * p.on_grid(axes)
        return out

    @property
    def axes_used(self):
        return frozenset().union(*(p.axes_used for p in self.parts))

    @property
    def support(self):
        sups = [p.support for p in self.parts]
        return tuple((min(s[l][0] for s in sups), max(s[l][1] for s in sups))
                     for l in range(self.dim))

    def to_json(self):
        return {"kind": "sum", "weights": self.weights, "of": [p.to_json() for p in self.parts]}


class Product(FunctionRep):
    kind = "product"

    def __init__(self, parts: Sequence[FunctionRep]):
        parts = list(parts)
        if not parts:
            raise ValueError("product of no functions")
        dim = parts[0].dim
        if any(p.dim != dim for p in parts):
            raise ValueError("dimension mismatch in product")
        super().__init__(dim, min(p.exponent for p in parts), "product")
        self.parts = parts
        self.smooth = all(p.smooth for p in parts)

    def _eval(self, pts):
        out = self.parts[0]._eval(pts)
        for p in self.parts[1:]:
            out = out * p._eval(pts)
        return out

    def on_grid(self, axes):
        out = self.parts[0].on_grid(axes)
        for p in self.parts[1:]:
            out = out * p.on_grid(axes)
        return out

    @property
    def axes_used(self):
        return frozenset().union(*(p.axes_used for p in self.parts))

    @property
    def support(self):
        sups = [p.support for p in self.parts]
        return tuple((max(s[l][0] for s in sups), min(s[l][1] for s in sups))
                     for l in range(self.dim))

    def to_json(self):
        return {"kind": "product", "of": [p.to_json() for p in self.parts]}


class Restricted(FunctionRep):
    """Restriction of ``of`` to the affine slice ``x[axis] = value``."""

    def __init__(self, of: FunctionRep, axis: int, value: float):
        if of.dim < 2:
            raise ValueError("cannot restrict a 1-D function")
        super().__init__(of.dim - 1, of.exponent, f"{of.description}|x{axis + 1}={value}")
        self.of = of
        self.axis = axis
        self.value = float(value)
        self.kind = of.kind
        self.smooth = of.smooth

    def _eval(self, pts):
        pinned = np.full(pts.shape[:-1] + (1,), self.value)
        full = np.concatenate([pts[..., :self.axis], pinned, pts[..., self.axis:]], axis=-1)
        return self.of._eval(full)

    def on_grid(self, axes):
        axes = list(axes)
        vals = self.of.on_grid(axes[:self.axis] + [np.array([self.value])] + axes[self.axis:])
        return np.take(vals, 0, axis=self.axis)

    @property
    def axes_used(self):
        return frozenset(l if l < self.axis else l - 1 for l in self.of.axes_used if l != self.axis)


class GridSample(FunctionRep):
    """Multilinear interpolation of node values on a uniform grid over ``rect``."""

    kind = "grid-sample"

    def __init__(self, values: np.ndarray, rect: Rectangle, exponent: float = 1.0,
                 description: str = "grid sample"):
        values = np.asarray(values, dtype=float)
        if values.ndim != rect.d or min(values.shape) < 2:
            raise ValueError("values must be a node grid with at least 2 nodes per axis")
        super().__init__(rect.d, exponent, description)
        self.values = values
        self.rect = rect

    def _eval(self, pts):
        out = np.zeros(pts.shape[:-1])
        idx, wts = [], []
        for l in range(self.dim):
            n = self.values.shape[l] - 1
            lo, hi = self.rect.a[l], self.rect.b[l]
            t = np.clip((pts[..., l] - lo) / (hi - lo) * n, 0.0, n)
            i = np.minimum(np.floor(t).astype(np.int64), n - 1)
            idx.append(i)
            wts.append(t - i)
        for corner in np.ndindex(*(2,) * self.dim):
            w = np.ones_like(out)
            sel = []
            for l, c in enumerate(corner):
                w = w * (wts[l] if c else 1.0 - wts[l])
                sel.append(idx[l] + c)
            out += w * self.values[tuple(sel)]
        return out


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def mollifier_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes and normalized weights of the bump ``(1 - (n y)^2)^2`` on ``[-1/n, 1/n]``."""
    t = (2.0 * np.arange(MOLLIFIER_NODES) + 1.0) / MOLLIFIER_NODES - 1.0
    w = (1.0 - t**2) ** 2
    return t / n, w / w.sum()


class Mollified(FunctionRep):
    """Convolution of ``of`` with the tensor bump of radius ``1/n`` along ``axes``."""

    kind = "mollified"
    smooth = True

    def __init__(self, of: FunctionRep, n: int, axes: Sequence[int] | None = None):
        super().__init__(of.dim, of.exponent, f"mollified({of.description}, n={n})")
        self.of = of
        self.n = int(n)
        self.mol_axes = tuple(sorted(of.axes_used if axes is None else axes))
        self._nodes, self._weights = mollifier_rule(self.n)

    def _shifts(self):
        k = len(self.mol_axes)
        for q in np.ndindex(*(MOLLIFIER_NODES,) * k):
            yield q, math.prod(self._weights[i] for i in q)

    def _eval(self, pts):
        out = np.zeros(pts.shape[:-1])
        for q, w in self._shifts():
            shifted = pts.copy()
            for ax, i in zip(self.mol_axes, q):
                shifted[..., ax] -= self._nodes[i]
            out += w * self.of._eval(shifted)
        return out

    def on_grid(self, axes):
        out = np.zeros(tuple(len(a) for a in axes))
        for q, w in self._shifts():
            shifted = [np.asarray(a, float) for a in axes]
            for ax, i in zip(self.mol_axes, q):
                shifted[ax] = shifted[ax] - self._nodes[i]
            out += w * self.of.on_grid(shifted)
        return out

    @property
    def axes_used(self):
        return self.of.axes_used

    @property
    def support(self):
        r = 1.0 / self.n
        return tuple((lo - r, hi + r) if l in self.mol_axes else (lo, hi)
                     for l, (lo, hi) in enumerate(self.of.support))

    def to_json(self):
        return {"kind": "mollified", "n": self.n, "of": self.of.to_json()}


def mollify(f: FunctionRep, n: int) -> FunctionRep:
    """Smooth ``f`` at scale ``1/n``.

    The tensor kernel is pushed through sums, through products of factors
    acting on disjoint axes and through 1-D lifts; constants and coordinates
    are fixed points of a symmetric unit-mass kernel.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if isinstance(f, (Constant, Coordinate)):
        return f
    if isinstance(f, Sum):
        return Sum([mollify(p, n) for p in f.parts], f.weights)
    if isinstance(f, Tensor1D):
        return Tensor1D(mollify(f.of, n), f.axis, f.dim)
    if isinstance(f, Product):
        seen: set = set()
        disjoint = True
        for p in f.parts:
            if seen & p.axes_used:
                disjoint = False
            seen |= p.axes_used
        if disjoint:
            return Product([mollify(p, n) for p in f.parts])
    return Mollified(f, n)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def oscillation(f: FunctionRep, lam: tuple[float, float], samples: int = 1025) -> float:
    """Sampled ``max - min`` of a 1-D function on ``lam``.

    For Schauder partial sums the breakpoints inside ``lam`` are added to the
    sample set, which makes the result exact.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    lo, hi = map(float, lam)
    x = np.linspace(lo, hi, samples)
    if isinstance(f, SchauderSeries):
        bp = f.breakpoints(lo, hi)
        if bp is not None:
            x = np.concatenate([x, bp])
    v = f(x)
    return float(v.max() - v.min())


def _offset_ratio(v: np.ndarray, off: Sequence[int], h: Sequence[float], alpha: float) -> float:
    sl_a, sl_b = [], []
    for o, n in zip(off, v.shape):
        if abs(o) >= n:
            return 0.0
        if o >= 0:
            sl_a.append(slice(o, n))
            sl_b.append(slice(0, n - o))
        else:
            sl_a.append(slice(0, n + o))
            sl_b.append(slice(-o, n))
    diff = np.abs(v[tuple(sl_a)] - v[tuple(sl_b)])
    if diff.size == 0:
        return 0.0
    dist = math.sqrt(sum((o * hh) ** 2 for o, hh in zip(off, h)))
    return float(diff.max()) / dist**alpha


def holder_seminorm_estimate(f: FunctionRep, alpha: float, region: Rectangle,
                             grid_level: int) -> float:
    """Lower bound for the ``alpha``-Hölder seminorm of ``f`` on ``region``.

    Grid pairs at spacing ``2^-grid_level`` are scanned for separations up to
    a quarter of the region (1-D), or along a box of short offsets plus dyadic
    multiples of axis and diagonal directions (d >= 2). A coarse all-pairs
    pass covers long-range pairs.
    """
    if grid_level < 1:
        raise ValueError("grid_level must be at least 1")
    if region.d != f.dim:
        raise ValueError("region dimension does not match function")
    d = f.dim

    def scan(level: int, offsets) -> float:
        nodes = region.nodes(level)
        v = f.on_grid(nodes)
        h = [s / 2**level for s in region.sides]
        return max((_offset_ratio(v, o, h, alpha) for o in offsets), default=0.0)

    L = grid_level
    if d == 1:
        fine = scan(L, [(m,) for m in range(1, max(2, 2 ** (L - 2)) + 1)])
        Lc = min(L, 10)
        coarse = scan(Lc, [(m,) for m in range(1, 2**Lc + 1)])
        return max(fine, coarse)

    offsets = set()
    for o in np.ndindex(*(7,) * d):
        o = tuple(int(x) - 3 for x in o)
        if any(o) and next(x for x in o if x) > 0:
            offsets.add(o)
    dirs = [tuple(1 if l == m else 0 for l in range(d)) for m in range(d)]
    for signs in np.ndindex(*(2,) * (d - 1)):
        dirs.append((1,) + tuple(1 if s == 0 else -1 for s in signs))
    t = 4
    while t <= 2 ** (L - 2):
        offsets.update(tuple(t * x for x in e) for e in dirs)
        t *= 2
    fine = scan(L, sorted(offsets))
    Lc = min(L, 4 if d == 2 else 3)
    coarse_offsets = [tuple(int(x) - 2**Lc for x in o) for o in np.ndindex(*(2 ** (Lc + 1) + 1,) * d)]
    coarse_offsets = [o for o in coarse_offsets if any(o) and next(x for x in o if x) > 0]
    coarse = scan(Lc, coarse_offsets)
    return max(fine, coarse)


def sup_distance(f: FunctionRep, g: FunctionRep, region: Rectangle, grid_level: int) -> float:
    nodes = region.nodes(grid_level)
    return float(np.max(np.abs(f.on_grid(nodes) - g.on_grid(nodes))))


# ---------------------------------------------------------------------------
# JSON specs
# ---------------------------------------------------------------------------

def _axis(spec: dict, dim: int) -> int:
    axis = int(spec.get("axis", 1))
    if not 1 <= axis <= dim:
        raise ValueError(f"axis {axis} outside 1..{dim}")
    return axis - 1


def from_json(spec: dict, dim: int) -> FunctionRep:
    """Build a FunctionRep from a JSON-style dict (axes are 1-based)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"function spec must be an object with a 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "preset":
        name = spec.get("name")
        if name == "coordinate":
            return Coordinate(_axis(spec, dim), dim)
        if name == "constant":
            return Constant(float(spec["value"]), dim)
        if name == "monomial":
            return Monomial(_axis(spec, dim), int(spec["power"]), dim)
        if name == "bump":
            if dim != 1:
                raise ValueError("bump is 1-D; wrap it in tensor1d")
            return SineBump(*spec.get("interval", (0.0, 1.0)))
        raise ValueError(f"unknown preset {name!r}")
    if kind == "schauder":
        if dim != 1:
            raise ValueError("schauder series are 1-D; wrap them in tensor1d")
        J = int(spec["J"])
        gamma = float(spec["gamma"])
        interval = tuple(spec.get("interval", (0.0, 1.0)))
        if spec.get("signs") == "random":
            rng = np.random.default_rng(int(spec.get("seed", 0)))
            s = random_schauder(gamma, J, rng, tuple(spec.get("base", (0.0, 0.0))),
                                float(spec.get("scale", 1.0)), interval)
        else:
            s = make_f_gamma_delta(gamma, float(spec.get("delta", 0.0)), J, interval)
            scale = float(spec.get("scale", 1.0))
            base = tuple(spec.get("base", (0.0, 0.0)))
            if scale != 1.0 or base != (0.0, 0.0):
                s = SchauderSeries(base, [scale * c for c in s.coeffs], s.exponent, interval,
                                   s.description, None if s.tail_bound is None
                                   else abs(scale) * s.tail_bound)
        return s
    if kind == "wavelet_series":
        if dim != 1:
            raise ValueError("wavelet series are 1-D; wrap them in tensor1d")
        from .wavelets import WaveletSeries, build_basis
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        return WaveletSeries(build_basis(int(spec.get("basis_order", 4))), float(spec["gamma"]),
                             int(spec["J"]), rng, spec.get("T", "Psi"),
                             float(spec.get("linear", 0.0)), float(spec.get("scale", 1.0)),
                             bool(spec.get("inside", False)))
    if kind == "tensor1d":
        return Tensor1D(from_json(spec["of"], 1), _axis(spec, dim), dim)
    if kind in ("sum", "product"):
        parts = [from_json(p, dim) for p in spec["of"]]
        if kind == "sum":
            return Sum(parts, spec.get("weights"))
        return Product(parts)
    if kind == "mollified":
        return mollify(from_json(spec["of"], dim), int(spec["n"]))
    raise ValueError(f"unknown function kind {kind!r}")
