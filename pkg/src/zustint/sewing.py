"""Züst integral over rectangles by germ sums on uniform dyadic grids.

On a cell ``P`` with lower corner ``a`` the boundary integral of
``dg^1 ^ ... ^ dg^d`` is computed through the Stokes recursion over the
upper faces, with the first function centered at ``a``:

    BI(g^1..g^d; P) = sum_t (-1)^(t-1) (g^1(a + h_t e_t) - g^1(a)) BI(g^2..g^d; upper face t)

Lower faces drop out because of the centering, so every function enters
through differences only and constants are annihilated exactly. The per-cell
values are antisymmetrized over all orderings of the ``g``'s with a
sign-symmetric summation, which makes a swap of two functions negate the
computed integral bit for bit.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dyadic import Rectangle, faces
from .funcrep import Constant, FunctionRep, Restricted, Sum


class SewingError(RuntimeError):
    code = "sewing-error"


class NoConvergence(SewingError):
    code = "no-convergence"

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BudgetExceeded(SewingError):
    code = "budget-exceeded"

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ExponentWarning(UserWarning):
    """The exponent condition alpha + sum(beta) > d does not hold."""


@dataclass(frozen=True)
class SewingConfig:
    """Refinement and error-control parameters.

    ``memo_capacity`` caps the number of fine cells evaluated at one level.
    ``min_level`` is the first level allowed to stop on a small gap: coarse
    germ sums can agree by accident, e.g. for series vanishing at coarse
    dyadic nodes.
    """

    max_level: int = 10
    tolerance: float = 1e-6
    face_level_offset: int = 0
    memo_capacity: int = 2**24
    min_level: int = 3

    def __post_init__(self):
        if self.max_level < 1:
            raise ValueError("max_level must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.face_level_offset < 0:
            raise ValueError("face_level_offset must be nonnegative")

    def to_json(self) -> dict:
        return {"max_level": self.max_level, "tolerance": self.tolerance,
                "face_level_offset": self.face_level_offset,
                "memo_capacity": self.memo_capacity, "min_level": self.min_level}


@dataclass
class IntegralResult:
    value: float
    level_used: int
    cauchy_gap: float
    cost: int
    history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    degenerate: bool = False

    def to_json(self) -> dict:
        return {"value": self.value, "level_used": self.level_used,
                "cauchy_gap": self.cauchy_gap, "cost": self.cost,
                "history": [{"level": j, "value": v, "gap": g} for j, v, g in self.history],
                "warnings": list(self.warnings), "degenerate": self.degenerate}


# ---------------------------------------------------------------------------
# grid kernels
# ---------------------------------------------------------------------------

def _trim(arr: np.ndarray, axis: int, lower: bool) -> np.ndarray:
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(0, -1) if lower else slice(1, None)
    return arr[tuple(sl)]


def _ordered_form(G: Sequence[np.ndarray], S: tuple[int, ...], memo: dict, key: tuple):
    """Centered Stokes recursion for one ordering of the node arrays ``G``.

    The result is cell-shaped along the axes in ``S`` and node-shaped along
    the remaining axes.
    """
    mk = (key, S)
    hit = memo.get(mk)
    if hit is not None:
        return hit
    if len(S) == 1:
        out = np.diff(G[0], axis=S[0])
    else:
        out = None
        for t, l in enumerate(S):
            D = np.diff(G[0], axis=l)
            for o in S:
                if o != l:
                    D = _trim(D, o, lower=True)
            rest = tuple(x for x in S if x != l)
            B = _trim(_ordered_form(G[1:], rest, memo, key[1:]), l, lower=False)
            term = D * B
            if out is None:
                out = term
            elif t % 2:
                out = out - term
            else:
                out = out + term
    memo[mk] = out
    return out


def _parity(perm: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def cell_forms(G: Sequence[np.ndarray]) -> np.ndarray:
    """Per-cell ``int_P dg^1 ^ ... ^ dg^d`` from node-grid samples of the ``g``'s.

    Parameters
    ----------
    G : sequence of d arrays of identical shape ``(n_1+1, ..., n_d+1)``

    Returns
    -------
    array of shape ``(n_1, ..., n_d)``
    """
    d = len(G)
    if d == 0 or any(g.ndim != d for g in G):
        raise ValueError("need d node arrays of dimension d")
    if d == 1:
        return np.diff(G[0], axis=0)
    memo: dict = {}
    axes = tuple(range(d))
    terms = []
    for perm in itertools.permutations(range(d)):
        val = _ordered_form([G[p] for p in perm], axes, memo, perm)
        terms.append(val if _parity(perm) > 0 else -val)
    T = np.sort(np.stack(terms), axis=0)
    n = len(terms)
    acc = T[0] + T[n - 1]
    for i in range(1, n // 2):
        acc = acc + (T[i] + T[n - 1 - i])
    return acc * (1.0 / n)


def block_sum(arr: np.ndarray, b: int) -> np.ndarray:
    """Sum non-overlapping ``b^d`` blocks of a cell array."""
    if b == 1:
        return arr
    shape = []
    for n in arr.shape:
        shape += [n // b, b]
    return arr.reshape(shape).sum(axis=tuple(range(1, 2 * arr.ndim, 2)))


def germ_sum(f: FunctionRep, g: Sequence[FunctionRep], R: Rectangle, level: int,
             face_level_offset: int = 0) -> float:
    """Germ sum at one refinement level.

    With a positive ``face_level_offset`` the cell forms come from the grid
    ``face_level_offset`` levels finer, summed over each coarse cell.
    """
    fine = level + face_level_offset
    nodes = R.nodes(fine)
    BI = block_sum(cell_forms([gi.on_grid(nodes) for gi in g]), 2**face_level_offset)
    F = f.on_grid(R.nodes(level))[tuple(slice(0, -1) for _ in range(R.d))]
    return float(np.sum(F * BI))


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------

def exponent_warnings(f: FunctionRep | None, g: Sequence[FunctionRep], d: int) -> list[str]:
    alpha = 1.0 if f is None else f.exponent
    total = alpha + sum(gi.exponent for gi in g)
    if total <= d:
        msg = f"exponent sum {total:.4g} <= d = {d}: convergence is not guaranteed"
        warnings.warn(msg, ExponentWarning, stacklevel=3)
        return [msg]
    return []


def _check(g: Sequence[FunctionRep], R: Rectangle, f: FunctionRep | None = None):
    d = R.d
    if len(g) != d:
        raise ValueError(f"need {d} functions g, got {len(g)}")
    for h in list(g) + ([f] if f is not None else []):
        if h.dim != d:
            raise ValueError(f"function of dimension {h.dim} on a {d}-rectangle")


def zust_integral(f: FunctionRep, g: Sequence[FunctionRep], R: Rectangle,
                  cfg: SewingConfig = SewingConfig()) -> IntegralResult:
    """``int_R f dg^1 ^ ... ^ dg^d`` as the limit of lower-corner germ sums.

    Levels ``J = 0, 1, ...`` are evaluated until the Cauchy gap between
    consecutive levels drops to ``cfg.tolerance`` or ``J = cfg.max_level``.

    Raises
    ------
    NoConvergence
        The gap failed to decrease over three consecutive levels.
    BudgetExceeded
        The next level would exceed ``cfg.memo_capacity`` fine cells.
    """
    _check(g, R, f)
    d = R.d
    warns = exponent_warnings(f, g, d)
    history = []
    cost = 0
    prev = None
    gap = math.inf
    stalls = 0
    value = 0.0
    for J in range(cfg.max_level + 1):
        cells = 2 ** (d * (J + cfg.face_level_offset))
        if cells > cfg.memo_capacity:
            partial = IntegralResult(value, max(J - 1, 1), gap, cost, history, warns)
            raise BudgetExceeded(f"level {J} needs {cells} cells, budget {cfg.memo_capacity}",
                                 partial)
        value = germ_sum(f, g, R, J, cfg.face_level_offset)
        cost += cells
        if prev is None:
            history.append((J, value, math.nan))
            prev = value
            continue
        new_gap = abs(value - prev)
        stalls = stalls + 1 if new_gap >= gap else 0
        gap = new_gap
        prev = value
        history.append((J, value, gap))
        if gap <= cfg.tolerance and J >= min(cfg.min_level, cfg.max_level):
            break
        if stalls >= 3:
            raise NoConvergence(
                f"Cauchy gap failed to decrease over 3 consecutive levels (J={J}, gap={gap:.3g})",
                IntegralResult(value, J, gap, cost, history, warns))
    return IntegralResult(value, history[-1][0], gap, cost, history, warns,
                          degenerate=bool(R.degenerate_axes))


def boundary_integral(g: Sequence[FunctionRep], R: Rectangle,
                      cfg: SewingConfig = SewingConfig()) -> IntegralResult:
    """``int_R dg^1 ^ ... ^ dg^d`` through the signed sum over the 2d faces.

    For d = 1 this is ``g(b) - g(a)``. For d >= 2 each face contributes the
    (d-1)-dimensional integral of ``(g^1 - g^1(a)) dg^2 ^ ... ^ dg^d``; the
    centering leaves the value unchanged and makes constant ``g^1`` vanish
    exactly.
    """
    _check(g, R)
    d = R.d
    if R.degenerate_axes:
        return IntegralResult(0.0, 1, 0.0, 0, degenerate=True)
    if d == 1:
        va, vb = g[0](np.array([R.a[0], R.b[0]]))
        return IntegralResult(float(vb - va), 1, 0.0, 1)
    g1 = g[0]
    anchor = float(g1(np.array(R.a)))
    centered = Sum([g1, Constant(anchor, d)], [1.0, -1.0])
    total = 0.0
    gap = 0.0
    cost = 0
    level = 1
    warns: list = []
    for face in faces(R):
        axis = face.axis - 1
        sub_f = Restricted(centered, axis, face.value)
        sub_g = [Restricted(gi, axis, face.value) for gi in g[1:]]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExponentWarning)
            res = zust_integral(sub_f, sub_g, face.rectangle(), cfg)
        total += face.orientation_sign * res.value
        gap += res.cauchy_gap
        cost += res.cost
        level = max(level, res.level_used)
        warns += res.warnings
    return IntegralResult(total, level, gap, cost, warnings=sorted(set(warns)))


def lipschitz_oracle(f: FunctionRep, g: Sequence[FunctionRep], R: Rectangle,
                     grid_level: int) -> float:
    """Midpoint quadrature of ``f * det(Dg)`` with central-difference Jacobians."""
    _check(g, R, f)
    if not all(gi.smooth for gi in g):
        warnings.warn("lipschitz_oracle expects smooth (mollified or preset) g", stacklevel=2)
    d = R.d
    n = 2**grid_level
    mids = [lo + (hi - lo) * ((np.arange(n) + 0.5) / n) for lo, hi in zip(R.a, R.b)]
    eps = [max(s, 1e-300) / n * 2.0**-6 for s in R.sides]
    jac = np.empty((n,) * d + (d, d))
    for l in range(d):
        up = list(mids)
        dn = list(mids)
        up[l] = mids[l] + eps[l]
        dn[l] = mids[l] - eps[l]
        for m, gm in enumerate(g):
            jac[..., m, l] = (gm.on_grid(up) - gm.on_grid(dn)) / (2.0 * eps[l])
    det = np.linalg.det(jac) if d > 1 else jac[..., 0, 0]
    return float(np.sum(f.on_grid(mids) * det) * R.volume / n**d)
