"""Axis-aligned rectangles, dyadic cubes and oriented faces."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

MAX_EXACT_LEVEL = 52


@dataclass(frozen=True)
class Rectangle:
    """Closed box ``prod_i [a_i, b_i]``; degenerate axes (a_i == b_i) are allowed."""

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        if len(a) != len(b) or not a:
            raise ValueError("corners must have the same positive dimension")
        if any(lo > hi for lo, hi in zip(a, b)):
            raise ValueError(f"lower corner {a} exceeds upper corner {b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def unit(cls, d: int) -> "Rectangle":
        return cls((0.0,) * d, (1.0,) * d)

    @classmethod
    def cube(cls, lo: float, hi: float, d: int) -> "Rectangle":
        return cls((lo,) * d, (hi,) * d)

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.a, self.b))

    @property
    def delta(self) -> float:
        return max(self.sides)

    @property
    def volume(self) -> float:
        return math.prod(self.sides)

    @property
    def degenerate_axes(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.sides) if s == 0.0)

    def contains(self, other: "Rectangle") -> bool:
        return all(
            lo <= olo and ohi <= hi
            for lo, hi, olo, ohi in zip(self.a, self.b, other.a, other.b)
        )

    def intersects(self, other: "Rectangle") -> bool:
        return all(
            max(lo, olo) <= min(hi, ohi)
            for lo, hi, olo, ohi in zip(self.a, self.b, other.a, other.b)
        )

    def fatten(self, r: float) -> "Rectangle":
        return Rectangle(tuple(v - r for v in self.a), tuple(v + r for v in self.b))

    def split(self, axis: int) -> tuple["Rectangle", "Rectangle"]:
        """Halve along ``axis`` (0-based)."""
        mid = 0.5 * (self.a[axis] + self.b[axis])
        upper_lo = list(self.a)
        lower_hi = list(self.b)
        upper_lo[axis] = mid
        lower_hi[axis] = mid
        return Rectangle(self.a, tuple(lower_hi)), Rectangle(tuple(upper_lo), self.b)

    def nodes(self, level: int) -> list[np.ndarray]:
        """Per-axis node coordinates of the ``2**level`` uniform subdivision."""
        n = 2**level
        idx = np.arange(n + 1, dtype=float)
        out = []
        for lo, hi in zip(self.a, self.b):
            x = lo + (hi - lo) * (idx / n)
            x[-1] = hi
            out.append(x)
        return out

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b)}


@dataclass(frozen=True)
class DyadicCube:
    """Closed cube ``prod_i [k_i/2^j, (k_i+1)/2^j]``, stored as exact integers.

    When ``base`` is given the cube is taken relative to that rectangle
    (``a + (b - a) * k / 2^j``) instead of the unit lattice.
    """

    level: int
    index: tuple[int, ...]
    base: Rectangle | None = None

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        object.__setattr__(self, "index", tuple(int(k) for k in self.index))

    @property
    def d(self) -> int:
        return len(self.index)

    def rectangle(self) -> Rectangle:
        if self.level > MAX_EXACT_LEVEL:
            raise ValueError(f"level {self.level} exceeds exact float range")
        s = 2.0**-self.level
        if self.base is None:
            return Rectangle(
                tuple(k * s for k in self.index), tuple((k + 1) * s for k in self.index)
            )
        a, sides = self.base.a, self.base.sides
        return Rectangle(
            tuple(lo + w * (k * s) for lo, w, k in zip(a, sides, self.index)),
            tuple(lo + w * ((k + 1) * s) for lo, w, k in zip(a, sides, self.index)),
        )

    def children(self) -> list["DyadicCube"]:
        return [
            DyadicCube(self.level + 1, tuple(2 * k + o for k, o in zip(self.index, offs)), self.base)
            for offs in itertools.product((0, 1), repeat=self.d)
        ]


@dataclass(frozen=True)
class Face:
    """Upper or lower face of ``parent`` obtained by pinning ``axis`` (1-based)."""

    parent: Rectangle
    axis: int
    side: str
    orientation_sign: int

    @property
    def free_axes(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.parent.d) if i != self.axis - 1)

    @property
    def value(self) -> float:
        i = self.axis - 1
        return self.parent.b[i] if self.side == "upper" else self.parent.a[i]

    def rectangle(self) -> Rectangle:
        """The face as a (d-1)-dimensional rectangle in its free coordinates."""
        free = self.free_axes
        return Rectangle(
            tuple(self.parent.a[i] for i in free), tuple(self.parent.b[i] for i in free)
        )


def subdivide(R: Rectangle, depth: int) -> list[Rectangle]:
    """Uniform dyadic refinement of ``R`` into ``2**(d*depth)`` cells."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    nodes = R.nodes(depth)
    n = 2**depth
    cells = []
    for idx in itertools.product(range(n), repeat=R.d):
        cells.append(
            Rectangle(
                tuple(nodes[ax][i] for ax, i in enumerate(idx)),
                tuple(nodes[ax][i + 1] for ax, i in enumerate(idx)),
            )
        )
    return cells


def faces(R: Rectangle) -> list[Face]:
    """The 2d oriented faces of ``R`` with Stokes signs."""
    if R.degenerate_axes:
        raise ValueError("degenerate rectangle has no oriented boundary")
    out = []
    for l in range(1, R.d + 1):
        s = (-1) ** (l - 1)
        out.append(Face(R, l, "lower", -s))
        out.append(Face(R, l, "upper", s))
    return out


def closed_index_range(lo: float, hi: float, j: int) -> tuple[int, int]:
    """Inclusive range of k with ``[k/2^j, (k+1)/2^j]`` meeting ``[lo, hi]``."""
    scale = 2.0**j
    return math.ceil(lo * scale) - 1, math.floor(hi * scale)


def cubes_at_level(j: int, bounding: Rectangle) -> Iterator[DyadicCube]:
    """Unit-lattice cubes of side ``2**-j`` whose closure meets ``bounding``."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    ranges = [range(k0, k1 + 1) for k0, k1 in
              (closed_index_range(lo, hi, j) for lo, hi in zip(bounding.a, bounding.b))]
    for idx in itertools.product(*ranges):
        yield DyadicCube(j, idx)


def count_cubes_at_level(j: int, bounding: Rectangle) -> int:
    return math.prod(
        k1 - k0 + 1
        for k0, k1 in (closed_index_range(lo, hi, j) for lo, hi in zip(bounding.a, bounding.b))
    )


def as_rectangle(obj: Rectangle | Sequence) -> Rectangle:
    if isinstance(obj, Rectangle):
        return obj
    a, b = obj
    return Rectangle(tuple(a), tuple(b))
