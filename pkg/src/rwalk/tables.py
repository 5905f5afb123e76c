"""Finite evaluation windows and function tables over them.

Pointwise identities on an infinite lattice are checked on an explicit
truncation window; the caller shrinks the window by the walk's support
radius to get an interior region where one transition step cannot escape.
On a finite group the window is simply the whole group.
"""

from __future__ import annotations

from itertools import product

from .errors import WindowExceeded
from .groups import FiniteGroup, Group, Lattice


class LatticeBox:
    """Axis-aligned box of lattice points, bounds inclusive."""

    def __init__(self, lo: tuple, hi: tuple):
        lo = tuple(int(x) for x in lo)
        hi = tuple(int(x) for x in hi)
        if len(lo) != len(hi):
            raise ValueError("box corner dimensions differ")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty box: lo={lo} hi={hi}")
        self.lo = lo
        self.hi = hi

    @classmethod
    def centered(cls, radius: int, dim: int, center: tuple | None = None) -> "LatticeBox":
        c = center if center is not None else (0,) * dim
        return cls(tuple(x - radius for x in c), tuple(x + radius for x in c))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x: tuple) -> bool:
        return all(a <= v <= b for v, a, b in zip(x, self.lo, self.hi))

    def points(self):
        return (tuple(p) for p in product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi))))

    def size(self) -> int:
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= b - a + 1
        return n

    def shrink(self, margin: int) -> "LatticeBox":
        return LatticeBox(tuple(a + margin for a in self.lo),
                          tuple(b - margin for b in self.hi))

    def translate(self, y: tuple) -> "LatticeBox":
        return LatticeBox(tuple(a + v for a, v in zip(self.lo, y)),
                          tuple(b + v for b, v in zip(self.hi, y)))

    def can_shrink(self, margin: int) -> bool:
        return all(b - a >= 2 * margin for a, b in zip(self.lo, self.hi))

    def __eq__(self, other):
        return isinstance(other, LatticeBox) and (self.lo, self.hi) == (other.lo, other.hi)

    def __repr__(self):
        return f"LatticeBox(lo={self.lo}, hi={self.hi})"


class FunctionTable:
    """Real-valued function tabulated on a window (lattice box or whole finite group)."""

    def __init__(self, group: Group, window: LatticeBox | None, values: dict):
        if isinstance(group, Lattice):
            if window is None:
                raise ValueError("lattice tables need an explicit window")
        elif isinstance(group, FiniteGroup):
            window = None  # whole group
        self.group = group
        self.window = window
        self.values = values

    @classmethod
    def tabulate(cls, group: Group, fn, window: LatticeBox | None = None) -> "FunctionTable":
        if isinstance(group, FiniteGroup):
            pts = group.elements()
        else:
            if window is None:
                raise ValueError("lattice tables need an explicit window")
            pts = window.points()
        return cls(group, window, {x: float(fn(x)) for x in pts})

    def domain(self):
        if isinstance(self.group, FiniteGroup):
            return self.group.elements()
        return self.window.points()

    def __getitem__(self, x) -> float:
        try:
            return self.values[x]
        except KeyError:
            raise WindowExceeded(f"point {x!r} outside table window") from None

    def __contains__(self, x) -> bool:
        return x in self.values
