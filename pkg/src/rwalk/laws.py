"""Finite-support probability laws on a discrete group.

A Law stores its atoms in a canonical sorted order so that every
reduction over the support (mass sums, convolutions, expectations) is
performed in a deterministic order; combined with math.fsum this makes
results reproducible bit-for-bit across construction paths.

Convolution is exact dictionary arithmetic with one honesty rule: atoms
whose mass falls below UNDERFLOW_FLOOR are dropped and the dropped mass
is accumulated into the `mass_leak` diagnostic.  Nothing is renormalized;
drift of the total mass is measured, never hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .errors import GroupMismatch
from .groups import FiniteGroup, Group, Lattice
from .tables import FunctionTable

UNDERFLOW_FLOOR = 1e-300
STRICT_SUM_TOL = 1e-12
CONVOLVE_SUM_TOL = 1e-10


class Law:
    """Probability measure with finite support on a discrete group."""

    def __init__(self, group: Group, atoms, *, sum_tol: float = STRICT_SUM_TOL,
                 mass_leak: float = 0.0):
        pairs = sorted(dict(atoms).items())
        if not pairs:
            raise ValueError("law needs at least one atom")
        for x, p in pairs:
            group.validate_element(x)
            if not p > 0.0:
                raise ValueError(f"atom {x!r} has non-positive mass {p!r}")
        total = math.fsum(p for _, p in pairs)
        if abs(total - 1.0) > sum_tol:
            raise ValueError(f"law mass {total!r} differs from 1 by more than {sum_tol}")
        self.group = group
        self.atoms = dict(pairs)
        self.mass_leak = mass_leak

    @classmethod
    def point_mass(cls, group: Group, x=None) -> "Law":
        e = group.identity() if x is None else x
        return cls(group, {e: 1.0})

    def mass(self) -> float:
        return math.fsum(self.atoms.values())

    def support(self):
        return list(self.atoms)

    def support_radius(self) -> int:
        """Chebyshev radius of the support (lattice groups only)."""
        if not isinstance(self.group, Lattice):
            raise TypeError("support_radius is a lattice notion")
        return max((max(abs(c) for c in x) for x in self.atoms), default=0)

    def convolve(self, other: "Law") -> "Law":
        """Law of X+increment: mass(z) = sum over xy=z of self(x)*other(y)."""
        if other.group != self.group:
            raise GroupMismatch(f"cannot convolve laws on {self.group} and {other.group}")
        mul = self.group.multiply
        out: dict = {}
        for x, p in self.atoms.items():
            for y, q in other.atoms.items():
                z = mul(x, y)
                out[z] = out.get(z, 0.0) + p * q
        leak = self.mass_leak + other.mass_leak
        kept = {}
        for z, m in out.items():
            if m < UNDERFLOW_FLOOR:
                leak += m
            else:
                kept[z] = m
        return Law(self.group, kept, sum_tol=CONVOLVE_SUM_TOL, mass_leak=leak)

    def power(self, n: int) -> "Law":
        """n-fold convolution power; n = 0 gives the point mass at the identity."""
        if n < 0:
            raise ValueError("power needs n >= 0")
        acc = Law.point_mass(self.group)
        for _ in range(n):
            acc = acc.convolve(self)
        return acc

    def dual(self) -> "Law":
        """Law of the reversed walk: mass at x^-1 equals this law's mass at x."""
        inv = self.group.inverse
        return Law(self.group, {inv(x): p for x, p in self.atoms.items()},
                   sum_tol=CONVOLVE_SUM_TOL, mass_leak=self.mass_leak)

    def step_expectation(self, f: FunctionTable, x) -> float:
        """One-step transition operator: sum over y of f(xy) * mass(y).

        Raises WindowExceeded if any reachable point xy falls outside the
        table's window.
        """
        mul = self.group.multiply
        return math.fsum(p * f[mul(x, y)] for y, p in self.atoms.items())

    def is_symmetric(self, atol: float = 1e-14) -> bool:
        d = self.dual()
        if set(d.atoms) != set(self.atoms):
            return False
        return all(abs(d.atoms[x] - p) <= atol for x, p in self.atoms.items())

    def allclose(self, other: "Law", atol: float = 1e-12) -> bool:
        if other.group != self.group or set(other.atoms) != set(self.atoms):
            return False
        return all(abs(other.atoms[x] - p) <= atol for x, p in self.atoms.items())

    def __eq__(self, other):
        return (isinstance(other, Law) and other.group == self.group
                and other.atoms == self.atoms)

    def __repr__(self):
        inner = ", ".join(f"{x}: {p:.6g}" for x, p in self.atoms.items())
        return f"Law({self.group}, {{{inner}}})"


@dataclass(frozen=True)
class IrreducibilityResult:
    irreducible: bool
    witness: str


def _det(rows) -> int:
    d = len(rows)
    if d == 1:
        return rows[0][0]
    if d == 2:
        (a, b), (c, e) = rows
        return a * e - b * c
    (a, b, c), (p, q, r), (u, v, w) = rows
    return a * (q * w - r * v) - b * (p * w - r * u) + c * (p * v - q * u)


def _sublattice_index(vectors, dim: int) -> int:
    """Index of the subgroup of Z^d generated by the vectors.

    Equals the gcd of all d x d minors of the stacked vector matrix;
    0 means the vectors do not span a rank-d sublattice.
    """
    g = 0
    for rows in combinations(vectors, dim):
        g = math.gcd(g, abs(_det(rows)))
        if g == 1:
            return 1
    return g


def _perp2(s):
    return (-s[1], s[0])


def _cross3(s, t):
    return (s[1] * t[2] - s[2] * t[1],
            s[2] * t[0] - s[0] * t[2],
            s[0] * t[1] - s[1] * t[0])


def _separating_direction(vectors, dim: int):
    """Exact test for a closed half-space containing every vector.

    Returns an integer direction u != 0 with u.s <= 0 for all s, or None
    when the origin is interior to the convex hull.  If such a u exists,
    one exists among the perpendiculars/cross products enumerated below
    (an extreme ray of the polar cone activates dim-1 independent
    constraints), so the search is exhaustive, not heuristic.
    """
    nz = [s for s in vectors if any(s)]
    if not nz:
        return (1,) + (0,) * (dim - 1)
    if dim == 1:
        candidates = [(1,), (-1,)]
    elif dim == 2:
        candidates = []
        for s in nz:
            p = _perp2(s)
            candidates += [p, tuple(-c for c in p)]
    else:
        candidates = []
        axes = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
        for i, s in enumerate(nz):
            for t in nz[i + 1:] + axes:
                c = _cross3(s, t)
                if any(c):
                    candidates += [c, tuple(-x for x in c)]
    for u in candidates:
        if all(sum(ui * si for ui, si in zip(u, s)) <= 0 for s in nz):
            return u
    return None


# Window multiplier per dimension: sized so the whole identity-check suite
# stays fast while the windows remain wide relative to one-step moves.
WINDOW_MULTIPLIER = {1: 32, 2: 16, 3: 8}


def default_window(law: Law):
    """Default lattice check window: a centered box of WINDOW_MULTIPLIER[d]
    times the support radius.  Finite groups need no window (returns None)."""
    from .tables import LatticeBox

    if isinstance(law.group, FiniteGroup):
        return None
    dim = law.group.dim
    radius = WINDOW_MULTIPLIER[dim] * max(1, law.support_radius())
    return LatticeBox.centered(radius, dim)


def check_irreducible(law: Law) -> IrreducibilityResult:
    """Does the closed semigroup generated by the support equal the group?

    Finite group: breadth-first closure of the support under multiplication
    (a finite subsemigroup of a group is a subgroup, so closure suffices).
    Lattice: the semigroup is all of Z^d exactly when (a) the subgroup
    generated by the support is Z^d (gcd of d x d minors equals 1) and
    (b) the origin is interior to the convex hull of the support.
    """
    group = law.group
    if isinstance(group, FiniteGroup):
        support = list(law.atoms)
        reached = set(support)
        frontier = list(support)
        while frontier:
            new = []
            for a in frontier:
                for b in support:
                    c = group.multiply(a, b)
                    if c not in reached:
                        reached.add(c)
                        new.append(c)
            frontier = new
        if len(reached) == group.order:
            return IrreducibilityResult(True, "support closure generates every element")
        return IrreducibilityResult(
            False, f"support closure reaches {len(reached)} of {group.order} elements")

    vectors = list(law.atoms)
    dim = group.dim
    index = _sublattice_index(vectors, dim)
    if index == 0:
        return IrreducibilityResult(
            False, f"support spans a sublattice of rank < {dim}")
    if index != 1:
        return IrreducibilityResult(
            False, f"support generates a sublattice of index {index}")
    u = _separating_direction(vectors, dim)
    if u is not None:
        return IrreducibilityResult(
            False, "semigroup generated stays in the half-space with outward normal "
                   f"{u} (origin not interior to support hull)")
    return IrreducibilityResult(
        True, "support lattice is Z^d and origin is interior to the support hull")
