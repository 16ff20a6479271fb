"""Extended sandpile model: real-valued boundary counts, geodesics, eta.

Boundary vertices may carry a non-negative real (here: exact rational)
number of grains; interior vertices stay integer. Toppling rules are
unchanged (threshold 4, integer transfers), which has a useful structural
consequence: with fractional parts normalized into [0, 1), a vertex is
unstable iff its integer part is >= 4, and topplings never move fractional
mass. Extended relaxation therefore reduces to integer relaxation of the
integer parts with the fractional parts frozen, and the floor projection of
a geodesic frame coincides with the floored-schedule dynamics exactly.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domain import Configuration, Domain
from .group import identity as group_identity
from .relax import DEFAULT_BUDGET, relax


def _fraction_grid(domain):
    grid = np.empty((domain.height, domain.width), object)
    grid[:] = Fraction(0)
    return grid


@dataclass
class RealPotential:
    """Rational drop field, supported on the boundary (interior is zero)."""

    domain: Domain
    x: np.ndarray  # object grid of Fractions

    @property
    def total(self):
        return sum(self.x[r, c] for r, c in zip(*np.nonzero(self.domain.mask)))

    def scaled(self, t):
        t = Fraction(t)
        out = _fraction_grid(self.domain)
        rr, cc = np.nonzero(self.domain.mask)
        for r, c in zip(rr, cc):
            out[r, c] = t * self.x[r, c]
        return out


class ExtendedConfiguration:
    """Integer interior counts plus rational boundary counts.

    Stored as an integer grid and a fractional-part grid with every entry in
    [0, 1); the count of a vertex is the sum of the two. Fractional parts are
    only allowed on boundary vertices.
    """

    __slots__ = ("domain", "int_grid", "frac_grid")

    def __init__(self, domain, int_grid, frac_grid=None):
        int_grid = np.asarray(int_grid, np.int64).copy()
        int_grid[~domain.mask] = 0
        if frac_grid is None:
            frac_grid = _fraction_grid(domain)
        else:
            frac_grid = frac_grid.copy()
        self.domain = domain
        self.int_grid = int_grid
        self.frac_grid = frac_grid
        self._validate()

    def _validate(self):
        d = self.domain
        rr, cc = np.nonzero(d.mask)
        interior = ~d.is_boundary
        vidx = d.vertex_index
        for r, c in zip(rr, cc):
            f = self.frac_grid[r, c]
            if not 0 <= f < 1:
                raise ValueError("fractional parts must lie in [0, 1)")
            if f != 0 and interior[vidx[r, c]]:
                raise ValueError("interior vertices must carry integer counts")
            if self.int_grid[r, c] < 0:
                raise ValueError("negative grain counts")

    @classmethod
    def from_configuration(cls, config):
        return cls(config.domain, config.grid)

    @classmethod
    def from_counts(cls, domain, counts):
        """Build from a grid of rational total counts (splits off floors)."""
        int_grid = np.zeros((domain.height, domain.width), np.int64)
        frac_grid = _fraction_grid(domain)
        rr, cc = np.nonzero(domain.mask)
        for r, c in zip(rr, cc):
            total = Fraction(counts[r][c] if isinstance(counts, list)
                             else counts[r, c])
            n = total.numerator // total.denominator
            int_grid[r, c] = n
            frac_grid[r, c] = total - n
        return cls(domain, int_grid, frac_grid)

    def count_at(self, vertex):
        r, c = self.domain.cells[vertex]
        return Fraction(int(self.int_grid[r, c])) + self.frac_grid[r, c]

    def add_real(self, grid):
        """Pointwise add a grid of rational drops (integers on the interior)."""
        d = self.domain
        int_grid = self.int_grid.copy()
        frac_grid = self.frac_grid.copy()
        rr, cc = np.nonzero(d.mask)
        for r, c in zip(rr, cc):
            add = Fraction(grid[r, c])
            if add == 0:
                continue
            total = frac_grid[r, c] + add
            n = total.numerator // total.denominator
            int_grid[r, c] += n
            frac_grid[r, c] = total - n
        return ExtendedConfiguration(d, int_grid, frac_grid)

    def is_stable(self):
        return bool((self.int_grid[self.domain.mask] <= 3).all())

    def __eq__(self, other):
        return (isinstance(other, ExtendedConfiguration)
                and self.domain == other.domain
                and np.array_equal(self.int_grid, other.int_grid)
                and bool((self.frac_grid[self.domain.mask]
                          == other.frac_grid[other.domain.mask]).all()))

    def __repr__(self):
        state = "stable" if self.is_stable() else "unstable"
        return (f"ExtendedConfiguration({self.domain.width}x"
                f"{self.domain.height}, {state})")


def extended_relax(xc, budget=DEFAULT_BUDGET):
    """Stabilize; transfers are integers so fractional parts never move."""
    stable, _ = relax(Configuration(xc.domain, xc.int_grid), budget=budget)
    return ExtendedConfiguration(xc.domain, stable.grid, xc.frac_grid)


def floor_project(xc, budget=DEFAULT_BUDGET):
    """Boundary counts floored to integers; the trailing relax is a no-op
    safeguard for stable inputs."""
    stable, _ = relax(Configuration(xc.domain, xc.int_grid), budget=budget)
    return stable


def geodesic_frame(start, potential, t, budget=DEFAULT_BUDGET):
    """The extended-group geodesic (start + t * X) relaxed; no flooring."""
    t = Fraction(t)
    if t < 0:
        raise ValueError("time must be non-negative")
    if isinstance(potential, RealPotential):
        added = potential.scaled(t)
    else:  # integer Potential: scale exactly into rationals
        added = _fraction_grid(start.domain)
        rr, cc = np.nonzero(start.domain.mask)
        for r, c in zip(rr, cc):
            added[r, c] = t * int(potential.x[r, c])
    return extended_relax(start.add_real(added), budget=budget)


def eta_field(poly, domain):
    """The drop field -laplacian(restriction + k) of a rational harmonic.

    k is the minimal integer making the field non-negative everywhere;
    integer shifts do not change the resulting group element, and an integer
    k (rather than the smallest rational one) is what makes eta a
    homomorphism and sends integer-valued harmonics to the identity.
    """
    d = domain
    rr, cc = np.nonzero(d.mask)
    values = {}
    for r, c in zip(rr, cc):
        values[(r, c)] = Fraction(poly.evaluate(int(c) - d.origin[0],
                                                int(r) - d.origin[1]))
    k_min = None
    lap = {}
    for v in range(d.num_vertices):
        r, c = d.cells[v]
        acc = -4 * values[(r, c)]
        for u in d.nbr[v]:
            if u >= 0:
                ur, uc = d.cells[u]
                acc += values[(ur, uc)]
        lap[v] = acc
        deficit = 4 - int(d.degree[v])
        if deficit == 0:
            if acc != 0:
                raise ValueError(f"{poly} is not harmonic at an interior vertex")
        else:
            need = math.ceil(Fraction(acc, deficit))
            k_min = need if k_min is None else max(k_min, need)
    k = 0 if k_min is None else k_min
    x = _fraction_grid(d)
    for v in range(d.num_vertices):
        r, c = d.cells[v]
        x[r, c] = -lap[v] + k * (4 - int(d.degree[v]))
    return RealPotential(d, x)


def eta(poly, domain, budget=DEFAULT_BUDGET):
    """Map a rational harmonic onto the extended group (based at the identity)."""
    start = ExtendedConfiguration.from_configuration(group_identity(domain))
    field = eta_field(poly, domain)
    return extended_relax(start.add_real(field.x), budget=budget)


def extended_add(a, b, budget=DEFAULT_BUDGET):
    """Group operation on the extended group: pointwise add, then relax."""
    if a.domain != b.domain:
        raise ValueError("configurations live on different domains")
    int_grid = a.int_grid + b.int_grid
    frac_grid = a.frac_grid.copy()
    rr, cc = np.nonzero(a.domain.mask)
    for r, c in zip(rr, cc):
        total = a.frac_grid[r, c] + b.frac_grid[r, c]
        n = total.numerator // total.denominator
        int_grid[r, c] += n
        frac_grid[r, c] = total - n
    return extended_relax(
        ExtendedConfiguration(a.domain, int_grid, frac_grid), budget=budget)


def renormalize(poly, fine, coarse):
    """Transport a harmonic's group element between nested domains.

    Realizes the canonical projection between extended groups through the
    universal harmonic coordinates: the element eta(poly) on the fine domain
    maps to eta(poly) on the coarse one; the floor projection then lands in
    the ordinary sandpile group. Returns (fine_element, coarse_element,
    coarse_floor).
    """
    fine_el = eta(poly, fine)
    coarse_el = eta(poly, coarse)
    return fine_el, coarse_el, floor_project(coarse_el)
