"""Drop fields: turn a harmonic (or super-harmonic) field into grain counts.

The construction extends the domain by one cell off every outward-facing
boundary side, evaluates the field there, shifts it to be non-negative,
divides out a common factor, and folds the external values back onto the
boundary (corner cells receive two contributions). For a harmonic source the
result equals minus the lattice Laplacian of the normalized field restricted
to the domain (zero outside), which is what makes the induced dynamics
exactly periodic; the equivalence is kept as a tested invariant.

Super-harmonic sources work the same way but additionally deposit the local
Laplacian surplus -lap(field) at every vertex where it is positive, which
for a pointwise minimum of harmonics happens along the creases (these may
touch the boundary, so the surplus is applied there as well).
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domain import Domain, Configuration
from .harmonic import HarmonicPolynomial, DiscreteField, window_laplacian


@dataclass
class Potential:
    """Non-negative grain-drop counts per vertex; zero off the domain."""

    domain: Domain
    x: np.ndarray
    label: str = ""

    @property
    def total(self):
        return int(self.x[self.domain.mask].sum(dtype=np.int64))

    def flat(self):
        return self.x[self.domain.mask].astype(np.int64)

    def is_zero(self):
        return self.total == 0

    def scaled_floor(self, t, mode="floor"):
        """Exact per-vertex round(t * x) for rational t, as a count grid."""
        t = Fraction(t)
        num, den = t.numerator, t.denominator
        x = self.x.astype(object)
        if mode == "floor":
            grid = (num * x) // den
        elif mode == "ceil":
            grid = -((-num * x) // den)
        elif mode == "round":  # round half up
            grid = (2 * num * x + den) // (2 * den)
        else:
            raise ValueError(f"unknown rounding mode {mode!r}")
        return grid.astype(np.int64)

    def __repr__(self):
        return f"Potential({self.label or 'field'}, |X|={self.total})"


def _field_values(source, domain):
    """Values of the source on the full window (grid + extension ring)."""
    imin, imax, jmin, jmax = domain.window()
    if isinstance(source, HarmonicPolynomial):
        vals = source.evaluate_window(imin, imax, jmin, jmax)
        if vals.dtype == object:
            for v in vals.flat:
                if isinstance(v, Fraction) and v.denominator != 1:
                    raise ValueError(
                        "potential construction needs integer field values")
            vals = np.array([[int(v) for v in row] for row in vals],
                            dtype=object)
        return vals, bool(source.harmonic)
    if isinstance(source, DiscreteField):
        vals = source.subwindow(imin, imax, jmin, jmax)
        return np.asarray(vals), False
    raise TypeError(f"unsupported potential source {type(source).__name__}")


class _NormalizedField:
    """The source sampled on the window, shifted and gcd-reduced.

    The shift subtracts the minimum over the member cells (domain plus
    extension ring), and the gcd is taken over the shifted member values
    before folding; window cells outside the member set are never read.
    """

    def __init__(self, source, domain):
        vals, self.is_harmonic = _field_values(source, domain)
        self.domain = domain
        imin, _, jmin, _ = domain.window()
        oc, oj = domain.origin
        self.roff = -oj - jmin  # window row of cell (r, c) is r + roff
        self.coff = -oc - imin
        self.ext_cells, self.pairs = domain.extension()
        self.rows, self.cols = np.nonzero(domain.mask)
        members = np.concatenate([
            vals[self.rows + self.roff, self.cols + self.coff],
            self.ext_values(vals)])
        shifted = members - members.min()
        if int(shifted.max()) > (1 << 60):
            raise OverflowError(
                "field values exceed the 64-bit drop-count range")
        g = 0
        for v in shifted:
            g = math.gcd(g, int(v))
            if g == 1:
                break
        self.vals = vals - members.min()
        if g > 1:
            self.vals = self.vals // g

    def ext_values(self, vals=None):
        vals = self.vals if vals is None else vals
        return vals[self.ext_cells[:, 0] + self.roff,
                    self.ext_cells[:, 1] + self.coff]

    def grid_values(self):
        return self.vals[self.rows + self.roff, self.cols + self.coff]

    def grid_laplacian(self):
        """Window Laplacian at the domain cells (reads member cells only)."""
        lap = window_laplacian(self.vals)
        return lap[self.rows + self.roff - 1, self.cols + self.coff - 1]


def build_potential(source, domain, label=None):
    """Construct the drop field of a harmonic polynomial or sampled field."""
    nf = _NormalizedField(source, domain)
    grid_lap = nf.grid_laplacian()
    if nf.is_harmonic:
        if not (grid_lap == 0).all():
            raise ValueError(f"{source} is not discretely harmonic on the domain")
        surplus = np.zeros(len(nf.rows), dtype=np.int64)
    else:
        if not (grid_lap <= 0).all():
            raise ValueError("field is not super-harmonic on the domain")
        surplus = (-grid_lap).astype(np.int64)

    x = np.zeros((domain.height, domain.width), np.int64)
    x[nf.rows, nf.cols] = surplus
    ext_vals = nf.ext_values()
    for v, e, _ in nf.pairs:
        r, c = domain.cells[v]
        x[r, c] += int(ext_vals[e])
    if label is None:
        label = getattr(source, "label", "") or str(source)
    return Potential(domain, x, label)


def directional_potentials(source, domain):
    """Split the fold by cardinal side of the external cell: (N, E, S, W).

    Only defined for harmonic polynomial sources, where the whole potential
    is carried by the fold; the four parts sum to :func:`build_potential`.
    """
    if not isinstance(source, HarmonicPolynomial):
        raise TypeError("directional potentials need a harmonic polynomial")
    nf = _NormalizedField(source, domain)
    if not nf.is_harmonic:
        raise ValueError("directional potentials need a harmonic source")
    ext_vals = nf.ext_values()
    # kernels neighbor order is (E, W, N, S)
    grids = {name: np.zeros((domain.height, domain.width), np.int64)
             for name in "EWNS"}
    for v, e, k in nf.pairs:
        r, c = domain.cells[v]
        grids["EWNS"[k]][r, c] += int(ext_vals[e])
    label = getattr(source, "label", "") or str(source)
    return tuple(Potential(domain, grids[name], f"{label}:{name}")
                 for name in "NESW")


def creutz_pattern(domain):
    """The boundary drop pattern 4 - degree(v) (one per open side, two at
    corners): the raw, unshifted potential of the constant field."""
    x = np.zeros((domain.height, domain.width), np.int64)
    rr, cc = np.nonzero(domain.mask)
    x[rr, cc] = 4 - domain.degree
    return Potential(domain, x, "creutz-boundary")


def normalized_restriction(source, domain):
    """The normalized field restricted to the domain (zero outside), flat.

    This is the field whose negative Laplacian the built potential equals;
    exposed for the equivalence tests and the odometer analyses.
    """
    return _NormalizedField(source, domain).grid_values().astype(np.int64)
