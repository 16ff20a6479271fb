"""Lattice domains: masks, vertex indexing, neighbors, boundary structure.

Conventions used throughout the package:

* Cells are addressed by (column c, row r) with c increasing rightward and
  r increasing upward; arrays are stored as grid[r, c] with row 0 at the
  bottom. Writers that emit images or text flip to top-first at the edge.
* Lattice coordinates of a cell are (i, j) = (c - origin_c, r - origin_r).
  For an N x M rectangle the origin cell sits at the zero-based index
  (ceil(N/2) - 1, ceil(M/2) - 1), the exact center for odd N, M.
* Two masked-in cells are neighbors iff they are at axis distance 1
  (4-neighborhood). A vertex with fewer than 4 in-domain neighbors is a
  boundary vertex; toppling there loses grains.
"""

import hashlib
from fractions import Fraction

import numpy as np

NEIGHBOR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))  # +i, -i, +j, -j
DIRECTION_NAMES = ("E", "W", "N", "S")


class Domain:
    """An immutable set of lattice vertices with neighbor structure."""

    def __init__(self, mask, origin=None):
        mask = np.ascontiguousarray(np.asarray(mask, dtype=bool))
        if mask.ndim != 2:
            raise ValueError("mask must be 2-dimensional")
        height, width = mask.shape
        if width < 1 or height < 1:
            raise ValueError("non-positive domain dimensions")
        if not mask.any():
            raise ValueError("empty domain")
        if origin is None:
            origin = (_center_index(width), _center_index(height))
        self.width = int(width)
        self.height = int(height)
        self.mask = mask
        self.origin = (int(origin[0]), int(origin[1]))
        self._build()
        self.mask.setflags(write=False)

    def _build(self):
        h, w = self.height, self.width
        vidx = np.full((h, w), -1, np.int32)
        rr, cc = np.nonzero(self.mask)
        n = rr.shape[0]
        vidx[rr, cc] = np.arange(n, dtype=np.int32)
        cells = np.stack([rr, cc], axis=1).astype(np.int32)
        nbr = np.full((n, 4), -1, np.int32)
        for k, (di, dj) in enumerate(NEIGHBOR_STEPS):
            r2 = rr + dj
            c2 = cc + di
            ok = (r2 >= 0) & (r2 < h) & (c2 >= 0) & (c2 < w)
            nbr[ok, k] = vidx[r2[ok], c2[ok]]
        self.num_vertices = int(n)
        self.vertex_index = vidx
        self.cells = cells
        self.nbr = nbr
        self.degree = (nbr >= 0).sum(axis=1).astype(np.int8)
        self.is_boundary = self.degree < 4
        for a in (self.vertex_index, self.cells, self.nbr, self.degree,
                  self.is_boundary):
            a.setflags(write=False)

    # -- coordinates -------------------------------------------------------

    def lattice_i(self):
        """Grid of i coordinates, shape (height, width)."""
        oc = self.origin[0]
        return np.broadcast_to(
            np.arange(self.width, dtype=np.int64) - oc,
            (self.height, self.width))

    def lattice_j(self):
        oj = self.origin[1]
        return np.broadcast_to(
            (np.arange(self.height, dtype=np.int64) - oj)[:, None],
            (self.height, self.width))

    def cell_coords(self, vertex):
        """Lattice (i, j) of a vertex id."""
        r, c = self.cells[vertex]
        return int(c) - self.origin[0], int(r) - self.origin[1]

    def vertex_at(self, i, j):
        """Vertex id at lattice coordinates, or -1."""
        c = i + self.origin[0]
        r = j + self.origin[1]
        if 0 <= r < self.height and 0 <= c < self.width:
            return int(self.vertex_index[r, c])
        return -1

    # -- extension ring (Fig-style potential construction) -----------------

    def extension(self):
        """External cells one step off each outward-facing boundary side.

        Returns (ext_cells, pairs): ext_cells is an (E, 2) array of (r, c)
        positions (possibly outside the bounding box, never diagonal), and
        pairs is a (P, 3) array of (vertex, ext_index, direction) rows, one
        per outward-facing side. A corner vertex appears in two pairs; a
        shared external cell of a non-convex domain appears in several.
        """
        if not hasattr(self, "_extension"):
            cell_ids = {}
            ext_cells = []
            pairs = []
            for v in range(self.num_vertices):
                if not self.is_boundary[v]:
                    continue
                r, c = self.cells[v]
                for k, (di, dj) in enumerate(NEIGHBOR_STEPS):
                    if self.nbr[v, k] >= 0:
                        continue
                    key = (int(r + dj), int(c + di))
                    e = cell_ids.get(key)
                    if e is None:
                        e = len(ext_cells)
                        cell_ids[key] = e
                        ext_cells.append(key)
                    pairs.append((v, e, k))
            self._extension = (np.asarray(ext_cells, np.int64).reshape(-1, 2),
                               np.asarray(pairs, np.int64).reshape(-1, 3))
        return self._extension

    def extension_coords(self):
        """Lattice (i, j) pairs of the external cells, shape (E, 2)."""
        ext_cells, _ = self.extension()
        out = np.empty_like(ext_cells)
        out[:, 0] = ext_cells[:, 1] - self.origin[0]
        out[:, 1] = ext_cells[:, 0] - self.origin[1]
        return out

    def window(self):
        """Lattice bounds (imin, imax, jmin, jmax) covering grid + extension."""
        oc, oj = self.origin
        return (-oc - 1, self.width - oc, -oj - 1, self.height - oj)

    # -- identity / hashing ------------------------------------------------

    def fingerprint(self):
        hsh = hashlib.sha256()
        hsh.update(f"{self.width}x{self.height}@{self.origin}".encode())
        hsh.update(np.packbits(self.mask).tobytes())
        return hsh.hexdigest()

    def __eq__(self, other):
        return (isinstance(other, Domain)
                and self.width == other.width
                and self.height == other.height
                and self.origin == other.origin
                and np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self):
        full = " full" if self.mask.all() else " masked"
        return (f"Domain({self.width}x{self.height}{full}, "
                f"{self.num_vertices} vertices)")


def _center_index(n):
    return (n + 1) // 2 - 1  # == ceil(n/2) - 1


# ---------------------------------------------------------------------------
# constructors


def rectangle(n, m):
    if n < 1 or m < 1:
        raise ValueError("non-positive domain dimensions")
    return Domain(np.ones((m, n), bool))


def disk(diameter):
    """All cells with i^2 + j^2 < (diameter/2)^2 in a diameter^2 box."""
    if diameter < 1:
        raise ValueError("non-positive domain dimensions")
    d = Domain(np.ones((diameter, diameter), bool))
    i, j = d.lattice_i(), d.lattice_j()
    lim = Fraction(diameter, 2) ** 2
    mask = (i * i + j * j) < lim
    return Domain(np.asarray(mask, bool))


def rectangle_with_hole(n, m, hole_w, hole_h):
    """N x M rectangle with a centered hole of size hole_w x hole_h cells."""
    if hole_w >= n or hole_h >= m:
        raise ValueError("hole does not fit inside the rectangle")
    mask = np.ones((m, n), bool)
    c0 = (n - hole_w) // 2
    r0 = (m - hole_h) // 2
    mask[r0:r0 + hole_h, c0:c0 + hole_w] = False
    return Domain(mask)


def punctured(n, m):
    """Rectangle with the origin cell removed."""
    mask = np.ones((m, n), bool)
    mask[_center_index(m), _center_index(n)] = False
    return Domain(mask)


def cshape(n, m, a, b):
    """Half-plane predicate domain: keep cells with i < a or |j| > b."""
    d = Domain(np.ones((m, n), bool))
    i, j = d.lattice_i(), d.lattice_j()
    mask = (i < a) | (np.abs(j) > b)
    return Domain(np.asarray(mask, bool))


def ellipse(n, m, tilt, radius):
    """Tilted ellipse: (i + tilt*j)^2 + j^2 < radius^2, exact rational test."""
    tilt = Fraction(tilt)
    d = Domain(np.ones((m, n), bool))
    i, j = d.lattice_i(), d.lattice_j()
    p, q = tilt.numerator, tilt.denominator
    lhs = (q * i + p * j).astype(object) ** 2 + (q * q) * j.astype(object) ** 2
    mask = lhs < q * q * radius * radius
    return Domain(np.asarray(mask, bool))


def from_mask(mask):
    return Domain(mask)


def read_pbm(path):
    """Read a PBM (P1 or P4) mask; black pixels (1) are in the domain.

    The file's top row becomes the top of the domain (largest j).
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise ValueError(f"not a PBM file: magic {magic!r}")
    tokens, pos = [], 2
    while len(tokens) < 2:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(data[start:pos]))
    w, h = tokens
    if magic == b"P1":
        bits = [ch - 0x30 for ch in data[pos:] if ch in (0x30, 0x31)]
        if len(bits) < w * h:
            raise ValueError("truncated PBM data")
        grid = np.array(bits[:w * h], bool).reshape(h, w)
    else:
        pos += 1  # single whitespace after the header
        row_bytes = (w + 7) // 8
        raw = np.frombuffer(data[pos:pos + row_bytes * h], np.uint8)
        if raw.size < row_bytes * h:
            raise ValueError("truncated PBM data")
        grid = np.unpackbits(raw.reshape(h, row_bytes), axis=1)[:, :w].astype(bool)
    return Domain(grid[::-1].copy())  # file top row = largest j


def write_pbm(path, grid):
    """Write a bool grid (row 0 = bottom) as an ASCII PBM (P1)."""
    grid = np.asarray(grid, bool)
    lines = [b"P1", f"{grid.shape[1]} {grid.shape[0]}".encode()]
    for row in grid[::-1]:
        lines.append(" ".join("1" if x else "0" for x in row).encode())
    with open(path, "wb") as fh:
        fh.write(b"\n".join(lines) + b"\n")


def create_domain(spec):
    """Parse a textual domain descriptor.

    Supported forms: ``rect:NxM``, ``disk:D``, ``recthole:NxM:WxH``,
    ``punctured:NxM``, ``cshape:NxM:A:B``, ``ellipse:NxM:TILT:R``,
    ``pbm:PATH``.
    """
    kind, _, rest = str(spec).partition(":")
    try:
        if kind == "rect":
            n, m = _parse_dims(rest)
            return rectangle(n, m)
        if kind == "disk":
            return disk(int(rest))
        if kind == "recthole":
            dims, _, hole = rest.partition(":")
            n, m = _parse_dims(dims)
            hw, hh = _parse_dims(hole)
            return rectangle_with_hole(n, m, hw, hh)
        if kind == "punctured":
            n, m = _parse_dims(rest)
            return punctured(n, m)
        if kind == "cshape":
            dims, a, b = rest.split(":")
            n, m = _parse_dims(dims)
            return cshape(n, m, int(a), int(b))
        if kind == "ellipse":
            dims, tilt, radius = rest.split(":")
            n, m = _parse_dims(dims)
            return ellipse(n, m, tilt, int(radius))
        if kind == "pbm":
            return read_pbm(rest)
    except ValueError as exc:
        raise ValueError(f"bad domain descriptor {spec!r}: {exc}") from None
    raise ValueError(f"unknown domain descriptor kind {kind!r}")


def _parse_dims(text):
    n, _, m = text.partition("x")
    return int(n), int(m)


# ---------------------------------------------------------------------------
# configurations


class Configuration:
    """Integer grain counts on the masked-in vertices of a domain."""

    __slots__ = ("domain", "grid")

    def __init__(self, domain, grid):
        grid = np.asarray(grid)
        if grid.shape != (domain.height, domain.width):
            raise ValueError("grid shape does not match domain")
        if grid.dtype != np.int64:
            grid = grid.astype(np.int64)
        grid = grid.copy()
        grid[~domain.mask] = 0
        self.domain = domain
        self.grid = grid

    @classmethod
    def zeros(cls, domain):
        return cls(domain, np.zeros((domain.height, domain.width), np.int64))

    @classmethod
    def filled(cls, domain, value):
        return cls(domain, np.full((domain.height, domain.width), value,
                                   np.int64))

    @classmethod
    def from_flat(cls, domain, flat):
        grid = np.zeros((domain.height, domain.width), np.int64)
        grid[domain.mask] = flat
        return cls(domain, grid)

    def flat(self):
        return self.grid[self.domain.mask].astype(np.int64)

    def is_stable(self):
        return bool((self.grid[self.domain.mask] <= 3).all())

    def total(self):
        return int(self.grid[self.domain.mask].sum())

    def copy(self):
        return Configuration(self.domain, self.grid)

    def __eq__(self, other):
        return (isinstance(other, Configuration)
                and self.domain == other.domain
                and np.array_equal(self.grid, other.grid))

    def __hash__(self):
        raise TypeError("configurations are mutable value objects")

    def __repr__(self):
        kind = "stable" if self.is_stable() else "unstable"
        return (f"Configuration({self.domain.width}x{self.domain.height}, "
                f"{kind}, |C|={self.total()})")


class RecurrentConfiguration(Configuration):
    """A configuration known to pass the burning test.

    Produced by operations that guarantee recurrence (the identity, group
    addition with a recurrent summand, payload encoding); use
    ``group.as_recurrent`` to check and tag an arbitrary configuration.
    """
