"""Plain-text configuration formats.

SPILE v1: magic line, a ``width height`` header, then one line per row of
decimal counts separated by spaces, top row first; masked-out cells are
written as -1 so masked domains round-trip. SPILE-X v1 is the same layout
with boundary cells allowed to be exact rationals ``p/q``.
"""

from fractions import Fraction

import numpy as np

from .domain import Configuration, Domain

MAGIC = "SPILE v1"
MAGIC_X = "SPILE-X v1"


def write_configuration(path, config):
    d = config.domain
    lines = [MAGIC, f"{d.width} {d.height}"]
    for r in range(d.height - 1, -1, -1):
        row = [str(int(config.grid[r, c])) if d.mask[r, c] else "-1"
               for c in range(d.width)]
        lines.append(" ".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_grid(path, magic):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != magic:
            raise ValueError(f"{path}: expected {magic!r}, got {header!r}")
        w, h = map(int, fh.readline().split())
        rows = []
        for _ in range(h):
            tokens = fh.readline().split()
            if len(tokens) != w:
                raise ValueError(f"{path}: malformed row")
            rows.append(tokens)
    return w, h, rows[::-1]  # back to bottom-up


def read_configuration(path, domain=None):
    w, h, rows = _read_grid(path, MAGIC)
    grid = np.array([[int(t) for t in row] for row in rows], np.int64)
    mask = grid >= 0
    if domain is None:
        domain = Domain(mask)
    elif (domain.width, domain.height) != (w, h) or \
            not np.array_equal(domain.mask, mask):
        raise ValueError(f"{path}: stored mask does not match the domain")
    grid[~mask] = 0
    return Configuration(domain, grid)


def write_extended(path, xc):
    d = xc.domain
    lines = [MAGIC_X, f"{d.width} {d.height}"]
    for r in range(d.height - 1, -1, -1):
        row = []
        for c in range(d.width):
            if not d.mask[r, c]:
                row.append("-1")
                continue
            total = Fraction(int(xc.int_grid[r, c])) + xc.frac_grid[r, c]
            row.append(str(total.numerator) if total.denominator == 1
                       else f"{total.numerator}/{total.denominator}")
        lines.append(" ".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_extended(path, domain=None):
    from .extended import ExtendedConfiguration
    w, h, rows = _read_grid(path, MAGIC_X)
    counts = [[Fraction(t) for t in row] for row in rows]
    mask = np.array([[f >= 0 for f in row] for row in counts], bool)
    if domain is None:
        domain = Domain(mask)
    elif (domain.width, domain.height) != (w, h) or \
            not np.array_equal(domain.mask, mask):
        raise ValueError(f"{path}: stored mask does not match the domain")
    for row in counts:
        for c, f in enumerate(row):
            if f < 0:
                row[c] = Fraction(0)
    return ExtendedConfiguration.from_counts(domain, counts)


def write_pgm(path, config, binary=True):
    """Counts as PGM gray values (P5 by default, P2 if binary=False)."""
    grid = config.grid
    if grid.max(initial=0) > 255:
        raise ValueError("PGM export requires counts <= 255")
    top_first = grid[::-1].astype(np.uint8)
    h, w = top_first.shape
    if binary:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(top_first.tobytes())
    else:
        lines = [f"P2", f"{w} {h}", "255"]
        lines += [" ".join(str(v) for v in row) for row in top_first]
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
