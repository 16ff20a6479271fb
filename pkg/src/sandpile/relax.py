"""Relaxation engine: stabilize configurations, record odometers and avalanches.

The production path is the numba kernel in :mod:`sandpile.kernels`;
:func:`reference_relax` is an independent single-toppling implementation with
pluggable queue orders, kept as the oracle for the abelian-property tests.
"""

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .domain import Configuration

# Termination guard. High-order fields on desk-scale domains legitimately
# need ~2e12 elementary topplings in one relaxation, so the guard sits well
# above that; it exists to catch non-termination bugs, not to limit work.
DEFAULT_BUDGET = 10 ** 14

_MASS_LIMIT = 1 << 61


class RelaxationError(RuntimeError):
    """Raised when relaxation exceeds its toppling budget."""


@dataclass
class Odometer:
    """Per-vertex toppling counts of one relaxation."""

    domain: object
    grid: np.ndarray

    def flat(self):
        return self.grid[self.domain.mask]

    def total(self):
        return int(self.flat().sum(dtype=np.int64))


@dataclass
class AvalancheRecord:
    """Total topplings caused by one grain drop."""

    size: int
    drop_vertex: int
    time: Fraction = Fraction(0)


def _checked_flat(config):
    flat = config.flat()
    if (flat < 0).any():
        raise ValueError("negative grain counts")
    mass = float(flat.sum(dtype=np.float64))
    if mass >= _MASS_LIMIT:
        raise OverflowError(
            "configuration mass too large for the 64-bit relaxation kernel")
    return flat


def relax(config, budget=DEFAULT_BUDGET):
    """Stabilize a configuration.

    Returns (stable, odometer) with the exact identity
    stable = config + laplacian(odometer).
    """
    d = config.domain
    flat = _checked_flat(config)
    odo = np.zeros(d.num_vertices, np.int64)
    status, total = kernels.relax_flat(flat, d.nbr, odo, np.int64(budget))
    if status == kernels.BUDGET_EXCEEDED:
        raise RelaxationError(
            f"toppling budget exceeded: {total} topplings on "
            f"{d.num_vertices} vertices (budget {budget})")
    odometer = Odometer(d, np.zeros((d.height, d.width), np.int64))
    odometer.grid[d.mask] = odo
    return Configuration.from_flat(d, flat), odometer


def drop_and_relax(config, vertex, n=1, time=Fraction(0),
                   budget=DEFAULT_BUDGET):
    """Add n grains at a vertex of a stable configuration and relax.

    Returns (stable, AvalancheRecord); the record's size counts every
    toppling of the single relaxation triggered by the drop.
    """
    d = config.domain
    if not 0 <= vertex < d.num_vertices:
        raise ValueError(f"vertex {vertex} outside domain")
    if n < 1:
        raise ValueError("must drop at least one grain")
    if not config.is_stable():
        raise ValueError("drop_and_relax requires a stable configuration")
    bumped = config.copy()
    r, c = d.cells[vertex]
    bumped.grid[r, c] += n
    stable, odometer = relax(bumped, budget=budget)
    return stable, AvalancheRecord(odometer.total(), vertex, Fraction(time))


def config_add(config, other):
    """Pointwise sum of a configuration and a count grid or configuration."""
    grid = other.grid if isinstance(other, Configuration) else np.asarray(other)
    return Configuration(config.domain, config.grid + grid)


def apply_laplacian(domain, flat):
    """Discrete graph Laplacian with the zero-outside convention (flat form)."""
    flat = np.asarray(flat, np.int64)
    out = -4 * flat
    for k in range(4):
        idx = domain.nbr[:, k]
        ok = idx >= 0
        out[ok] += flat[idx[ok]]
    return out


def reference_relax(config, order="fifo", seed=0, budget=10 ** 8):
    """Single-toppling oracle with an explicit queue discipline.

    ``order`` is one of fifo, lifo, random. Independent of the production
    kernel; only meant for small grids.
    """
    d = config.domain
    counts = [int(x) for x in _checked_flat(config)]
    odo = [0] * d.num_vertices
    queue = [v for v in range(d.num_vertices) if counts[v] >= 4]
    rng = random.Random(seed)
    total = 0
    while queue:
        if order == "fifo":
            v = queue.pop(0)
        elif order == "lifo":
            v = queue.pop()
        elif order == "random":
            v = queue.pop(rng.randrange(len(queue)))
        else:
            raise ValueError(f"unknown order {order!r}")
        if counts[v] < 4:
            continue
        counts[v] -= 4
        odo[v] += 1
        total += 1
        if total > budget:
            raise RelaxationError("reference relaxation budget exceeded")
        for k in range(4):
            u = int(d.nbr[v, k])
            if u >= 0:
                counts[u] += 1
                if counts[u] >= 4 and u not in queue:
                    queue.append(u)
        if counts[v] >= 4 and v not in queue:
            queue.append(v)
    odometer = Odometer(d, np.zeros((d.height, d.width), np.int64))
    odometer.grid[d.mask] = odo
    return Configuration.from_flat(d, np.array(counts, np.int64)), odometer
