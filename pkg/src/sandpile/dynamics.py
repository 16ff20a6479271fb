"""Deterministic harmonic dynamics: frames, trajectories, periodicity.

A frame at time t is relax(start + round(t * X)) with exact rational t and
per-vertex integer rounding (floor by default). Adding one full period of
drops (t -> t + 1) returns any recurrent start to itself exactly, which is
the invariant the other modules build on.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domain import Configuration
from .relax import DEFAULT_BUDGET, relax

ROUNDING_MODES = ("floor", "ceil", "round")


@dataclass
class Trajectory:
    start: Configuration
    potential: object
    frames: list  # [(Fraction, Configuration)]
    rounding: str = "floor"

    def at(self, t):
        t = Fraction(t)
        for time, config in self.frames:
            if time == t:
                return config
        raise KeyError(f"no frame at t={t}")


def _as_time(t):
    t = Fraction(t)
    if t < 0:
        raise ValueError("time must be non-negative")
    return t


def frame(start, potential, t, rounding="floor", budget=DEFAULT_BUDGET):
    """The configuration at time t: relax(start + round(t * x))."""
    t = _as_time(t)
    grains = potential.scaled_floor(t, rounding)
    stable, _ = relax(Configuration(start.domain, start.grid + grains),
                      budget=budget)
    return stable


def frame_multi(start, potentials, t, rounding="floor", budget=DEFAULT_BUDGET):
    """Frame under several independently scheduled potentials.

    Each potential keeps its own uniformly spaced drop schedule (used for the
    four-cardinal-direction variant); grains are summed before one relaxation.
    """
    t = _as_time(t)
    grid = start.grid.copy()
    for p in potentials:
        grid += p.scaled_floor(t, rounding)
    stable, _ = relax(Configuration(start.domain, grid), budget=budget)
    return stable


def trajectory(start, potential, times, rounding="floor",
               budget=DEFAULT_BUDGET):
    """Frames at several times, evaluated incrementally.

    Between consecutive sampled times only the per-vertex increment
    round(t2 x) - round(t1 x) is added before one relaxation; the abelian
    property makes this equal to direct evaluation at every sampled time.
    """
    times = [_as_time(t) for t in times]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be sorted ascending")
    frames = []
    current = Configuration(start.domain, start.grid)
    prev = np.zeros_like(start.grid)
    for t in times:
        grains = potential.scaled_floor(t, rounding)
        step = grains - prev
        current, _ = relax(Configuration(start.domain, current.grid + step),
                           budget=budget)
        prev = grains
        frames.append((t, current))
    return Trajectory(start, potential, frames, rounding)


def verify_periodicity(start, potential, budget=DEFAULT_BUDGET):
    """Check relax(start + X) == start exactly; returns (ok, diagnostics)."""
    stable, odometer = relax(
        Configuration(start.domain, start.grid + potential.x), budget=budget)
    differing = int((stable.grid != start.grid).sum())
    return differing == 0, {
        "differing_vertices": differing,
        "topplings": odometer.total(),
        "drops": potential.total,
    }


def uniform_times(n_frames, periods=1):
    """The movie schedule t = k/F over the requested number of periods."""
    total = n_frames * Fraction(periods)
    if total.denominator != 1:
        raise ValueError("periods * n_frames must be an integer")
    return [Fraction(k, n_frames) for k in range(int(total) + 1)]
