"""Encode binary images into recurrent configurations and recover them.

Encoding adds the payload bits to the all-twos configuration, which is
recurrent on every rectangle, so the sum stays recurrent and the induced
harmonic dynamics are periodic. Scrambling evolves the encoded state to a
mid-period time where nothing is legible; decoding continues the same
dynamics and watches for a legible frame, which must reappear within one
period (deterministically: exactly; stochastically: up to boundary noise).

Legibility is scored without reference to the payload: the published
procedure decodes by eye, so the default detector simply measures how
two-three-valued a frame is (an exact payload frame scores 1.0, scrambled
frames carry many 0/1 vertices). The scorer and threshold are pluggable.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import stochastic
from .domain import Configuration, RecurrentConfiguration, write_pbm
from .dynamics import frame
from .relax import DEFAULT_BUDGET, relax

DEFAULT_THRESHOLD = 0.95
DEFAULT_RESOLUTION = 1024


class DetectionError(RuntimeError):
    """No frame scored above the legibility threshold."""


@dataclass
class Payload:
    """A binary image masked to the domain."""

    domain: object
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, bool).copy()
        if bits.shape != (self.domain.height, self.domain.width):
            raise ValueError("payload shape does not match domain")
        bits[~self.domain.mask] = False
        self.bits = bits

    @classmethod
    def from_pbm(cls, path, domain):
        from .domain import read_pbm
        loaded = read_pbm(path)
        if (loaded.height, loaded.width) != (domain.height, domain.width):
            raise ValueError("payload image does not match the domain size")
        return cls(domain, loaded.mask)

    def to_pbm(self, path):
        write_pbm(path, self.bits)

    def accuracy(self, other):
        mask = self.domain.mask
        return float((self.bits[mask] == other.bits[mask]).mean())

    def __eq__(self, other):
        return (isinstance(other, Payload) and self.domain == other.domain
                and np.array_equal(self.bits, other.bits))


def encode(payload, domain=None):
    """counts = 2 + bit: recurrent on any rectangle (and any domain whose
    all-twos configuration is recurrent)."""
    domain = domain or payload.domain
    if payload.domain != domain:
        raise ValueError("payload lives on a different domain")
    return RecurrentConfiguration(domain, 2 + payload.bits.astype(np.int64))


def payload_from(config):
    """Read bits back out of a near-payload frame: counts - 2 into {0, 1}."""
    bits = np.clip(config.grid - 2, 0, 1).astype(bool)
    return Payload(config.domain, bits)


def legibility_score(config):
    """Fraction of {2,3} vertices minus the fraction of {0,1} vertices."""
    counts = config.flat()
    high = ((counts == 2) | (counts == 3)).mean()
    return float(2.0 * high - 1.0)


def scramble(config, potential, t, mode="deterministic", seed=None,
             budget=DEFAULT_BUDGET):
    """Evolve an encoded configuration to a mid-period time in (0, 1)."""
    t = Fraction(t)
    if not 0 <= t < 1:
        raise ValueError("scramble time must lie in [0, 1)")
    if mode == "deterministic":
        return frame(config, potential, t, budget=budget)
    if mode == "stochastic":
        if seed is None:
            raise ValueError("stochastic scramble needs a seed")
        chain = stochastic.run(config, potential, t, seed,
                               record_sizes=False, budget=budget)
        return chain.final
    raise ValueError(f"unknown scramble mode {mode!r}")


@dataclass
class DecodeResult:
    payload: Payload
    t_detect: Fraction
    score: float


def decode(config, potential, mode="deterministic", seed=None, detector=None,
           threshold=DEFAULT_THRESHOLD, resolution=DEFAULT_RESOLUTION,
           max_periods=2, budget=DEFAULT_BUDGET):
    """Continue the dynamics and return the best-scoring legible frame.

    Deterministic mode sweeps candidate completion phases on a grid of
    ``resolution`` steps per period (the full-period frame of a scramble
    phase on that grid is reproduced exactly); stochastic mode advances the
    chain for up to ``max_periods`` periods, scoring a snapshot every
    |X|/resolution drops. Raises :class:`DetectionError` if nothing reaches
    the threshold.
    """
    score = detector or legibility_score
    if mode == "deterministic":
        best = _scan_deterministic(config, potential, score, resolution,
                                   budget)
    elif mode == "stochastic":
        if seed is None:
            raise ValueError("stochastic decode needs a seed")
        best = _scan_stochastic(config, potential, score, resolution,
                                max_periods, seed, budget)
    else:
        raise ValueError(f"unknown decode mode {mode!r}")
    best_frame, t_detect, best_score = best
    if best_score < threshold:
        raise DetectionError(
            f"payload not detected within {max_periods} periods "
            f"(best score {best_score:.3f} < threshold {threshold})")
    return DecodeResult(payload_from(best_frame), t_detect, best_score)


def _scan_deterministic(config, potential, score, resolution, budget):
    # Sweep assumed scramble phases t^ = j/resolution from high to low;
    # completing the period from phase t^ means adding X - floor(t^ X),
    # so lowering t^ only ever adds grains and the scan can run
    # incrementally (one period of total work, abelian property).
    d = config.domain
    best = (None, None, -math.inf)
    current = config
    prev_grains = potential.x.copy()  # floor(1 * X) = X
    for j in range(resolution, -1, -1):
        t_hat = Fraction(j, resolution)
        grains = potential.scaled_floor(t_hat)
        step = prev_grains - grains
        if step.any():
            current, _ = relax(Configuration(d, current.grid + step),
                               budget=budget)
        prev_grains = grains
        s = score(current)
        if s > best[2]:
            best = (current, 1 - t_hat, s)
    return best


def _scan_stochastic(config, potential, score, resolution, max_periods, seed,
                     budget):
    total = potential.total
    if total <= 0:
        raise ValueError("degenerate chain: zero potential")
    stride = max(1, total // resolution)
    n_drops = max_periods * total
    snapshot_times = [Fraction(k, total)
                      for k in range(stride, n_drops + 1, stride)]
    chain = stochastic.run(config, potential, Fraction(n_drops, total), seed,
                           snapshot_times=snapshot_times, record_sizes=False,
                           budget=budget)
    best = (None, None, -math.inf)
    for t, snap in chain.snapshots:
        s = score(snap)
        if s > best[2]:
            best = (snap, t, s)
    return best
