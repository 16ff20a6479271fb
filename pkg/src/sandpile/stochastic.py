"""Stochastic realization of harmonic dynamics and avalanche statistics.

Grains are dropped one at a time onto vertices drawn from the fixed
categorical distribution x(v)/|X| (the chain's kernel never depends on the
state), the pile is relaxed after every drop, and the configuration after k
drops is assigned the time t = k/|X|. Sampling uses a Vose alias table and a
xoshiro256++ generator seeded via splitmix64, so a run is reproducible
bit-for-bit from its 64-bit seed on any platform.

Distances between configurations use the normalized variation of
information 1 - I/H over the joint distribution of per-vertex symbol pairs;
avalanche-size tails are fitted with the discrete maximum-likelihood
estimator, choosing the cutoff by Kolmogorov-Smirnov minimization.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize, special

from . import kernels
from .domain import Configuration
from .relax import DEFAULT_BUDGET, RelaxationError, _checked_flat


def alias_table(weights):
    """Vose alias table for integer weights; deterministic construction.

    Returns (prob, alias, vert): slot k keeps vert[k] with probability
    prob[k], otherwise falls through to vert[alias[k]].
    """
    weights = np.asarray(weights, np.int64)
    support = np.nonzero(weights > 0)[0]
    if support.size == 0:
        raise ValueError("degenerate chain: zero potential")
    w = weights[support]
    total = int(w.sum(dtype=np.int64))
    n = support.size
    # scaled[k] = n * p_k; kept exact as integers against denominator total
    scaled_num = n * w.astype(object)
    prob = np.empty(n, np.float64)
    alias = np.zeros(n, np.int32)
    small = [k for k in range(n) if scaled_num[k] < total]
    large = [k for k in range(n) if scaled_num[k] >= total]
    num = list(scaled_num)
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = num[s] / total
        alias[s] = g
        num[g] = num[g] - (total - num[s])
        if num[g] < total:
            small.append(g)
        else:
            large.append(g)
    for k in large + small:
        prob[k] = 1.0
        alias[k] = k
    return prob, alias, support.astype(np.int32)


@dataclass
class StochasticRun:
    seed: int
    potential: object
    start: Configuration
    steps: int
    final: Configuration
    sizes: np.ndarray = None
    drop_vertices: np.ndarray = None
    snapshots: list = None
    total_topplings: int = 0

    def times(self):
        total = self.potential.total
        return [Fraction(k, total) for k in range(1, self.steps + 1)]


def run(start, potential, periods, seed, snapshot_times=(),
        record_sizes=True, record_vertices=False, budget=DEFAULT_BUDGET):
    """Drop ceil(periods * |X|) single grains and relax after each.

    ``snapshot_times`` are rationals; each is realized at the drop count
    floor(t * |X|) and reported with its exact time k/|X|.
    """
    d = start.domain
    total_weight = potential.total
    if total_weight <= 0:
        raise ValueError("degenerate chain: zero potential")
    periods = Fraction(periods)
    n_drops = int(math.ceil(periods * total_weight))
    prob, alias, vert = alias_table(potential.flat())
    counts = _checked_flat(start)
    state = kernels.seed_state(seed)
    sizes = np.empty(n_drops if record_sizes else 0, np.int64)
    verts = np.empty(n_drops if record_vertices else 0, np.int32)
    snap_ks = sorted(max(0, (Fraction(t) * total_weight).__floor__())
                     for t in snapshot_times)
    snap_at = np.array([k for k in snap_ks if k > 0], np.int64)
    snaps = np.empty((snap_at.size, d.num_vertices), np.int8)
    status, topplings = kernels.drop_chain(
        counts, d.nbr, prob, alias, vert, np.int64(n_drops), state,
        sizes, verts, snap_at, snaps, np.int64(budget))
    if status == kernels.BUDGET_EXCEEDED:
        raise RelaxationError("toppling budget exceeded in stochastic run")
    snapshots = []
    at_zero = [Fraction(0)] * sum(1 for k in snap_ks if k <= 0)
    for t in at_zero:
        snapshots.append((t, Configuration(d, start.grid)))
    for idx, k in enumerate(k for k in snap_ks if k > 0):
        snapshots.append((Fraction(k, total_weight),
                          Configuration.from_flat(d, snaps[idx])))
    return StochasticRun(
        seed=int(seed), potential=potential, start=start, steps=n_drops,
        final=Configuration.from_flat(d, counts),
        sizes=sizes if record_sizes else None,
        drop_vertices=verts if record_vertices else None,
        snapshots=snapshots, total_topplings=int(topplings))


# ---------------------------------------------------------------------------
# normalized variation of information

_N_SYMBOLS = 5  # stable counts 0..3 plus a clipped "unstable" symbol


def variation_of_information(a, b):
    """1 - I/H over the joint per-vertex symbol distribution, in [0, 1].

    Identical configurations give 0; independent ones approach 1. Defined as
    0 when the joint entropy vanishes (both configurations constant).
    """
    if a.domain != b.domain:
        raise ValueError("configurations live on different domains")
    sa = np.minimum(a.flat(), 4)
    sb = np.minimum(b.flat(), 4)
    joint = np.bincount(sa * _N_SYMBOLS + sb,
                        minlength=_N_SYMBOLS * _N_SYMBOLS).astype(np.float64)
    joint /= joint.sum()
    joint = joint.reshape(_N_SYMBOLS, _N_SYMBOLS)
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    h_joint = -float((joint[nz] * np.log(joint[nz])).sum())
    if h_joint == 0.0:
        return 0.0
    outer = np.outer(pa, pb)
    mi = float((joint[nz] * np.log(joint[nz] / outer[nz])).sum())
    vi = 1.0 - mi / h_joint
    if abs(vi) < 1e-12:  # identical configurations, up to float rounding
        return 0.0
    return min(1.0, max(0.0, vi))


# ---------------------------------------------------------------------------
# discrete power-law fitting (maximum likelihood, KS-selected cutoff)


@dataclass
class PowerLawFit:
    exponent: float  # negative, matching the critical-coefficient convention
    xmin: int
    ks: float
    n_tail: int


MIN_SAMPLES = 1000
_MIN_TAIL = 50
_MAX_CANDIDATES = 120


def fit_power_law(sizes, xmin=None):
    """Fit p(s) ~ s^-a for s >= xmin to integer avalanche sizes.

    The exponent is reported negative. When ``xmin`` is not given it is
    selected by minimizing the Kolmogorov-Smirnov distance between the
    empirical tail and the fitted zeta model over the observed candidate
    cutoffs (capped to a deterministic subset for very large inputs).
    """
    sizes = np.asarray(sizes, np.int64)
    sizes = sizes[sizes >= 1]
    if sizes.size < MIN_SAMPLES:
        raise ValueError(
            f"need at least {MIN_SAMPLES} nonzero avalanche sizes, "
            f"got {sizes.size}")
    sizes = np.sort(sizes)
    log_sizes = np.log(sizes.astype(np.float64))
    suffix_log = np.concatenate([np.cumsum(log_sizes[::-1])[::-1], [0.0]])
    unique = np.unique(sizes)
    if xmin is not None:
        candidates = np.array([int(xmin)], np.int64)
    else:
        candidates = unique[:-1]
        tail_n = sizes.size - np.searchsorted(sizes, candidates, side="left")
        candidates = candidates[tail_n >= _MIN_TAIL]
        if candidates.size == 0:
            candidates = unique[:1]
        if candidates.size > _MAX_CANDIDATES:
            # cutoff candidates matter on a log scale; sample them that way
            grid = np.geomspace(candidates[0], candidates[-1],
                                _MAX_CANDIDATES)
            pick = np.searchsorted(candidates, grid)
            pick = np.clip(pick, 0, candidates.size - 1)
            candidates = np.unique(candidates[pick])
    best = None
    for xm in candidates:
        lo = int(np.searchsorted(sizes, xm, side="left"))
        n = sizes.size - lo
        if n < 2:
            continue
        sum_log = float(suffix_log[lo])
        alpha = _fit_alpha(n, sum_log, int(xm))
        ks = _ks_distance(sizes[lo:], int(xm), alpha)
        if best is None or ks < best[0]:
            best = (ks, alpha, int(xm), n)
    if best is None:
        raise ValueError("could not fit: degenerate size distribution")
    ks, alpha, xm, n = best
    return PowerLawFit(exponent=-alpha, xmin=xm, ks=ks, n_tail=n)


def _fit_alpha(n, sum_log, xmin):
    def nll(alpha):
        return n * math.log(special.zeta(alpha, xmin)) + alpha * sum_log

    res = optimize.minimize_scalar(nll, bounds=(1.01, 8.0), method="bounded",
                                   options={"xatol": 1e-6})
    return float(res.x)


def _ks_distance(tail, xmin, alpha):
    values = np.unique(tail)
    n = tail.size
    emp = np.searchsorted(tail, values, side="right") / n
    z0 = special.zeta(alpha, xmin)
    model = 1.0 - special.zeta(alpha, values.astype(np.float64) + 1.0) / z0
    return float(np.abs(emp - model).max())
