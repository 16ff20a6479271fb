"""Sandpile group operations: addition, recurrence, identity, group order.

Recurrent configurations (stable states reachable from anywhere by grain
additions) form an abelian group under pointwise-add-then-relax. Recurrence
is decided with the standard burning test; the identity is computed by the
classical iteration that repeatedly adds one grain per open boundary side
(two at corners) and relaxes, starting from the empty configuration, until
the sequence repeats. The group order is the determinant of the reduced
Laplacian, evaluated in exact integer arithmetic as a tiny-domain oracle.
"""

import os
from collections import deque
from pathlib import Path

import numpy as np

from .domain import Configuration, RecurrentConfiguration
from .potential import creutz_pattern
from .relax import relax

_identity_cache = {}

IDENTITY_ROUND_BUDGET = 10 ** 6


def group_add(a, b, budget=None):
    """Pointwise sum then relax; recurrent whenever ``a`` is recurrent."""
    if a.domain != b.domain:
        raise ValueError("configurations live on different domains")
    merged = Configuration(a.domain, a.grid + b.grid)
    kwargs = {} if budget is None else {"budget": budget}
    stable, _ = relax(merged, **kwargs)
    if isinstance(a, RecurrentConfiguration):
        return RecurrentConfiguration(stable.domain, stable.grid)
    return stable


def is_recurrent(config):
    """Burning test: every vertex must burn exactly once.

    Starting from the sink (everything outside the domain), a vertex burns
    when its count reaches the number of its still-unburnt neighbors.
    """
    if not config.is_stable():
        raise ValueError("burning test requires a stable configuration")
    d = config.domain
    counts = config.flat()
    unburnt_nbrs = d.degree.astype(np.int64).copy()
    burnt = np.zeros(d.num_vertices, bool)
    queue = deque(np.nonzero(counts >= unburnt_nbrs)[0].tolist())
    scheduled = np.zeros(d.num_vertices, bool)
    scheduled[list(queue)] = True
    n_burnt = 0
    while queue:
        v = queue.popleft()
        if burnt[v]:
            continue
        if counts[v] < unburnt_nbrs[v]:
            scheduled[v] = False
            continue
        burnt[v] = True
        n_burnt += 1
        for k in range(4):
            u = int(d.nbr[v, k])
            if u >= 0 and not burnt[u]:
                unburnt_nbrs[u] -= 1
                if counts[u] >= unburnt_nbrs[u] and not scheduled[u]:
                    scheduled[u] = True
                    queue.append(u)
    return n_burnt == d.num_vertices


def as_recurrent(config):
    """Check recurrence and return a tagged copy."""
    if not is_recurrent(config):
        raise ValueError("configuration fails the burning test")
    return RecurrentConfiguration(config.domain, config.grid)


def identity(domain, budget=IDENTITY_ROUND_BUDGET, cache=True):
    """The group identity, by fixed-point iteration from the empty state.

    Iterates C <- relax(C + B) with B(v) = 4 - degree(v) and stops at the
    first repeated configuration, which is the fixed point; results are
    memoized per domain and optionally cached on disk via the
    ``SANDPILE_CACHE_DIR`` environment variable.
    """
    key = domain.fingerprint()
    if cache and key in _identity_cache:
        cached = _identity_cache[key]
        return RecurrentConfiguration(domain, cached.grid)
    cache_dir = os.environ.get("SANDPILE_CACHE_DIR")
    path = Path(cache_dir) / f"identity-{key}.spile" if cache_dir else None
    if cache and path is not None and path.exists():
        from . import spile
        loaded = spile.read_configuration(path, domain=domain)
        result = RecurrentConfiguration(domain, loaded.grid)
        _identity_cache[key] = result
        return result

    pattern = creutz_pattern(domain).x
    current = Configuration.zeros(domain)
    for _ in range(budget):
        step, _ = relax(Configuration(domain, current.grid + pattern))
        if step == current:
            result = RecurrentConfiguration(domain, current.grid)
            if cache:
                _identity_cache[key] = result
                if path is not None:
                    from . import spile
                    path.parent.mkdir(parents=True, exist_ok=True)
                    spile.write_configuration(path, result)
            return result
        current = step
    raise RuntimeError(
        f"identity iteration did not converge within {budget} rounds "
        f"on {domain!r}")


def group_order(domain, max_vertices=64):
    """|G| as the determinant of the reduced Laplacian (exact integers)."""
    n = domain.num_vertices
    if n > max_vertices:
        raise ValueError(
            f"domain has {n} vertices, above the exact-determinant bound "
            f"{max_vertices}")
    mat = [[0] * n for _ in range(n)]
    for v in range(n):
        mat[v][v] = 4
        for k in range(4):
            u = int(domain.nbr[v, k])
            if u >= 0:
                mat[v][u] = -1
    return _bareiss_det(mat)


def _bareiss_det(mat):
    """Fraction-free Gaussian elimination; exact for integer matrices."""
    n = len(mat)
    m = [row[:] for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(k + 1, n):
            for c in range(k + 1, n):
                m[r][c] = (m[r][c] * m[k][k] - m[r][k] * m[k][c]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def stable_configurations(domain):
    """Iterate all stable configurations (tiny domains only)."""
    n = domain.num_vertices
    if n > 12:
        raise ValueError("exhaustive enumeration limited to <= 12 vertices")
    for code in range(4 ** n):
        flat = np.empty(n, np.int64)
        c = code
        for v in range(n):
            flat[v] = c & 3
            c >>= 2
        yield Configuration.from_flat(domain, flat)


def recurrent_configurations(domain):
    """All recurrent configurations of a tiny domain, by enumeration."""
    return [as_recurrent(c) for c in stable_configurations(domain)
            if is_recurrent(c)]
