"""Low-level numba kernels: relaxation, single-grain drop chains, seeded RNG.

Grids are flattened to per-vertex arrays; ``nbr`` is a (V, 4) int32 array of
neighbor vertex ids with -1 marking a missing neighbor (grains sent there
leave the system). All kernels are deterministic. The stochastic driver keeps
its own xoshiro256++ state so that runs replay bit-for-bit across platforms.

Relaxation uses two phases. While a large amount of toppling work is pending
(heavy boundary loads from high-order fields reach 1e9 grains per vertex),
whole-grid bulk sweeps amortize best: every vertex topples floor(c/4) times
at once, which is a legal toppling schedule and therefore, by the abelian
property, yields the same stable state and odometer as single topplings.
The residual is drained with a LIFO worklist, which is the fast path for
single-grain avalanches.
"""

import numpy as np
from numba import njit

# status codes returned by the kernels
OK = 0
BUDGET_EXCEEDED = 1

# toppling budget: generous termination guard, see relax.DEFAULT_BUDGET
_U11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, nogil=True)
def relax_flat(counts, nbr, odo, budget):
    """Stabilize ``counts`` in place; add topplings per vertex into ``odo``.

    Returns (status, total_topplings). ``counts`` must be non-negative and
    the caller must bound the total mass so int64 cannot overflow.
    """
    V = counts.shape[0]
    total = np.int64(0)

    # phase 1: bulk sweeps while lots of work is pending
    qarr = np.empty(V, np.int64)
    while True:
        n_uns = 0
        pending = np.int64(0)
        for v in range(V):
            c = counts[v]
            if c >= 4:
                n_uns += 1
                pending += c >> 2
        if n_uns == 0:
            return OK, total
        if n_uns <= (V >> 3) and pending <= max(64, V >> 2):
            break
        for v in range(V):
            qarr[v] = counts[v] >> 2
        for v in range(V):
            q = qarr[v]
            if q > 0:
                counts[v] -= q << 2
                odo[v] += q
                total += q
                for k in range(4):
                    u = nbr[v, k]
                    if u >= 0:
                        counts[u] += q
        if total > budget:
            return BUDGET_EXCEEDED, total

    # phase 2: worklist drain
    stack = np.empty(V, np.int32)
    instack = np.zeros(V, np.uint8)
    top = 0
    for v in range(V):
        if counts[v] >= 4:
            stack[top] = v
            top += 1
            instack[v] = 1
    while top > 0:
        top -= 1
        v = stack[top]
        instack[v] = 0
        c = counts[v]
        if c < 4:
            continue
        q = c >> 2
        counts[v] = c - (q << 2)
        odo[v] += q
        total += q
        if total > budget:
            return BUDGET_EXCEEDED, total
        for k in range(4):
            u = nbr[v, k]
            if u >= 0:
                cu = counts[u] + q
                counts[u] = cu
                if cu >= 4 and instack[u] == 0:
                    stack[top] = u
                    top += 1
                    instack[u] = 1
    return OK, total


# ---------------------------------------------------------------------------
# portable RNG: xoshiro256++ seeded via splitmix64


def seed_state(seed):
    """Expand a 64-bit seed into a xoshiro256++ state with splitmix64."""
    mask = (1 << 64) - 1
    x = int(seed) & mask
    state = np.empty(4, np.uint64)
    for i in range(4):
        x = (x + 0x9E3779B97F4A7C15) & mask
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        state[i] = (z ^ (z >> 31)) & mask
    return state


@njit(cache=True, nogil=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (np.uint64(64) - k))


@njit(cache=True, nogil=True, inline="always")
def _next_u64(s):
    result = _rotl(s[0] + s[3], np.uint64(23)) + s[0]
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], np.uint64(45))
    return result


@njit(cache=True, nogil=True)
def rng_doubles(state, out):
    """Fill ``out`` with uniform doubles in [0, 1); used by the RNG tests."""
    for i in range(out.shape[0]):
        out[i] = np.float64(_next_u64(state) >> _U11) * _INV53


@njit(cache=True, nogil=True)
def drop_chain(counts, nbr, prob, alias, vert, n_drops, state,
               sizes, verts_out, snap_at, snaps, budget):
    """Drop ``n_drops`` single grains, relaxing after each one.

    Vertices are drawn from the static categorical distribution encoded in the
    alias table (prob/alias over table slots, vert maps slots to vertex ids).
    ``sizes`` and ``verts_out`` may be zero-length to skip recording. After
    drop number k (1-based) equals snap_at[p], counts are copied into
    snaps[p]; snap_at must be sorted ascending (duplicates allowed).

    Returns (status, total_topplings).
    """
    V = counts.shape[0]
    K = prob.shape[0]
    fK = np.float64(K)
    record_sizes = sizes.shape[0] > 0
    record_verts = verts_out.shape[0] > 0
    n_snaps = snap_at.shape[0]
    stack = np.empty(V, np.int32)
    instack = np.zeros(V, np.uint8)
    total = np.int64(0)
    sp = 0

    for d in range(n_drops):
        r = np.float64(_next_u64(state) >> _U11) * _INV53
        f = r * fK
        kk = np.int64(f)
        if kk >= K:
            kk = K - 1
        if f - np.float64(kk) < prob[kk]:
            v0 = vert[kk]
        else:
            v0 = vert[alias[kk]]
        counts[v0] += 1
        size = np.int64(0)
        if counts[v0] >= 4:
            top = 0
            stack[top] = v0
            top += 1
            instack[v0] = 1
            while top > 0:
                top -= 1
                v = stack[top]
                instack[v] = 0
                c = counts[v]
                if c < 4:
                    continue
                q = c >> 2
                counts[v] = c - (q << 2)
                size += q
                for k in range(4):
                    u = nbr[v, k]
                    if u >= 0:
                        cu = counts[u] + q
                        counts[u] = cu
                        if cu >= 4 and instack[u] == 0:
                            stack[top] = u
                            top += 1
                            instack[u] = 1
            total += size
            if total > budget:
                return BUDGET_EXCEEDED, total
        if record_sizes:
            sizes[d] = size
        if record_verts:
            verts_out[d] = v0
        while sp < n_snaps and snap_at[sp] == d + 1:
            for v in range(V):
                snaps[sp, v] = np.int8(counts[v])
            sp += 1
    return OK, total
