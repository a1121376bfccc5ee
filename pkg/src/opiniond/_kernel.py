"""Compiled step loop.

Graph layout: ``nbrs[v, :deg[v]]`` holds the neighbours of ``v`` in the same
order as :class:`opiniond.graph.AdaptiveGraph`, and ``pos[v * n + u]`` is the
column of ``u`` in row ``v``. The loop reads uniforms from a flat buffer in
exactly the order the pure-Python ``dynamics.step`` does, so both paths give
bit-identical trajectories.
"""

import numpy as np
from numba import njit, types
from numba.typed import Dict

CONSENSUS = 0
REWIRED = 1
REJECTED = 2
ISOLATED = 3
MUTATED = 4
TALLY_SIZE = 5


def draws_per_step(probe_limit: int) -> int:
    """Upper bound on uniforms consumed by one step."""
    return 6 + max(probe_limit, 1)


@njit(cache=True)
def _build_positions(nbrs, deg):
    n = nbrs.shape[0]
    pos = Dict.empty(key_type=types.int64, value_type=types.int64)
    for v in range(n):
        for i in range(deg[v]):
            pos[v * n + nbrs[v, i]] = i
    return pos


def build_positions(nbrs: np.ndarray, deg: np.ndarray):
    return _build_positions(nbrs, deg)


@njit(cache=True, nogil=True)
def basal_ppf(kind, gamma, x_min, u):
    if kind == 0:
        return u
    a = x_min ** (1.0 - gamma)
    return (a - u * (a - 1.0)) ** (1.0 / (1.0 - gamma))


@njit(cache=True, nogil=True)
def _discard(nbrs, deg, pos, n, u, v):
    key = u * n + v
    i = pos[key]
    del pos[key]
    last = deg[u] - 1
    x = nbrs[u, last]
    deg[u] = last
    if i != last:
        nbrs[u, i] = x
        pos[u * n + x] = i


@njit(cache=True, nogil=True)
def _grow(nbrs):
    n, cap = nbrs.shape
    out = np.full((n, 2 * cap), -1, dtype=nbrs.dtype)
    out[:, :cap] = nbrs
    return out


@njit(cache=True, nogil=True)
def advance(op, nbrs, deg, pos, buf, cur, n_steps, d, mu, w, p,
            basal_kind, basal_gamma, basal_xmin, probe_limit, interacting, tally):
    """Run up to ``n_steps`` steps; stop early if the buffer may run dry.

    Returns ``(steps_done, cursor, nbrs)``; ``nbrs`` is reallocated when a
    node outgrows the row capacity.
    """
    n = op.shape[0]
    need = 6 + max(probe_limit, 1)
    done = 0
    while done < n_steps and buf.shape[0] - cur >= need:
        a = int(buf[cur] * n)
        cur += 1
        ka = deg[a]
        b = -1
        if ka == 0:
            tally[ISOLATED] += 1
        else:
            b = nbrs[a, int(buf[cur] * ka)]
            cur += 1
            oa = op[a]
            ob = op[b]
            diff = oa - ob
            if abs(diff) < d:
                shift = mu * diff
                op[a] = oa - shift
                op[b] = ob + shift
                tally[CONSENSUS] += 1
            else:
                coin = buf[cur]
                cur += 1
                c = -1
                if coin < w:
                    if probe_limit > 0:
                        for _ in range(probe_limit):
                            x = int(buf[cur] * n)
                            cur += 1
                            if x != a and abs(oa - op[x]) < d and (a * n + x) not in pos:
                                c = x
                                break
                    else:
                        count = 0
                        for x in range(n):
                            if x != a and abs(oa - op[x]) < d and (a * n + x) not in pos:
                                count += 1
                        if count > 0:
                            k = int(buf[cur] * count)
                            cur += 1
                            for x in range(n):
                                if x != a and abs(oa - op[x]) < d and (a * n + x) not in pos:
                                    if k == 0:
                                        c = x
                                        break
                                    k -= 1
                if c >= 0:
                    _discard(nbrs, deg, pos, n, a, b)
                    _discard(nbrs, deg, pos, n, b, a)
                    if deg[c] == nbrs.shape[1]:
                        nbrs = _grow(nbrs)
                    i = deg[a]
                    nbrs[a, i] = c
                    pos[a * n + c] = i
                    deg[a] = i + 1
                    i = deg[c]
                    nbrs[c, i] = a
                    pos[c * n + a] = i
                    deg[c] = i + 1
                    tally[REWIRED] += 1
                else:
                    tally[REJECTED] += 1
        coin = buf[cur]
        cur += 1
        if coin < p:
            u = buf[cur]
            cur += 1
            if interacting:
                m = a if (b < 0 or u < 0.5) else b
            else:
                m = int(u * n)
            op[m] = basal_ppf(basal_kind, basal_gamma, basal_xmin, buf[cur])
            cur += 1
            tally[MUTATED] += 1
        done += 1
    return done, cur, nbrs


@njit(cache=True)
def canonical_edges(nbrs, deg):
    n = nbrs.shape[0]
    m = 0
    for u in range(n):
        for i in range(deg[u]):
            if nbrs[u, i] > u:
                m += 1
    out = np.empty((m, 2), dtype=np.int64)
    k = 0
    for u in range(n):
        row = np.sort(nbrs[u, :deg[u]])
        for v in row:
            if v > u:
                out[k, 0] = u
                out[k, 1] = v
                k += 1
    return out
