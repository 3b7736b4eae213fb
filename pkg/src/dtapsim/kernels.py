"""Hot numeric kernels: simplex projection, entropy, sampling, learner steps.

Every kernel is written in scalar-loop style over 1-D float64 arrays so the
same source runs either JIT-compiled or interpreted. The compiled path is
the default; set ``DTAPSIM_NO_NUMBA=1`` to force the interpreted fallback
(the arithmetic is identical, only slower). ``benchmarks/bench_kernels.py``
compares the two paths.
"""

import math
import os

import numpy as np

_NO_NUMBA_ENV = "DTAPSIM_NO_NUMBA"

if os.environ.get(_NO_NUMBA_ENV, "").strip().lower() in ("1", "true", "yes", "on"):
    USING_NUMBA = False
else:
    try:
        from numba import njit as _njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USING_NUMBA = False

if not USING_NUMBA:

    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@_njit(cache=True)
def project_simplex(raw, floor):
    """Euclidean projection of `raw` onto {p : sum(p) = 1, p_k >= floor}.

    Sort-based exact projection, O(n log n). The floor is handled by
    substituting q = (p - floor) / (1 - n*floor) onto the standard simplex.
    """
    n = raw.shape[0]
    scale = 1.0 - n * floor
    v = np.empty(n)
    for k in range(n):
        v[k] = (raw[k] - floor) / scale
    u = np.sort(v)[::-1]
    csum = 0.0
    lam = 0.0
    for j in range(n):
        csum += u[j]
        t = (1.0 - csum) / (j + 1.0)
        # valid j's form a prefix; keep the threshold of the last valid one
        if u[j] + t > 0.0:
            lam = t
    out = np.empty(n)
    for k in range(n):
        qk = v[k] + lam
        if qk < 0.0:
            qk = 0.0
        out[k] = qk * scale + floor
    return out


@_njit(cache=True)
def entropy_bits(p):
    """Shannon entropy -sum p_k log2 p_k, with 0*log2(0) = 0."""
    h = 0.0
    for k in range(p.shape[0]):
        if p[k] > 0.0:
            h -= p[k] * math.log2(p[k])
    return h if h > 0.0 else 0.0


@_njit(cache=True)
def sample_index(p, u):
    """Index k with probability p_k, given one uniform draw u in [0, 1)."""
    acc = 0.0
    last = 0
    for k in range(p.shape[0]):
        if p[k] > 0.0:
            acc += p[k]
            last = k
            if u < acc:
                return k
    return last


@_njit(cache=True)
def sample_indices(p, us):
    """One action index per uniform draw (amortizes call overhead)."""
    out = np.empty(us.shape[0], dtype=np.int64)
    for k in range(us.shape[0]):
        out[k] = sample_index(p, us[k])
    return out


@_njit(cache=True)
def advantage_gradient(q, p):
    """g[j] = q[j] - sum_k p[k] q[k] (advantage-centered reward gradient)."""
    n = q.shape[0]
    vbar = 0.0
    for k in range(n):
        vbar += p[k] * q[k]
    g = np.empty(n)
    for k in range(n):
        g[k] = q[k] - vbar
    return g


@_njit(cache=True)
def wpl_deltas(p, g, eta):
    """Pre-projection WPL step: eta * g[j] * (p[j] if g[j] < 0 else 1 - p[j])."""
    n = p.shape[0]
    d = np.empty(n)
    for j in range(n):
        w = p[j] if g[j] < 0.0 else 1.0 - p[j]
        d[j] = g[j] * eta * w
    return d


@_njit(cache=True)
def wpl_step(p, g, eta, floor):
    n = p.shape[0]
    raw = np.empty(n)
    for j in range(n):
        w = p[j] if g[j] < 0.0 else 1.0 - p[j]
        raw[j] = p[j] + g[j] * eta * w
    return project_simplex(raw, floor)


@_njit(cache=True)
def giga_step(p, z, g, eta, floor):
    """One GIGA-WoLF update. Returns (new policy, new baseline z).

    Fast track x = project(p + eta*g), slow track z' = project(p + eta*g/3),
    interpolation ratio delta = min(1, ||z'-z|| / ||z'-x||), with delta = 1
    when the tracks coincide (denominator <= 1e-12).
    """
    n = p.shape[0]
    raw = np.empty(n)
    for j in range(n):
        raw[j] = p[j] + eta * g[j]
    x_hat = project_simplex(raw, floor)
    for j in range(n):
        raw[j] = p[j] + eta * g[j] / 3.0
    z_new = project_simplex(raw, floor)
    num = 0.0
    den = 0.0
    for j in range(n):
        dz = z_new[j] - z[j]
        dx = z_new[j] - x_hat[j]
        num += dz * dz
        den += dx * dx
    num = math.sqrt(num)
    den = math.sqrt(den)
    delta = 1.0
    if den > 1e-12:
        delta = num / den
        if delta > 1.0:
            delta = 1.0
    out = np.empty(n)
    if delta == 1.0:
        # interpolation endpoint: land on the slow track exactly
        for j in range(n):
            out[j] = z_new[j]
    else:
        for j in range(n):
            out[j] = x_hat[j] + delta * (z_new[j] - x_hat[j])
    return out, z_new


@_njit(cache=True)
def observe_wpl(p, q, action, reward, alpha, eta, floor):
    """Full WPL observation, in place: EMA value update then policy step."""
    q[action] = (1.0 - alpha) * q[action] + alpha * reward
    g = advantage_gradient(q, p)
    new_p = wpl_step(p, g, eta, floor)
    p[:] = new_p


@_njit(cache=True)
def observe_giga(p, q, z, action, reward, alpha, eta, floor):
    """Full GIGA-WoLF observation, in place: EMA value update then policy step."""
    q[action] = (1.0 - alpha) * q[action] + alpha * reward
    g = advantage_gradient(q, p)
    new_p, new_z = giga_step(p, z, g, eta, floor)
    p[:] = new_p
    z[:] = new_z


@_njit(cache=True)
def observe_batch_wpl(P, Q, nact, agent_idx, actions, rewards, alpha, eta, floor):
    """Apply one tick's WPL observations in order on row-stacked agent state.

    P and Q are (n_agents, max_actions) matrices; agent i uses the first
    nact[i] columns. Row slices are views, so updates land in the matrices.
    """
    for k in range(agent_idx.shape[0]):
        i = agent_idx[k]
        n = nact[i]
        observe_wpl(P[i, :n], Q[i, :n], actions[k], rewards[k], alpha, eta, floor)


@_njit(cache=True)
def observe_batch_giga(P, Q, Z, nact, agent_idx, actions, rewards, alpha, eta, floor):
    """GIGA-WoLF counterpart of observe_batch_wpl."""
    for k in range(agent_idx.shape[0]):
        i = agent_idx[k]
        n = nact[i]
        observe_giga(P[i, :n], Q[i, :n], Z[i, :n], actions[k], rewards[k], alpha, eta, floor)


def warmup():
    """Trigger JIT compilation of every kernel (no-op on the fallback path)."""
    p = np.array([0.6, 0.4])
    q = np.array([-1.0, -2.0])
    z = p.copy()
    project_simplex(p, 0.0)
    entropy_bits(p)
    sample_index(p, 0.5)
    g = advantage_gradient(q, p)
    wpl_deltas(p, g, 0.01)
    wpl_step(p, g, 0.01, 0.0)
    giga_step(p, z, g, 0.01, 0.0)
    observe_wpl(p.copy(), q.copy(), 0, -1.0, 0.1, 0.01, 0.0)
    observe_giga(p.copy(), q.copy(), z.copy(), 0, -1.0, 0.1, 0.01, 0.0)
    P = np.vstack((p, p))
    Q = np.vstack((q, q))
    Z = np.vstack((z, z))
    nact = np.array([2, 2], dtype=np.int64)
    idx = np.array([0, 1], dtype=np.int64)
    acts = np.array([0, 1], dtype=np.int64)
    rews = np.array([-1.0, -2.0])
    observe_batch_wpl(P, Q, nact, idx, acts, rews, 0.1, 0.01, 0.0)
    observe_batch_giga(P, Q, Z, nact, idx, acts, rews, 0.1, 0.01, 0.0)
