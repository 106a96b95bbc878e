"""Compiled inner loops. Each takes a ``numpy.random.Generator`` directly."""

import numba
import numpy as np

# Above this many parents the iid sum is drawn as a multinomial over atoms.
SMALL_COUNT = 16
MAX_COMPONENT = 2**53


def prepare_law(support: np.ndarray, probs: np.ndarray):
    """Tables used by :func:`add_iid_sum`: cdf, conditional binomial probs, atoms."""
    probs = np.asarray(probs, dtype=float)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    tail = np.cumsum(probs[::-1])[::-1]
    cond = np.where(tail > 0, probs / np.where(tail > 0, tail, 1.0), 0.0)
    cond = np.clip(cond, 0.0, 1.0)
    atoms = np.ascontiguousarray(support, dtype=np.int64)
    return cdf, cond, atoms


@numba.njit(nogil=True, cache=True)
def add_iid_sum(rng, count, cdf, cond, atoms, out):
    """Add the sum of ``count`` iid draws from a finite law into ``out``."""
    k = atoms.shape[0]
    if count <= SMALL_COUNT:
        for _ in range(count):
            j = np.searchsorted(cdf, rng.random(), side="right")
            if j >= k:
                j = k - 1
            out[0] += atoms[j, 0]
            out[1] += atoms[j, 1]
        return
    rem = count
    for j in range(k - 1):
        if rem == 0:
            break
        c = rng.binomial(rem, cond[j])
        out[0] += c * atoms[j, 0]
        out[1] += c * atoms[j, 1]
        rem -= c
    out[0] += rem * atoms[k - 1, 0]
    out[1] += rem * atoms[k - 1, 1]


@numba.njit(nogil=True, cache=True)
def _check_room(count, atoms):
    big = 0
    for j in range(atoms.shape[0]):
        big = max(big, atoms[j, 0], atoms[j, 1])
    return count * big


@numba.njit(nogil=True, cache=True)
def step_kernel(rng, x1, x2, c1, q1, a1, c2, q2, a2, ce, qe, ae, out):
    bound = _check_room(x1, a1) + _check_room(x2, a2) + _check_room(1, ae)
    if bound > MAX_COMPONENT:
        raise OverflowError("population would exceed 2**53")
    out[0] = 0
    out[1] = 0
    add_iid_sum(rng, x1, c1, q1, a1, out)
    add_iid_sum(rng, x2, c2, q2, a2, out)
    add_iid_sum(rng, 1, ce, qe, ae, out)


@numba.njit(nogil=True, cache=True)
def path_kernel(rng, n, c1, q1, a1, c2, q2, a2, ce, qe, ae):
    """Simulate X_0..X_n from zero; also returns the immigration draws."""
    bound_e = _check_room(1, ae)
    states = np.zeros((n + 1, 2), np.int64)
    eps = np.zeros((n + 1, 2), np.int64)
    out = np.zeros(2, np.int64)
    for k in range(1, n + 1):
        x1 = states[k - 1, 0]
        x2 = states[k - 1, 1]
        if _check_room(x1, a1) + _check_room(x2, a2) + bound_e > MAX_COMPONENT:
            raise OverflowError("population would exceed 2**53")
        out[0] = 0
        out[1] = 0
        add_iid_sum(rng, x1, c1, q1, a1, out)
        add_iid_sum(rng, x2, c2, q2, a2, out)
        e0 = out[0]
        e1 = out[1]
        add_iid_sum(rng, 1, ce, qe, ae, out)
        eps[k, 0] = out[0] - e0
        eps[k, 1] = out[1] - e1
        states[k, 0] = out[0]
        states[k, 1] = out[1]
    return states, eps


@numba.njit(nogil=True, cache=True)
def euler_cir_kernel(a, c, dt, dw, y):
    """Full-truncation Euler scheme for dY = a dt + sqrt(c Y+) dW, Y_0 = 0.

    Fills ``y`` (length len(dw) + 1) and returns the number of clamped steps.
    """
    y[0] = 0.0
    clamped = 0
    for i in range(dw.shape[0]):
        yi = y[i]
        nxt = yi + a * dt + np.sqrt(c * max(yi, 0.0)) * dw[i]
        if nxt < 0.0:
            nxt = 0.0
            clamped += 1
        y[i + 1] = nxt
    return clamped
