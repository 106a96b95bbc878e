"""Exact simulation of the branching process with immigration from a zero start.

Every trajectory is driven by its own ``numpy.random.Generator`` derived from
``(seed, stream)`` through :class:`numpy.random.SeedSequence`, so a replica's
draws never depend on how replicas are spread over worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from . import _kernels
from .model import ModelSpec

__all__ = [
    "RngStream",
    "Trajectory",
    "step",
    "simulate",
    "map_replicas",
    "sample_states",
    "empirical_mean_state",
]

T = TypeVar("T")

# spawn-key domains, so trajectories and limit paths never share a stream
DOMAIN_TRAJECTORY = 0
DOMAIN_LIMIT = 1
DOMAIN_REFERENCE = 2
DOMAIN_SINGLE_STEP = 3


@dataclass(frozen=True)
class RngStream:
    """Address of one independent random stream."""

    seed: int
    stream: int = 0
    domain: int = DOMAIN_TRAJECTORY

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.domain, self.stream))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@lru_cache(maxsize=64)
def _tables(spec: ModelSpec):
    out = []
    for law in (spec.offspring1, spec.offspring2, spec.immigration):
        out.extend(_kernels.prepare_law(law.support, law.probs))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One path X_0, ..., X_n with its derived coordinate sequences.

    ``u_seq``/``v_seq`` have length n + 1; ``m_seq`` has one row per k = 1..n.
    ``immigration`` holds the realised immigration vectors (row 0 is zero)
    when the path was simulated, and is None for paths loaded from data.
    """

    states: np.ndarray
    u_seq: np.ndarray
    v_seq: np.ndarray
    m_seq: np.ndarray
    spec: ModelSpec = field(repr=False)
    seed: Optional[int] = None
    stream: Optional[int] = None
    immigration: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.states.shape[0] - 1

    @classmethod
    def from_states(cls, states, spec: ModelSpec, seed=None, stream=None, immigration=None):
        states = np.asarray(states, dtype=np.int64)
        if states.ndim != 2 or states.shape[1] != 2 or states.shape[0] < 2:
            raise ValueError("states must have shape (n + 1, 2) with n >= 1")
        if np.any(states[0] != 0):
            raise ValueError("trajectories start from X_0 = (0, 0)")
        if np.any(states < 0):
            raise ValueError("states must be non-negative")
        u = states[:, 0] + states[:, 1]
        v = states[:, 0] - states[:, 1]
        x = states.astype(float)
        m = x[1:] - x[:-1] @ spec.mean_matrix.T - spec.m_eps
        for a in (states, u, v, m):
            a.setflags(write=False)
        return cls(states, u, v, m, spec, seed, stream, immigration)


def step(spec: ModelSpec, x_prev, rng) -> np.ndarray:
    """Draw X_k given X_{k-1} = ``x_prev``.

    ``rng`` is a numpy Generator (advanced in place) or an :class:`RngStream`.
    Raises OverflowError if a component could exceed 2**53.
    """
    x1, x2 = (int(v) for v in x_prev)
    if x1 < 0 or x2 < 0:
        raise ValueError("x_prev must be component-wise non-negative")
    out = np.zeros(2, dtype=np.int64)
    _kernels.step_kernel(_as_generator(rng), x1, x2, *_tables(spec), out)
    return out


def simulate(spec: ModelSpec, n: int, seed: int, stream: int = 0) -> Trajectory:
    """Simulate X_0 = 0, X_1, ..., X_n on stream ``(seed, stream)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = RngStream(seed, stream).generator()
    states, eps = _kernels.path_kernel(rng, n, *_tables(spec))
    eps.setflags(write=False)
    return Trajectory.from_states(states, spec, seed, stream, immigration=eps)


def _run_chunks(func: Callable[[int], T], indices: Sequence[int], threads: int) -> List[T]:
    if threads <= 1 or len(indices) < 2:
        return [func(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, indices))


def map_replicas(
    func: Callable[[Trajectory], T],
    spec: ModelSpec,
    n: int,
    replicas: int,
    seed: int,
    threads: int = 1,
    first_stream: int = 0,
) -> List[T]:
    """Apply ``func`` to replicas on streams first_stream, first_stream + 1, ...

    Results come back in stream order whatever the thread count.
    """
    streams = range(first_stream, first_stream + replicas)
    return _run_chunks(lambda s: func(simulate(spec, n, seed, s)), streams, threads)


def sample_states(spec: ModelSpec, k: int, replicas: int, seed: int, threads: int = 1) -> np.ndarray:
    """X_k over independent replicas, shape (replicas, 2)."""
    rows = map_replicas(lambda t: t.states[k], spec, k, replicas, seed, threads)
    return np.array(rows, dtype=np.int64).reshape(replicas, 2)


def empirical_mean_state(spec: ModelSpec, k: int, replicas: int, seed: int, threads: int = 1) -> np.ndarray:
    """Monte Carlo estimate of E X_k."""
    if k < 1 or replicas < 1:
        raise ValueError("k and replicas must be >= 1")
    return sample_states(spec, k, replicas, seed, threads).mean(axis=0)
