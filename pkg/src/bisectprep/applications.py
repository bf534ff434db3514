"""Demonstrations built on prepared distribution states.

* amplitude amplification starting from a non-uniform prior,
* the interference pattern left by a Walsh-Hadamard layer,
* reading one Fourier-component magnitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .distributions import (Distribution, LogConcavityReport, Tabulated,
                            check_log_concavity)
from .errors import DomainError
from .integration import ANALYTIC, IntegrationBackend
from .preparation import prepare_direct
from .statevector import (MAX_QUBITS, ORACLE, Gate, Statevector, apply_gate,
                          fourier_magnitude, walsh_hadamard)

__all__ = [
    "GroverRun", "grover_search", "diffuse", "uniform_success_closed_form",
    "iterations_to_reach", "interference_distribution", "interference_reference",
    "interference_as_density", "interference_log_concavity", "fourier_component_demo",
    "FourierComponent", "fourier_reference",
]


@dataclass
class GroverRun:
    initial: Statevector
    marked: frozenset[int]
    iterations: int
    success_trace: np.ndarray
    final: Statevector

    def first_reaching(self, threshold: float) -> int | None:
        hits = np.nonzero(self.success_trace >= threshold)[0]
        return int(hits[0]) if hits.size else None


def diffuse(state: Statevector, about: Statevector) -> Statevector:
    """Reflect ``state`` about ``about``: ``(2|about><about| - I) state``."""
    overlap = np.vdot(about.amplitudes, state.amplitudes)
    return Statevector(state.num_qubits, 2.0 * overlap * about.amplitudes - state.amplitudes)


def _success(state: Statevector, marked: np.ndarray) -> float:
    return float(np.sum(np.abs(state.amplitudes[marked]) ** 2))


def grover_search(initial: Statevector, marked: Iterable[int], iterations: int) -> GroverRun:
    """Amplitude amplification of ``marked`` starting from ``initial``.

    Each round flips the sign of marked amplitudes and then reflects about
    the initial state, so a non-uniform prior is kept for every round.
    """
    marked = frozenset(int(m) for m in marked)
    if not marked:
        raise DomainError("marked set must be nonempty")
    if any(not 0 <= m < initial.dim for m in marked):
        raise DomainError("marked index outside the register")
    if iterations < 0:
        raise DomainError(f"iterations must be >= 0, got {iterations}")
    oracle = Gate(ORACLE, marked=marked)
    idx = np.fromiter(sorted(marked), dtype=np.int64)
    state = initial
    trace = [_success(state, idx)]
    for _ in range(iterations):
        state = diffuse(apply_gate(state, oracle), initial)
        trace.append(_success(state, idx))
    return GroverRun(initial, marked, iterations, np.clip(trace, 0.0, 1.0), state)


def uniform_success_closed_form(num_marked: int, dim: int, t) -> np.ndarray:
    theta0 = math.asin(math.sqrt(num_marked / dim))
    return np.sin((2 * np.asarray(t) + 1) * theta0) ** 2


def iterations_to_reach(initial: Statevector, marked: Iterable[int], threshold: float = 0.99,
                        max_iterations: int = 1000) -> int | None:
    """Fewest rounds after which the success probability is at least ``threshold``."""
    return grover_search(initial, marked, max_iterations).first_reaching(threshold)


def interference_reference(probs) -> np.ndarray:
    """Direct O(N^2) sum ``q_j = (sum_i (-1)^(i.j) sqrt(p_i))^2 / N``."""
    probs = np.asarray(probs, dtype=float)
    dim = probs.size
    idx = np.arange(dim)
    parity = np.zeros((dim, dim), dtype=np.int64)
    anded = idx[:, None] & idx[None, :]
    while anded.any():
        parity ^= anded & 1
        anded >>= 1
    signs = 1.0 - 2.0 * parity
    return (signs @ np.sqrt(probs)) ** 2 / dim


def interference_distribution(dist: Distribution, n: int,
                              backend: IntegrationBackend = ANALYTIC) -> np.ndarray:
    """Outcome probabilities after a Walsh-Hadamard layer on the prepared state."""
    if n > 12:
        raise DomainError("interference demo is limited to n <= 12")
    return walsh_hadamard(prepare_direct(dist, n, backend)).probabilities()


def interference_as_density(q) -> Tabulated:
    """Wrap ``q`` as a piecewise-linear density with knots at ``j / N``."""
    q = np.asarray(q, dtype=float)
    return Tabulated(tuple(np.arange(q.size) / q.size), tuple(q))


def interference_log_concavity(q) -> LogConcavityReport:
    """Log-concavity check of ``q`` on its own knots (skipping near-zero entries)."""
    return check_log_concavity(interference_as_density(q), grid_points=len(q))


@dataclass
class FourierComponent:
    k: int
    magnitude: float
    reference: float

    @property
    def discrepancy(self) -> float:
        return abs(self.magnitude - self.reference)


def fourier_reference(probs, k: int) -> float:
    """``|N^-1/2 sum_i exp(2 pi i ik/N) sqrt(p_i)|`` by direct summation."""
    probs = np.asarray(probs, dtype=float)
    dim = probs.size
    phases = np.exp(2j * np.pi * ((np.arange(dim) * k) % dim) / dim)
    return float(abs(np.sum(phases * np.sqrt(probs)) / math.sqrt(dim)))


def fourier_component_demo(dist: Distribution, n: int, k: int,
                           backend: IntegrationBackend = ANALYTIC) -> FourierComponent:
    if not 1 <= n <= MAX_QUBITS:
        raise DomainError(f"n must be in [1, {MAX_QUBITS}], got {n}")
    if not 0 <= k < 2 ** n:
        raise DomainError(f"k must be in [0, {2 ** n}), got {k}")
    state = prepare_direct(dist, n, backend)
    return FourierComponent(k, fourier_magnitude(state, k),
                            fourier_reference(state.probabilities(), k))
