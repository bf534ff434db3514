"""Dense statevector simulation.

Basis index ``i`` is read most-significant-qubit first: qubit 0 is the
leftmost bit of ``i``.  With that ordering, reshaping the amplitude vector to
``[2] * n`` puts qubit ``q`` on axis ``q``.

``Ry(theta)`` here is ``[[cos, -sin], [sin, cos]]`` so ``Ry(theta)|0> =
cos(theta)|0> + sin(theta)|1>``; it equals the textbook ``RY(2*theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "MAX_QUBITS", "Statevector", "Gate", "Circuit", "apply_gate", "apply_circuit",
    "walsh_hadamard", "qft", "inverse_qft", "fourier_magnitude", "measure_histogram",
    "fidelity", "total_variation", "H", "RY", "CNOT", "MRY", "ORACLE", "QFT", "IQFT",
]

MAX_QUBITS = 24
NORM_TOLERANCE = 1e-10

H, RY, CNOT, MRY, ORACLE, QFT, IQFT = (
    "H", "Ry", "CNOT", "MultiplexedRy", "PhaseOracle", "QFTBlock", "InverseQFTBlock")
GATE_KINDS = (H, RY, CNOT, MRY, ORACLE, QFT, IQFT)

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def _check_qubits(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError(f"need at least one qubit, got {n}")
    if n > MAX_QUBITS:
        raise DomainError(f"{n} qubits exceeds the dense simulation cap of {MAX_QUBITS}")
    return n


@dataclass
class Statevector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.num_qubits = _check_qubits(self.num_qubits)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.num_qubits,):
            raise DomainError(f"expected {2 ** self.num_qubits} amplitudes, got shape {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise DomainError(f"state is not normalized: sum |a|^2 = {norm!r}")
        self.amplitudes = amps

    @classmethod
    def zero(cls, num_qubits: int) -> "Statevector":
        amps = np.zeros(2 ** _check_qubits(num_qubits), dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "Statevector":
        amps = np.zeros(2 ** _check_qubits(num_qubits), dtype=complex)
        if not 0 <= index < amps.size:
            raise DomainError(f"basis index {index} out of range")
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def uniform(cls, num_qubits: int) -> "Statevector":
        dim = 2 ** _check_qubits(num_qubits)
        return cls(num_qubits, np.full(dim, 1.0 / math.sqrt(dim), dtype=complex))

    @classmethod
    def from_probabilities(cls, probs) -> "Statevector":
        """State with nonnegative real amplitudes ``sqrt(p_i)``."""
        probs = np.asarray(probs, dtype=float)
        n = int(round(math.log2(probs.size))) if probs.size else 0
        if probs.size != 2 ** n:
            raise DomainError(f"length {probs.size} is not a power of two")
        return cls(n, np.sqrt(np.clip(probs, 0.0, None)).astype(complex))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "Statevector":
        return Statevector(self.num_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int | None = None
    controls: tuple[int, ...] = ()
    angles: tuple[float, ...] = ()
    marked: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "marked", frozenset(int(m) for m in self.marked))
        if self.target is not None:
            object.__setattr__(self, "target", int(self.target))

    def validate(self, num_qubits: int) -> None:
        kind = self.kind
        if kind not in GATE_KINDS:
            raise DomainError(f"unknown gate kind {kind!r}")
        if kind in (ORACLE, QFT, IQFT):
            if kind == ORACLE and any(not 0 <= m < 2 ** num_qubits for m in self.marked):
                raise DomainError("phase oracle marks an index outside the register")
            return
        if self.target is None or not 0 <= self.target < num_qubits:
            raise DomainError(f"{kind} target {self.target} outside a {num_qubits}-qubit register")
        if any(not 0 <= c < num_qubits for c in self.controls):
            raise DomainError(f"{kind} control outside a {num_qubits}-qubit register")
        if self.target in self.controls or len(set(self.controls)) != len(self.controls):
            raise DomainError(f"{kind} controls must be distinct and exclude the target")
        expected_controls = {H: 0, RY: 0, CNOT: 1}.get(kind)
        if expected_controls is not None and len(self.controls) != expected_controls:
            raise DomainError(f"{kind} takes {expected_controls} control(s), got {len(self.controls)}")
        if kind == RY and len(self.angles) != 1:
            raise DomainError("Ry takes exactly one angle")
        if kind == MRY and len(self.angles) != 2 ** len(self.controls):
            raise DomainError(f"MultiplexedRy with {len(self.controls)} controls needs "
                              f"{2 ** len(self.controls)} angles, got {len(self.angles)}")


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        self.num_qubits = _check_qubits(self.num_qubits)
        self.gates = list(self.gates)
        for g in self.gates:
            g.validate(self.num_qubits)

    def append(self, gate: Gate) -> "Circuit":
        gate.validate(self.num_qubits)
        self.gates.append(gate)
        return self

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


def _rotate(tensor: np.ndarray, target_axis: int, cos, sin) -> np.ndarray:
    # tensor has the controls flattened on axis 0 (possibly length 1)
    a0 = np.take(tensor, 0, axis=target_axis)
    a1 = np.take(tensor, 1, axis=target_axis)
    return np.stack([cos * a0 - sin * a1, sin * a0 + cos * a1], axis=target_axis)


def _apply_multiplexed(amps: np.ndarray, n: int, target: int, controls: Sequence[int],
                       angles: np.ndarray) -> np.ndarray:
    k = len(controls)
    order = list(controls) + [target] + [q for q in range(n) if q != target and q not in controls]
    tensor = amps.reshape([2] * n).transpose(order).reshape(2 ** k, 2, -1)
    c = np.cos(angles)[:, None]
    s = np.sin(angles)[:, None]
    out = _rotate(tensor, 1, c, s)
    return out.reshape([2] * n).transpose(np.argsort(order)).reshape(-1)


def _apply_single(amps: np.ndarray, n: int, target: int, matrix: np.ndarray) -> np.ndarray:
    tensor = amps.reshape(2 ** target, 2, -1)
    out = np.einsum("ij,ajb->aib", matrix, tensor)
    return out.reshape(-1)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Return ``gate`` applied to ``state`` (the input is not modified)."""
    n = state.num_qubits
    gate.validate(n)
    amps = state.amplitudes
    if gate.kind == H:
        out = _apply_single(amps, n, gate.target, _HADAMARD)
    elif gate.kind == RY:
        theta = gate.angles[0]
        c, s = math.cos(theta), math.sin(theta)
        out = _apply_single(amps, n, gate.target, np.array([[c, -s], [s, c]]))
    elif gate.kind == MRY:
        out = _apply_multiplexed(amps, n, gate.target, gate.controls, np.asarray(gate.angles))
    elif gate.kind == CNOT:
        ctrl = gate.controls[0]
        tensor = amps.reshape([2] * n).copy()
        idx = [slice(None)] * n
        idx[ctrl] = 1
        sub = tensor[tuple(idx)]
        axis = gate.target - (1 if gate.target > ctrl else 0)
        tensor[tuple(idx)] = np.flip(sub, axis=axis)
        out = tensor.reshape(-1)
    elif gate.kind == ORACLE:
        out = amps.copy()
        if gate.marked:
            out[np.fromiter(gate.marked, dtype=np.int64)] *= -1
    elif gate.kind == QFT:
        # ifft carries the +2*pi*i/N sign; rescale 1/N -> 1/sqrt(N)
        out = np.fft.ifft(amps) * math.sqrt(amps.size)
    else:
        out = np.fft.fft(amps) / math.sqrt(amps.size)
    return Statevector(n, out)


def apply_circuit(state: Statevector, circuit: Circuit) -> Statevector:
    if state.num_qubits != circuit.num_qubits:
        raise DomainError(f"circuit acts on {circuit.num_qubits} qubits, state has {state.num_qubits}")
    for gate in circuit.gates:
        state = apply_gate(state, gate)
    return state


def walsh_hadamard(state: Statevector) -> Statevector:
    """Apply H to every qubit."""
    for q in range(state.num_qubits):
        state = apply_gate(state, Gate(H, q))
    return state


def qft(state: Statevector) -> Statevector:
    """Quantum Fourier transform: ``a_k -> N^-1/2 sum_i exp(+2 pi i ik/N) a_i``."""
    return apply_gate(state, Gate(QFT))


def inverse_qft(state: Statevector) -> Statevector:
    return apply_gate(state, Gate(IQFT))


def fourier_magnitude(state: Statevector, k: int) -> float:
    """``|<k| QFT |state>|``."""
    if not 0 <= k < state.dim:
        raise DomainError(f"Fourier index {k} out of range [0, {state.dim})")
    return float(abs(qft(state).amplitudes[k]))


def measure_histogram(state: Statevector, shots: int, seed: int) -> np.ndarray:
    """Sample ``shots`` computational-basis outcomes; return counts per index.

    Uses inverse-CDF sampling with a PCG64 generator seeded by ``seed``.
    """
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    cdf = np.cumsum(state.probabilities())
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    np.minimum(draws, state.dim - 1, out=draws)
    return np.bincount(draws, minlength=state.dim)


def fidelity(a: Statevector, b: Statevector) -> float:
    """Overlap magnitude ``|<a|b>|``."""
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return min(float(abs(np.vdot(a.amplitudes, b.amplitudes))), 1.0)


def total_variation(p: Iterable[float], q: Iterable[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return min(0.5 * float(np.sum(np.abs(p - q))), 1.0)
