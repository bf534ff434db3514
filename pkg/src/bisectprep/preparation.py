"""Level-by-level bisection state preparation.

Starting from a single region holding all the mass, each level splits every
region in two and sends a share ``f`` of its amplitude-squared to the left
child.  On a register this is one rotation per level,
``Ry(arccos sqrt f_i)`` on the new qubit, controlled on the index ``|i>``
already prepared (a multiplexed rotation).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution, region_bounds
from .errors import DomainError, IntegrationError
from .integration import ANALYTIC, IntegrationBackend, left_fraction_with_error
from .statevector import (CNOT, MAX_QUBITS, MRY, RY, Circuit, Gate, Statevector)

__all__ = [
    "DiscretizedDistribution", "AngleTable", "level_fractions", "compute_angles", "refine",
    "discretize", "prepare_direct", "synthesize", "prepare_circuit", "decompose_multiplexed",
    "decompose_circuit", "gate_count_report", "exact_masses", "split_mass",
]

MASS_SUM_TOLERANCE = 1e-9


@dataclass
class DiscretizedDistribution:
    """Masses of the ``2**level`` equal-width regions at one level.

    ``variance`` carries the propagated variance of each mass when the
    integration backend is stochastic (zeros otherwise).
    """

    level: int
    masses: np.ndarray
    variance: np.ndarray | None = None

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.shape != (2 ** self.level,):
            raise DomainError(f"level {self.level} needs {2 ** self.level} masses, got {self.masses.shape}")
        if np.any(self.masses < 0):
            raise DomainError("masses must be nonnegative")
        if abs(float(self.masses.sum()) - 1.0) > MASS_SUM_TOLERANCE:
            raise DomainError(f"masses sum to {self.masses.sum()!r}, not 1")
        if self.variance is None:
            self.variance = np.zeros_like(self.masses)

    @classmethod
    def root(cls) -> "DiscretizedDistribution":
        return cls(0, np.ones(1))

    def standard_error_budget(self) -> float:
        """Half the summed standard errors: the expected scale of a TV error."""
        return 0.5 * float(np.sum(np.sqrt(self.variance)))

    def coarsen(self) -> np.ndarray:
        """Pairwise sums ``masses[2i] + masses[2i+1]``."""
        return self.masses[0::2] + self.masses[1::2]


@dataclass
class AngleTable:
    """Per-level rotation angles; ``levels[m]`` has ``2**m`` entries in [0, pi/2]."""

    levels: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.levels = [np.asarray(level, dtype=float) for level in self.levels]
        if not self.levels:
            raise DomainError("angle table is empty")
        for m, level in enumerate(self.levels):
            if level.shape != (2 ** m,):
                raise DomainError(f"level {m} needs {2 ** m} angles, got shape {level.shape}")
            if np.any(level < 0) or np.any(level > math.pi / 2) or not np.all(np.isfinite(level)):
                raise DomainError(f"level {m} has an angle outside [0, pi/2]")

    @property
    def num_qubits(self) -> int:
        return len(self.levels)

    def to_json(self) -> str:
        data = {"format": "bisectprep.angles/1", "num_qubits": self.num_qubits,
                "qubit_order": "msb-first",
                "levels": {str(m): [float(format(v, ".17g")) for v in level]
                           for m, level in enumerate(self.levels)}}
        return json.dumps(data, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "AngleTable":
        data = json.loads(text)
        levels = data["levels"]
        return cls([levels[str(m)] for m in range(len(levels))])


def _check_n(n: int) -> int:
    if not 1 <= n <= MAX_QUBITS:
        raise DomainError(f"n must be in [1, {MAX_QUBITS}], got {n}")
    return int(n)


def level_fractions(dist: Distribution, level: int,
                    backend: IntegrationBackend = ANALYTIC) -> tuple[np.ndarray, np.ndarray]:
    """Left-half fractions and their variances for every region at ``level``."""
    count = 2 ** level
    fracs = np.empty(count)
    var = np.empty(count)
    for i in range(count):
        region = region_bounds(level, i, dist.support)
        try:
            fracs[i], var[i] = left_fraction_with_error(dist, region, backend)
        except IntegrationError as exc:
            raise exc.with_context((level, i)) from exc
    return fracs, var


def _angles(fracs: np.ndarray) -> np.ndarray:
    return np.arccos(np.sqrt(np.clip(fracs, 0.0, 1.0)))


def compute_angles(dist: Distribution, n: int,
                   backend: IntegrationBackend = ANALYTIC) -> AngleTable:
    """Rotation angles ``arccos(sqrt(f))`` for levels ``0 .. n-1``."""
    n = _check_n(n)
    return AngleTable([_angles(level_fractions(dist, m, backend)[0]) for m in range(n)])


def split_mass(parent: np.ndarray, fracs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split each parent mass into ``(left, right)`` with ``left + right == parent`` exactly.

    The heavier child is computed as a product and the lighter one as the
    difference; since the heavier child lies in ``[p/2, p]`` the subtraction
    is exact and so is the sum.
    """
    parent = np.asarray(parent, dtype=float)
    fracs = np.clip(np.asarray(fracs, dtype=float), 0.0, 1.0)
    left_heavy = fracs >= 0.5
    heavy = parent * np.where(left_heavy, fracs, 1.0 - fracs)
    light = parent - heavy
    return np.where(left_heavy, heavy, light), np.where(left_heavy, light, heavy)


def _refine_with(masses: DiscretizedDistribution, fracs: np.ndarray,
                 frac_var: np.ndarray) -> DiscretizedDistribution:
    p = masses.masses
    left, right = split_mass(p, fracs)
    children = np.empty(2 * p.size)
    children[0::2], children[1::2] = left, right
    pv = masses.variance
    child_var = np.empty_like(children)
    child_var[0::2] = fracs ** 2 * pv + p ** 2 * frac_var
    child_var[1::2] = (1.0 - fracs) ** 2 * pv + p ** 2 * frac_var
    return DiscretizedDistribution(masses.level + 1, children, child_var)


def refine(masses: DiscretizedDistribution, dist: Distribution,
           backend: IntegrationBackend = ANALYTIC) -> DiscretizedDistribution:
    """Subdivide every region once: level ``m`` masses to level ``m + 1``."""
    fracs, frac_var = level_fractions(dist, masses.level, backend)
    return _refine_with(masses, fracs, frac_var)


def discretize(dist: Distribution, n: int, backend: IntegrationBackend = ANALYTIC,
               with_angles: bool = False):
    """Refine from level 0 up to level ``n``.

    Returns the level-``n`` masses, or ``(masses, AngleTable)`` when
    ``with_angles`` is set (both built from the same integrals).
    """
    n = _check_n(n)
    masses = DiscretizedDistribution.root()
    levels = []
    for m in range(n):
        fracs, frac_var = level_fractions(dist, m, backend)
        levels.append(_angles(fracs))
        masses = _refine_with(masses, fracs, frac_var)
    return (masses, AngleTable(levels)) if with_angles else masses


def prepare_direct(dist: Distribution, n: int,
                   backend: IntegrationBackend = ANALYTIC) -> Statevector:
    """Statevector with amplitudes ``sqrt(p_i)`` over ``2**n`` regions."""
    masses = discretize(dist, n, backend)
    return Statevector(n, np.sqrt(masses.masses).astype(complex))


def synthesize(angles: AngleTable) -> Circuit:
    """Circuit preparing the tabulated state from ``|0...0>``.

    Level 0 becomes a plain ``Ry`` on qubit 0; level ``m`` becomes a
    multiplexed ``Ry`` on qubit ``m`` controlled by qubits ``0 .. m-1``.
    """
    if not isinstance(angles, AngleTable):
        raise DomainError("synthesize expects an AngleTable")
    circuit = Circuit(angles.num_qubits)
    circuit.append(Gate(RY, 0, (), (float(angles.levels[0][0]),)))
    for m in range(1, angles.num_qubits):
        circuit.append(Gate(MRY, m, tuple(range(m)), tuple(angles.levels[m])))
    return circuit


def prepare_circuit(dist: Distribution, n: int,
                    backend: IntegrationBackend = ANALYTIC) -> Circuit:
    return synthesize(compute_angles(dist, n, backend))


def _walsh_transform(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float)
    h = 1
    while h < out.size:
        blocks = out.reshape(-1, 2, h)
        out = np.concatenate([blocks[:, 0] + blocks[:, 1], blocks[:, 0] - blocks[:, 1]],
                             axis=1).reshape(-1)
        h *= 2
    return out


def decompose_multiplexed(gate: Gate) -> list[Gate]:
    """Lower a multiplexed ``Ry`` to alternating ``Ry`` and ``CNOT`` gates.

    Rotation ``j`` uses the Walsh-transformed angle vector at Gray code
    ``g_j``, scaled by ``2**-k``; the CNOT after it is controlled by the
    qubit whose bit flips between ``g_j`` and ``g_{j+1}`` (cyclically).
    Angle index bit ``b`` (value ``2**b``) belongs to ``controls[k-1-b]``.
    """
    if gate.kind == RY:
        return [gate]
    if gate.kind != MRY:
        raise DomainError(f"cannot decompose a {gate.kind} gate")
    k = len(gate.controls)
    angles = np.asarray(gate.angles, dtype=float)
    if k == 0:
        return [Gate(RY, gate.target, (), (float(angles[0]),))]
    walsh = _walsh_transform(angles) / 2 ** k
    out = []
    for j in range(2 ** k):
        gray = j ^ (j >> 1)
        out.append(Gate(RY, gate.target, (), (float(walsh[gray]),)))
        # bit flipped going to the next gray code; the wrap-around flips the top bit
        bit = (((j + 1) & -(j + 1)).bit_length() - 1) if j + 1 < 2 ** k else k - 1
        out.append(Gate(CNOT, gate.target, (gate.controls[k - 1 - bit],)))
    return out


def decompose_circuit(circuit: Circuit) -> Circuit:
    gates = []
    for g in circuit.gates:
        gates.extend(decompose_multiplexed(g) if g.kind == MRY else [g])
    return Circuit(circuit.num_qubits, gates)


def _depth(circuit: Circuit) -> int:
    frontier = [0] * circuit.num_qubits
    for g in circuit.gates:
        if g.target is None:
            qubits = list(range(circuit.num_qubits))
        else:
            qubits = [g.target, *g.controls]
        layer = max(frontier[q] for q in qubits) + 1
        for q in qubits:
            frontier[q] = layer
    return max(frontier, default=0)


def gate_count_report(circuit: Circuit, decomposed: bool = True) -> dict:
    """Gate tallies; with ``decomposed`` multiplexed rotations are lowered first."""
    if decomposed:
        circuit = decompose_circuit(circuit)
    kinds = [g.kind for g in circuit.gates]
    report = {"ry": kinds.count(RY), "cnot": kinds.count(CNOT), "depth": _depth(circuit)}
    if not decomposed:
        report["multiplexed_ry"] = kinds.count(MRY)
    others = len(kinds) - sum(kinds.count(k) for k in (RY, CNOT, MRY))
    if others:
        report["other"] = others
    return report


def exact_masses(dist: Distribution, n: int) -> np.ndarray:
    """Region masses straight from the closed-form CDF (no refinement)."""
    return np.array([dist.mass(r.left, r.right)
                     for r in (region_bounds(n, i, dist.support) for i in range(2 ** n))])
