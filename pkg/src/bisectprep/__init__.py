"""Amplitude encoding of discretized probability densities by recursive bisection."""

from .distributions import (Distribution, Exponential, Gaussian, GaussianMixture, Region,
                            Tabulated, Uniform, check_log_concavity, distribution_from_dict,
                            load_distribution, region_bounds)
from .errors import DegenerateInputError, DomainError, IntegrationError
from .integration import IntegrationBackend, integrate, left_fraction
from .preparation import (AngleTable, DiscretizedDistribution, compute_angles,
                          decompose_multiplexed, discretize, gate_count_report,
                          prepare_direct, refine, synthesize)
from .statevector import (Circuit, Gate, Statevector, apply_circuit, apply_gate, fidelity,
                          fourier_magnitude, inverse_qft, measure_histogram, qft,
                          total_variation, walsh_hadamard)

__version__ = "0.1.0"
