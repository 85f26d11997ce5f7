"""Optimal continuous-variable teleportation of coherent states.

Closed-form fidelities, brute-force wavefunction oracles and three-parameter
optimization (beam-splitter angle and two displacement gains) for finitely
squeezed two-mode channels and realistic pools of input states.
"""

from .model import (
    QUADRATURES,
    Circumference,
    CoherentAmplitude,
    Disk,
    Gaussian,
    ImagLine,
    InputDistribution,
    MeasurementOutcome,
    NumericDomainError,
    ProtocolSettings,
    RealLine,
    kernel_f1,
    kernel_f2,
    original_cvtp_fidelity,
    state_fidelity,
)
from .average import (
    AveragedFidelity,
    average_fidelity,
    avg_fidelity_circle,
    avg_fidelity_circle_sym,
    avg_fidelity_disk,
    avg_fidelity_disk_sym,
    avg_fidelity_gaussian,
    avg_fidelity_imag,
    avg_fidelity_real,
)
from .special import bessel_i0_scaled, erf
from .optimize import (
    OptimizationResult,
    maximize_one_param,
    maximize_three_param,
    optimal_g_circle,
    optimal_g_gaussian_centered,
    optimal_gu_imag,
    optimal_gv_real,
)

__version__ = "0.1.0"
