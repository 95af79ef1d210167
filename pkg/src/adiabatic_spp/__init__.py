"""Adiabatic quantum optimization of the set partition problem, simulated on a state vector."""

from .errors import CapacityError, NumericalError, SppError, ValidationError
from .spp_core import (
    CostSpectrum,
    ResidueTable,
    SppInstance,
    brute_force_min_residue,
    build_cost_spectrum,
    enumerate_residues,
    generate_instance,
    residue,
)
from .hamiltonian import (
    DriverParams,
    Schedule,
    apply_driver,
    apply_hamiltonian,
    apply_problem,
    dense_hamiltonian,
    symmetric_state,
)
from .evolution import (
    EvolutionResult,
    IntegratorConfig,
    adiabatic_overlap,
    ground_probability,
    probability_profile,
    propagate,
)
from .spectral import (
    SpectralResult,
    adiabatic_spectrum,
    classify_levels,
    minimum_gap,
    nonadiabatic_sum,
)
from .dos import (
    DosHistogram,
    ResonanceReport,
    approximate_gcd_scan,
    characteristic_function,
    coarse_grained_dos,
    gaussian_dos,
)
from .experiments import (
    ComplexityCurve,
    ScalingReport,
    complexity,
    minimize_complexity,
    scaling_sweep,
)

__version__ = "0.1.0"
