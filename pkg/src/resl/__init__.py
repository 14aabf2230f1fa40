"""Resonances, scattering and inverse problems for block Jacobi operators on
the half-lattice with finitely supported perturbations."""

__version__ = "0.1.0"

from .core import (
    MatPoly,
    Perturbation,
    SpectralPoint,
    eval_matpoly,
    interpolate_matpoly,
    k_of_lambda,
    lambda_of_k,
    matrix_from_pairs,
    matrix_to_pairs,
    perturbation_from_dict,
    validate_perturbation,
)
from .jost import (
    JostData,
    RegularPair,
    build_jost,
    regular_solutions,
    regular_solutions_tilde,
    wronskian,
)
from .spectra import (
    NormingData,
    SpectrumReport,
    classify_spectrum,
    find_roots,
    forbidden_domain,
    free_resolvent_kernel,
    jost_determinant,
    norming_matrix,
    resolvent_kernel,
    s_residue,
    trace_identities,
)
from .scattering import (
    fredholm_determinant,
    log_det_taylor,
    phase_shift_derivative,
    s_matrix,
    trace_taylor_targets,
    weyl_from_smatrix,
)
from .gauge import GaugeResult, polar_gauge, triangular_gauge
from .inverse import (
    FiniteJacobi,
    SpectralData,
    jacobi_from_spectral_data,
    moment_matrix,
    reconstruct_from_jost_samples,
    reconstruct_from_smatrix,
    spectral_data_forward,
    validate_resonance_vector,
    weyl_function_finite,
)
from .sweep import run_sweep, sweep_targets

__all__ = [name for name in dir() if not name.startswith("_")]
