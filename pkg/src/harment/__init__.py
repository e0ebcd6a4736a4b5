"""Criticality and ground-state entanglement of translation-invariant
harmonic lattices with finite-range couplings.

The analytic structure of the spectral function (the Fourier symbol of the
coupling matrix) decides everything: zeros on the unit circle mean a critical
system with power-law correlations and logarithmically growing block entropy;
no zeros mean a finite correlation length and an area law with computable
upper and lower entropy bounds.
"""

__version__ = "0.1.0"

from .config import DEFAULT, Tolerances
from .entanglement import (
    CorrelationEstimate,
    EntanglementReport,
    correlation_length,
    det_lower_bound,
    entropy,
    full_report,
    mutual_information,
    negativity_upper_bound,
)
from .errors import (
    BadPartition,
    HarmentError,
    IllConditionedRoots,
    InsufficientDecayData,
    IntegrityError,
    NotPositive,
    NotSymmetric,
    SpectrumBelowOne,
    TooLarge,
)
from .kernel import (
    CirculantKernel,
    PartitionBlocks,
    build_kernel,
    dense_matrix_functions,
    extract_blocks,
    kernel_row_decay,
    rows_to_csv,
)
from .lattice import (
    CouplingSpec,
    EtaChainParams,
    build_coupling,
    build_eta_chain,
    coupling_from_json,
    coupling_to_json,
    dense_potential,
    tensor_coupling,
)
from .scaling import (
    FIXED_N_VARY_BLOCK,
    HALF_HALF,
    ScalingFit,
    area_law_2d,
    entropy_sweep,
    fit_entropy_log_growth,
    fit_log_growth,
    half_half_block,
    szego_det_check,
    widom_det_check,
    widom_slope,
)
from .spectral import (
    SpectralClassification,
    SpectralRoot,
    SzegoCoefficients,
    classify,
    regular_part_eval,
    spectral_eval,
    szego_coefficients,
    szego_lower_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
