"""Precision bounds and measurement incompatibility for su(2) unitary models.

The package computes quantum Fisher information matrices, Uhlmann
curvature, SLD and Holevo precision bounds and the scalar asymptotic
incompatibility for field-estimation models generated by arbitrary-
dimension spin representations, plus the experiment drivers (grid scans,
scaling tables, FIM rank experiments) exposed through the ``spinmetro``
command line.
"""

from .analysis import (
    RankExperimentConfig,
    ScalingResult,
    ScanConfig,
    ScanResult,
    fim_rank_experiment,
    metrics_report,
    run_scan,
    scaling_table,
    shrinkage_fractions,
)
from .encoding import (
    GeneratorSet,
    ModelKind,
    ModelPoint,
    closed_generators,
    closed_generators_2p,
    closed_generators_3p,
    direction_vectors_2p,
    direction_vectors_3p,
    hamiltonian,
    numeric_generators,
    series_generators,
)
from .errors import (
    InvalidInput,
    NonConvergence,
    NumericalFailure,
    SpectrumNotReal,
    SpinMetroError,
    StepInstability,
)
from .linalg import (
    SpinRep,
    build_spin_rep,
    expm_i,
    herm_eig,
    j_direction,
    spectral_absmax,
    sym_inverse,
    trace_norm,
)
from .metrology import (
    IncompatReport,
    ai_measure,
    ai_two_param,
    batched_qfim_uhlmann,
    born_probabilities,
    classical_fim,
    check_probe,
    holevo_pure,
    incompat_report,
    qfim_from_generators,
    qfim_from_slds,
    qfim_from_state_derivatives,
    qfim_uhlmann,
    sld_solve,
    submodel,
    uhlmann_from_generators,
    uhlmann_from_slds,
)
from .models import (
    ProbeSpec,
    Qubit2pResult,
    ai_threeparam_probe,
    bloch_vector,
    gamma_scaling,
    make_probe,
    qubit2p_closed,
    qudit2p_closed,
    state_from_bloch,
    threeparam_uhlmann_closed,
)

__version__ = "0.1.0"
