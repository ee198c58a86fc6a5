"""Simulation and exact-computation toolkit for the permutation model of
random regular multigraphs evolving jointly in dimension (Chinese restaurant
growth) and time (random transpositions)."""

from rrgfield.cycles import (
    CycleRecord,
    MultiGraph,
    build_graph,
    cnbw_count,
    cnbw_counts,
    count_cycles_by_class,
    enumerate_cycles,
    is_tangle_free,
    precycle_count,
)
from rrgfield.dynamics import FieldState, TranspositionLog, evolve, field_grid, project, sigma_at
from rrgfield.harness import ExperimentConfig, StatReport, replica_rng
from rrgfield.limitfield import (
    Atom,
    ChainTrajectory,
    LimitFieldSample,
    bd_generator,
    birth_rate,
    cov_G,
    cov_U,
    cov_finite_d,
    doubling_chain,
    halving_chain,
    sample_chi,
    sample_limit_field,
    scaled_X,
    tau_mgf,
    yule_mgf,
)
from rrgfield.spectra import (
    PolynomialCoeffs,
    SpectralReport,
    chebyshev_T,
    f_basis,
    gamma_poly,
    mobius,
    scaled_eigenvalues,
    spectral_report,
    trace_gamma,
)
from rrgfield.tower import (
    DimensionClock,
    Permutation,
    PermutationTower,
    crp_delete,
    crp_insert,
    grow_tower,
    new_tower,
    sample_dimension,
)
from rrgfield.words import (
    DEATH,
    Letter,
    NotCyclicallyReduced,
    Word,
    WordClassTable,
    a_count,
    canonical,
    double_letter,
    enumerate_classes,
    halvings,
    parse_word,
    render,
    word_stats,
)

__all__ = [
    "Atom",
    "ChainTrajectory",
    "CycleRecord",
    "DEATH",
    "DimensionClock",
    "ExperimentConfig",
    "FieldState",
    "Letter",
    "LimitFieldSample",
    "MultiGraph",
    "NotCyclicallyReduced",
    "Permutation",
    "PermutationTower",
    "PolynomialCoeffs",
    "SpectralReport",
    "StatReport",
    "TranspositionLog",
    "Word",
    "WordClassTable",
    "a_count",
    "bd_generator",
    "birth_rate",
    "build_graph",
    "canonical",
    "chebyshev_T",
    "cnbw_count",
    "cnbw_counts",
    "count_cycles_by_class",
    "cov_G",
    "cov_U",
    "cov_finite_d",
    "crp_delete",
    "crp_insert",
    "double_letter",
    "doubling_chain",
    "enumerate_classes",
    "enumerate_cycles",
    "evolve",
    "f_basis",
    "field_grid",
    "gamma_poly",
    "grow_tower",
    "halving_chain",
    "halvings",
    "is_tangle_free",
    "mobius",
    "new_tower",
    "parse_word",
    "precycle_count",
    "project",
    "render",
    "replica_rng",
    "sample_chi",
    "sample_dimension",
    "sample_limit_field",
    "scaled_X",
    "scaled_eigenvalues",
    "sigma_at",
    "spectral_report",
    "tau_mgf",
    "trace_gamma",
    "word_stats",
    "yule_mgf",
]
