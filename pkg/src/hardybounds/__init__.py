"""Boundedness functionals, discretization and norm oracles for weighted Hardy-type operators."""

from .config import ConfigError, ExperimentConfig, load_config, load_suite, parse_config
from .discretize import (
    BlockReport,
    BlockStructure,
    LevelSequence,
    build_blocks,
    build_levels,
    normalize_mass,
    prop3_check,
    prop4_check,
    prop59_check,
    prop89_bound,
    prop89_check,
    verify_block_properties,
)
from .functionals import (
    FunctionalReport,
    ProblemSpec,
    RegimeError,
    eval_A12,
    eval_A34,
    eval_A5678,
    eval_E,
    monotone_transform,
    predict,
)
from .kernels import KernelSpec, check_regularity, estimate_theta
from .oracle import GridFunction, OracleResult, apply_operator, maximize_ratio, norm_ratio
from .partitions import CoveringSequence, SearchResult, eval_D, search_sup_D
from .quad import QuadConfig, QuadResult, integrate
from .weights import ExponentTriple, Piece, WeightSpec, dual_density, reflect

__version__ = "0.1.0"
