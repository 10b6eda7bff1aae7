"""Lüroth and Farey maps over an interval partition, their conjugacy with the
tent map, the derivative of that conjugacy, and its dimension spectrum."""

from .codec import (
    CylinderInterval,
    FareyWord,
    LurothDigits,
    farey_cylinder,
    farey_to_luroth,
    is_alpha_rational,
    luroth_cylinder,
    luroth_digits,
    luroth_to_farey,
    luroth_value,
    parse_digits,
)
from .conjugacy import (
    ThetaValue,
    check_conjugacy,
    conjugate_between,
    mu_cylinder,
    mu_interval,
    theta,
    theta_at,
    theta_inverse,
)
from .derivative import (
    DerivativeVerdict,
    MSet,
    alpha_rational_factor,
    approximant_ratio,
    classify_empirical,
    classify_oscillating,
    classify_periodic,
    m_set,
    ratio_sequence,
    running_levels,
    zero_criterion,
)
from .dynamics import (
    BirkhoffSums,
    birkhoff,
    farey_map,
    level,
    luroth_map,
    lyapunov_farey,
    pi_luroth,
    tent,
)
from .errors import (
    AlphaFareyError,
    DigitError,
    DivergenceError,
    HorizonError,
    HypothesisError,
    PartitionError,
)
from .experiments import ExperimentReport, level_set_census, singularity_experiment, spectrum_sweep
from .partition import Partition, classify_partition, make_partition
from .spectrum import (
    SpectrumPoint,
    SRange,
    free_energy_t,
    free_energy_v,
    legendre_sigma,
    mean_level,
    partition_sum,
    pvb_threshold,
    s_range,
    theorem_dimensions,
)

__version__ = "0.1.0"
