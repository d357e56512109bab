"""Admissible memory kernels for random-unitary qubit evolution.

Construct kernels from a waiting function and three axis weights,
certify them (triangle inequalities, integral bound, complete
monotonicity, polynomial product conditions), solve the non-local
master equation by three independent routes, and classify the dynamics
(CPTP, CP-divisible, trace-distance Markovian).
"""

__version__ = "0.1.0"

from .kernel_families import (  # noqa: F401
    AnisotropyWeights,
    BiExponential,
    BRates,
    DeltaPlusRegular,
    Exponential,
    Hypoexponential,
    KernelSpec,
    PauliKernelRates,
    Scaled,
    Sinusoidal,
    Tabulated,
    a_from_b,
    b_from_a,
    blp_sufficient_check,
    integral_bound_check,
    kernel_eigenvalues_laplace,
    kernel_rates_from_eigenvalues,
    kernel_time_domain,
    polynomial_admissibility_check,
    probabilities_from_cumulative,
    semi_markov_kernel,
    triangle_check,
)
from .evolution_solver import (  # noqa: F401
    SolverBlowUpError,
    TimeGrid,
    TrajectorySet,
    closed_form_lambdas,
    convex_semigroup_mixture,
    laplace_domain_solve,
    markovian_semigroup,
    trajectory_cptp_scan,
    volterra_solve,
)
from .laplace_tools import (  # noqa: F401
    CMVerdict,
    PartialFractionExpansion,
    RationalFunction,
    cm_check,
    gaver_stehfest,
    initial_value_check,
    inverse_laplace,
    lemma_identity_check,
    numeric_laplace,
    partial_fraction_decompose,
    talbot,
)
from .markovianity import (  # noqa: F401
    BLPResult,
    LocalRates,
    blp_condition_check,
    blp_measure,
    cp_divisibility_check,
    local_rates_from_f,
    local_rates_from_lambdas,
)
from .pauli_channel import (  # noqa: F401
    HADAMARD4,
    apply_map,
    cptp_check,
    eigenvalues_from_probabilities,
    probabilities_from_eigenvalues,
    trace_distance,
)
from .verdicts import Verdict  # noqa: F401
