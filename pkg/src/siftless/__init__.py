"""Security analysis of sifting-less m-state QKD protocols.

Alice sends phase-randomized weak coherent pulses linearly polarized along
one of m uniformly spaced directions (angle step 2*pi/m on the Poincare
great circle); Bob measures an m-outcome POVM whose pi offset makes the
outcome y = x impossible on a clean channel; no sifting is performed and
the key is extracted from Bob's data by reverse reconciliation.

The package computes secret keyrates against the optimal errorless
eavesdropping combination of intercept-resend-with-unambiguous-
discrimination (IRUD) and photon-number-splitting (PNS) attacks, with and
without decoy states, optimizes the source intensity, and validates the
analytic channel model with an event-level Monte Carlo simulator.
"""

__version__ = "0.1.0"

from .states import (
    ProtocolParams,
    ConditionalDistribution,
    residue_binomial_weights,
    conditional_probability,
    conditional_distribution,
    mutual_information,
    shifted_diagonal_matrix,
    eve_unconditional_state,
    eve_conditional_state,
)
from .spectra import (
    hermitian_eigenvalues,
    von_neumann_entropy,
    binary_entropy,
    shannon_entropy,
)
from .attacks import (
    PhotonClassAnalysis,
    irud_success_probability,
    pns_holevo,
    pulse_class_keyrate,
    marginal_keyrate,
    attack_fractions,
)
from .strategies import (
    AttackAllocation,
    KeyrateCurvePoint,
    DecoyEstimate,
    MuOptimum,
    IllConditionedSystemError,
    poisson_pmf,
    poisson_cutoff,
    observed_yield,
    dsp_yield,
    budget_strategy,
    dsp_allocation,
    dsp_keyrate,
    bb84_keyrate,
    critical_transmission,
    critical_transmission_asymptotic,
    optimize_mu,
    asymptotic_no_dsp,
    qber_keyrate,
    critical_qber,
    decoy_yield_estimation,
)
from .montecarlo import SimConfig, SessionStats, simulate_session, estimate_conditional_distribution
