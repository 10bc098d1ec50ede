"""Per-photon-number eavesdropping quantities.

For a pulse class with n photons Eve can either attempt unambiguous state
discrimination (success probability ``irud_success_probability``) or split
off n-1 photons and forward one (Holevo information ``pns_holevo``).  The
class keyrate K_n is Alice/Bob's mutual information minus Eve's PNS Holevo
bound; the marginal keyrate K_n / (1 - P_delta) is the slope of the class
contribution with respect to its yield and drives Eve's blocking priority.

K_n, the Holevo bounds, and the IRUD probabilities are memoized per (n, m)
since strategy sweeps reuse them thousands of times.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .states import eve_conditional_state, eve_unconditional_state, mutual_information, residue_binomial_weights
from .spectra import hermitian_eigenvalues, von_neumann_entropy

__all__ = [
    "PhotonClassAnalysis",
    "irud_success_probability",
    "pns_holevo",
    "pulse_class_keyrate",
    "marginal_keyrate",
    "attack_fractions",
]


@dataclass(frozen=True)
class PhotonClassAnalysis:
    """Record for one photon-number class under a given attack plan.

    ``blocked`` + ``usd`` + ``pns`` = 1 and yield_n = 1 - blocked.
    """

    n: int
    m: int
    p_poisson: float
    irud_prob: float
    holevo: float
    keyrate_n: float
    marginal: float
    yield_n: float
    blocked: float
    usd: float
    pns: float


@lru_cache(maxsize=None)
def irud_success_probability(n: int, m: int) -> float:
    """Success probability of unambiguously discriminating the m states.

    Equals m * min_w q[w] with q the residue binomial weights: zero exactly
    when n < m - 1 (some residue class is empty), first nonzero value
    m * 2**(1-m) at n = m - 1.
    """
    q = residue_binomial_weights(n, m)
    return float(m * np.min(q))


@lru_cache(maxsize=None)
def _holevo_cached(n: int, m: int) -> float:
    kept = n - 1  # Eve forwards one photon to Bob
    rho = eve_unconditional_state(kept, m)
    rho_y0 = eve_conditional_state(0, kept, m)
    # the conditional spectrum must not depend on Bob's outcome
    assert _spectrum_y_invariant(kept, m), f"conditional spectrum varies with y at n={kept}, m={m}"
    chi = von_neumann_entropy(rho) - von_neumann_entropy(rho_y0)
    return max(chi, 0.0)


def _spectrum_y_invariant(n: int, m: int, tol: float = 1e-10) -> bool:
    s0 = hermitian_eigenvalues(eve_conditional_state(0, n, m))
    s1 = hermitian_eigenvalues(eve_conditional_state(1, n, m))
    return bool(np.max(np.abs(s0 - s1)) <= tol)


def pns_holevo(n: int, m: int) -> float:
    """Eve's Holevo information on Bob's outcome after splitting an n-photon pulse.

    chi = S(rho_{n-1}) - S(rho_{y, n-1}), evaluated at y = 0 (the spectrum
    is outcome independent).  Zero for n = 1: Eve keeps no photon.
    """
    if n < 1:
        raise ValueError(f"photon number must be >= 1, got n={n}")
    if n == 1:
        return 0.0
    return _holevo_cached(n, m)


@lru_cache(maxsize=None)
def pulse_class_keyrate(n: int, m: int) -> float:
    """K_n = I(X:Y) - chi(n): keyrate of an n-photon class at unit yield.

    Strictly positive for every finite n: a pure PNS attack never learns
    Bob's outcome completely.  The gap closes like cos(pi/m)**(2n) as the
    sent states approach orthogonality, so beyond n of a few tens (m = 3
    or 4) the true value drops below what the entropy difference resolves
    in double precision; rounding noise is clamped at zero there.
    """
    return max(mutual_information(m) - pns_holevo(n, m), 0.0)


def marginal_keyrate(n: int, m: int) -> float:
    """K_n / (1 - P_delta): keyrate lost per unit of yield Eve blocks.

    Not monotone in n; blocking priority must be computed, not assumed.
    """
    p_delta = irud_success_probability(n, m)
    if p_delta >= 1.0:
        raise ValueError(f"IRUD success probability is 1 at n={n}, m={m}")
    return pulse_class_keyrate(n, m) / (1.0 - p_delta)


def attack_fractions(b_n: float, n: int, m: int) -> tuple[float, float]:
    """Split of one photon class into (usd, pns) for a blocked fraction b_n.

    Eve resends one successfully discriminated pulse for each
    P_delta / (1 - P_delta) she blocks, up to the whole class:

        u_n = min(P_delta/(1 - P_delta) * b_n, 1 - b_n)
        p_n = [(1 - P_delta - b_n) / (1 - P_delta)]_+

    The triple (b_n, u_n, p_n) always sums to one.
    """
    if not 0.0 <= b_n <= 1.0:
        raise ValueError(f"blocked fraction must lie in [0, 1], got {b_n}")
    p_delta = irud_success_probability(n, m)
    u_n = min(p_delta / (1.0 - p_delta) * b_n, 1.0 - b_n)
    p_n = max((1.0 - p_delta - b_n) / (1.0 - p_delta), 0.0)
    return u_n, p_n
