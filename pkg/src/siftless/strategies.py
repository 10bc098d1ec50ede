"""Global eavesdropping strategies and protocol-level keyrates.

Two regimes are modelled.  Without decoy states Alice and Bob only observe
the total yield Y = 1 - exp(-T*mu), so Eve may distribute a blocking
budget of 1 - Y over the photon-number classes however she likes; her
optimal ("budget") strategy blocks classes in order of decreasing marginal
keyrate.  With decoy states every photon-number yield Y_n = 1 - (1-T)**n
is pinned, Eve loses that freedom, and the keyrate is the compact sum

    K = sum_n [Y_n - P_delta(n, m)]_+  P_{n|mu}  K_n^marg.

The module also provides the critical transmission below which the
no-decoy keyrate vanishes, BB84 baselines, mean-photon-number
optimization, small-T asymptotics, single-photon QBER thresholds, and the
linear-system yield estimator used by decoy-state analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attacks import (
    PhotonClassAnalysis,
    attack_fractions,
    irud_success_probability,
    marginal_keyrate,
    pns_holevo,
    pulse_class_keyrate,
)
from .spectra import binary_entropy
from .states import mutual_information

__all__ = [
    "AttackAllocation",
    "KeyrateCurvePoint",
    "DecoyEstimate",
    "MuOptimum",
    "IllConditionedSystemError",
    "poisson_pmf",
    "poisson_cutoff",
    "observed_yield",
    "dsp_yield",
    "budget_strategy",
    "dsp_allocation",
    "dsp_keyrate",
    "bb84_keyrate",
    "critical_transmission",
    "critical_transmission_asymptotic",
    "optimize_mu",
    "asymptotic_no_dsp",
    "qber_keyrate",
    "critical_qber",
    "decoy_yield_estimation",
]

POISSON_TAIL = 1e-15
POISSON_CAP = 300
MU_BRACKET = (1e-4, 20.0)
CONDITION_LIMIT = 1e12


class IllConditionedSystemError(ValueError):
    """Raised when the decoy yield system is singular or nearly so."""


@dataclass(frozen=True)
class AttackAllocation:
    """Eve's full attack plan across photon classes and the resulting keyrate.

    ``classes[n]`` describes the n-photon class; the blocked fractions spend
    the yield deficit exactly: sum_n P_n * b_n = 1 - total_yield.
    """

    classes: list[PhotonClassAnalysis]
    total_yield: float
    budget_spent: float
    keyrate: float

    def fractions(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(blocked, usd, pns) arrays indexed by photon number."""
        b = np.array([c.blocked for c in self.classes])
        u = np.array([c.usd for c in self.classes])
        p = np.array([c.pns for c in self.classes])
        return b, u, p


@dataclass(frozen=True)
class KeyrateCurvePoint:
    """One sample of a keyrate curve, with both T and attenuation axes."""

    transmission: float
    attenuation_db: float
    mu: float
    keyrate: float
    keyrate_over_t: float

    @classmethod
    def make(cls, transmission: float, mu: float, keyrate: float) -> "KeyrateCurvePoint":
        att = -10.0 * math.log10(transmission) if transmission > 0 else math.inf
        over_t = keyrate / transmission if transmission > 0 else 0.0
        return cls(transmission, att, mu, keyrate, over_t)


@dataclass(frozen=True)
class DecoyEstimate:
    """Result of the decoy-state yield solve."""

    intensities: np.ndarray
    measured_yields: np.ndarray
    estimated_yields: np.ndarray
    residual: float
    condition: float
    clamped: bool


@dataclass(frozen=True)
class MuOptimum:
    """Outcome of a mean-photon-number optimization."""

    mu_opt: float
    keyrate: float
    all_zero: bool = False


def poisson_pmf(n: int, mu: float) -> float:
    """P(n|mu) = exp(-mu) mu**n / n!, evaluated in log space for large n."""
    if n < 0:
        return 0.0
    if mu < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mu}")
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1))


def poisson_cutoff(mu: float, tail: float = POISSON_TAIL, cap: int = POISSON_CAP) -> int:
    """Smallest n_max with Poisson tail mass above n_max at most ``tail``."""
    if mu == 0.0:
        return 0
    acc = 0.0
    for n in range(cap + 1):
        acc += poisson_pmf(n, mu)
        if 1.0 - acc <= tail:
            return n
    return cap


def observed_yield(transmission: float, mu: float) -> float:
    """Total click probability Y = 1 - exp(-T*mu) of the lossy channel."""
    return -math.expm1(-transmission * mu)


def dsp_yield(n: int, transmission: float) -> float:
    """Photon-number yield Y_n = 1 - (1-T)**n: each photon survives independently."""
    if n == 0:
        return 0.0
    if transmission >= 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-transmission))


def _poisson_table(mu: float) -> np.ndarray:
    n_max = poisson_cutoff(mu)
    return np.array([poisson_pmf(n, mu) for n in range(n_max + 1)])


def budget_strategy(m: int, mu: float, transmission: float) -> AttackAllocation:
    """Eve's optimal attack when only the total yield is observed.

    Her blocking budget is 1 - Y.  Vacuum pulses are force-blocked (they
    can never click), then classes are attacked in order of decreasing
    marginal keyrate, each until either the class is exhausted (its yield
    pinned down to P_delta by resent USD successes) or the budget runs
    out.  Below the critical transmission the budget covers every class
    and the leftover is spent blocking USD successes, so the observed
    yield is always reproduced exactly and the keyrate is zero.

    Greedy is optimal here: the objective is linear in the per-class PNS
    fractions with a single budget constraint (fractional knapsack).
    """
    probs = _poisson_table(mu)
    n_max = len(probs) - 1
    p_delta = np.array([irud_success_probability(n, m) for n in range(n_max + 1)])
    keyrates = np.array([0.0] + [pulse_class_keyrate(n, m) for n in range(1, n_max + 1)])
    margins = np.zeros(n_max + 1)
    margins[1:] = keyrates[1:] / (1.0 - p_delta[1:])

    blocked = np.zeros(n_max + 1)
    usd = np.zeros(n_max + 1)
    pns = np.zeros(n_max + 1)
    pns[1:] = 1.0

    total_yield = observed_yield(transmission, mu)
    blocked[0] = 1.0
    budget = math.exp(-transmission * mu) - probs[0] if n_max > 0 else 0.0

    # ties in the marginal keyrate are broken towards larger n
    order = sorted(range(1, n_max + 1), key=lambda n: (-margins[n], -n))
    for n in order:
        if budget <= 0.0:
            break
        cost = probs[n] * (1.0 - p_delta[n])
        if budget >= cost:
            attacked = 1.0
            budget -= cost
        else:
            attacked = budget / cost if cost > 0.0 else 0.0
            budget = 0.0
        blocked[n] = attacked * (1.0 - p_delta[n])
        usd[n] = attacked * p_delta[n]
        pns[n] = 1.0 - attacked
    # leftover budget (T below critical): block USD successes so the
    # produced yield still matches the observed one
    if budget > 0.0:
        for n in range(n_max, 0, -1):
            if budget <= 0.0:
                break
            move = min(usd[n] * probs[n], budget)
            if move > 0.0:
                usd[n] -= move / probs[n]
                blocked[n] += move / probs[n]
                budget -= move

    keyrate = float(np.sum(probs * pns * keyrates))
    classes = [
        PhotonClassAnalysis(
            n=n,
            m=m,
            p_poisson=float(probs[n]),
            irud_prob=float(p_delta[n]),
            holevo=pns_holevo(n, m) if n >= 1 else 0.0,
            keyrate_n=float(keyrates[n]),
            marginal=float(margins[n]),
            yield_n=float(1.0 - blocked[n]),
            blocked=float(blocked[n]),
            usd=float(usd[n]),
            pns=float(pns[n]),
        )
        for n in range(n_max + 1)
    ]
    return AttackAllocation(
        classes=classes,
        total_yield=total_yield,
        budget_spent=float(np.sum(probs * blocked)),
        keyrate=keyrate,
    )


def dsp_keyrate(m: int, mu: float, transmission: float) -> float:
    """Keyrate with decoy states: every Y_n = 1 - (1-T)**n is pinned.

    Evaluates sum_n [Y_n - P_delta]_+ P_{n|mu} K_n^marg, truncated where
    the Poisson tail drops below 1e-15 (the tail is pessimistically
    assigned zero keyrate).
    """
    total = 0.0
    probs = _poisson_table(mu)
    for n in range(1, len(probs)):
        p_delta = irud_success_probability(n, m)
        excess = dsp_yield(n, transmission) - p_delta
        if excess > 0.0:
            total += excess * probs[n] * pulse_class_keyrate(n, m) / (1.0 - p_delta)
    return total


def dsp_allocation(m: int, mu: float, transmission: float) -> AttackAllocation:
    """Per-class attack record in the decoy-state regime.

    Eve must reproduce each Y_n, so b_n = 1 - Y_n; within a class she still
    converts as many blocked pulses as possible into USD successes.
    """
    probs = _poisson_table(mu)
    n_max = len(probs) - 1
    classes = []
    keyrate = 0.0
    for n in range(n_max + 1):
        y_n = dsp_yield(n, transmission)
        b_n = 1.0 - y_n
        if n == 0:
            u_n, p_n = 0.0, 0.0
        else:
            u_n, p_n = attack_fractions(b_n, n, m)
        k_n = pulse_class_keyrate(n, m) if n >= 1 else 0.0
        keyrate += probs[n] * p_n * k_n
        classes.append(
            PhotonClassAnalysis(
                n=n,
                m=m,
                p_poisson=float(probs[n]),
                irud_prob=irud_success_probability(n, m),
                holevo=pns_holevo(n, m) if n >= 1 else 0.0,
                keyrate_n=k_n,
                marginal=marginal_keyrate(n, m) if n >= 1 else 0.0,
                yield_n=y_n,
                blocked=b_n,
                usd=u_n,
                pns=p_n,
            )
        )
    total_yield = float(np.sum(probs * np.array([c.yield_n for c in classes])))
    return AttackAllocation(
        classes=classes,
        total_yield=total_yield,
        budget_spent=float(np.sum(probs * np.array([c.blocked for c in classes]))),
        keyrate=float(keyrate),
    )


def bb84_keyrate(mu: float, transmission: float, dsp: bool = False) -> float:
    """BB84 baseline in bits per pulse.

    With decoy states only single photons contribute:
    K = mu * exp(-mu) * T / 2 (optimal at mu = 1).  Without decoy states,
    Eve blocks single photons and splits multiphoton pulses, so only
    detections beyond the multiphoton probability stay secret:
    K = [Y - P_multi]_+ / 2 with P_multi = 1 - exp(-mu)(1 + mu).  This
    vanishes at T ~ mu/2 and scales as T^2 once mu is optimized.
    """
    if dsp:
        return mu * math.exp(-mu) * transmission * 0.5
    p_multi = 1.0 - math.exp(-mu) * (1.0 + mu)
    surplus = observed_yield(transmission, mu) - p_multi
    return 0.5 * surplus if surplus > 0.0 else 0.0


def critical_transmission(m: int, mu: float) -> float:
    """Transmission T_c at which the no-decoy keyrate reaches zero.

    At T_c every transmitted click can be explained by a successful USD
    resend: 1 - exp(-T_c mu) = sum_n P_{n|mu} P_delta(n, m).
    """
    if mu <= 0:
        raise ValueError(f"mean photon number must be > 0, got {mu}")
    probs = _poisson_table(mu)
    resend = sum(probs[n] * irud_success_probability(n, m) for n in range(len(probs)))
    return -math.log1p(-resend) / mu


def critical_transmission_asymptotic(m: int, mu: float) -> float:
    """Small-mu approximation T_c ~ (m / (2 (m-1)!)) * (mu/2)**(m-2)."""
    if mu <= 0:
        raise ValueError(f"mean photon number must be > 0, got {mu}")
    return m / (2.0 * math.factorial(m - 1)) * (mu / 2.0) ** (m - 2)


_STRATEGIES = ("budget", "dsp", "bb84-dsp", "bb84")


def _keyrate_fn(strategy: str, m: int):
    if strategy == "budget":
        return lambda mu, t: budget_strategy(m, mu, t).keyrate
    if strategy == "dsp":
        return lambda mu, t: dsp_keyrate(m, mu, t)
    if strategy == "bb84-dsp":
        return lambda mu, t: bb84_keyrate(mu, t, dsp=True)
    if strategy == "bb84":
        return lambda mu, t: bb84_keyrate(mu, t, dsp=False)
    raise ValueError(f"unknown strategy {strategy!r}, expected one of {_STRATEGIES}")


def optimize_mu(strategy: str, m: int, transmission: float) -> MuOptimum:
    """Maximize the keyrate of ``strategy`` over mu in [1e-4, 20].

    Coarse 60-point log grid followed by golden-section refinement to a
    relative width of 1e-5 on mu.  If the keyrate vanishes on the whole
    grid the result carries ``all_zero=True`` with mu at the grid minimum.
    """
    if not 0.0 < transmission <= 1.0:
        raise ValueError(f"transmission must lie in (0, 1], got {transmission}")
    fn = _keyrate_fn(strategy, m)
    lo, hi = MU_BRACKET
    grid = np.logspace(math.log10(lo), math.log10(hi), 60)
    values = [fn(mu, transmission) for mu in grid]
    best = int(np.argmax(values))
    if values[best] <= 0.0:
        return MuOptimum(mu_opt=lo, keyrate=0.0, all_zero=True)

    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, len(grid) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = fn(c, transmission)
    fd = fn(d, transmission)
    while (b - a) > 1e-5 * 0.5 * (a + b):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c, transmission)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d, transmission)
    mu_opt = float(0.5 * (a + b))
    return MuOptimum(mu_opt=mu_opt, keyrate=float(fn(mu_opt, transmission)))


def asymptotic_no_dsp(m: int, transmission: float) -> MuOptimum:
    """Small-T asymptotics of the mu-optimized no-decoy keyrate.

    mu_opt ~ 2 (2 (m-2)!/m)^{1/(m-2)} T^{1/(m-2)}, and the optimum value of
    K' (T mu - P_delta(m-1, m) mu^{m-1}/(m-1)!) is

        K_opt ~ K' * (2 (m-2)/(m-1)) (2 (m-2)!/m)^{1/(m-2)} T^{1 + 1/(m-2)},

    where K' is the (m-1)-th largest of the marginal keyrates of the light
    classes n = 1..m-1 (the class Eve attacks last).  Documented validity:
    T below ~0.05.
    """
    margins = sorted((marginal_keyrate(n, m) for n in range(1, m)), reverse=True)
    k_prime = margins[m - 2]
    root = (2.0 * math.factorial(m - 2) / m) ** (1.0 / (m - 2))
    mu_opt = 2.0 * root * transmission ** (1.0 / (m - 2))
    keyrate = (
        k_prime
        * (2.0 * (m - 2) / (m - 1))
        * root
        * transmission ** (1.0 + 1.0 / (m - 2))
    )
    return MuOptimum(mu_opt=mu_opt, keyrate=keyrate)


def qber_keyrate(m: int, epsilon: float) -> float:
    """Single-photon keyrate at error rate epsilon: I(X:Y|m, eps) - h(eps)."""
    if not 0.0 <= epsilon < 0.5:
        raise ValueError(f"QBER must lie in [0, 1/2), got {epsilon}")
    return mutual_information(m, epsilon) - binary_entropy(epsilon)


def critical_qber(m: int) -> float:
    """Error rate at which the single-photon keyrate vanishes (bisection to 1e-6)."""
    lo, hi = 0.0, 0.5 - 1e-9
    if qber_keyrate(m, lo) <= 0.0:
        return 0.0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if qber_keyrate(m, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def decoy_yield_estimation(intensities, measured_yields) -> DecoyEstimate:
    """Solve the square decoy system sum_{n<=D} P(n|mu_d) Y_n = Y_{mu_d}.

    The unknown yields beyond n = D are pessimistically set to zero, which
    turns the yield relation at D+1 distinct intensities into a square
    linear system.  Solutions are clamped to [0, 1] (flagged when that
    bites); a 1-norm condition number above 1e12 raises
    IllConditionedSystemError.
    """
    mu_d = np.asarray(intensities, dtype=float)
    y_d = np.asarray(measured_yields, dtype=float)
    if mu_d.ndim != 1 or mu_d.shape != y_d.shape or mu_d.size == 0:
        raise ValueError("need matching, non-empty intensity and yield vectors")
    if np.any(mu_d < 0):
        raise ValueError("intensities must be >= 0")
    if np.any((y_d < 0) | (y_d > 1)):
        raise ValueError("yields must lie in [0, 1]")
    depth = mu_d.size - 1
    coeff = np.array([[poisson_pmf(n, mu) for n in range(depth + 1)] for mu in mu_d])
    condition = float(np.linalg.cond(coeff, 1))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise IllConditionedSystemError(
            f"decoy system is ill-conditioned (1-norm condition {condition:.3e}); "
            "intensities are likely duplicated or too close"
        )
    solution = np.linalg.solve(coeff, y_d)
    residual = float(np.max(np.abs(coeff @ solution - y_d)))
    clamped = bool(np.any((solution < 0.0) | (solution > 1.0)))
    estimated = np.clip(solution, 0.0, 1.0)
    return DecoyEstimate(
        intensities=mu_d,
        measured_yields=y_d,
        estimated_yields=estimated,
        residual=residual,
        condition=condition,
        clamped=clamped,
    )
