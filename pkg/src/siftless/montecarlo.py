"""Event-level Monte Carlo simulator of the physical protocol.

Each pulse draws Alice's state x uniformly and a Poisson photon number n.
Without an eavesdropper every photon survives the channel independently
with probability T; if at least one arrives, Bob's outcome is sampled from
the conditional distribution (several arriving photons collapse to a
single sampled outcome, the pessimistic single-random-photon rule).  With
an attack plan the pulse fate is drawn from the per-class fractions
(blocked, usd, pns): blocked pulses never click, USD and PNS pulses click
with the clean-channel outcome statistics.

Pulses are simulated in fixed-size batches, each driven by its own
counter-based Philox stream keyed by (seed, batch index), so a run is
reproducible bit for bit regardless of how batches are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .states import ProtocolParams, conditional_distribution
from .strategies import AttackAllocation

__all__ = ["SimConfig", "SessionStats", "simulate_session", "estimate_conditional_distribution"]

BATCH = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Inputs of one simulated session; the seed fully determines the run."""

    params: ProtocolParams
    n_pulses: int
    seed: int = 0
    epsilon: float = 0.0
    eve_plan: Optional[AttackAllocation] = None

    def __post_init__(self):
        if self.n_pulses < 1:
            raise ValueError(f"need at least one pulse, got {self.n_pulses}")


@dataclass
class SessionStats:
    """Tallies of one simulated session."""

    m: int
    n_pulses: int
    counts: np.ndarray            # m x m click tallies indexed (x, y)
    pulses_by_n: np.ndarray       # pulses sent per photon number
    clicks_by_n: np.ndarray       # clicks per photon number
    n_clicks: int
    estimated_mutual_info: float
    estimated_qber: float

    def empirical_yield(self) -> float:
        return self.n_clicks / self.n_pulses

    def yield_by_n(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pulses_by_n > 0, self.clicks_by_n / self.pulses_by_n, np.nan)


def _outcome_cdf(m: int, epsilon: float) -> np.ndarray:
    row = conditional_distribution(m, epsilon).row(0)
    cdf = np.cumsum(row)
    cdf[-1] = 1.0
    return cdf


def _plugin_mutual_info(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    joint = counts / total
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    return float(np.sum(joint[mask] * np.log2(joint[mask] / (px @ py)[mask])))


def simulate_session(config: SimConfig) -> SessionStats:
    """Run the session described by ``config`` and return its tallies.

    The reported QBER estimate is (m/2) * P(y = x), scaled so that it
    estimates the epsilon of the visibility error model; it is exactly
    zero under any errorless attack plan.
    """
    m = config.params.m
    mu = config.params.mu
    transmission = config.params.transmission
    cdf_noisy = _outcome_cdf(m, config.epsilon)
    cdf_clean = _outcome_cdf(m, 0.0)

    plan_b = None
    if config.eve_plan is not None:
        b, _, _ = config.eve_plan.fractions()
        plan_b = b

    n_cap = 8 + int(math.ceil(4.0 * (mu + 4.0 * math.sqrt(mu + 1.0))))
    counts = np.zeros((m, m), dtype=np.int64)
    pulses_by_n = np.zeros(n_cap + 1, dtype=np.int64)
    clicks_by_n = np.zeros(n_cap + 1, dtype=np.int64)

    done = 0
    batch_index = 0
    while done < config.n_pulses:
        size = min(BATCH, config.n_pulses - done)
        rng = np.random.Generator(np.random.Philox(key=[config.seed, batch_index]))
        x = rng.integers(0, m, size)
        n_photons = rng.poisson(mu, size)

        if config.eve_plan is None:
            survivors = rng.binomial(n_photons, transmission)
            u_y = rng.random(size)
            click = survivors >= 1
            cdf = cdf_noisy
        else:
            fate = rng.random(size)
            u_y = rng.random(size)
            idx = np.minimum(n_photons, len(plan_b) - 1)
            # photon numbers beyond the plan's truncation are treated as blocked
            beyond = n_photons >= len(plan_b)
            click = (fate >= plan_b[idx]) & ~beyond
            cdf = cdf_clean

        offset = np.minimum(np.searchsorted(cdf, u_y[click], side="right"), m - 1)
        y = (x[click] + offset) % m
        np.add.at(counts, (x[click], y), 1)
        n_clipped = np.minimum(n_photons, n_cap)
        np.add.at(pulses_by_n, n_clipped, 1)
        np.add.at(clicks_by_n, n_clipped[click], 1)

        done += size
        batch_index += 1

    n_clicks = int(counts.sum())
    qber = (m / 2.0) * float(np.trace(counts)) / n_clicks if n_clicks else 0.0
    return SessionStats(
        m=m,
        n_pulses=config.n_pulses,
        counts=counts,
        pulses_by_n=pulses_by_n,
        clicks_by_n=clicks_by_n,
        n_clicks=n_clicks,
        estimated_mutual_info=_plugin_mutual_info(counts),
        estimated_qber=qber,
    )


def estimate_conditional_distribution(stats: SessionStats):
    """Row-normalized click tallies with per-cell binomial standard errors.

    Returns (ConditionalDistribution, stderr) where stderr[x, y] is
    sqrt(p(1-p)/N_x).  Requires at least 100 * m**2 clicks.
    """
    m = stats.m
    if stats.n_clicks < 100 * m * m:
        raise ValueError(f"need at least {100 * m * m} clicks to estimate P(y|x), got {stats.n_clicks}")
    row_totals = stats.counts.sum(axis=1, keepdims=True).astype(float)
    table = stats.counts / row_totals
    stderr = np.sqrt(table * (1.0 - table) / row_totals)
    visibility = 1.0 - m * float(np.trace(stats.counts)) / stats.n_clicks
    from .states import ConditionalDistribution

    return ConditionalDistribution(m=m, visibility=visibility, table=table), stderr
